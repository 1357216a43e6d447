import argparse
import sys

from .errors import ExporterError
from .export import export
from .networks import KNOWN_NETWORKS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cnnw-export",
        description="Export a plain conv/relu/pool chain to a CNNW bundle",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="write CNNW, manifest.json, and reference TNSR files")
    p.add_argument("--network", required=True, help=f"one of: {', '.join(KNOWN_NETWORKS)}")
    p.add_argument("--taps", required=True, help="comma-separated tap layer names, e.g. relu1_2,relu2_2")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--init",
        choices=("pretrained", "random"),
        default="pretrained",
        help="weight source; random gives a seeded untrained copy (default pretrained)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    taps = [t.strip() for t in args.taps.split(",") if t.strip()]
    try:
        manifest = export(args.network, taps, args.out, init=args.init)
    except ExporterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"exported {manifest.network} ({manifest.init}) with "
        f"{manifest.layer_count} layers to {args.out}"
    )
    print(f"bundle {manifest.cnnw_path} sha256={manifest.cnnw_sha256[:16]}...")
    print(f"{len(manifest.references)} reference activations")
    return 0


if __name__ == "__main__":
    sys.exit(main())
