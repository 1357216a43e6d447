"""Command-line interface.

Subcommands: map, loss, corpus, oqa, tradeoff, layers.  Exit codes:
0 success, 2 input/config error, 3 degenerate attention map without
--fallback-uniform, 4 empty corpus.  All outputs are deterministic
given flags and seeds; --jobs (or CSFP_JOBS) only changes scheduling,
never results or ordering.
"""

import argparse
import math
import os
import sys

from . import csf_map, distort, losses, metrics, oqa
from .errors import CsfpError, DegenerateInput, EmptyCorpus, IdenticalImages, TooSmall
from .features import list_layers, load_weights
from .tensor_core import Colorspace, PlanarImage, load_image, save_image, write_tnsr

LOSS_HEADER = (
    "image_id,layer,alpha,kind,l2,l_p,l_p_att,l_cx,l_cx_att,combined,"
    "fallback_flag,psnr,ssim"
)


def _add_geometry_flags(p):
    p.add_argument("--s-low", type=float, default=2.0, help="band low edge, cycles/degree (default 2)")
    p.add_argument("--s-high", type=float, default=23.0, help="band high edge, cycles/degree (default 23)")
    p.add_argument("--dot-pitch", type=float, default=0.25, help="display dot pitch in mm (default 0.25)")
    p.add_argument("--distance", type=float, default=550.0, help="viewing distance in mm (default 550)")
    p.add_argument("--no-fold", action="store_true", help="use unfolded one-sided frequency indices")


def _add_loss_flags(p):
    p.add_argument("--weights", required=True, help="CNNW weight bundle")
    p.add_argument("--layer", required=True, help="tap layer name")
    p.add_argument("--alpha", type=float, default=0.5, help="pixel/feature blend in [0,1] (default 0.5)")
    p.add_argument("--kind", choices=[k.value for k in losses.LossKind], default="P_ATT", help="which loss the combined score blends (default P_ATT)")
    p.add_argument("--cx-h", type=float, default=0.5, help="contextual softmax bandwidth (default 0.5)")
    p.add_argument("--cx-epsilon", type=float, default=1e-5, help="contextual distance normalizer (default 1e-5)")
    p.add_argument("--cx-distance", choices=[d.value for d in losses.DistanceKind], default="COSINE", help="pairwise feature distance (default COSINE)")


def _band(args):
    return csf_map.CsfBand(args.s_low, args.s_high)


def _geom(args):
    return csf_map.ViewingGeometry(args.dot_pitch, args.distance)


def _cfg(args):
    return losses.LossConfig(
        alpha=args.alpha,
        cx_bandwidth_h=args.cx_h,
        cx_epsilon=args.cx_epsilon,
        distance_kind=losses.DistanceKind(args.cx_distance),
    )


def _resolve_jobs(args):
    if getattr(args, "jobs", None):
        return max(1, args.jobs)
    env = os.environ.get("CSFP_JOBS", "").strip()
    if env.isdigit() and int(env) > 0:
        return int(env)
    return 1


def cmd_map(args):
    img = load_image(args.image)
    try:
        amap = csf_map.generate_map(img, _band(args), _geom(args), fold=not args.no_fold)
    except DegenerateInput:
        if not args.fallback_uniform:
            raise
        amap = csf_map.uniform_map(img.height, img.width)
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.image))[0]
    png_path = os.path.join(args.out_dir, f"{stem}_map.png")
    tnsr_path = os.path.join(args.out_dir, f"{stem}_map.tnsr")
    save_image(PlanarImage(amap.map[None, :, :], Colorspace.LUMA), png_path)
    write_tnsr(tnsr_path, amap.map)
    m = amap.map
    print(f"min={float(m.min())!r} max={float(m.max())!r} mean={float(m.mean())!r}")
    print(f"wrote {png_path}")
    print(f"wrote {tnsr_path}")
    return 0


def cmd_loss(args):
    ref = load_image(args.ref)
    dist_img = load_image(args.dist)
    bundle = load_weights(args.weights)
    report = losses.combined_loss(
        ref,
        dist_img,
        bundle,
        args.layer,
        _cfg(args),
        losses.LossKind(args.kind),
        _band(args),
        _geom(args),
        fold=not args.no_fold,
        force_uniform_map=args.uniform_map,
    )
    try:
        psnr_v = metrics.psnr(ref, dist_img)
    except IdenticalImages:
        psnr_v = math.inf
    try:
        ssim_v = metrics.ssim(ref, dist_img)
    except TooSmall:
        ssim_v = math.nan
    image_id = os.path.splitext(os.path.basename(args.dist))[0]
    print(LOSS_HEADER)
    print(
        f"{image_id},{report.layer_name},{args.alpha!r},{args.kind},"
        f"{report.l2!r},{report.l_p!r},{report.l_p_att!r},{report.l_cx!r},"
        f"{report.l_cx_att!r},{report.combined!r},{int(report.fallback)},"
        f"{psnr_v!r},{ssim_v!r}"
    )
    return 0


def cmd_corpus(args):
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    sev = [float(s) for s in args.severities.split(",") if s.strip()]
    specs = []
    for kname in kinds:
        try:
            kind = distort.DistortionKind(kname)
        except ValueError:
            raise CsfpError(f"unknown distortion kind {kname!r}")
        for s in sev:
            specs.append(distort.DistortionSpec(kind, s, args.seed))
    rows = distort.make_corpus(args.src_dir, specs, args.out_dir)
    print(f"wrote {len(rows)} rows to {os.path.join(args.out_dir, 'manifest.csv')}")
    return 0


def cmd_oqa(args):
    _, _, summary = oqa.run_oqa(
        args.manifest,
        args.weights,
        args.layer,
        losses.LossKind(args.kind),
        _cfg(args),
        subjective_csv=args.subjective,
        out_dir=args.out_dir,
        band=_band(args),
        geom=_geom(args),
        fold=not args.no_fold,
        jobs=_resolve_jobs(args),
    )
    print(
        f"metric={summary['metric']} layer={summary['layer']} n={summary['n']} "
        f"rmse={summary['rmse']!r} lcc={summary['lcc']!r} srocc={summary['srocc']!r}"
    )
    return 0


def _svg_chart(path, xs, series, xlabel, ylabel):
    """Write a self-contained SVG line chart (one polyline per series)."""
    width, height = 640, 400
    ml, mr, mt, mb = 60, 150, 20, 45
    pw, ph = width - ml - mr, height - mt - mb
    all_y = [v for ys in series.values() for v in ys]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(all_y), max(all_y)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(v):
        return ml + pw * (v - x0) / (x1 - x0)

    def sy(v):
        return mt + ph * (1.0 - (v - y0) / (y1 - y0))

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>',
        f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 14 {mt + ph / 2:.1f})">{ylabel}</text>',
    ]
    for tick in (x0, (x0 + x1) / 2, x1):
        parts.append(
            f'<text x="{sx(tick):.1f}" y="{mt + ph + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tick:.3g}</text>'
        )
    for tick in (y0, (y0 + y1) / 2, y1):
        parts.append(
            f'<text x="{ml - 6}" y="{sy(tick) + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick:.3g}</text>'
        )
    for i, (name, ys) in enumerate(series.items()):
        color = colors[i % len(colors)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
        )
        ly = mt + 16 + 18 * i
        parts.append(
            f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 30}" y2="{ly}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{ml + pw + 35}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="12">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def cmd_tradeoff(args):
    ref = load_image(args.ref)
    dist_img = load_image(args.dist)
    bundle = load_weights(args.weights)
    alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
    if not alphas:
        raise CsfpError("--alphas must list at least one value")
    try:
        psnr_v = metrics.psnr(ref, dist_img)
    except IdenticalImages:
        psnr_v = math.inf
    try:
        ssim_v = metrics.ssim(ref, dist_img)
    except TooSmall:
        ssim_v = math.nan
    rows = []
    for alpha in alphas:
        cfg = losses.LossConfig(
            alpha=alpha,
            cx_bandwidth_h=args.cx_h,
            cx_epsilon=args.cx_epsilon,
            distance_kind=losses.DistanceKind(args.cx_distance),
        )
        rep = losses.combined_loss(
            ref, dist_img, bundle, args.layer, cfg, losses.LossKind.P,
            _band(args), _geom(args), fold=not args.no_fold,
        )
        # per-alpha blends of the pixel term with each feature loss
        rows.append(
            (
                alpha,
                ssim_v,
                psnr_v,
                alpha * rep.l2 + (1 - alpha) * rep.l_p,
                alpha * rep.l2 + (1 - alpha) * rep.l_p_att,
                alpha * rep.l2 + (1 - alpha) * rep.l_cx,
                alpha * rep.l2 + (1 - alpha) * rep.l_cx_att,
            )
        )
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        fh.write("alpha,ssim,psnr,l_p,l_p_att,l_cx,l_cx_att\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.svg:
        series = {
            "l_p": [r[3] for r in rows],
            "l_p_att": [r[4] for r in rows],
            "l_cx": [r[5] for r in rows],
            "l_cx_att": [r[6] for r in rows],
        }
        _svg_chart(args.svg, [r[0] for r in rows], series, "alpha", "combined loss")
        print(f"wrote {args.svg}")
    return 0


def cmd_layers(args):
    bundle = load_weights(args.weights)
    print("name,kind,channels")
    for name, kind, channels in list_layers(bundle):
        print(f"{name},{kind.name},{channels}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="csfp",
        description="Contrast-sensitivity-weighted perceptual image quality toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="generate the attention map of an image")
    p.add_argument("image", help="input PNG")
    p.add_argument("--out-dir", default=".", help="output directory (default .)")
    p.add_argument("--fallback-uniform", action="store_true", help="emit a uniform map instead of failing on flat inputs")
    _add_geometry_flags(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("loss", help="evaluate losses for a reference/distorted pair")
    p.add_argument("ref", help="reference PNG")
    p.add_argument("dist", help="distorted PNG")
    _add_loss_flags(p)
    p.add_argument("--uniform-map", action="store_true", help="use the uniform map instead of the generated one")
    _add_geometry_flags(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("corpus", help="synthesize a distorted corpus with a manifest")
    p.add_argument("--src-dir", required=True, help="directory of source PNGs")
    p.add_argument("--out-dir", required=True, help="corpus output directory")
    p.add_argument("--kinds", default="GAUSS_BLUR", help="comma list of GAUSS_BLUR,AWGN,BLUR_PLUS_NOISE,DOWN_UP")
    p.add_argument("--severities", default="0.5,1,2,4", help="comma list of severities (default 0.5,1,2,4)")
    p.add_argument("--seed", type=int, default=0, help="base seed for noise (default 0)")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("oqa", help="fit and score a corpus against subjective values")
    p.add_argument("--manifest", required=True, help="corpus manifest CSV")
    _add_loss_flags(p)
    p.add_argument("--subjective", default=None, help="optional CSV of image_id,dmos (severity proxy otherwise)")
    p.add_argument("--out-dir", default=".", help="where oqa_scores.csv / oqa_summary.csv go")
    p.add_argument("--jobs", type=int, default=None, help="parallel workers (default CSFP_JOBS or 1)")
    _add_geometry_flags(p)
    p.set_defaults(func=cmd_oqa)

    p = sub.add_parser("tradeoff", help="sweep alpha and tabulate losses vs distortion metrics")
    p.add_argument("--ref", required=True)
    p.add_argument("--dist", required=True)
    p.add_argument("--weights", required=True, help="CNNW weight bundle")
    p.add_argument("--layer", required=True, help="tap layer name")
    p.add_argument("--alphas", default="0.0,0.25,0.5,0.75,1.0", help="comma list of alpha values")
    p.add_argument("--cx-h", type=float, default=0.5, help="contextual softmax bandwidth (default 0.5)")
    p.add_argument("--cx-epsilon", type=float, default=1e-5, help="contextual distance normalizer (default 1e-5)")
    p.add_argument("--cx-distance", choices=[d.value for d in losses.DistanceKind], default="COSINE")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--svg", default=None, help="optional SVG chart path")
    _add_geometry_flags(p)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("layers", help="list the layers of a weight bundle")
    p.add_argument("--weights", required=True, help="CNNW weight bundle")
    p.set_defaults(func=cmd_layers)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EmptyCorpus as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except CsfpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
