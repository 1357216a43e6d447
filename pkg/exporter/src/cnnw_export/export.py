"""Run one export: weight bundle, test images, reference activations.

The reference activations are computed here, by the same framework the
weights come from, so the consuming library can verify its forward pass
against them without any deep-learning runtime of its own.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np
import torch
from PIL import Image

from .errors import ExporterError
from .formats import write_cnnw, write_tnsr
from .networks import IMAGE_MEANS, IMAGE_SCALES, build_chain, cut_chain

TEST_IMAGE_SIDE = 64


@dataclass
class ExportManifest:
    network: str
    init: str
    taps: list
    layer_count: int
    layers: list
    cnnw_path: str
    cnnw_sha256: str
    references: list = field(default_factory=list)
    manifest_path: str = ""


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def make_test_images():
    """Three deterministic 64x64 RGB images as uint8 arrays (H, W, 3)."""
    side = TEST_IMAGE_SIDE
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64) / (side - 1)
    images = []

    rings = 0.5 + 0.5 * np.sin(18.0 * np.hypot(yy - 0.5, xx - 0.5) * 2 * np.pi)
    images.append(np.stack([rings, xx, yy], axis=-1))

    checker = ((np.floor(yy * 8) + np.floor(xx * 8)) % 2).astype(np.float64)
    grating = 0.5 + 0.5 * np.sin(2 * np.pi * 10 * (xx + yy) / 2)
    images.append(np.stack([checker, grating, 0.5 * checker + 0.5 * grating], axis=-1))

    rng = np.random.default_rng(424242)
    noise = rng.random((side, side, 3))
    for _ in range(2):
        noise = (
            noise
            + np.roll(noise, 1, axis=0)
            + np.roll(noise, -1, axis=0)
            + np.roll(noise, 1, axis=1)
            + np.roll(noise, -1, axis=1)
        ) / 5.0
    lo, hi = noise.min(), noise.max()
    images.append((noise - lo) / (hi - lo))

    return [np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8) for img in images]


def _reference_forward(prefix, taps, img_u8):
    """Torch activations at each tap for one (H, W, 3) uint8 image."""
    x = torch.from_numpy(img_u8).to(torch.float32).permute(2, 0, 1) / 255.0
    mean = torch.tensor(IMAGE_MEANS, dtype=torch.float32).view(3, 1, 1)
    scale = torch.tensor(IMAGE_SCALES, dtype=torch.float32).view(3, 1, 1)
    x = ((x - mean) / scale).unsqueeze(0)
    out = {}
    wanted = set(taps)
    with torch.no_grad():
        for entry in prefix:
            x = entry.module(x)
            if entry.name in wanted:
                out[entry.name] = x.squeeze(0).numpy().copy()
    return out


def export(network, taps, out_dir, init="pretrained") -> ExportManifest:
    """Write CNNW + manifest.json + PNG/TNSR reference pairs to out_dir."""
    taps = list(taps)
    prefix = cut_chain(build_chain(network, init), taps)
    os.makedirs(out_dir, exist_ok=True)

    cnnw_layers = []
    layer_rows = []
    for entry in prefix:
        if entry.kind == "conv":
            m = entry.module
            w = m.weight.detach().numpy()
            if m.bias is None:
                b = np.zeros(m.out_channels, dtype=np.float32)
            else:
                b = m.bias.detach().numpy()
            cnnw_layers.append(
                ("conv", entry.name, w, b, int(m.stride[0]), int(m.padding[0]))
            )
            layer_rows.append(
                {
                    "name": entry.name,
                    "kind": "conv",
                    "out_channels": int(m.out_channels),
                    "in_channels": int(m.in_channels),
                    "kernel": int(m.kernel_size[0]),
                    "stride": int(m.stride[0]),
                    "padding": int(m.padding[0]),
                }
            )
        else:
            cnnw_layers.append((entry.kind, entry.name))
            layer_rows.append({"name": entry.name, "kind": entry.kind})

    cnnw_name = f"{network}_{taps[-1]}.cnnw"
    cnnw_path = os.path.join(out_dir, cnnw_name)
    write_cnnw(cnnw_path, 3, IMAGE_MEANS, IMAGE_SCALES, cnnw_layers)

    references = []
    for idx, img_u8 in enumerate(make_test_images()):
        png_name = f"test{idx}.png"
        Image.fromarray(img_u8, mode="RGB").save(os.path.join(out_dir, png_name))
        activations = _reference_forward(prefix, taps, img_u8)
        for tap in taps:
            tnsr_name = f"ref_test{idx}_{tap}.tnsr"
            write_tnsr(os.path.join(out_dir, tnsr_name), activations[tap])
            references.append(
                {
                    "image": png_name,
                    "tap": tap,
                    "tnsr": tnsr_name,
                    "sha256": _sha256(os.path.join(out_dir, tnsr_name)),
                    "shape": list(activations[tap].shape),
                }
            )

    manifest = ExportManifest(
        network=network,
        init=init,
        taps=taps,
        layer_count=len(cnnw_layers),
        layers=layer_rows,
        cnnw_path=cnnw_name,
        cnnw_sha256=_sha256(cnnw_path),
        references=references,
    )
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(
            {
                "network": manifest.network,
                "init": manifest.init,
                "input_channels": 3,
                "channel_means": list(IMAGE_MEANS),
                "channel_scales": list(IMAGE_SCALES),
                "taps": manifest.taps,
                "layer_count": manifest.layer_count,
                "layers": manifest.layers,
                "cnnw": {"path": manifest.cnnw_path, "sha256": manifest.cnnw_sha256},
                "references": manifest.references,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    manifest.manifest_path = manifest_path
    if not manifest.references:
        raise ExporterError("export produced no reference activations")
    return manifest
