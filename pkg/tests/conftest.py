"""Shared fixtures: synthetic natural-looking images and weight files.

The CNNW bytes here are assembled by hand with struct so the tests
exercise the package's parser against an independent writer.
"""

import io
import struct

import numpy as np
import pytest

from csfp import Colorspace, PlanarImage, save_image


def synth_scene(seed=0, size=256):
    """A luma scene with texture, edges, and oriented gratings.

    Smoothed noise gives broadband texture, the gratings guarantee
    energy inside the 2-23 cpd band, and the step edge adds structure
    at all frequencies.
    """
    rng = np.random.default_rng(seed)
    base = rng.random((size, size))
    # cheap smoothing: average of shifted copies, run a few times
    for _ in range(3):
        base = (
            base
            + np.roll(base, 1, axis=0)
            + np.roll(base, -1, axis=0)
            + np.roll(base, 1, axis=1)
            + np.roll(base, -1, axis=1)
        ) / 5.0
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / size
    img = (
        0.45 * (base - base.min()) / (base.max() - base.min())
        + 0.18 * np.sin(2 * np.pi * (12 * xx + 5 * yy))
        + 0.12 * np.sin(2 * np.pi * 23 * yy)
        + 0.15 * (xx > 0.5)
        + 0.2
    )
    return np.clip(img, 0.0, 1.0)


def natural_crops(count, side=48, seed=0):
    """Seeded (side, side) luma crops cut from synthetic scenes."""
    crops = []
    scene_count = (count + 15) // 16
    rng = np.random.default_rng(seed + 1)
    scenes = [synth_scene(seed + i) for i in range(scene_count)]
    for i in range(count):
        scene = scenes[i % len(scenes)]
        limit = scene.shape[0] - side
        y0 = int(rng.integers(0, limit))
        x0 = int(rng.integers(0, limit))
        crops.append(scene[y0 : y0 + side, x0 : x0 + side].copy())
    return crops


def luma_image(arr):
    return PlanarImage(np.asarray(arr, dtype=np.float64)[None, :, :], Colorspace.LUMA)


def rgb_image(arr):
    return PlanarImage(np.asarray(arr, dtype=np.float64), Colorspace.RGB)


def write_cnnw(
    path,
    layers,
    input_channels=1,
    means=(0.5, 0.0, 0.0),
    scales=(0.25, 1.0, 1.0),
    version=1,
    magic=b"CNNW",
    truncate=None,
    trailing=b"",
):
    """Hand-rolled CNNW writer.

    layers: list of tuples; ("conv", name, weights, bias, stride, padding)
    with weights shaped (out,in,kh,kw), or ("relu", name) / ("pool", name).
    """
    buf = io.BytesIO()
    buf.write(magic)
    buf.write(struct.pack("<BBH", version, input_channels, len(layers)))
    buf.write(struct.pack("<3f", *means))
    buf.write(struct.pack("<3f", *scales))
    for layer in layers:
        kind = layer[0]
        name = layer[1].encode("utf-8")
        code = {"conv": 0, "relu": 1, "pool": 2}[kind]
        buf.write(struct.pack("<BB", code, len(name)) + name)
        if kind == "conv":
            w, b, stride, padding = layer[2], layer[3], layer[4], layer[5]
            out_ch, in_ch, kh, kw = w.shape
            buf.write(struct.pack("<HHBBBB", out_ch, in_ch, kh, kw, stride, padding))
            buf.write(np.ascontiguousarray(w, dtype="<f4").tobytes())
            buf.write(np.ascontiguousarray(b, dtype="<f4").tobytes())
    blob = buf.getvalue() + trailing
    if truncate is not None:
        blob = blob[:truncate]
    with open(path, "wb") as fh:
        fh.write(blob)
    return path


def random_conv_layers(seed=3, input_channels=1):
    """conv-relu-pool-conv-relu chain with small random weights."""
    rng = np.random.default_rng(seed)
    w1 = rng.standard_normal((8, input_channels, 3, 3)) * 0.25
    b1 = rng.standard_normal(8) * 0.05
    w2 = rng.standard_normal((12, 8, 3, 3)) * 0.2
    b2 = rng.standard_normal(12) * 0.05
    return [
        ("conv", "conv1", w1, b1, 1, 1),
        ("relu", "relu1"),
        ("pool", "pool1"),
        ("conv", "conv2", w2, b2, 1, 1),
        ("relu", "relu2"),
    ]


@pytest.fixture(scope="session")
def bundle_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("weights") / "small.cnnw"
    write_cnnw(path, random_conv_layers())
    return path


@pytest.fixture(scope="session")
def scene_png(tmp_path_factory):
    path = tmp_path_factory.mktemp("scenes") / "scene.png"
    save_image(luma_image(synth_scene(5, 96)), path)
    return path
