"""Distortion synthesis and corpus generation.

Noise comes from a SplitMix64 stream (documented in the README) so that
corpora are bit-reproducible across runs and implementations.  Corpus
rows derive a per-image seed by folding the source image id into the
requested seed, and the manifest records the derived seed so every row
can be regenerated in isolation.
"""

import csv
import enum
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyCorpus, InvalidSpec, IoError
from .kernels import gaussian_blur2d
from .tensor_core import PlanarImage, load_image, resize_bilinear, save_image

_MASK64 = (1 << 64) - 1


class DistortionKind(enum.Enum):
    GAUSS_BLUR = "GAUSS_BLUR"
    AWGN = "AWGN"
    BLUR_PLUS_NOISE = "BLUR_PLUS_NOISE"
    DOWN_UP = "DOWN_UP"


# noise std applied after the blur in BLUR_PLUS_NOISE, per unit severity
BLUR_NOISE_STD_PER_SEVERITY = 0.01


@dataclass(frozen=True)
class DistortionSpec:
    kind: DistortionKind
    severity: float
    seed: int = 0

    def __post_init__(self):
        if not (self.severity > 0.0):
            raise InvalidSpec(f"severity must be positive, got {self.severity}")
        if self.kind is DistortionKind.DOWN_UP:
            if self.severity not in (2.0, 3.0, 4.0):
                raise InvalidSpec(
                    f"DOWN_UP scale must be 2, 3, or 4, got {self.severity}"
                )
        if not (0 <= self.seed <= _MASK64):
            raise InvalidSpec("seed must fit in 64 bits")


class SplitMix64:
    """SplitMix64 stream; gamma 0x9E3779B97F4A7C15."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        # top 53 bits, shifted into (0,1] so log() below is always finite
        return ((self.next_u64() >> 11) + 1) * (2.0**-53)


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def gaussian_field(shape, rng: SplitMix64) -> np.ndarray:
    """Standard-normal samples in row-major order via Box-Muller pairs."""
    count = int(np.prod(shape))
    out = np.empty(count, dtype=np.float64)
    for i in range(0, count, 2):
        u1 = rng.next_unit()
        u2 = rng.next_unit()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        out[i] = r * math.cos(theta)
        if i + 1 < count:
            out[i + 1] = r * math.sin(theta)
    return out.reshape(shape)


def _blur(data: np.ndarray, sigma: float) -> np.ndarray:
    out = np.empty_like(data)
    for c in range(data.shape[0]):
        out[c] = gaussian_blur2d(data[c], sigma)
    return np.clip(out, 0.0, 1.0)


def _add_noise(data: np.ndarray, std: float, seed: int) -> np.ndarray:
    noise = gaussian_field(data.shape, SplitMix64(seed))
    return np.clip(data + std * noise, 0.0, 1.0)


def _down_up(data: np.ndarray, scale: int) -> np.ndarray:
    c, h, w = data.shape
    h2, w2 = h // scale, w // scale
    if h2 < 1 or w2 < 1:
        raise InvalidSpec(f"image {h}x{w} too small for scale {scale}")
    out = np.empty_like(data)
    for ch in range(c):
        # box prefilter: each low-res sample is the mean of its s x s block
        block = data[ch, : h2 * scale, : w2 * scale]
        small = block.reshape(h2, scale, w2, scale).mean(axis=(1, 3))
        out[ch] = resize_bilinear(small, h, w)
    return np.clip(out, 0.0, 1.0)


def apply(img: PlanarImage, spec: DistortionSpec) -> PlanarImage:
    """Produce the distorted copy of an image described by the spec."""
    data = img.data
    if spec.kind is DistortionKind.GAUSS_BLUR:
        data = _blur(data, spec.severity)
    elif spec.kind is DistortionKind.AWGN:
        data = _add_noise(data, spec.severity, spec.seed)
    elif spec.kind is DistortionKind.BLUR_PLUS_NOISE:
        data = _blur(data, spec.severity)
        data = _add_noise(
            data, BLUR_NOISE_STD_PER_SEVERITY * spec.severity, spec.seed
        )
    else:
        data = _down_up(data, int(spec.severity))
    return PlanarImage(data, img.colorspace)


def derive_seed(base_seed: int, image_id: str) -> int:
    """Per-image noise seed: the id hash folded into the corpus seed."""
    return SplitMix64(base_seed ^ fnv1a64(image_id)).next_u64()


def make_corpus(src_dir, specs, out_dir):
    """Distort every PNG in src_dir by every spec; write images + manifest.

    Returns the manifest rows.  Paths in the manifest are relative to
    out_dir.  Rows are ordered by sorted source name, then spec order.
    """
    src_dir = os.fspath(src_dir)
    out_dir = os.fspath(out_dir)
    try:
        names = sorted(
            n for n in os.listdir(src_dir) if n.lower().endswith(".png")
        )
    except OSError as exc:
        raise IoError(f"cannot list {src_dir}: {exc}") from exc
    if not names:
        raise EmptyCorpus(f"no PNG files in {src_dir}")
    if not specs:
        raise EmptyCorpus("no distortion specs given")
    img_dir = os.path.join(out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)
    rows = []
    for name in names:
        stem = os.path.splitext(name)[0]
        src_path = os.path.join(src_dir, name)
        img = load_image(src_path)
        for idx, spec in enumerate(specs):
            image_id = f"{stem}__{spec.kind.value.lower()}__{idx:03d}"
            seed = derive_seed(spec.seed, image_id)
            dist = apply(img, replace(spec, seed=seed))
            dist_rel = os.path.join("images", image_id + ".png")
            save_image(dist, os.path.join(out_dir, dist_rel))
            rows.append(
                {
                    "image_id": image_id,
                    "ref_path": os.path.relpath(src_path, out_dir),
                    "dist_path": dist_rel,
                    "kind": spec.kind.value,
                    "severity": repr(float(spec.severity)),
                    "seed": str(seed),
                }
            )
    manifest_path = os.path.join(out_dir, "manifest.csv")
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["image_id", "ref_path", "dist_path", "kind", "severity", "seed"],
        )
        writer.writeheader()
        writer.writerows(rows)
    return rows


def read_manifest(path):
    """Manifest rows as dicts; severity parsed back to float."""
    try:
        with open(os.fspath(path), newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyCorpus(f"manifest {path} has no rows")
    for row in rows:
        row["severity"] = float(row["severity"])
        row["seed"] = int(row["seed"])
    return rows
