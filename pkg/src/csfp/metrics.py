"""Distortion-axis metrics: PSNR and SSIM on the luma plane."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, IdenticalImages, TooSmall
from .kernels import correlate1d_valid
from .tensor_core import PlanarImage, luma_plane


@dataclass(frozen=True)
class SsimConfig:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.k1 <= 0.0 or self.k2 <= 0.0:
            raise ValueError("k1 and k2 must be positive")
        if self.window_size < 1 or self.sigma <= 0.0:
            raise ValueError("window must be non-empty with positive sigma")


def _check_dims(a: PlanarImage, b: PlanarImage):
    if a.data.shape[1:] != b.data.shape[1:]:
        raise DimMismatch(f"image dims differ: {a.data.shape} vs {b.data.shape}")


def psnr(a: PlanarImage, b: PlanarImage) -> float:
    """Peak signal-to-noise ratio in dB over [0,1] luma."""
    _check_dims(a, b)
    diff = luma_plane(a) - luma_plane(b)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        raise IdenticalImages("images are identical; PSNR is infinite")
    return 10.0 * math.log10(1.0 / mse)


def _window_kernel(cfg: SsimConfig) -> np.ndarray:
    half = (cfg.window_size - 1) / 2.0
    xs = np.arange(cfg.window_size, dtype=np.float64) - half
    k = np.exp(-0.5 * (xs / cfg.sigma) ** 2)
    return k / k.sum()


def _filter_valid(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    tmp = correlate1d_valid(np.ascontiguousarray(img), k)
    return correlate1d_valid(np.ascontiguousarray(tmp.T), k).T


def ssim(a: PlanarImage, b: PlanarImage, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean structural similarity over valid Gaussian windows, on luma."""
    _check_dims(a, b)
    ya = luma_plane(a)
    yb = luma_plane(b)
    if min(ya.shape) < cfg.window_size:
        raise TooSmall(
            f"image {ya.shape} smaller than the {cfg.window_size}-tap window"
        )
    k = _window_kernel(cfg)
    mu_a = _filter_valid(ya, k)
    mu_b = _filter_valid(yb, k)
    var_a = _filter_valid(ya * ya, k) - mu_a * mu_a
    var_b = _filter_valid(yb * yb, k) - mu_b * mu_b
    cov = _filter_valid(ya * yb, k) - mu_a * mu_b
    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))
