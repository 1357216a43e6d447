"""Contrast-sensitivity attention maps.

Pipeline: luma -> forward 2D DFT (1/(MN) normalized) -> keep the bins
whose spatial frequency falls inside a cycles/degree band -> unnormalized
inverse DFT -> magnitude -> divide by the maximum so the largest element
is exactly 1.

Frequency indices are folded about Nyquist by default so conjugate bins
get the same cycles/degree value and the band-limited reconstruction
stays real; pass fold=False for the raw one-sided index formula.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, IndexOutOfRange, InvalidDims
from .tensor_core import PlanarImage, luma_plane, resize_bilinear

# threshold (relative to the luma peak) below which the band-limited
# reconstruction counts as identically zero
_DEGENERATE_REL_TOL = 1e-10


@dataclass(frozen=True)
class ViewingGeometry:
    """Display dot pitch and viewing distance, both in millimeters."""

    dot_pitch_mm: float = 0.25
    distance_mm: float = 550.0

    def __post_init__(self):
        if not (self.dot_pitch_mm > 0.0) or not (self.distance_mm > 0.0):
            raise InvalidDims("dot pitch and viewing distance must be positive")


@dataclass(frozen=True)
class CsfBand:
    """Passband in cycles per degree."""

    s_low_cpd: float = 2.0
    s_high_cpd: float = 23.0

    def __post_init__(self):
        if not (0.0 <= self.s_low_cpd < self.s_high_cpd):
            raise InvalidDims("band must satisfy 0 <= s_low < s_high")


@dataclass(frozen=True)
class Spectrum:
    """Real and imaginary parts of a 2D DFT, each (M,N)."""

    real: np.ndarray
    imag: np.ndarray

    def __post_init__(self):
        if self.real.shape != self.imag.shape or self.real.ndim != 2:
            raise InvalidDims("spectrum real/imag parts must share 2-D dims")

    @property
    def dims(self):
        return self.real.shape

    def to_complex(self) -> np.ndarray:
        return self.real + 1j * self.imag


@dataclass(frozen=True)
class AttentionMap:
    """Spatial weight map in [0,1] whose largest element is exactly 1."""

    map: np.ndarray

    def __post_init__(self):
        m = self.map
        if m.ndim != 2 or min(m.shape) < 1:
            raise InvalidDims(f"attention map must be 2-D, got shape {m.shape}")
        if m.min() < 0.0 or m.max() > 1.0 or m.max() != 1.0:
            raise InvalidDims("attention map must lie in [0,1] with max exactly 1")


DEFAULT_GEOMETRY = ViewingGeometry()
DEFAULT_BAND = CsfBand()


def dft2(img_y: np.ndarray) -> Spectrum:
    """Forward 2D DFT with 1/(MN) normalization."""
    img_y = np.asarray(img_y, dtype=np.float64)
    if img_y.ndim != 2 or min(img_y.shape) < 1:
        raise InvalidDims(f"expected non-empty 2-D input, got shape {img_y.shape}")
    m, n = img_y.shape
    spec = np.fft.fft2(img_y) / (m * n)
    return Spectrum(spec.real.copy(), spec.imag.copy())


def idft2(spec: Spectrum) -> np.ndarray:
    """Unnormalized inverse 2D DFT (pairs with dft2's 1/(MN)); real part."""
    m, n = spec.dims
    out = np.fft.ifft2(spec.to_complex()) * (m * n)
    return out.real.copy()


def _angular_scale(distance_mm: float) -> float:
    # converts cycles/mm on the display into cycles/degree of visual angle
    return math.pi / (180.0 * math.asin(1.0 / math.sqrt(1.0 + distance_mm**2)))


def _folded_index(k: np.ndarray, m: int, fold: bool) -> np.ndarray:
    return np.minimum(k, m - k) if fold else k


def cycles_per_degree(u, v, m, n, geom: ViewingGeometry = DEFAULT_GEOMETRY, fold=True):
    """Spatial frequency (cycles/degree) of 1-based DFT bin (u, v)."""
    if not (1 <= u <= m) or not (1 <= v <= n):
        raise IndexOutOfRange(f"bin ({u},{v}) outside 1..{m} x 1..{n}")
    ku = _folded_index(np.asarray(u - 1, dtype=np.float64), m, fold)
    kv = _folded_index(np.asarray(v - 1, dtype=np.float64), n, fold)
    fu = ku / (geom.dot_pitch_mm * m)
    fv = kv / (geom.dot_pitch_mm * n)
    return float(_angular_scale(geom.distance_mm) * np.hypot(fu, fv))


def frequency_grid(m, n, geom: ViewingGeometry = DEFAULT_GEOMETRY, fold=True):
    """(M,N) grid of cycles/degree values for every DFT bin."""
    ku = _folded_index(np.arange(m, dtype=np.float64), m, fold)
    kv = _folded_index(np.arange(n, dtype=np.float64), n, fold)
    fu = ku / (geom.dot_pitch_mm * m)
    fv = kv / (geom.dot_pitch_mm * n)
    return _angular_scale(geom.distance_mm) * np.hypot(fu[:, None], fv[None, :])


def bandpass(
    spec: Spectrum,
    band: CsfBand = DEFAULT_BAND,
    geom: ViewingGeometry = DEFAULT_GEOMETRY,
    fold=True,
) -> Spectrum:
    """Zero every bin whose frequency falls outside [s_low, s_high]."""
    m, n = spec.dims
    s = frequency_grid(m, n, geom, fold)
    keep = (s >= band.s_low_cpd) & (s <= band.s_high_cpd)
    return Spectrum(np.where(keep, spec.real, 0.0), np.where(keep, spec.imag, 0.0))


def generate_map(
    gt: PlanarImage,
    band: CsfBand = DEFAULT_BAND,
    geom: ViewingGeometry = DEFAULT_GEOMETRY,
    fold=True,
) -> AttentionMap:
    """Attention map of a ground-truth image.

    Raises DegenerateInput when the band-limited reconstruction is
    identically zero (e.g. a constant image, whose energy sits entirely
    at DC); callers decide the fallback.
    """
    y = luma_plane(gt)
    t = idft2(bandpass(dft2(y), band, geom, fold))
    mag = np.abs(t)
    peak = mag.max()
    if peak <= _DEGENERATE_REL_TOL * float(y.max()):
        raise DegenerateInput(
            "band-limited reconstruction is identically zero; "
            "no structure inside the frequency band"
        )
    return AttentionMap(mag / peak)


def uniform_map(h: int, w: int) -> AttentionMap:
    """The all-ones fallback map (reduces attentive losses to plain ones)."""
    if h < 1 or w < 1:
        raise InvalidDims(f"map dims must be >= 1, got {h}x{w}")
    return AttentionMap(np.ones((h, w), dtype=np.float64))


def resize_map(amap: AttentionMap, h: int, w: int) -> AttentionMap:
    """Bilinear resize, then renormalize so the max is exactly 1 again.

    A resize that lands every sample on zero-valued support carries no
    signal; the uniform map is returned in that case.
    """
    out = resize_bilinear(amap.map, h, w)
    peak = out.max()
    if peak <= 0.0:
        return uniform_map(h, w)
    return AttentionMap(out / peak)
