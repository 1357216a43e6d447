"""Image containers, PNG I/O, luma conversion, and the TNSR tensor file.

Tensors are plain float64 numpy arrays, row-major, channel-outermost.
Images live in [0,1].  Only PNG is supported: 8- or 16-bit, grayscale or
RGB, no palette, no alpha.
"""

import enum
import os
import struct
from dataclasses import dataclass

import cv2
import numpy as np

from .errors import FormatError, InvalidDims, IoError
from .kernels import resize_bilinear2d

_PNG_SIG = b"\x89PNG\r\n\x1a\n"

# PNG color types we accept: 0 = grayscale, 2 = truecolor
_COLOR_GRAY = 0
_COLOR_RGB = 2


class Colorspace(enum.Enum):
    RGB = "RGB"
    LUMA = "LUMA"


@dataclass(frozen=True)
class PlanarImage:
    """A (C,H,W) float64 image with C in {1,3}, values in [0,1]."""

    data: np.ndarray
    colorspace: Colorspace

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] not in (1, 3):
            raise InvalidDims(f"expected (C,H,W) with C in {{1,3}}, got {arr.shape}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise InvalidDims(f"empty image: {arr.shape}")
        if self.colorspace is Colorspace.LUMA and arr.shape[0] != 1:
            raise InvalidDims("LUMA image must have a single channel")
        if self.colorspace is Colorspace.RGB and arr.shape[0] != 3:
            raise InvalidDims("RGB image must have three channels")
        if not np.all(np.isfinite(arr)):
            raise InvalidDims("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise InvalidDims("image values must lie in [0,1]")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


def _sniff_png_header(path):
    """Validate the PNG signature + IHDR; return (bit_depth, color_type)."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(26)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if len(head) < 26 or head[:8] != _PNG_SIG:
        raise FormatError(f"{path} is not a PNG file")
    if head[12:16] != b"IHDR":
        raise FormatError(f"{path}: first chunk is not IHDR")
    bit_depth = head[24]
    color_type = head[25]
    if color_type not in (_COLOR_GRAY, _COLOR_RGB):
        raise FormatError(
            f"{path}: unsupported PNG color type {color_type} "
            "(palette and alpha images are not supported)"
        )
    if bit_depth not in (8, 16):
        raise FormatError(f"{path}: unsupported PNG bit depth {bit_depth}")
    return bit_depth, color_type


def load_image(path) -> PlanarImage:
    """Load an 8- or 16-bit grayscale or RGB PNG, scaled to [0,1]."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise IoError(f"no such file: {path}")
    bit_depth, color_type = _sniff_png_header(path)
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IoError(f"failed to decode {path}")
    scale = 255.0 if bit_depth == 8 else 65535.0
    if color_type == _COLOR_GRAY:
        data = raw.astype(np.float64)[None, :, :] / scale
        return PlanarImage(data, Colorspace.LUMA)
    rgb = raw[:, :, ::-1].astype(np.float64) / scale  # BGR -> RGB
    return PlanarImage(np.moveaxis(rgb, 2, 0), Colorspace.RGB)


def save_image(img: PlanarImage, path) -> None:
    """Write an 8-bit PNG; values quantized by round-half-up of v*255."""
    path = os.fspath(path)
    q = np.floor(img.data * 255.0 + 0.5)
    q = np.clip(q, 0.0, 255.0).astype(np.uint8)
    if img.data.shape[0] == 1:
        pixels = q[0]
    else:
        pixels = np.moveaxis(q, 0, 2)[:, :, ::-1]  # RGB -> BGR
    ok = cv2.imwrite(path, pixels, [cv2.IMWRITE_PNG_COMPRESSION, 6])
    if not ok:
        raise IoError(f"failed to write {path}")


def to_luma(img: PlanarImage) -> PlanarImage:
    """BT.601 luma; LUMA input is returned unchanged."""
    if img.colorspace is Colorspace.LUMA:
        return img
    r, g, b = img.data[0], img.data[1], img.data[2]
    # ordered so the fp sum of the coefficients is exactly 1.0
    y = 0.114 * b + 0.587 * g + 0.299 * r
    return PlanarImage(np.clip(y, 0.0, 1.0)[None, :, :], Colorspace.LUMA)


def luma_plane(img: PlanarImage) -> np.ndarray:
    """The (H,W) luma array of an image."""
    return to_luma(img).data[0]


def resize_bilinear(t: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample of a 2-D tensor, half-pixel-center alignment."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 2 or min(t.shape) < 1:
        raise InvalidDims(f"expected a non-empty 2-D tensor, got shape {t.shape}")
    if out_h < 1 or out_w < 1:
        raise InvalidDims(f"output dims must be >= 1, got {out_h}x{out_w}")
    if (out_h, out_w) == t.shape:
        return t.copy()
    return resize_bilinear2d(t, out_h, out_w)


# ---------------------------------------------------------------------------
# TNSR container: magic "TNSR", u8 version=1, u8 ndim, 2 reserved zero
# bytes, ndim little-endian u32 dims, then f32 values row-major.

_TNSR_MAGIC = b"TNSR"
_TNSR_VERSION = 1
_TNSR_MAX_NDIM = 8


def write_tnsr(path, array: np.ndarray) -> None:
    arr = np.ascontiguousarray(array, dtype=np.float64)
    if arr.ndim < 1 or arr.ndim > _TNSR_MAX_NDIM:
        raise InvalidDims(f"TNSR supports 1..{_TNSR_MAX_NDIM} dims, got {arr.ndim}")
    if min(arr.shape) < 1:
        raise InvalidDims(f"TNSR dims must be positive, got {arr.shape}")
    header = _TNSR_MAGIC + struct.pack("<BBxx", _TNSR_VERSION, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = arr.astype("<f4").tobytes(order="C")
    try:
        with open(os.fspath(path), "wb") as fh:
            fh.write(header)
            fh.write(dims)
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_tnsr(path) -> np.ndarray:
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if len(blob) < 8 or blob[:4] != _TNSR_MAGIC:
        raise FormatError(f"{path}: bad TNSR magic")
    version, ndim = blob[4], blob[5]
    if version != _TNSR_VERSION:
        raise FormatError(f"{path}: unsupported TNSR version {version}")
    if blob[6:8] != b"\x00\x00":
        raise FormatError(f"{path}: reserved TNSR bytes must be zero")
    if ndim < 1 or ndim > _TNSR_MAX_NDIM:
        raise InvalidDims(f"{path}: TNSR ndim {ndim} out of range")
    need = 8 + 4 * ndim
    if len(blob) < need:
        raise FormatError(f"{path}: truncated TNSR header")
    dims = struct.unpack(f"<{ndim}I", blob[8:need])
    if min(dims) < 1:
        raise InvalidDims(f"{path}: TNSR dims must be positive, got {dims}")
    count = int(np.prod(dims, dtype=np.int64))
    body = blob[need:]
    if len(body) != 4 * count:
        raise FormatError(
            f"{path}: TNSR payload holds {len(body) // 4} values, expected {count}"
        )
    values = np.frombuffer(body, dtype="<f4").astype(np.float64).reshape(dims)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: TNSR payload contains non-finite values")
    return values
