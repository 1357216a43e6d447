"""CNN weight bundles and feature extraction.

Weights travel in the little-endian CNNW container: magic ``CNNW``, u8
version=1, u8 input_channels, u16 layer_count, 3 f32 channel means and
3 f32 channel scales (unused slots zero), then per layer a u8 kind
(0=CONV2D, 1=RELU, 2=MAXPOOL2), u8 name length + UTF-8 name, and for
conv layers u16 out_ch, u16 in_ch, u8 kh, u8 kw, u8 stride, u8 padding
followed by f32 weights (out,in,kh,kw row-major) and f32 biases.

The forward pass uses the cross-correlation convention with zero
padding, accumulates in float64, and normalizes the input image by
(value - mean) / scale per channel before the first layer.
"""

import enum
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChainError,
    ChannelMismatch,
    FormatError,
    InvalidDims,
    IoError,
    UnknownLayer,
)
from .kernels import conv2d, maxpool2
from .tensor_core import PlanarImage

_CNNW_MAGIC = b"CNNW"
_CNNW_VERSION = 1


class LayerKind(enum.Enum):
    CONV2D = 0
    RELU = 1
    MAXPOOL2 = 2


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    name: str
    out_ch: int = 0
    in_ch: int = 0
    kh: int = 0
    kw: int = 0
    stride: int = 1
    padding: int = 0
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None


@dataclass(frozen=True)
class WeightBundle:
    layers: tuple[LayerSpec, ...]
    input_channels: int
    channel_means: np.ndarray
    channel_scales: np.ndarray


@dataclass(frozen=True)
class FeatureStack:
    """(M, H, W) activation tensor tapped at a named layer."""

    tensor: np.ndarray
    layer_name: str

    def __post_init__(self):
        t = self.tensor
        if t.ndim != 3 or min(t.shape) < 1:
            raise InvalidDims(f"feature stack must be (M,H,W), got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise InvalidDims("feature stack contains non-finite values")


class _Reader:
    def __init__(self, blob, path):
        self.blob = blob
        self.path = path
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.blob):
            raise FormatError(f"{self.path}: truncated CNNW file")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_weights(path) -> WeightBundle:
    """Parse a CNNW file and validate its channel chain."""
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    rd = _Reader(blob, path)
    if rd.take(4) != _CNNW_MAGIC:
        raise FormatError(f"{path}: bad CNNW magic")
    (version,) = rd.unpack("<B")
    if version != _CNNW_VERSION:
        raise FormatError(f"{path}: unsupported CNNW version {version}")
    (input_channels,) = rd.unpack("<B")
    if input_channels < 1 or input_channels > 3:
        raise FormatError(f"{path}: input_channels must be 1..3, got {input_channels}")
    (layer_count,) = rd.unpack("<H")
    means = np.array(rd.unpack("<3f"), dtype=np.float64)
    scales = np.array(rd.unpack("<3f"), dtype=np.float64)
    if np.any(scales[:input_channels] == 0.0):
        raise FormatError(f"{path}: zero channel scale")

    layers = []
    names = set()
    chain = input_channels
    for idx in range(layer_count):
        (kind_code,) = rd.unpack("<B")
        try:
            kind = LayerKind(kind_code)
        except ValueError:
            raise FormatError(f"{path}: layer {idx} has unknown kind {kind_code}")
        (name_len,) = rd.unpack("<B")
        if name_len == 0:
            raise FormatError(f"{path}: layer {idx} has an empty name")
        try:
            name = rd.take(name_len).decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError(f"{path}: layer {idx} name is not valid UTF-8")
        if name in names:
            raise FormatError(f"{path}: duplicate layer name {name!r}")
        names.add(name)

        if kind is LayerKind.CONV2D:
            out_ch, in_ch, kh, kw, stride, padding = rd.unpack("<HHBBBB")
            if min(out_ch, in_ch, kh, kw, stride) < 1:
                raise FormatError(f"{path}: layer {name!r} has a zero conv field")
            if in_ch != chain:
                raise ChainError(
                    f"{path}: layer {name!r} expects {in_ch} input channels, "
                    f"chain carries {chain}"
                )
            wcount = out_ch * in_ch * kh * kw
            w = np.frombuffer(rd.take(4 * wcount), dtype="<f4")
            w = w.astype(np.float64).reshape(out_ch, in_ch, kh, kw)
            b = np.frombuffer(rd.take(4 * out_ch), dtype="<f4").astype(np.float64)
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise FormatError(f"{path}: layer {name!r} has non-finite weights")
            layers.append(
                LayerSpec(kind, name, out_ch, in_ch, kh, kw, stride, padding, w, b)
            )
            chain = out_ch
        else:
            layers.append(LayerSpec(kind, name, out_ch=chain, in_ch=chain))
    if rd.pos != len(blob):
        raise FormatError(f"{path}: trailing data after last layer")
    return WeightBundle(tuple(layers), input_channels, means, scales)


def list_layers(bundle: WeightBundle):
    """(name, kind, output channel count) for each layer, execution order."""
    return [(ly.name, ly.kind, ly.out_ch) for ly in bundle.layers]


def forward(bundle: WeightBundle, img: PlanarImage, layer_name: str) -> FeatureStack:
    """Run the bundle through the named layer inclusive."""
    wanted = [ly.name for ly in bundle.layers]
    if layer_name not in wanted:
        raise UnknownLayer(f"no layer named {layer_name!r}; have {wanted}")
    if img.data.shape[0] != bundle.input_channels:
        raise ChannelMismatch(
            f"bundle wants {bundle.input_channels} input channels, "
            f"image has {img.data.shape[0]}"
        )
    c = bundle.input_channels
    mean = bundle.channel_means[:c, None, None]
    scale = bundle.channel_scales[:c, None, None]
    x = (img.data - mean) / scale
    for ly in bundle.layers:
        if ly.kind is LayerKind.CONV2D:
            h, w = x.shape[1:]
            ho = (h + 2 * ly.padding - ly.kh) // ly.stride + 1
            wo = (w + 2 * ly.padding - ly.kw) // ly.stride + 1
            if ho < 1 or wo < 1:
                raise InvalidDims(
                    f"layer {ly.name!r}: {h}x{w} input too small for "
                    f"{ly.kh}x{ly.kw} kernel"
                )
            x = conv2d(
                np.ascontiguousarray(x), ly.weights, ly.bias, ly.stride, ly.padding
            )
        elif ly.kind is LayerKind.RELU:
            x = np.maximum(x, 0.0)
        else:
            if x.shape[1] < 2 or x.shape[2] < 2:
                raise InvalidDims(
                    f"layer {ly.name!r}: input {x.shape[1]}x{x.shape[2]} "
                    "too small for 2x2 pooling"
                )
            x = maxpool2(np.ascontiguousarray(x))
        if ly.name == layer_name:
            return FeatureStack(np.ascontiguousarray(x), layer_name)
    raise UnknownLayer(layer_name)  # unreachable, checked above
