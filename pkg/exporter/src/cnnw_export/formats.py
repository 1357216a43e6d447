"""Standalone writers for the CNNW and TNSR binary formats.

Deliberately independent of the consumer library: this package talks to
it only through files, so the byte layouts are spelled out here in full.

CNNW (little-endian throughout):
    "CNNW" | u8 version=1 | u8 input_channels | u16 layer_count
    | 3*f32 channel means | 3*f32 channel scales
    | per layer: u8 kind (0 conv, 1 relu, 2 pool) | u8 name_len | name
      (conv only) u16 out_ch | u16 in_ch | u8 kh | u8 kw | u8 stride
      | u8 padding | f32 weights in (out, in, kh, kw) C order | f32 biases

TNSR:
    "TNSR" | u8 version=1 | u8 ndim | 2 zero bytes | ndim*u32 dims
    | f32 payload in C order
"""

import struct

import numpy as np

from .errors import ExporterError


def write_cnnw(path, input_channels, means, scales, layers):
    """layers: ("conv", name, w, b, stride, padding) | ("relu"|"pool", name)."""
    if not 1 <= input_channels <= 3:
        raise ExporterError(f"input_channels must be 1..3, got {input_channels}")
    if not 1 <= len(layers) <= 0xFFFF:
        raise ExporterError(f"layer count {len(layers)} out of range")
    parts = [b"CNNW", struct.pack("<BBH", 1, input_channels, len(layers))]
    parts.append(struct.pack("<3f", *means))
    parts.append(struct.pack("<3f", *scales))
    codes = {"conv": 0, "relu": 1, "pool": 2}
    for layer in layers:
        kind, name = layer[0], layer[1].encode("utf-8")
        if not 1 <= len(name) <= 255:
            raise ExporterError(f"layer name length {len(name)} out of range")
        parts.append(struct.pack("<BB", codes[kind], len(name)) + name)
        if kind == "conv":
            w, b, stride, padding = layer[2], layer[3], layer[4], layer[5]
            out_ch, in_ch, kh, kw = w.shape
            if out_ch > 0xFFFF or in_ch > 0xFFFF:
                raise ExporterError(f"{layer[1]}: channel count exceeds u16")
            if max(kh, kw, stride, padding) > 255:
                raise ExporterError(f"{layer[1]}: conv geometry exceeds u8")
            parts.append(struct.pack("<HHBBBB", out_ch, in_ch, kh, kw, stride, padding))
            parts.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
            parts.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def write_tnsr(path, array):
    arr = np.ascontiguousarray(array)
    if not 1 <= arr.ndim <= 8:
        raise ExporterError(f"TNSR supports 1..8 dims, got {arr.ndim}")
    with open(path, "wb") as fh:
        fh.write(b"TNSR" + struct.pack("<BBxx", 1, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.astype("<f4").tobytes(order="C"))
