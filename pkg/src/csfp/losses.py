"""Pixel, perceptual, and contextual losses plus attentive variants.

The attentive variants multiply by a spatial weight map: the perceptual
one weights the feature difference, the contextual one weights both
feature stacks before the affinity pipeline.  A combined score blends
the pixel l2 term with one selected feature loss via alpha.

Reductions inside the contextual loss sum their operands in sorted
order, which makes the result bit-identical under any reordering of
spatial positions, not just equal in exact arithmetic.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .csf_map import AttentionMap, CsfBand, ViewingGeometry, generate_map, resize_map, uniform_map
from .errors import DegenerateInput, DimMismatch, EmptyStack
from .features import FeatureStack, WeightBundle, forward
from .kernels import dot_matrix, pairwise_l2
from .tensor_core import PlanarImage

# contextual losses are O(N^2 M) in the spatial position count; stacks
# larger than this per side are center-cropped first (cx terms only)
CX_MAX_SIDE = 64


class DistanceKind(enum.Enum):
    COSINE = "COSINE"
    L2 = "L2"


class LossKind(enum.Enum):
    P = "P"
    P_ATT = "P_ATT"
    CX = "CX"
    CX_ATT = "CX_ATT"


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 0.5
    cx_bandwidth_h: float = 0.5
    cx_epsilon: float = 1e-5
    distance_kind: DistanceKind = DistanceKind.COSINE

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0,1], got {self.alpha}")
        if not (self.cx_bandwidth_h > 0.0):
            raise ValueError("bandwidth h must be positive")
        if not (self.cx_epsilon > 0.0):
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class LossReport:
    l2: float
    l_p: float
    l_p_att: float
    l_cx: float
    l_cx_att: float
    combined: float
    layer_name: str
    fallback: bool = False


def _ordered_sum(a, axis):
    # summing in sorted order fixes the fp result for a given multiset
    return np.sort(a, axis=axis).sum(axis=axis)


def l2_loss(a: PlanarImage, b: PlanarImage) -> float:
    """Mean squared error over all pixels and channels."""
    if a.data.shape != b.data.shape:
        raise DimMismatch(f"image dims differ: {a.data.shape} vs {b.data.shape}")
    diff = a.data - b.data
    return float(np.mean(diff * diff))


def _check_stacks(x: FeatureStack, y: FeatureStack):
    if x.tensor.shape != y.tensor.shape:
        raise DimMismatch(
            f"feature stacks differ: {x.tensor.shape} vs {y.tensor.shape}"
        )


def _check_map(stack: FeatureStack, amap: AttentionMap):
    if amap.map.shape != stack.tensor.shape[1:]:
        raise DimMismatch(
            f"map is {amap.map.shape}, stacks are {stack.tensor.shape[1:]}"
        )


def perceptual_loss(x: FeatureStack, y: FeatureStack) -> float:
    """Mean squared feature difference, normalized by M*W*H."""
    _check_stacks(x, y)
    diff = x.tensor - y.tensor
    return float(np.mean(diff * diff))


def attentive_perceptual_loss(x: FeatureStack, y: FeatureStack, amap: AttentionMap) -> float:
    """Perceptual loss with the feature difference weighted by the map."""
    _check_stacks(x, y)
    _check_map(x, amap)
    diff = amap.map[None, :, :] * (x.tensor - y.tensor)
    return float(np.mean(diff * diff))


def _positions(stack: FeatureStack) -> np.ndarray:
    # (N, M): one feature vector per spatial position, row-major scan
    m = stack.tensor.shape[0]
    return np.ascontiguousarray(stack.tensor.reshape(m, -1).T)


def _cosine_distances(xv, yv):
    # mean-shift by the y-position average, computed in sorted order so
    # the shift is identical under any permutation of y's positions
    mu = _ordered_sum(yv, axis=0) / yv.shape[0]
    xs = xv - mu
    ys = yv - mu
    nx = np.sqrt(np.einsum("ik,ik->i", xs, xs))
    ny = np.sqrt(np.einsum("ik,ik->i", ys, ys))
    dots = dot_matrix(xs, ys)
    denom = nx[:, None] * ny[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.where(denom > 0.0, dots / np.where(denom > 0.0, denom, 1.0), 0.0)
    both_zero = (nx[:, None] == 0.0) & (ny[None, :] == 0.0)
    sim = np.where(both_zero, 1.0, sim)
    return np.maximum(1.0 - sim, 0.0)


def _l2_distances(xv, yv):
    mu = _ordered_sum(yv, axis=0) / yv.shape[0]
    return pairwise_l2(np.ascontiguousarray(xv - mu), np.ascontiguousarray(yv - mu))


def contextual_loss(x: FeatureStack, y: FeatureStack, cfg: LossConfig = LossConfig()) -> float:
    """Contextual similarity loss between two feature stacks.

    Pairwise distances are scaled by each x-position's nearest-neighbour
    distance, turned into affinities with a softmax of bandwidth h over
    y positions, and the mean best affinity per y position is -log'd.
    """
    if x.tensor.shape[0] != y.tensor.shape[0]:
        raise DimMismatch(
            f"channel counts differ: {x.tensor.shape[0]} vs {y.tensor.shape[0]}"
        )
    xv = _positions(x)
    yv = _positions(y)
    if xv.shape[0] == 0 or yv.shape[0] == 0:
        raise EmptyStack("contextual loss needs at least one spatial position")
    if cfg.distance_kind is DistanceKind.COSINE:
        d = _cosine_distances(xv, yv)
    else:
        d = _l2_distances(xv, yv)
    dn = d / (d.min(axis=1)[:, None] + cfg.cx_epsilon)
    logits = (1.0 - dn) / cfg.cx_bandwidth_h
    logits -= logits.max(axis=1)[:, None]
    w = np.exp(logits)
    a = w / _ordered_sum(w, axis=1)[:, None]
    best = a.max(axis=0)
    mean_best = min(float(_ordered_sum(best, axis=0) / best.size), 1.0)
    return -math.log(mean_best) + 0.0


def attentive_contextual_loss(
    x: FeatureStack, y: FeatureStack, amap: AttentionMap, cfg: LossConfig = LossConfig()
) -> float:
    """Contextual loss after weighting both stacks by the map."""
    _check_stacks(x, y)
    _check_map(x, amap)
    wx = FeatureStack(amap.map[None, :, :] * x.tensor, x.layer_name)
    wy = FeatureStack(amap.map[None, :, :] * y.tensor, y.layer_name)
    return contextual_loss(wx, wy, cfg)


def _center_crop(stack: FeatureStack, side: int) -> FeatureStack:
    _, h, w = stack.tensor.shape
    if h <= side and w <= side:
        return stack
    ch, cw = min(h, side), min(w, side)
    y0 = (h - ch) // 2
    x0 = (w - cw) // 2
    return FeatureStack(
        np.ascontiguousarray(stack.tensor[:, y0 : y0 + ch, x0 : x0 + cw]),
        stack.layer_name,
    )


def _crop_map(amap: AttentionMap, h, w, side) -> AttentionMap:
    if h <= side and w <= side:
        return amap
    ch, cw = min(h, side), min(w, side)
    y0 = (h - ch) // 2
    x0 = (w - cw) // 2
    sub = amap.map[y0 : y0 + ch, x0 : x0 + cw]
    peak = sub.max()
    if peak <= 0.0:
        return uniform_map(ch, cw)
    return AttentionMap(sub / peak)


def combined_loss(
    gt: PlanarImage,
    out: PlanarImage,
    bundle: WeightBundle,
    layer: str,
    cfg: LossConfig = LossConfig(),
    kind: LossKind = LossKind.P_ATT,
    band: CsfBand = CsfBand(),
    geom: ViewingGeometry = ViewingGeometry(),
    fold: bool = True,
    force_uniform_map: bool = False,
) -> LossReport:
    """Evaluate every loss term for one image pair at one layer.

    The attention map comes from the ground truth only.  If the map is
    degenerate (no structure inside the band) the uniform map stands in
    and the report's fallback flag is set; force_uniform_map skips map
    generation outright (flag stays clear, the choice was deliberate).
    combined blends the pixel term with the loss selected by kind:
    alpha*l2 + (1-alpha)*loss.
    """
    if gt.data.shape != out.data.shape:
        raise DimMismatch(f"image dims differ: {gt.data.shape} vs {out.data.shape}")
    pixel = l2_loss(gt, out)
    fx = forward(bundle, out, layer)
    fy = forward(bundle, gt, layer)
    h, w = fy.tensor.shape[1:]
    fallback = False
    if force_uniform_map:
        amap = uniform_map(h, w)
    else:
        try:
            amap = resize_map(generate_map(gt, band, geom, fold), h, w)
        except DegenerateInput:
            amap = uniform_map(h, w)
            fallback = True
    lp = perceptual_loss(fx, fy)
    lp_att = attentive_perceptual_loss(fx, fy, amap)
    cx_x = _center_crop(fx, CX_MAX_SIDE)
    cx_y = _center_crop(fy, CX_MAX_SIDE)
    cx_map = _crop_map(amap, h, w, CX_MAX_SIDE)
    lcx = contextual_loss(cx_x, cx_y, cfg)
    lcx_att = attentive_contextual_loss(cx_x, cx_y, cx_map, cfg)
    selected = {
        LossKind.P: lp,
        LossKind.P_ATT: lp_att,
        LossKind.CX: lcx,
        LossKind.CX_ATT: lcx_att,
    }[kind]
    combined = cfg.alpha * pixel + (1.0 - cfg.alpha) * selected
    return LossReport(pixel, lp, lp_att, lcx, lcx_att, combined, layer, fallback)
