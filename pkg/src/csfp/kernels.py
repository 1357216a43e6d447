"""Low-level array kernels.

Each hot kernel has a pure-numpy implementation (``*_numpy``) and, when
numba is available, a jitted twin (``*_jit``).  The unsuffixed name is
the dispatching alias picked at import time from ``accel.NUMBA_ENABLED``.
Both variants stay importable so the benchmark can time them against
each other.

All kernels operate on float64 arrays and assume the caller has already
validated shapes.
"""

import numpy as np

from .accel import HAVE_NUMBA, NUMBA_ENABLED, njit


# ---------------------------------------------------------------------------
# conv2d: (Cin,H,W) x (Cout,Cin,kh,kw) -> (Cout,Ho,Wo), zero padding


def conv2d_numpy(x, w, bias, stride, pad):
    cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (wd + 2 * pad - kw) // stride + 1
    xp = np.zeros((cin, h + 2 * pad, wd + 2 * pad), dtype=np.float64)
    xp[:, pad : pad + h, pad : pad + wd] = x
    acc = np.zeros((cout, ho, wo), dtype=np.float64)
    for ci in range(cin):
        for i in range(kh):
            for j in range(kw):
                patch = xp[ci, i : i + stride * ho : stride, j : j + stride * wo : stride]
                acc += w[:, ci, i, j][:, None, None] * patch[None, :, :]
    return acc + bias[:, None, None]


def _conv2d_impl(x, w, bias, stride, pad):
    cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (wd + 2 * pad - kw) // stride + 1
    out = np.empty((cout, ho, wo), dtype=np.float64)
    for co in range(cout):
        for oy in range(ho):
            iy0 = oy * stride - pad
            for ox in range(wo):
                ix0 = ox * stride - pad
                acc = 0.0
                for ci in range(cin):
                    for i in range(kh):
                        iy = iy0 + i
                        if iy < 0 or iy >= h:
                            continue
                        for j in range(kw):
                            ix = ix0 + j
                            if ix < 0 or ix >= wd:
                                continue
                            acc += w[co, ci, i, j] * x[ci, iy, ix]
                out[co, oy, ox] = acc + bias[co]
    return out


# ---------------------------------------------------------------------------
# maxpool2: (C,H,W) -> (C,H//2,W//2), stride 2, trailing odd row/col dropped


def maxpool2_numpy(x):
    c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    v = x[:, : 2 * h2, : 2 * w2].reshape(c, h2, 2, w2, 2)
    return v.max(axis=(2, 4))


def _maxpool2_impl(x):
    c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    out = np.empty((c, h2, w2), dtype=np.float64)
    for ci in range(c):
        for oy in range(h2):
            for ox in range(w2):
                m = x[ci, 2 * oy, 2 * ox]
                if x[ci, 2 * oy, 2 * ox + 1] > m:
                    m = x[ci, 2 * oy, 2 * ox + 1]
                if x[ci, 2 * oy + 1, 2 * ox] > m:
                    m = x[ci, 2 * oy + 1, 2 * ox]
                if x[ci, 2 * oy + 1, 2 * ox + 1] > m:
                    m = x[ci, 2 * oy + 1, 2 * ox + 1]
                out[ci, oy, ox] = m
    return out


# ---------------------------------------------------------------------------
# pairwise row dots: (N,K) x (M,K) -> (N,M)
#
# Each entry is an independent fixed-order sum over K, so the matrix is
# stable under row permutations of either input (entries just move).


def dot_matrix_numpy(a, b):
    return np.einsum("ik,jk->ij", a, b)


def _dot_matrix_impl(a, b):
    n, k = a.shape
    m = b.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for c in range(k):
                acc += a[i, c] * b[j, c]
            out[i, j] = acc
    return out


# ---------------------------------------------------------------------------
# pairwise euclidean distances: (N,K) x (M,K) -> (N,M)
#
# Computed from explicit differences, not the expanded quadratic form, so
# entries are exact per-pair and never go negative under cancellation.


def pairwise_l2_numpy(a, b):
    n = a.shape[0]
    out = np.empty((n, b.shape[0]), dtype=np.float64)
    step = max(1, int(2 ** 22 // max(1, b.size)))
    for s in range(0, n, step):
        d = a[s : s + step, None, :] - b[None, :, :]
        out[s : s + step] = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    return out


def _pairwise_l2_impl(a, b):
    n, k = a.shape
    m = b.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for c in range(k):
                diff = a[i, c] - b[j, c]
                acc += diff * diff
            out[i, j] = np.sqrt(acc)
    return out


# ---------------------------------------------------------------------------
# 1-D correlation along the last axis of a 2-D array.
#
# reflect mode mirrors without repeating the edge sample and survives
# kernels wider than the image (triangle-wave indexing); valid mode
# shrinks the axis by len(k)-1.


def _reflect_indices(n, r):
    idx = np.arange(-r, n + r)
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    idx = np.abs(idx) % period
    return np.where(idx >= n, period - idx, idx)


def correlate1d_reflect_numpy(img, k):
    h, w = img.shape
    r = len(k) // 2
    xp = img[:, _reflect_indices(w, r)]
    out = np.zeros((h, w), dtype=np.float64)
    for t in range(len(k)):
        out += k[t] * xp[:, t : t + w]
    return out


def _correlate1d_reflect_impl(img, k):
    h, w = img.shape
    r = len(k) // 2
    out = np.zeros((h, w), dtype=np.float64)
    period = 2 * (w - 1) if w > 1 else 1
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for t in range(len(k)):
                ix = x - r + t
                if w == 1:
                    ix = 0
                else:
                    ix = abs(ix) % period
                    if ix >= w:
                        ix = period - ix
                acc += k[t] * img[y, ix]
            out[y, x] = acc
    return out


def correlate1d_valid_numpy(img, k):
    h, w = img.shape
    wo = w - len(k) + 1
    out = np.zeros((h, wo), dtype=np.float64)
    for t in range(len(k)):
        out += k[t] * img[:, t : t + wo]
    return out


def _correlate1d_valid_impl(img, k):
    h, w = img.shape
    wo = w - len(k) + 1
    out = np.zeros((h, wo), dtype=np.float64)
    for y in range(h):
        for x in range(wo):
            acc = 0.0
            for t in range(len(k)):
                acc += k[t] * img[y, x + t]
            out[y, x] = acc
    return out


# ---------------------------------------------------------------------------
# jitted twins + dispatch

if HAVE_NUMBA:
    conv2d_jit = njit(cache=True)(_conv2d_impl)
    maxpool2_jit = njit(cache=True)(_maxpool2_impl)
    dot_matrix_jit = njit(cache=True)(_dot_matrix_impl)
    pairwise_l2_jit = njit(cache=True)(_pairwise_l2_impl)
    correlate1d_reflect_jit = njit(cache=True)(_correlate1d_reflect_impl)
    correlate1d_valid_jit = njit(cache=True)(_correlate1d_valid_impl)
else:  # pragma: no cover
    conv2d_jit = None
    maxpool2_jit = None
    dot_matrix_jit = None
    pairwise_l2_jit = None
    correlate1d_reflect_jit = None
    correlate1d_valid_jit = None

if NUMBA_ENABLED:
    conv2d = conv2d_jit
    maxpool2 = maxpool2_jit
    dot_matrix = dot_matrix_jit
    pairwise_l2 = pairwise_l2_jit
    correlate1d_reflect = correlate1d_reflect_jit
    correlate1d_valid = correlate1d_valid_jit
else:
    conv2d = conv2d_numpy
    maxpool2 = maxpool2_numpy
    dot_matrix = dot_matrix_numpy
    pairwise_l2 = pairwise_l2_numpy
    correlate1d_reflect = correlate1d_reflect_numpy
    correlate1d_valid = correlate1d_valid_numpy


# ---------------------------------------------------------------------------
# helpers built on the primitives


def gaussian_kernel1d(sigma):
    """Normalized 1-D Gaussian, radius ceil(3*sigma)."""
    r = int(np.ceil(3.0 * sigma))
    xs = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    return k / k.sum()


def gaussian_blur2d(img, sigma):
    """Separable Gaussian blur of a 2-D array, reflect borders."""
    k = gaussian_kernel1d(sigma)
    tmp = correlate1d_reflect(np.ascontiguousarray(img, dtype=np.float64), k)
    return correlate1d_reflect(np.ascontiguousarray(tmp.T), k).T


def filter2d_valid(img, k):
    """Separable valid-mode correlation of a 2-D array with kernel k."""
    tmp = correlate1d_valid(np.ascontiguousarray(img, dtype=np.float64), k)
    return correlate1d_valid(np.ascontiguousarray(tmp.T), k).T


def resize_bilinear2d(src, oh, ow):
    """Bilinear resample with half-pixel-aligned sample centers.

    Output is clipped to the source value range, so interpolation noise
    can never push a sample past the original extremes.  An identity
    resize reproduces the input bit for bit.
    """
    h, w = src.shape
    ys = np.clip((np.arange(oh) + 0.5) * (h / oh) - 0.5, 0.0, h - 1.0)
    xs = np.clip((np.arange(ow) + 0.5) * (w / ow) - 0.5, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    a = src[np.ix_(y0, x0)]
    b = src[np.ix_(y0, x1)]
    c = src[np.ix_(y1, x0)]
    d = src[np.ix_(y1, x1)]
    top = a + (b - a) * fx
    bot = c + (d - c) * fx
    out = top + (bot - top) * fy
    return np.clip(out, src.min(), src.max())
