"""Independent reference implementations used to pin down the package.

Everything here is written the dumb, obviously-correct way: literal
sums straight from the defining formulas, no FFTs, no vectorized
shortcuts shared with the code under test.
"""

import cmath
import math

import numpy as np


def dft2_naive(img):
    """Forward 2D DFT with 1/(MN) normalization, literal double sum."""
    m, n = img.shape
    out = np.zeros((m, n), dtype=np.complex128)
    for u in range(m):
        for v in range(n):
            acc = 0.0 + 0.0j
            for a in range(m):
                for b in range(n):
                    ang = -2.0 * math.pi * (u * a / m + v * b / n)
                    acc += img[a, b] * cmath.exp(1j * ang)
            out[u, v] = acc / (m * n)
    return out


def idft2_naive(spec):
    """Unnormalized inverse 2D DFT, literal double sum."""
    m, n = spec.shape
    out = np.zeros((m, n), dtype=np.complex128)
    for a in range(m):
        for b in range(n):
            acc = 0.0 + 0.0j
            for u in range(m):
                for v in range(n):
                    ang = 2.0 * math.pi * (u * a / m + v * b / n)
                    acc += spec[u, v] * cmath.exp(1j * ang)
            out[a, b] = acc
    return out


def dft2_matrix(img):
    """Same transform as dft2_naive via explicit DFT matrices.

    Still independent of any FFT; fast enough for the 200-image sweep.
    """
    m, n = img.shape
    wm = np.exp(-2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m)
    wn = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return wm @ img @ wn / (m * n)


def idft2_matrix(spec):
    m, n = spec.shape
    wm = np.exp(2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m)
    wn = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return wm @ spec @ wn


def conv2d_naive(x, w, bias, stride, pad):
    """Cross-correlation with zero padding, quadruple loop."""
    cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (wd + 2 * pad - kw) // stride + 1
    out = np.zeros((cout, ho, wo))
    for co in range(cout):
        for oy in range(ho):
            for ox in range(wo):
                acc = bias[co]
                for ci in range(cin):
                    for i in range(kh):
                        for j in range(kw):
                            iy = oy * stride - pad + i
                            ix = ox * stride - pad + j
                            if 0 <= iy < h and 0 <= ix < wd:
                                acc += w[co, ci, i, j] * x[ci, iy, ix]
                out[co, oy, ox] = acc
    return out


def maxpool2_naive(x):
    c, h, w = x.shape
    out = np.zeros((c, h // 2, w // 2))
    for ci in range(c):
        for oy in range(h // 2):
            for ox in range(w // 2):
                out[ci, oy, ox] = max(
                    x[ci, 2 * oy, 2 * ox],
                    x[ci, 2 * oy, 2 * ox + 1],
                    x[ci, 2 * oy + 1, 2 * ox],
                    x[ci, 2 * oy + 1, 2 * ox + 1],
                )
    return out


def perceptual_naive(x, y):
    """1/(M*W*H) * sum_m ||x_m - y_m||^2, literal triple loop."""
    m, h, w = x.shape
    total = 0.0
    for mi in range(m):
        for yi in range(h):
            for xi in range(w):
                d = x[mi, yi, xi] - y[mi, yi, xi]
                total += d * d
    return total / (m * w * h)


def attentive_perceptual_naive(x, y, mu):
    m, h, w = x.shape
    total = 0.0
    for mi in range(m):
        for yi in range(h):
            for xi in range(w):
                d = mu[yi, xi] * (x[mi, yi, xi] - y[mi, yi, xi])
                total += d * d
    return total / (m * w * h)


def contextual_naive(x, y, h_bw, eps, distance="COSINE"):
    """Affinity pipeline with explicit O(N^2) loops.

    Feature vectors are mean-shifted by the average y vector; cosine
    distance is 1 - cos similarity (zero-vector pairs: both zero -> 0
    distance, one zero -> distance 1).
    """
    m = x.shape[0]
    xv = x.reshape(m, -1).T
    yv = y.reshape(m, -1).T
    nx, ny = len(xv), len(yv)
    mu = yv.mean(axis=0)
    xs = xv - mu
    ys = yv - mu
    d = np.zeros((nx, ny))
    for i in range(nx):
        for j in range(ny):
            if distance == "COSINE":
                na = math.sqrt(float(xs[i] @ xs[i]))
                nb = math.sqrt(float(ys[j] @ ys[j]))
                if na == 0.0 and nb == 0.0:
                    sim = 1.0
                elif na == 0.0 or nb == 0.0:
                    sim = 0.0
                else:
                    sim = float(xs[i] @ ys[j]) / (na * nb)
                d[i, j] = max(1.0 - sim, 0.0)
            else:
                diff = xs[i] - ys[j]
                d[i, j] = math.sqrt(float(diff @ diff))
    a = np.zeros((nx, ny))
    for i in range(nx):
        dmin = d[i].min()
        wrow = np.array([math.exp((1.0 - d[i, j] / (dmin + eps)) / h_bw) for j in range(ny)])
        a[i] = wrow / wrow.sum()
    best = [max(a[i, j] for i in range(nx)) for j in range(ny)]
    return -math.log(sum(best) / ny)


def bilinear_naive(src, oh, ow):
    """Half-pixel-center bilinear resample, per output pixel."""
    h, w = src.shape
    out = np.zeros((oh, ow))
    for oy in range(oh):
        for ox in range(ow):
            fy = min(max((oy + 0.5) * h / oh - 0.5, 0.0), h - 1.0)
            fx = min(max((ox + 0.5) * w / ow - 0.5, 0.0), w - 1.0)
            y0, x0 = int(math.floor(fy)), int(math.floor(fx))
            y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
            ay, ax = fy - y0, fx - x0
            top = src[y0, x0] + (src[y0, x1] - src[y0, x0]) * ax
            bot = src[y1, x0] + (src[y1, x1] - src[y1, x0]) * ax
            out[oy, ox] = top + (bot - top) * ay
    return out


def _reflect(i, n):
    if n == 1:
        return 0
    period = 2 * (n - 1)
    i = abs(i) % period
    return period - i if i >= n else i


def gaussian_blur_naive(img, sigma):
    """Dense 2-D convolution with the truncated, renormalized kernel."""
    r = int(math.ceil(3.0 * sigma))
    xs = np.arange(-r, r + 1, dtype=np.float64)
    k1 = np.exp(-0.5 * (xs / sigma) ** 2)
    k1 /= k1.sum()
    k2 = np.outer(k1, k1)
    h, w = img.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    acc += k2[dy + r, dx + r] * img[_reflect(y + dy, h), _reflect(x + dx, w)]
            out[y, x] = acc
    return out


def spearman_naive(a, b):
    """Average-rank Spearman via the Pearson-of-ranks definition."""

    def ranks(v):
        order = sorted(range(len(v)), key=lambda i: v[i])
        r = [0.0] * len(v)
        i = 0
        while i < len(v):
            j = i
            while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
                j += 1
            avg = (i + j) / 2.0 + 1.0
            for t in range(i, j + 1):
                r[order[t]] = avg
            i = j + 1
        return np.array(r)

    ra, rb = ranks(list(a)), ranks(list(b))
    da = ra - ra.mean()
    db = rb - rb.mean()
    return float((da @ db) / math.sqrt(float(da @ da) * float(db @ db)))
