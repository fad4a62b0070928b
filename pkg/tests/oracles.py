"""Slow, obviously-correct reference implementations used only by tests.

Nothing here imports the code under test beyond plain data types.
"""

import itertools
import math

import numpy as np


def naive_mip(v, axis):
    """Triple loop over rays: (max, first argmax, last argmax)."""
    dims = v.shape
    others = [i for i in range(3) if i != axis]
    nu, nv = dims[others[0]], dims[others[1]]
    n = dims[axis]
    img = np.zeros((nu, nv), dtype=v.dtype)
    first = np.zeros((nu, nv), dtype=np.int64)
    last = np.zeros((nu, nv), dtype=np.int64)
    for u in range(nu):
        for w in range(nv):
            vals = []
            for k in range(n):
                idx = [0, 0, 0]
                idx[others[0]], idx[others[1]], idx[axis] = u, w, k
                vals.append(v[tuple(idx)])
            best = max(vals)
            img[u, w] = best
            first[u, w] = vals.index(best)
            last[u, w] = n - 1 - vals[::-1].index(best)
    return img, first, last


def naive_annotation(gt, axis):
    img, _, _ = naive_mip(np.asarray(gt, dtype=np.float64), axis)
    return img >= 0.5


def naive_overlap(pred, gt):
    p = {tuple(i) for i in np.argwhere(pred)}
    g = {tuple(i) for i in np.argwhere(gt)}
    tp, fp, fn = len(p & g), len(p - g), len(g - p)
    return tp, fp, fn


def naive_boundary(mask):
    out = set()
    dims = mask.shape
    for idx in np.argwhere(mask):
        for d in range(3):
            for s in (-1, 1):
                q = list(idx)
                q[d] += s
                if not (0 <= q[d] < dims[d]) or not mask[tuple(q)]:
                    out.add(tuple(int(c) for c in idx))
    return sorted(out)


def naive_msd(a, b):
    ba, bb = naive_boundary(a), naive_boundary(b)

    def mean_nearest(src, dst):
        return sum(min(math.dist(p, q) for q in dst) for p in src) / len(src)

    return 0.5 * (mean_nearest(ba, bb) + mean_nearest(bb, ba))


def naive_smooth(v, sigma):
    """Direct separable convolution with explicit reflective indexing."""
    r = math.ceil(3 * sigma)
    w = [math.exp(-0.5 * (k / sigma) ** 2) for k in range(-r, r + 1)]
    s = sum(w)
    w = [x / s for x in w]

    def reflect(i, n):
        # half-sample symmetric: d c b a | a b c d | d c b a
        period = 2 * n
        i %= period
        return i if i < n else period - 1 - i

    out = np.array(v, dtype=np.float64)
    for axis in range(3):
        src = out.copy()
        n = src.shape[axis]
        for idx in itertools.product(*(range(m) for m in src.shape)):
            acc = 0.0
            for k, wk in zip(range(-r, r + 1), w):
                j = list(idx)
                j[axis] = reflect(idx[axis] + k, n)
                acc += wk * src[tuple(j)]
            out[idx] = acc
    return out


def central_difference(f, y, idx, h=1e-4):
    yp = y.copy()
    ym = y.copy()
    yp[idx] += h
    ym[idx] -= h
    return (f(yp) - f(ym)) / (2 * h)


def top_two_gap(y, idx, axis):
    """Gap between the largest and second-largest value on the ray through idx."""
    sl = list(idx)
    sl[axis] = slice(None)
    ray = np.sort(y[tuple(sl)])[::-1]
    return ray[0] - ray[1] if len(ray) > 1 else np.inf


def in_capsule(p, a, b, r):
    p, a, b = (np.asarray(x, dtype=float) for x in (p, a, b))
    ab = b - a
    t = 0.0 if not ab.any() else min(1.0, max(0.0, float((p - a) @ ab) / float(ab @ ab)))
    return float(np.linalg.norm(p - (a + t * ab))) <= r


def max_relative_fd_error(f, grad, y, idxs, h=1e-4):
    """Largest |analytic - central difference| / max(|analytic|, |fd|) over idxs."""
    worst = 0.0
    for idx in idxs:
        fd = central_difference(f, y, idx, h)
        a = grad[idx]
        den = max(abs(a), abs(fd))
        if den > 0:
            worst = max(worst, abs(a - fd) / den)
    return worst


def gradcheck_sites(y, axes, rng, count=200, gap=1e-3):
    """``count`` random voxels, skipping any whose ray along an annotated axis is near-tied."""
    candidates = [tuple(int(c) for c in i) for i in np.argwhere(np.ones(y.shape, bool))]
    order = rng.permutation(len(candidates))
    out = []
    for k in order:
        idx = candidates[k]
        if all(top_two_gap(y, idx, ax) >= gap for ax in axes):
            out.append(idx)
        if len(out) == count:
            break
    return out
