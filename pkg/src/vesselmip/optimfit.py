"""Segmentation by direct first-order optimization of a voxel logit field.

The prediction is ``y = sigmoid(smooth(theta, sigma))``. The Gaussian
smoothing couples neighbouring voxels and stands in for the spatial prior a
network would provide. Gradients are pulled back through the sigmoid and
through the smoothing, which is self-adjoint.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import DivergenceError
from .projection import Annotation2D, projected_transform, transform_image
from .supervision import SupervisionBundle, loss, loss_full3d
from .voxcore import all_transforms, apply_transform, invert


@dataclass(frozen=True)
class FitConfig:
    steps: int = 500
    learning_rate: float = 0.05
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8
    init_logit: float = -2.0
    smoothing_sigma: float = 0.0
    binarize_threshold: float = 0.5
    seed: int = 0
    # re-orient the problem by a random orientation transform every step
    augment: bool = False

    def __post_init__(self):
        object.__setattr__(self, "adam_betas", tuple(float(b) for b in self.adam_betas))
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.binarize_threshold < 1.0:
            raise ValueError("binarize_threshold must lie in (0, 1)")
        if self.smoothing_sigma < 0:
            raise ValueError("smoothing_sigma must be non-negative")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class FitResult:
    mask: np.ndarray
    probabilities: np.ndarray
    trace: np.ndarray  # (steps, 3): total, term_2d, term_depth
    touched: np.ndarray | None = field(default=None, repr=False)

    def trace_rows(self):
        for i, (total, t2, td) in enumerate(self.trace):
            yield i, float(total), float(t2), float(td)


def gaussian_kernel(sigma):
    radius = int(math.ceil(3.0 * sigma))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-0.5 * (k / sigma) ** 2)
    return w / w.sum()


def smooth(v, sigma):
    """Separable truncated Gaussian, radius ``ceil(3 sigma)``, reflective edges."""
    v = np.asarray(v, dtype=np.float64)
    if sigma == 0:
        return v.copy()
    w = gaussian_kernel(sigma)
    out = v
    for axis in range(v.ndim):
        out = ndimage.correlate1d(out, w, axis=axis, mode="reflect")
    return out


def _transform_bundle(s: SupervisionBundle, t):
    annotations = []
    for a in s.annotations:
        target = t.perm.index(int(a.axis))
        pt = projected_transform(t, target)
        annotations.append(Annotation2D(target, transform_image(a.mask, pt)))
    depth = None if s.depth_map is None else apply_transform(s.depth_map, t)
    return SupervisionBundle(annotations, depth, s.alpha, s.clamp_eps)


def fit(supervision, cfg: FitConfig | None = None, shape=None, track_touched=False) -> FitResult:
    """Optimize a logit field against a bundle or a full 3D target mask.

    ``supervision`` is a :class:`SupervisionBundle` or a boolean mask (full
    3D supervision). ``shape`` is required when it cannot be inferred, i.e.
    for a bundle with no depth map and fewer than two views.
    """
    cfg = cfg or FitConfig()
    if isinstance(supervision, SupervisionBundle):
        shape = _infer_shape(supervision, shape)

        def objective(y, t):
            if t is None:
                return loss(y, supervision)
            lv = loss(apply_transform(y, t), _transform_bundle(supervision, t))
            lv.gradient = apply_transform(lv.gradient, invert(t))
            return lv
    else:
        target = np.asarray(supervision, dtype=bool)
        shape = target.shape

        def objective(y, t):
            return loss_full3d(y, target)

    beta1, beta2 = cfg.adam_betas
    sigma = cfg.smoothing_sigma
    rng = np.random.default_rng(cfg.seed)
    group = all_transforms()

    theta = np.full(shape, float(cfg.init_logit), dtype=np.float64)
    m = np.zeros(theta.size)
    v = np.zeros(theta.size)
    trace = np.zeros((cfg.steps, 3))
    touched = np.zeros(shape, dtype=bool) if track_touched else None

    for step in range(1, cfg.steps + 1):
        y = _predict(theta, sigma)
        t = group[rng.integers(len(group))] if cfg.augment else None
        lv = objective(y, t)
        if not math.isfinite(lv.total):
            raise DivergenceError(step)
        trace[step - 1] = (lv.total, lv.term_2d, lv.term_depth)
        g = kernels.sigmoid_backward(lv.gradient.reshape(-1), y.reshape(-1)).reshape(shape)
        if sigma > 0:
            g = smooth(g, sigma)
        if touched is not None:
            touched |= g != 0
        kernels.adam_step(theta.reshape(-1), g.reshape(-1), m, v,
                          cfg.learning_rate, beta1, beta2, cfg.adam_eps, step)

    y = _predict(theta, sigma)
    return FitResult(y >= cfg.binarize_threshold, y, trace, touched)


def _predict(theta, sigma):
    s = smooth(theta, sigma) if sigma > 0 else theta
    return kernels.sigmoid(s.reshape(-1)).reshape(theta.shape)


def _infer_shape(s: SupervisionBundle, shape):
    if shape is not None:
        return tuple(int(n) for n in shape)
    if s.depth_map is not None:
        return s.depth_map.shape
    dims = [None, None, None]
    for a in s.annotations:
        others = [i for i in range(3) if i != a.axis]
        for i, n in zip(others, a.mask.shape):
            dims[i] = n
    if any(d is None for d in dims):
        raise ValueError("cannot infer volume shape from the supervision; pass shape=")
    return tuple(dims)
