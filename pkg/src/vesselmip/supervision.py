"""Projection + depth cross-entropy objective and its analytic gradient.

The objective for a probability volume ``y`` is::

    total = alpha * term_2d + (1 - alpha) * term_depth

``term_2d`` is the per-pixel mean cross-entropy between the max projection
of ``y`` and the 2D annotation, averaged over annotated views.
``term_depth`` is the mean of ``-log y`` over depth-map-positive voxels; the
depth map's zeros are unlabeled and never contribute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError
from .projection import Annotation2D, image_shape, rays, soft_mip

DEFAULT_EPS = 1e-7


@dataclass
class SupervisionBundle:
    annotations: list = field(default_factory=list)
    depth_map: np.ndarray | None = None
    alpha: float = 0.5
    clamp_eps: float = DEFAULT_EPS

    def __post_init__(self):
        self.annotations = [
            a if isinstance(a, Annotation2D) else Annotation2D(*a) for a in self.annotations
        ]
        axes = [a.axis for a in self.annotations]
        if len(set(axes)) != len(axes):
            raise ValueError(f"annotation axes must be distinct, got {[a.label for a in axes]}")
        if len(axes) > 3:
            raise ValueError("at most three annotated views")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.clamp_eps > 0:
            raise ValueError("clamp_eps must be positive")
        if self.depth_map is not None:
            self.depth_map = np.asarray(self.depth_map, dtype=bool)

    @property
    def axes(self):
        return [a.axis for a in self.annotations]


@dataclass
class LossValue:
    total: float
    term_2d: float
    term_depth: float
    gradient: np.ndarray


def bce(p, t, eps=DEFAULT_EPS):
    """Binary cross-entropy with both log arguments clamped below at ``eps``."""
    p = np.asarray(p, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    return -(t * np.log(np.maximum(p, eps)) + (1.0 - t) * np.log(np.maximum(1.0 - p, eps)))


def bce_grad(p, t, eps=DEFAULT_EPS):
    """d bce / d p, with the same clamped denominators as :func:`bce`."""
    p = np.asarray(p, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    return -t / np.maximum(p, eps) + (1.0 - t) / np.maximum(1.0 - p, eps)


def _check_dims(y, s: SupervisionBundle):
    for a in s.annotations:
        if a.mask.shape != image_shape(y.shape, a.axis):
            raise DimensionMismatchError(
                f"annotation along {a.axis.label} has shape {a.mask.shape}, "
                f"prediction {y.shape} projects to {image_shape(y.shape, a.axis)}"
            )
    if s.depth_map is not None and s.depth_map.shape != y.shape:
        raise DimensionMismatchError(f"depth map {s.depth_map.shape} vs prediction {y.shape}")


def projection_term(y, annotations, eps=DEFAULT_EPS, grad=None, weight=1.0):
    """Mean 2D cross-entropy over views.

    If ``grad`` is given, ``weight`` times the term's gradient is added into
    it in place, routed to the first maximizer of every ray.
    """
    if not annotations:
        return 0.0
    per_view = []
    for a in annotations:
        ymax, idx = soft_mip(y, a.axis)
        per_view.append(float(bce(ymax, a.mask, eps).mean()))
        if grad is not None:
            g = bce_grad(ymax, a.mask, eps) * (weight / (len(annotations) * ymax.size))
            gv = rays(grad, a.axis)
            cur = np.take_along_axis(gv, idx[..., None], axis=-1)
            np.put_along_axis(gv, idx[..., None], cur + g[..., None], axis=-1)
    return math.fsum(per_view) / len(per_view)


def depth_term(y, depth_map, eps=DEFAULT_EPS, grad=None, weight=1.0):
    if depth_map is None:
        return 0.0
    n = int(np.count_nonzero(depth_map))
    if n == 0:
        return 0.0
    yd = np.maximum(y[depth_map], eps)
    if grad is not None:
        grad[depth_map] -= weight / (n * yd)
    return float(-np.log(yd).sum() / n)


def loss(y, s: SupervisionBundle) -> LossValue:
    y = np.asarray(y, dtype=np.float64)
    _check_dims(y, s)
    grad = np.zeros(y.shape, dtype=np.float64)
    eps = s.clamp_eps
    t2 = projection_term(y, s.annotations, eps, grad, s.alpha)
    td = depth_term(y, s.depth_map, eps, grad, 1.0 - s.alpha)
    total = s.alpha * t2 + (1.0 - s.alpha) * td
    return LossValue(total, t2, td, grad)


def loss_full3d(y, gt, eps=DEFAULT_EPS) -> LossValue:
    """Voxelwise mean cross-entropy against a complete 3D mask."""
    y = np.asarray(y, dtype=np.float64)
    gt = np.asarray(gt, dtype=bool)
    if gt.shape != y.shape:
        raise DimensionMismatchError(f"target {gt.shape} vs prediction {y.shape}")
    grad = bce_grad(y, gt, eps) / y.size
    total = float(bce(y, gt, eps).mean())
    return LossValue(total, 0.0, 0.0, grad)
