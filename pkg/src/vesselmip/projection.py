"""Maximum-intensity projections, per-ray depths and 2D annotations.

Projecting along an axis collapses that axis; the image keeps the two
remaining axes in increasing order (axis Z gives ``img[x, y]``, axis Y gives
``img[x, z]``, axis X gives ``img[y, z]``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .voxcore import Axis, OrientationTransform


@dataclass(frozen=True)
class DepthImages:
    z_fw: np.ndarray
    z_bw: np.ndarray


@dataclass(frozen=True)
class Annotation2D:
    axis: Axis
    mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis.parse(self.axis))
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))
        if self.mask.ndim != 2:
            raise ValueError("annotation mask must be 2D")


def rays(v, axis) -> np.ndarray:
    """View of ``v`` with the projection axis moved last, shape (Nu, Nv, N)."""
    return np.moveaxis(np.asarray(v), int(axis), -1)


def image_shape(dims, axis):
    return tuple(n for i, n in enumerate(dims) if i != int(axis))


def mip(v, axis):
    """Maximum-intensity projection with forward and backward depth.

    ``z_fw``/``z_bw`` are the first and last indices along the ray whose
    value equals the ray maximum exactly.
    """
    mx, first, last = kernels.ray_extrema(rays(v, axis))
    return mx, DepthImages(first, last)


def soft_mip(y, axis):
    """Per-ray maximum of a probability volume and its first maximizer.

    The index image is where the subgradient of the max is routed.
    """
    return kernels.ray_argmax(rays(y, axis))


def normalized_depth(z, n):
    if n <= 1:
        return np.zeros(np.shape(z), dtype=np.float64)
    return np.asarray(z, dtype=np.float64) / (n - 1)


def depth_enhanced_mip(v, axis):
    """Depth-modulated projections ``sqrt(mip) * depth`` for front and back.

    Depth is normalised to [0, 1] by the extent of the projection axis, so
    both images lie in [0, 1] for windowed input.
    """
    axis = Axis.parse(axis)
    image, depth = mip(v, axis)
    n = np.shape(v)[axis]
    root = np.sqrt(np.asarray(image, dtype=np.float64))
    p_fw = root * normalized_depth(depth.z_fw, n)
    p_bw = root * normalized_depth(depth.z_bw, n)
    return p_fw, p_bw


def derive_annotation(gt, axis) -> Annotation2D:
    """2D annotation of a mask: a pixel is foreground iff its ray hits the mask."""
    axis = Axis.parse(axis)
    return Annotation2D(axis, np.asarray(gt, dtype=bool).any(axis=int(axis)))


# --------------------------------------------------------------------------
# how orientation transforms act on projections


@dataclass(frozen=True)
class ProjectedTransform:
    """Image-plane counterpart of an orientation transform for one axis.

    Projecting ``apply_transform(v, t)`` along ``axis`` equals projecting
    ``v`` along ``source_axis`` and then: transposing the image if ``swap``,
    flipping its first/second axis if ``flip_u``/``flip_v``, and, if
    ``flip_depth``, mirroring depths and exchanging forward and backward.
    """

    source_axis: Axis
    swap: bool
    flip_u: bool
    flip_v: bool
    flip_depth: bool


def projected_transform(t: OrientationTransform, axis) -> ProjectedTransform:
    axis = Axis.parse(axis)
    b, c = (i for i in range(3) if i != axis)
    return ProjectedTransform(
        source_axis=Axis(t.perm[axis]),
        swap=t.perm[b] > t.perm[c],
        flip_u=t.flips[b],
        flip_v=t.flips[c],
        flip_depth=t.flips[axis],
    )


def transform_image(img, pt: ProjectedTransform):
    out = np.asarray(img)
    if pt.swap:
        out = out.T
    if pt.flip_u:
        out = out[::-1, :]
    if pt.flip_v:
        out = out[:, ::-1]
    return np.ascontiguousarray(out)


def transform_depths(depth: DepthImages, pt: ProjectedTransform, n) -> DepthImages:
    z_fw = transform_image(depth.z_fw, pt)
    z_bw = transform_image(depth.z_bw, pt)
    if pt.flip_depth:
        z_fw, z_bw = (n - 1) - z_bw, (n - 1) - z_fw
    return DepthImages(z_fw, z_bw)
