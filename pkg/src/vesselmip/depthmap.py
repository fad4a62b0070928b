"""Lift a 2D annotation into a partial 3D foreground labeling.

The result is a boolean volume where ``True`` means known vessel and
``False`` means unlabeled (not known background).
"""

import numpy as np

from . import kernels
from .errors import DimensionMismatchError
from .projection import Annotation2D, image_shape, mip, rays

DEFAULT_TAU = 0.05


def reconstruct(a: Annotation2D, v, tau=DEFAULT_TAU) -> np.ndarray:
    """Depth map from annotation ``a`` and source intensities ``v``.

    Every annotated ray gets its first and last maximizer marked. When the
    intensity dip between them (ray max minus span minimum) is at most
    ``tau``, the voxels in between are marked too.
    """
    v = np.asarray(v)
    if v.ndim != 3 or a.mask.shape != image_shape(v.shape, a.axis):
        raise DimensionMismatchError(
            f"annotation {a.mask.shape} along {a.axis.label} does not match volume {v.shape}"
        )
    if tau < 0:
        raise ValueError("tau must be non-negative")
    mx, depth = mip(v, a.axis)
    lifted = kernels.fill_spans(rays(v, a.axis), a.mask, depth.z_fw, depth.z_bw, mx, float(tau))
    return np.ascontiguousarray(np.moveaxis(lifted, -1, int(a.axis)))
