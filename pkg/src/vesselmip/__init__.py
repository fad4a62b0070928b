"""Weakly supervised 3D vessel segmentation from annotated maximum-intensity
projections with depth supervision, tested on synthetic vessel phantoms."""

from .depthmap import reconstruct
from .errors import (DimensionMismatchError, DivergenceError, InvalidWindowError,
                     PhantomGenerationError, UndefinedMetricError, VesselMipError,
                     VolumeFormatError)
from .kernels import BACKEND
from .metrics import (MetricsReport, evaluate, fill_holes, msd, overlap_metrics,
                      skeleton_recall)
from .optimfit import FitConfig, FitResult, fit, smooth
from .phantom import Phantom, PhantomConfig, generate, standard_suite
from .projection import (Annotation2D, DepthImages, depth_enhanced_mip, derive_annotation,
                         mip, soft_mip)
from .supervision import LossValue, SupervisionBundle, bce, loss, loss_full3d
from .voxcore import (Axis, OrientationTransform, all_transforms, apply_transform, compose,
                      invert, load_mask, load_volume, save_mask, save_volume, window_clip)

__version__ = "0.1.0"
