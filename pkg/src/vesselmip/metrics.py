"""Overlap, centerline and surface-distance metrics, and hole filling."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatchError, UndefinedMetricError

# 6-connectivity for boundaries and for the background flood
SIX = ndimage.generate_binary_structure(3, 1)


@dataclass
class MetricsReport:
    dice: float
    precision: float
    recall: float
    skeleton_recall: float
    msd: float
    tp: int
    fp: int
    fn: int

    def to_dict(self):
        return asdict(self)


def _pair(pred, gt):
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DimensionMismatchError(f"prediction {pred.shape} vs ground truth {gt.shape}")
    return pred, gt


def _ratio(num, den):
    return num / den if den else 0.0


def overlap_metrics(pred, gt):
    """Dice, precision, recall and ``(tp, fp, fn)``.

    Both masks empty scores 1 across the board; a zero denominator
    otherwise scores 0.
    """
    pred, gt = _pair(pred, gt)
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    if tp + fp + fn == 0:
        return 1.0, 1.0, 1.0, (tp, fp, fn)
    dice = _ratio(2 * tp, 2 * tp + fp + fn)
    return dice, _ratio(tp, tp + fp), _ratio(tp, tp + fn), (tp, fp, fn)


def skeleton_recall(pred, centerline):
    """Fraction of centerline voxels covered by the prediction."""
    c = np.asarray(centerline, dtype=np.int64).reshape(-1, 3)
    if len(c) == 0:
        raise UndefinedMetricError("skeleton recall needs a nonempty centerline")
    pred = np.asarray(pred, dtype=bool)
    hits = pred[c[:, 0], c[:, 1], c[:, 2]]
    return float(np.count_nonzero(hits)) / len(c)


def boundary(mask):
    """Foreground voxels with a background 6-neighbour; outside the grid is background."""
    mask = np.asarray(mask, dtype=bool)
    return mask & ~ndimage.binary_erosion(mask, structure=SIX, border_value=0)


def msd(pred, gt):
    """Symmetric mean surface distance in voxel units."""
    pred, gt = _pair(pred, gt)
    if not pred.any() or not gt.any():
        raise UndefinedMetricError("surface distance is undefined for an empty mask")
    bp, bg = boundary(pred), boundary(gt)
    to_gt = ndimage.distance_transform_edt(~bg)[bp]
    to_pred = ndimage.distance_transform_edt(~bp)[bg]
    return 0.5 * (float(to_gt.mean()) + float(to_pred.mean()))


def fill_holes(pred):
    """Turn background unreachable from the grid border (6-connected) into foreground."""
    return ndimage.binary_fill_holes(np.asarray(pred, dtype=bool), structure=SIX)


def evaluate(pred, gt, centerline) -> MetricsReport:
    dice, precision, recall, (tp, fp, fn) = overlap_metrics(pred, gt)
    try:
        distance = msd(pred, gt)
    except UndefinedMetricError:
        distance = float("nan")
    return MetricsReport(dice, precision, recall, skeleton_recall(pred, centerline),
                         distance, tp, fp, fn)
