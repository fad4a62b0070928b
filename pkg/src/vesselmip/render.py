"""PNG and raw sidecar I/O for 2D images.

Images are indexed ``img[u, v]``; in the PNG ``u`` runs horizontally and
``v`` vertically (the array is written transposed).
"""

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .projection import Annotation2D
from .voxcore import Axis


def _save(path, arr):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(arr.T)).save(path)
    return path


def save_png16(path, img):
    """Values in [0, 1] scaled by 65535 and rounded."""
    q = np.rint(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 65535.0)
    return _save(path, q.astype(np.uint16))


def load_png16(path):
    arr = np.asarray(Image.open(path), dtype=np.float64).T
    return arr / 65535.0


def save_depth(path, depth):
    """Depth indices as a 16-bit PNG plus ``.raw`` (int32le, u-fastest) and ``.json``."""
    path = Path(path)
    depth = np.asarray(depth, dtype=np.int64)
    _save(path.with_suffix(".png"), depth.astype(np.uint16))
    path.with_suffix(".raw").write_bytes(depth.astype("<i4").ravel(order="F").tobytes())
    header = {"dims": [int(n) for n in depth.shape], "order": "u-fastest", "dtype": "i32le"}
    path.with_suffix(".json").write_text(json.dumps(header))
    return path.with_suffix(".png")


def load_depth(path):
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    data = np.frombuffer(path.with_suffix(".raw").read_bytes(), dtype="<i4")
    return data.reshape(header["dims"], order="F").astype(np.int64)


def save_mask_png(path, mask):
    return _save(path, np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8))


def save_annotation(path, a: Annotation2D):
    """8-bit PNG (0/255) with a JSON sidecar carrying the projection axis."""
    path = Path(path).with_suffix(".png")
    save_mask_png(path, a.mask)
    path.with_suffix(".json").write_text(json.dumps({"axis": a.axis.label}))
    return path


def load_annotation(path) -> Annotation2D:
    path = Path(path).with_suffix(".png")
    tag = json.loads(path.with_suffix(".json").read_text())
    mask = np.asarray(Image.open(path).convert("L")).T > 127
    return Annotation2D(Axis.parse(tag["axis"]), mask)
