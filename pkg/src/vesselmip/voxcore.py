"""Dense voxel grids, axis-aligned orientation transforms, windowing and I/O.

Volumes are plain numpy arrays of shape ``(Nx, Ny, Nz)`` indexed ``v[x, y, z]``.
Intensity volumes are ``float32``, masks are ``bool``. On disk the payload is
written x-fastest (``index = x + Nx * (y + Ny * z)``), i.e. Fortran order.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidWindowError, VolumeFormatError


class Axis(enum.IntEnum):
    X = 0
    Y = 1
    Z = 2

    @classmethod
    def parse(cls, value) -> "Axis":
        if isinstance(value, Axis):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        try:
            return cls[str(value).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown axis {value!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class OrientationTransform:
    """Axis permutation followed by per-axis flips.

    Output axis ``i`` is input axis ``perm[i]``; if ``flips[i]`` the output
    axis is then reversed. The 48 such transforms form a group.
    """

    perm: tuple = (0, 1, 2)
    flips: tuple = (False, False, False)

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        flips = tuple(bool(f) for f in self.flips)
        if sorted(perm) != [0, 1, 2] or len(flips) != 3:
            raise ValueError(f"invalid orientation transform {perm}, {flips}")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "flips", flips)

    @classmethod
    def identity(cls) -> "OrientationTransform":
        return cls()

    @property
    def is_identity(self) -> bool:
        return self.perm == (0, 1, 2) and not any(self.flips)

    def map_dims(self, dims):
        return tuple(dims[p] for p in self.perm)

    def map_point(self, point, dims):
        """Coordinates of input voxel ``point`` after the transform."""
        out = []
        for i, p in enumerate(self.perm):
            c = point[p]
            out.append(dims[p] - 1 - c if self.flips[i] else c)
        return tuple(out)


def all_transforms() -> list:
    return [
        OrientationTransform(perm, flips)
        for perm in itertools.permutations(range(3))
        for flips in itertools.product((False, True), repeat=3)
    ]


def compose(outer: OrientationTransform, inner: OrientationTransform) -> OrientationTransform:
    """Transform equivalent to applying ``inner`` first, then ``outer``."""
    perm = tuple(inner.perm[outer.perm[j]] for j in range(3))
    flips = tuple(outer.flips[j] ^ inner.flips[outer.perm[j]] for j in range(3))
    return OrientationTransform(perm, flips)


def invert(t: OrientationTransform) -> OrientationTransform:
    perm_inv = tuple(int(i) for i in np.argsort(t.perm))
    flips = tuple(t.flips[perm_inv[k]] for k in range(3))
    return OrientationTransform(perm_inv, flips)


def apply_transform(v: np.ndarray, t: OrientationTransform) -> np.ndarray:
    out = np.transpose(v, t.perm)
    flip_axes = tuple(i for i in range(3) if t.flips[i])
    if flip_axes:
        out = np.flip(out, axis=flip_axes)
    return np.ascontiguousarray(out)


def window_clip(v, lo, hi) -> np.ndarray:
    """Linearly map ``[lo, hi]`` onto ``[0, 1]`` and clamp."""
    if not lo < hi:
        raise InvalidWindowError(f"window requires lo < hi, got lo={lo}, hi={hi}")
    out = (np.asarray(v, dtype=np.float64) - lo) / (hi - lo)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


# --------------------------------------------------------------------------
# file I/O

_KINDS = ("intensity", "mask")


def _stem(path) -> Path:
    path = Path(path)
    if path.suffix in (".vol", ".json"):
        path = path.with_suffix("")
    return path


def volume_paths(path):
    stem = _stem(path)
    return stem.with_name(stem.name + ".vol"), stem.with_name(stem.name + ".json")


def save_volume(path, v, kind="intensity"):
    """Write ``<stem>.vol`` (raw f32le, x-fastest) and ``<stem>.json``."""
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}")
    v = np.asarray(v)
    if v.ndim != 3:
        raise ValueError(f"expected a 3D array, got shape {v.shape}")
    vol_path, json_path = volume_paths(path)
    vol_path.parent.mkdir(parents=True, exist_ok=True)
    payload = v.astype("<f4").ravel(order="F")
    vol_path.write_bytes(payload.tobytes())
    header = {
        "dims": [int(n) for n in v.shape],
        "order": "x-fastest",
        "dtype": "f32le",
        "kind": kind,
    }
    json_path.write_text(json.dumps(header))
    return vol_path, json_path


def save_mask(path, m):
    return save_volume(path, np.asarray(m, dtype=bool), kind="mask")


def _read_header(json_path):
    try:
        header = json.loads(Path(json_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise VolumeFormatError(f"cannot read header {json_path}: {exc}") from exc
    if not isinstance(header, dict):
        raise VolumeFormatError("header must be a JSON object")
    dims = header.get("dims")
    if (
        not isinstance(dims, list)
        or len(dims) != 3
        or not all(isinstance(n, int) and not isinstance(n, bool) and n > 0 for n in dims)
    ):
        raise VolumeFormatError(f"malformed dims {dims!r}")
    if header.get("order", "x-fastest") != "x-fastest":
        raise VolumeFormatError(f"unsupported order {header.get('order')!r}")
    if header.get("dtype") != "f32le":
        raise VolumeFormatError(f"unsupported dtype {header.get('dtype')!r}")
    if header.get("kind", "intensity") not in _KINDS:
        raise VolumeFormatError(f"unknown kind {header.get('kind')!r}")
    return header


def load_volume(path, kind=None) -> np.ndarray:
    """Read a volume written by :func:`save_volume`.

    Masks (``kind == "mask"`` in the header) come back as ``bool`` arrays,
    everything else as ``float32``.
    """
    vol_path, json_path = volume_paths(path)
    header = _read_header(json_path)
    if kind is not None and header.get("kind", "intensity") != kind:
        raise VolumeFormatError(f"expected kind {kind!r}, header says {header.get('kind')!r}")
    dims = tuple(header["dims"])
    raw = Path(vol_path).read_bytes()
    n = int(np.prod(dims))
    if len(raw) != 4 * n:
        raise VolumeFormatError(
            f"payload holds {len(raw) / 4:g} values, header dims {dims} need {n}"
        )
    data = np.frombuffer(raw, dtype="<f4").astype(np.float32)
    v = data.reshape(dims, order="F")
    if header.get("kind") == "mask":
        if not np.all((v == 0) | (v == 1)):
            raise VolumeFormatError("mask payload contains values other than 0 and 1")
        return v.astype(bool)
    return np.ascontiguousarray(v)


def load_mask(path) -> np.ndarray:
    return load_volume(path, kind="mask")
