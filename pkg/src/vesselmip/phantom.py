"""Seeded synthetic vessel-tree phantoms with exact ground truth.

A tree is grown from a trunk segment; each further branch sprouts from a
random point on an existing segment. Segments are piecewise-linear paths
with unit steps whose direction drifts by ``curvature``. A voxel is vessel
if its centre lies within the segment radius of the path. Vessel interiors
are intensity-flat so the per-ray maximum plateaus across a vessel.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PhantomGenerationError

RETRY_LIMIT = 100


@dataclass(frozen=True)
class PhantomConfig:
    dims: tuple = (64, 64, 64)
    branch_count: int = 4
    radius_range: tuple = (1.5, 4.0)
    vessel_intensity: float = 1.0
    noise_amplitude: float = 0.3
    occluder_count: int = 0
    curvature: float = 0.15
    segment_length: tuple = (24.0, 48.0)
    occluder_radius: tuple = (2.0, 4.0)
    # optional trunk placement, mainly for analytic test shapes
    root: tuple | None = None
    direction: tuple | None = None

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "radius_range", tuple(float(r) for r in self.radius_range))
        object.__setattr__(self, "segment_length", tuple(float(s) for s in self.segment_length))
        object.__setattr__(self, "occluder_radius", tuple(float(r) for r in self.occluder_radius))
        r_min, r_max = self.radius_range
        if len(dims) != 3 or min(dims) < 1:
            raise ValueError(f"invalid dims {dims}")
        if self.branch_count < 1:
            raise ValueError("branch_count must be >= 1")
        if not 1.0 <= r_min <= r_max:
            raise ValueError(f"radius_range must satisfy 1 <= r_min <= r_max, got {self.radius_range}")
        if not 0.0 < self.vessel_intensity <= 1.0:
            raise ValueError("vessel_intensity must lie in (0, 1]")
        if not 0.0 <= self.noise_amplitude < self.vessel_intensity:
            raise ValueError("noise_amplitude must lie in [0, vessel_intensity)")
        if self.occluder_count < 0 or self.curvature < 0:
            raise ValueError("occluder_count and curvature must be non-negative")
        lo, hi = self.segment_length
        if not 0 < lo <= hi:
            raise ValueError("segment_length must satisfy 0 < lo <= hi")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("dims", "radius_range", "segment_length", "occluder_radius", "root", "direction"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass
class Segment:
    path: np.ndarray  # (k, 3) points, unit spacing
    radius: float


@dataclass
class Phantom:
    intensity: np.ndarray
    gt: np.ndarray
    centerline: np.ndarray  # (n, 3) integer voxel coordinates, sorted
    seed: int
    config: PhantomConfig
    occluders: np.ndarray = field(default=None, repr=False)
    segments: list = field(default_factory=list, repr=False)


def _unit(v):
    return v / np.linalg.norm(v)


def _random_direction(rng):
    while True:
        d = rng.normal(size=3)
        n = np.linalg.norm(d)
        if n > 1e-6:
            return d / n


def _grow(rng, start, direction, length, curvature):
    steps = max(1, int(round(length)))
    pts = np.empty((steps + 1, 3))
    pts[0] = start
    d = _unit(np.asarray(direction, dtype=float))
    for i in range(1, steps + 1):
        if curvature > 0:
            d = _unit(d + curvature * rng.normal(size=3))
        pts[i] = pts[i - 1] + d
    return pts


def _inside(pts, dims, margin):
    hi = np.asarray(dims, dtype=float) - 1.0 - margin
    return bool(np.all(pts >= margin) and np.all(pts <= hi))


def _branch_direction(rng, tangent):
    # tilt the parent tangent by 30-75 degrees around a random perpendicular
    perp = np.cross(tangent, _random_direction(rng))
    while np.linalg.norm(perp) < 1e-6:
        perp = np.cross(tangent, _random_direction(rng))
    perp = _unit(perp)
    angle = np.deg2rad(rng.uniform(30.0, 75.0))
    return _unit(np.cos(angle) * tangent + np.sin(angle) * perp)


def grow_tree(rng, cfg: PhantomConfig):
    r_min, r_max = cfg.radius_range
    lo, hi = cfg.segment_length
    segments = []

    for _ in range(RETRY_LIMIT):
        radius = rng.uniform(0.5 * (r_min + r_max), r_max)
        margin = radius + 1.0
        if cfg.root is not None:
            start = np.asarray(cfg.root, dtype=float)
        else:
            start = np.array([rng.uniform(margin, n - 1 - margin) if n - 1 > 2 * margin else (n - 1) / 2
                              for n in cfg.dims])
        direction = cfg.direction if cfg.direction is not None else _random_direction(rng)
        path = _grow(rng, start, direction, rng.uniform(lo, hi), cfg.curvature)
        if _inside(path, cfg.dims, margin):
            segments.append(Segment(path, radius))
            break
    else:
        raise PhantomGenerationError(f"trunk did not fit inside {cfg.dims} after {RETRY_LIMIT} tries")

    for b in range(1, cfg.branch_count):
        for _ in range(RETRY_LIMIT):
            parent = segments[rng.integers(len(segments))]
            k = len(parent.path)
            i = int(rng.integers(max(1, k // 5), max(2, (4 * k) // 5)))
            i = min(i, k - 1)
            tangent = _unit(parent.path[i] - parent.path[i - 1])
            radius = rng.uniform(r_min, max(r_min, min(parent.radius, r_max)))
            path = _grow(rng, parent.path[i], _branch_direction(rng, tangent),
                         rng.uniform(lo, hi), cfg.curvature)
            if _inside(path, cfg.dims, radius + 1.0):
                segments.append(Segment(path, radius))
                break
        else:
            raise PhantomGenerationError(
                f"branch {b} did not fit inside {cfg.dims} after {RETRY_LIMIT} tries"
            )
    return segments


def _segment_distance(points, a, b):
    ab = b - a
    denom = float(ab @ ab)
    ap = points - a
    if denom == 0.0:
        return np.linalg.norm(ap, axis=-1)
    t = np.clip(ap @ ab / denom, 0.0, 1.0)
    return np.linalg.norm(ap - t[..., None] * ab, axis=-1)


def rasterize_tube(mask, path, radius):
    """Mark voxels whose centre lies within ``radius`` of the polyline ``path``."""
    dims = np.asarray(mask.shape)
    pieces = zip(path[:-1], path[1:]) if len(path) > 1 else [(path[0], path[0])]
    for a, b in pieces:
        lo = np.maximum(np.floor(np.minimum(a, b) - radius), 0).astype(int)
        hi = np.minimum(np.ceil(np.maximum(a, b) + radius), dims - 1).astype(int)
        if np.any(hi < lo):
            continue
        grid = np.stack(np.meshgrid(*(np.arange(l, h + 1) for l, h in zip(lo, hi)), indexing="ij"), -1)
        inside = _segment_distance(grid.astype(float), a, b) <= radius
        mask[lo[0]:hi[0] + 1, lo[1]:hi[1] + 1, lo[2]:hi[2] + 1] |= inside
    return mask


def rasterize_path(path, dims):
    """Voxels visited by the polyline, sampled at quarter-voxel spacing."""
    samples = [path[:1]]
    for a, b in zip(path[:-1], path[1:]):
        t = np.linspace(0.0, 1.0, 5)[1:, None]
        samples.append(a + t * (b - a))
    pts = np.rint(np.concatenate(samples)).astype(np.int64)
    pts = np.clip(pts, 0, np.asarray(dims) - 1)
    return np.unique(pts, axis=0)


def generate(seed, cfg: PhantomConfig | None = None) -> Phantom:
    cfg = cfg or PhantomConfig()
    rng = np.random.default_rng(int(seed))
    segments = grow_tree(rng, cfg)

    gt = np.zeros(cfg.dims, dtype=bool)
    for seg in segments:
        rasterize_tube(gt, seg.path, seg.radius)
    centerline = np.unique(
        np.concatenate([rasterize_path(seg.path, cfg.dims) for seg in segments]), axis=0
    )

    occluders = np.zeros(cfg.dims, dtype=bool)
    for _ in range(cfg.occluder_count):
        r = rng.uniform(*cfg.occluder_radius)
        c = np.array([rng.uniform(0, n - 1) for n in cfg.dims])
        rasterize_tube(occluders, c[None, :], r)
    occluders &= ~gt

    if cfg.noise_amplitude > 0:
        intensity = rng.uniform(0.0, cfg.noise_amplitude, size=cfg.dims).astype(np.float32)
    else:
        intensity = np.zeros(cfg.dims, dtype=np.float32)
    intensity[gt | occluders] = np.float32(cfg.vessel_intensity)

    return Phantom(intensity, gt, centerline, int(seed), cfg, occluders, segments)


def standard_config(dims=(64, 64, 64), branch_count=4, **overrides) -> PhantomConfig:
    """Suite defaults, with radii and segment lengths scaled to the grid size."""
    s = min(dims) / 64.0
    params = dict(
        dims=tuple(dims),
        branch_count=branch_count,
        radius_range=(max(1.0, 1.5 * s), max(2.0, 4.0 * s)),
        segment_length=(24.0 * s, 48.0 * s),
        occluder_radius=(max(1.0, 2.0 * s), max(1.0, 4.0 * s)),
    )
    params.update(overrides)
    return PhantomConfig(**params)


def suite_branch_count(seed):
    """Branch count used by the standard suite: 3 to 6, drawn from the seed."""
    return int(np.random.default_rng([int(seed), 0xB4A]).integers(3, 7))


def standard_suite(n, dims=(64, 64, 64), **overrides) -> list:
    """``n`` phantoms from seeds ``0..n-1`` with the standard configuration."""
    if n < 1:
        raise ValueError("suite size must be >= 1")
    return [
        generate(seed, standard_config(dims, branch_count=suite_branch_count(seed), **overrides))
        for seed in range(n)
    ]
