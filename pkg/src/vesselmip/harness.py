"""Config-driven viewpoint experiments over phantom suites.

Each (phantom, condition) cell is an independent fit. Conditions:

``full3d``          voxelwise supervision with the complete ground truth
``fixed1:<axis>``   one fixed view (default ``z``)
``fixed2:<axes>``   two fixed views (default ``xy``)
``fixed3``          all three views
``rand1``           one view per phantom, drawn from the master seed
``rand1+d``         the same view plus its depth map
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import render
from .depthmap import DEFAULT_TAU, reconstruct
from .errors import VesselMipError
from .metrics import MetricsReport, evaluate, fill_holes
from .optimfit import FitConfig, fit
from .phantom import Phantom, generate, standard_config, suite_branch_count
from .projection import depth_enhanced_mip, derive_annotation, mip
from .supervision import SupervisionBundle
from .voxcore import Axis

log = logging.getLogger(__name__)

CSV_COLUMNS = ["phantom_seed", "condition", "filled", "dice", "precision", "recall",
               "skeleton_recall", "msd"]
METRICS = ["dice", "precision", "recall", "skeleton_recall", "msd"]


@dataclass(frozen=True)
class Condition:
    id: str
    kind: str  # "full3d", "fixed" or "random"
    axes: tuple = ()
    depth: bool = False

    @property
    def single_fixed(self):
        return self.kind == "fixed" and len(self.axes) == 1

    @classmethod
    def parse(cls, text) -> "Condition":
        s = str(text).strip().lower()
        name, _, arg = s.partition(":")
        if name in ("3d", "full3d"):
            return cls("full3d", "full3d")
        if name in ("rand1", "rand1vp", "rand1-d", "rand1vp-d"):
            return cls("rand1", "random")
        if name in ("rand1+d", "rand1vp+d", "rand1vp+depth"):
            return cls("rand1+d", "random", depth=True)
        defaults = {"fixed1": "z", "fixed1vp": "z", "fixed2": "xy", "fixed2vp": "xy",
                    "fixed3": "xyz", "fixed3vp": "xyz"}
        if name in defaults:
            count = int(name[5])
            letters = arg or defaults[name]
            axes = tuple(sorted({Axis.parse(c) for c in letters}))
            if len(axes) != count or len(letters) != count:
                raise ValueError(f"condition {text!r} needs {count} distinct axes")
            ident = f"fixed{count}:" + "".join(a.label for a in axes)
            return cls(ident if count < 3 else "fixed3", "fixed", axes)
        raise ValueError(f"unknown condition {text!r}")


@dataclass
class ExperimentConfig:
    suite_size: int = 20
    phantom: dict = field(default_factory=lambda: {"dims": [64, 64, 64]})
    conditions: list = field(default_factory=lambda: ["rand1", "rand1+d"])
    alpha: float = 0.5
    tau: float = DEFAULT_TAU
    fit: dict = field(default_factory=dict)
    output_dir: str | None = None
    master_seed: int = 0
    render_sample: list = field(default_factory=list)
    workers: int = 1

    def __post_init__(self):
        if not self.conditions:
            raise ValueError("at least one condition is required")
        if self.suite_size < 1:
            raise ValueError("suite_size must be >= 1")
        self.conditions = [Condition.parse(c).id for c in self.conditions]
        if isinstance(self.fit, FitConfig):
            self.fit = self.fit.to_dict()

    @property
    def fit_config(self) -> FitConfig:
        return FitConfig.from_dict(self.fit)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class CellResult:
    phantom_seed: int
    condition: str
    axes: tuple
    raw: MetricsReport | None
    filled: MetricsReport | None
    headline_filled: bool
    error: str | None = None

    @property
    def failed(self):
        return self.error is not None

    def headline(self):
        return self.filled if self.headline_filled else self.raw


@dataclass
class ConditionResult:
    condition: str
    cells: list
    aggregate: dict


# --------------------------------------------------------------------------


def suite_phantom(seed, cfg: ExperimentConfig) -> Phantom:
    params = dict(cfg.phantom)
    dims = tuple(params.pop("dims", (64, 64, 64)))
    params.setdefault("branch_count", suite_branch_count(seed))
    return generate(seed, standard_config(dims, **params))


def random_axis(master_seed, phantom_seed) -> Axis:
    """The single viewpoint drawn for a phantom; fixed for all its conditions."""
    return Axis(int(np.random.default_rng([int(master_seed), int(phantom_seed)]).integers(3)))


def cell_seed(master_seed, phantom_seed, condition_id):
    tag = zlib.crc32(condition_id.encode())
    return int(np.random.SeedSequence([int(master_seed), int(phantom_seed), tag]).generate_state(1)[0])


def condition_axes(cond: Condition, cfg: ExperimentConfig, phantom_seed):
    if cond.kind == "random":
        return (random_axis(cfg.master_seed, phantom_seed),)
    return cond.axes


def build_supervision(p: Phantom, cond: Condition, axes, alpha, tau):
    """Annotations from the ground truth; the depth map from the intensities only."""
    annotations = [derive_annotation(p.gt, a) for a in axes]
    depth = None
    if cond.depth:
        depth = np.zeros(p.gt.shape, dtype=bool)
        for a in annotations:
            depth |= reconstruct(a, p.intensity, tau)
    return SupervisionBundle(annotations, depth, alpha)


def run_cell(p: Phantom, cond: Condition, cfg: ExperimentConfig, keep_outputs=False):
    axes = condition_axes(cond, cfg, p.seed)
    fit_cfg = FitConfig.from_dict({**cfg.fit_config.to_dict(),
                                   "seed": cell_seed(cfg.master_seed, p.seed, cond.id)})
    supervision = None
    try:
        if cond.kind == "full3d":
            result = fit(p.gt, fit_cfg)
        else:
            supervision = build_supervision(p, cond, axes, cfg.alpha, cfg.tau)
            result = fit(supervision, fit_cfg, shape=p.gt.shape)
    except VesselMipError as exc:
        log.warning("phantom %d, condition %s failed: %s", p.seed, cond.id, exc)
        cell = CellResult(p.seed, cond.id, tuple(int(a) for a in axes), None, None,
                          not cond.single_fixed, f"{type(exc).__name__}: {exc}")
        return (cell, None) if keep_outputs else cell
    raw = evaluate(result.mask, p.gt, p.centerline)
    filled_mask = fill_holes(result.mask)
    filled = evaluate(filled_mask, p.gt, p.centerline)
    cell = CellResult(p.seed, cond.id, tuple(int(a) for a in axes), raw, filled,
                      not cond.single_fixed)
    if keep_outputs:
        return cell, {"supervision": supervision, "result": result, "filled": filled_mask}
    return cell


def _run_phantom(seed, cfg: ExperimentConfig):
    p = suite_phantom(seed, cfg)
    return [run_cell(p, Condition.parse(c), cfg) for c in cfg.conditions]


def _summary(values):
    vals = np.array([v for v in values if v is not None and not math.isnan(v)], dtype=float)
    if len(vals) == 0:
        return {"mean": None, "std": None, "n": 0}
    return {"mean": float(vals.mean()), "std": float(vals.std()), "n": int(len(vals))}


def aggregate(cells):
    ok = [c for c in cells if not c.failed]
    out = {"n": len(cells), "failed": [c.phantom_seed for c in cells if c.failed]}
    for which in ("raw", "filled", "headline"):
        reports = [c.headline() if which == "headline" else getattr(c, which) for c in ok]
        out[which] = {m: _summary([getattr(r, m) for r in reports]) for m in METRICS}
    out["headline_filled"] = bool(cells[0].headline_filled) if cells else True
    return out


def run(cfg: ExperimentConfig) -> list:
    """Run every (phantom, condition) cell; results ordered like ``cfg.conditions``."""
    seeds = list(range(cfg.suite_size))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            per_phantom = list(pool.map(_run_phantom, seeds, [cfg] * len(seeds)))
    else:
        per_phantom = [_run_phantom(s, cfg) for s in seeds]
    cells = sorted((c for row in per_phantom for c in row),
                   key=lambda c: (c.phantom_seed, c.condition))
    results = []
    for cond in cfg.conditions:
        mine = [c for c in cells if c.condition == cond]
        results.append(ConditionResult(cond, mine, aggregate(mine)))
    return results


# --------------------------------------------------------------------------
# reports


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.10g}"


def _row(cell: CellResult, filled: bool):
    report = cell.filled if filled else cell.raw
    values = [_fmt(None if report is None else getattr(report, m)) for m in METRICS]
    return [cell.phantom_seed, cell.condition, int(filled), *values]


def csv_text(results, both=False) -> str:
    """Headline rows (one per cell) or, with ``both``, raw and filled rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    cells = sorted((c for r in results for c in r.cells), key=lambda c: (c.phantom_seed, c.condition))
    for c in cells:
        if both:
            w.writerow(_row(c, False))
            w.writerow(_row(c, True))
        else:
            w.writerow(_row(c, c.headline_filled))
    return buf.getvalue()


def render_report(results, out_dir, cfg: ExperimentConfig | None = None, sample=()):
    """Write ``results.csv``, ``prepost.csv``, ``aggregate.json`` and sample renders."""
    if not results:
        raise ValueError("no results to report")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(csv_text(results))
        (out / "prepost.csv").write_text(csv_text(results, both=True))
        summary = {
            "conditions": {r.condition: r.aggregate for r in results},
            "config": cfg.to_dict() if cfg is not None else None,
        }
        (out / "aggregate.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    except OSError as exc:
        raise VesselMipError(f"cannot write report to {out}: {exc}") from exc
    written = [out / "results.csv", out / "prepost.csv", out / "aggregate.json"]
    if sample:
        if cfg is None:
            raise ValueError("rendering samples needs the experiment config")
        for seed in sample:
            written.extend(render_sample(seed, cfg, out / "renders"))
    return written


def render_sample(seed, cfg: ExperimentConfig, out_dir):
    """PNG renders of one phantom under every condition of the experiment."""
    p = suite_phantom(seed, cfg)
    out = Path(out_dir)
    written = []
    for cond_id in cfg.conditions:
        cond = Condition.parse(cond_id)
        _, outputs = run_cell(p, cond, cfg, keep_outputs=True)
        axes = condition_axes(cond, cfg, seed) or (Axis.Z,)
        axis = axes[0]
        stem = out / f"{seed:03d}_{cond_id.replace(':', '-')}_{axis.label}"
        image, _ = mip(p.intensity, axis)
        p_fw, p_bw = depth_enhanced_mip(p.intensity, axis)
        written.append(render.save_png16(f"{stem}_mip.png", image))
        written.append(render.save_png16(f"{stem}_pfw.png", p_fw))
        written.append(render.save_png16(f"{stem}_pbw.png", p_bw))
        written.append(render.save_mask_png(f"{stem}_annotation.png", p.gt.any(axis=int(axis))))
        if outputs is None:
            continue
        s = outputs["supervision"]
        if s is not None and s.depth_map is not None:
            written.append(render.save_mask_png(f"{stem}_depthmap.png", s.depth_map.any(axis=int(axis))))
        written.append(render.save_mask_png(f"{stem}_pred.png", outputs["result"].mask.any(axis=int(axis))))
    return written


def failed_cells(results):
    return [c for r in results for c in r.cells if c.failed]
