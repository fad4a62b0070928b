"""Command line interface: ``vesselmip <subcommand>``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import render
from .depthmap import DEFAULT_TAU, reconstruct
from .errors import VesselMipError
from .harness import (CSV_COLUMNS, Condition, ExperimentConfig, build_supervision,
                      failed_cells, random_axis, render_report, run)
from .metrics import evaluate, fill_holes
from .optimfit import FitConfig, fit
from .phantom import Phantom, PhantomConfig, generate, standard_config
from .projection import depth_enhanced_mip, derive_annotation, mip
from .voxcore import Axis, load_mask, load_volume, save_mask, save_volume

log = logging.getLogger("vesselmip")


def _stem_path(stem, suffix):
    stem = Path(stem)
    return stem.with_name(stem.name + suffix)


def write_phantom(p: Phantom, stem):
    save_volume(stem, p.intensity)
    save_mask(_stem_path(stem, "_gt"), p.gt)
    _stem_path(stem, "_centerline.json").write_text(json.dumps(p.centerline.tolist()))
    meta = {"seed": p.seed, "config": p.config.to_dict()}
    _stem_path(stem, "_meta.json").write_text(json.dumps(meta, indent=2))


def read_phantom(stem) -> Phantom:
    meta = json.loads(_stem_path(stem, "_meta.json").read_text())
    centerline = np.array(json.loads(_stem_path(stem, "_centerline.json").read_text()), dtype=np.int64)
    return Phantom(load_volume(stem, kind="intensity"), load_mask(_stem_path(stem, "_gt")),
                   centerline.reshape(-1, 3), meta["seed"], PhantomConfig.from_dict(meta["config"]))


def cmd_gen(args):
    params = json.loads(Path(args.config).read_text()) if args.config else {}
    for key in ("branch_count", "noise_amplitude", "occluder_count", "curvature"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    dims = tuple(args.dims or params.get("dims", (64, 64, 64)))
    params.pop("dims", None)
    p = generate(args.seed, standard_config(dims, **params))
    write_phantom(p, args.out)
    log.info("phantom seed %d: %d vessel voxels, %d centerline voxels",
             p.seed, int(p.gt.sum()), len(p.centerline))


def cmd_project(args):
    v = load_volume(args.volume)
    axis = Axis.parse(args.axis)
    image, depth = mip(v, axis)
    p_fw, p_bw = depth_enhanced_mip(v, axis)
    out = args.out
    render.save_png16(f"{out}_mip.png", image)
    render.save_png16(f"{out}_pfw.png", p_fw)
    render.save_png16(f"{out}_pbw.png", p_bw)
    render.save_depth(f"{out}_zfw", depth.z_fw)
    render.save_depth(f"{out}_zbw", depth.z_bw)


def cmd_annotate(args):
    gt = load_mask(args.gt)
    render.save_annotation(args.out, derive_annotation(gt, args.axis))


def cmd_depthmap(args):
    v = load_volume(args.volume)
    a = render.load_annotation(args.annotation)
    save_mask(args.out, reconstruct(a, v, args.tau))


def cmd_fit(args):
    p = read_phantom(args.phantom)
    cond = Condition.parse(args.cond)
    cfg = FitConfig(steps=args.steps, learning_rate=args.lr, smoothing_sigma=args.sigma,
                    seed=args.seed)
    if cond.kind == "full3d":
        result = fit(p.gt, cfg)
    else:
        axes = (random_axis(args.seed, p.seed),) if cond.kind == "random" else cond.axes
        supervision = build_supervision(p, cond, axes, args.alpha, args.tau)
        result = fit(supervision, cfg, shape=p.gt.shape)
    save_mask(_stem_path(args.out, "_pred"), result.mask)
    with open(_stem_path(args.out, "_trace.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "total", "term_2d", "term_depth"])
        for step, total, t2, td in result.trace_rows():
            w.writerow([step, f"{total:.10g}", f"{t2:.10g}", f"{td:.10g}"])


def cmd_eval(args):
    pred = load_mask(args.pred)
    gt = load_mask(args.gt)
    centerline = np.array(json.loads(Path(args.centerline).read_text()), dtype=np.int64)
    if args.fill:
        pred = fill_holes(pred)
    report = evaluate(pred, gt, centerline).to_dict()
    text = json.dumps(report, indent=2)
    if args.json:
        Path(args.json).write_text(text)
    else:
        print(text)
    if args.csv:
        path = Path(args.csv)
        new = not path.exists()
        with open(path, "a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(CSV_COLUMNS)
            w.writerow([args.seed, args.condition, int(args.fill)]
                       + [f"{report[m]:.10g}" for m in CSV_COLUMNS[3:]])


def cmd_bench(args):
    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.output_dir = args.out
    if not cfg.output_dir:
        raise SystemExit("bench needs --out or output_dir in the config")
    results = run(cfg)
    render_report(results, cfg.output_dir, cfg, sample=cfg.render_sample)
    for r in results:
        head = r.aggregate["headline"]["dice"]
        log.info("%-10s dice %s", r.condition,
                 "n/a" if head["mean"] is None else f"{head['mean']:.4f} +- {head['std']:.4f}")
    failed = failed_cells(results)
    for c in failed:
        log.error("failed cell: phantom %d, %s: %s", c.phantom_seed, c.condition, c.error)
    return 1 if failed else 0


def build_parser():
    ap = argparse.ArgumentParser(prog="vesselmip", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic vessel phantom")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output stem")
    g.add_argument("--config", help="JSON file with PhantomConfig fields")
    g.add_argument("--dims", type=int, nargs=3)
    g.add_argument("--branches", dest="branch_count", type=int)
    g.add_argument("--noise", dest="noise_amplitude", type=float)
    g.add_argument("--occluders", dest="occluder_count", type=int)
    g.add_argument("--curvature", type=float)
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("project", help="MIP, depth-enhanced MIPs and depth images")
    p.add_argument("--volume", required=True)
    p.add_argument("--axis", default="z", choices=["x", "y", "z"])
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_project)

    a = sub.add_parser("annotate", help="2D annotation from a ground-truth mask")
    a.add_argument("--gt", required=True)
    a.add_argument("--axis", default="z", choices=["x", "y", "z"])
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_annotate)

    d = sub.add_parser("depthmap", help="lift an annotation into a partial 3D mask")
    d.add_argument("--volume", required=True)
    d.add_argument("--annotation", required=True)
    d.add_argument("--tau", type=float, default=DEFAULT_TAU)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_depthmap)

    defaults = FitConfig()
    f = sub.add_parser("fit", help="fit a logit field to a phantom under one condition")
    f.add_argument("--phantom", required=True, help="stem written by `gen`")
    f.add_argument("--cond", default="rand1+d",
                   help="3d, fixed1:<axis>, fixed2:<axes>, fixed3, rand1 or rand1+d")
    f.add_argument("--alpha", type=float, default=0.5)
    f.add_argument("--tau", type=float, default=DEFAULT_TAU)
    f.add_argument("--steps", type=int, default=defaults.steps)
    f.add_argument("--lr", type=float, default=defaults.learning_rate)
    f.add_argument("--sigma", type=float, default=defaults.smoothing_sigma)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True, help="output prefix")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", help="score a predicted mask")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--centerline", required=True)
    e.add_argument("--fill", action="store_true", help="fill holes before scoring")
    e.add_argument("--json", help="write the report here instead of stdout")
    e.add_argument("--csv", help="append a row to this CSV")
    e.add_argument("--seed", type=int, default=-1, help="phantom seed for the CSV row")
    e.add_argument("--condition", default="", help="condition label for the CSV row")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run an experiment config")
    b.add_argument("--config", required=True)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args) or 0
    except (VesselMipError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
