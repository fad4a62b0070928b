import csv
import json

import numpy as np
import pytest

from vesselmip import render
from vesselmip.cli import main
from vesselmip.projection import mip
from vesselmip.voxcore import Axis, load_mask, load_volume


@pytest.fixture
def phantom(tmp_path):
    stem = tmp_path / "ph"
    assert main(["gen", "--seed", "3", "--dims", "20", "20", "20", "--out", str(stem)]) == 0
    return stem


def test_gen_outputs(phantom):
    v = load_volume(phantom, kind="intensity")
    gt = load_mask(phantom.with_name("ph_gt"))
    assert v.shape == gt.shape == (20, 20, 20) and gt.any()
    meta = json.loads(phantom.with_name("ph_meta.json").read_text())
    assert meta["seed"] == 3 and meta["config"]["dims"] == [20, 20, 20]


def test_gen_is_deterministic(tmp_path, phantom):
    main(["gen", "--seed", "3", "--dims", "20", "20", "20", "--out", str(tmp_path / "again")])
    assert (tmp_path / "again.vol").read_bytes() == phantom.with_suffix(".vol").read_bytes()


def test_project(tmp_path, phantom):
    out = tmp_path / "proj"
    assert main(["project", "--volume", str(phantom), "--axis", "y", "--out", str(out)]) == 0
    v = load_volume(phantom)
    image, depth = mip(v, Axis.Y)
    assert np.array_equal(render.load_depth(f"{out}_zfw"), depth.z_fw)
    assert np.array_equal(render.load_depth(f"{out}_zbw"), depth.z_bw)
    assert np.max(np.abs(render.load_png16(f"{out}_mip.png") - image)) <= 0.5 / 65535 + 1e-12
    for name in ("pfw", "pbw"):
        assert (tmp_path / f"proj_{name}.png").exists()


def test_annotate_depthmap_fit_eval(tmp_path, phantom):
    gt = phantom.with_name("ph_gt")
    ann = tmp_path / "ann"
    assert main(["annotate", "--gt", str(gt), "--axis", "x", "--out", str(ann)]) == 0
    a = render.load_annotation(ann)
    assert a.axis == Axis.X and np.array_equal(a.mask, load_mask(gt).any(axis=0))

    dm = tmp_path / "dm"
    assert main(["depthmap", "--volume", str(phantom), "--annotation", str(ann),
                 "--out", str(dm)]) == 0
    d = load_mask(dm)
    assert d.any() and not np.any(d & ~load_mask(gt))

    out = tmp_path / "run"
    assert main(["fit", "--phantom", str(phantom), "--cond", "rand1+d", "--steps", "120",
                 "--out", str(out)]) == 0
    with open(tmp_path / "run_trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "total", "term_2d", "term_depth"] and len(rows) == 121

    report = tmp_path / "report.json"
    table = tmp_path / "table.csv"
    assert main(["eval", "--pred", str(tmp_path / "run_pred"), "--gt", str(gt),
                 "--centerline", str(phantom.with_name("ph_centerline.json")), "--fill",
                 "--json", str(report), "--csv", str(table), "--seed", "3",
                 "--condition", "rand1+d"]) == 0
    r = json.loads(report.read_text())
    assert 0 < r["dice"] <= 1
    lines = table.read_text().splitlines()
    assert lines[0].split(",")[:3] == ["phantom_seed", "condition", "filled"]
    assert lines[1].startswith("3,rand1+d,1,")


def test_eval_prints_to_stdout(tmp_path, phantom, capsys):
    gt = phantom.with_name("ph_gt")
    assert main(["eval", "--pred", str(gt), "--gt", str(gt), "--centerline",
                 str(phantom.with_name("ph_centerline.json"))]) == 0
    assert json.loads(capsys.readouterr().out)["dice"] == 1.0


def test_bench_exit_codes(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"suite_size": 2, "phantom": {"dims": [16, 16, 16]},
                               "conditions": ["rand1", "fixed2"], "fit": {"steps": 10}}))
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert len((tmp_path / "b" / "results.csv").read_text().splitlines()) == 5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"suite_size": 1, "phantom": {"dims": [16, 16, 16]},
                               "conditions": ["rand1"],
                               "fit": {"steps": 2, "init_logit": float("nan")}}))
    assert main(["bench", "--config", str(bad), "--out", str(tmp_path / "c")]) == 1


def test_errors_give_exit_code_2(tmp_path):
    assert main(["project", "--volume", str(tmp_path / "missing"), "--out", str(tmp_path / "x")]) == 2
    (tmp_path / "broken.json").write_text(json.dumps({"dims": [2, 2, 2], "order": "x-fastest",
                                                      "dtype": "f32le", "kind": "intensity"}))
    (tmp_path / "broken.vol").write_bytes(b"\0" * 12)
    assert main(["project", "--volume", str(tmp_path / "broken"), "--out", str(tmp_path / "x")]) == 2
