import itertools

import numpy as np
import pytest

from oracles import in_capsule, naive_mip
from vesselmip.errors import PhantomGenerationError
from vesselmip.metrics import overlap_metrics
from vesselmip.phantom import (PhantomConfig, generate, standard_config, standard_suite,
                               suite_branch_count)
from vesselmip.projection import mip
from vesselmip.voxcore import Axis


def straight_tube_config(**kw):
    params = dict(dims=(12, 12, 20), branch_count=1, radius_range=(2.0, 2.0), curvature=0.0,
                  segment_length=(12.0, 12.0), root=(5.5, 6.0, 3.0), direction=(0.0, 0.0, 1.0),
                  noise_amplitude=0.0)
    params.update(kw)
    return PhantomConfig(**params)


def test_straight_tube_matches_analytic_membership():
    p = generate(3, straight_tube_config())
    a, b = np.array([5.5, 6.0, 3.0]), np.array([5.5, 6.0, 15.0])
    for idx in itertools.product(*(range(n) for n in p.gt.shape)):
        assert p.gt[idx] == in_capsule(idx, a, b, 2.0), idx
    # away from the caps the cross-section is a plain disc
    disc = [(x, y) for x in range(12) for y in range(12) if (x - 5.5) ** 2 + (y - 6) ** 2 <= 4]
    assert sorted(map(tuple, np.argwhere(p.gt[:, :, 9]))) == disc


def test_straight_tube_centerline_is_the_axis():
    p = generate(0, straight_tube_config())
    assert p.centerline[:, 2].tolist() == list(range(3, 16))
    assert set(p.centerline[:, 1].tolist()) == {6}


def test_generate_is_deterministic():
    cfg = standard_config((32, 32, 32), branch_count=5, occluder_count=2)
    p, q = generate(11, cfg), generate(11, cfg)
    assert p.intensity.tobytes() == q.intensity.tobytes()
    assert np.array_equal(p.gt, q.gt) and np.array_equal(p.centerline, q.centerline)
    assert np.array_equal(p.occluders, q.occluders)
    assert not np.array_equal(generate(12, cfg).gt, p.gt)


def test_intensity_structure():
    cfg = standard_config((32, 32, 32), occluder_count=3, noise_amplitude=0.2)
    p = generate(4, cfg)
    assert p.intensity.dtype == np.float32
    assert np.all(p.intensity[p.gt] == 1.0)
    assert np.all(p.intensity[p.occluders] == 1.0)
    assert not np.any(p.occluders & p.gt)
    background = p.intensity[~(p.gt | p.occluders)]
    assert background.min() >= 0 and background.max() <= 0.2


def test_centerline_inside_gt():
    for p in standard_suite(5, dims=(32, 32, 32)):
        c = p.centerline
        assert p.gt[c[:, 0], c[:, 1], c[:, 2]].all()


@pytest.mark.parametrize("axis", list(Axis))
def test_noise_free_mip_support_equals_gt_projection(axis):
    p = generate(2, standard_config((24, 24, 24), noise_amplitude=0.0))
    img, _, _ = naive_mip(p.intensity, axis)
    gt_img, _, _ = naive_mip(p.gt.astype(np.float32), axis)
    assert np.array_equal(img > 0, gt_img > 0)


def test_ray_maximum_attained_inside_gt():
    for p in standard_suite(3, dims=(32, 32, 32)):
        for axis in Axis:
            img, d = mip(p.intensity, axis)
            g = np.moveaxis(p.gt, axis, -1)
            hit = g.any(-1)
            at_fw = np.take_along_axis(g, d.z_fw[..., None], -1)[..., 0]
            at_bw = np.take_along_axis(g, d.z_bw[..., None], -1)[..., 0]
            assert np.all(at_fw[hit]) and np.all(at_bw[hit])


def test_config_validation():
    with pytest.raises(ValueError):
        PhantomConfig(radius_range=(0.5, 2.0))
    with pytest.raises(ValueError):
        PhantomConfig(noise_amplitude=1.0)
    with pytest.raises(ValueError):
        PhantomConfig(branch_count=0)
    cfg = standard_config((16, 16, 16), occluder_count=1)
    assert PhantomConfig.from_dict(cfg.to_dict()) == cfg


def test_tree_that_cannot_fit_raises():
    cfg = PhantomConfig(dims=(8, 8, 8), segment_length=(40.0, 40.0))
    with pytest.raises(PhantomGenerationError):
        generate(0, cfg)


def test_suite_of_one():
    suite = standard_suite(1)
    assert len(suite) == 1 and suite[0].seed == 0 and suite[0].gt.shape == (64, 64, 64)
    with pytest.raises(ValueError):
        standard_suite(0)


def test_standard_suite_distinct_and_sparse():
    suite = standard_suite(20)
    assert [p.seed for p in suite] == list(range(20))
    for p in suite:
        assert 3 <= p.config.branch_count <= 6
        assert 0.005 <= p.gt.mean() <= 0.10
    for p, q in itertools.combinations(suite, 2):
        assert overlap_metrics(p.gt, q.gt)[0] < 1


def test_suite_branch_counts_cover_range():
    assert {suite_branch_count(s) for s in range(50)} == {3, 4, 5, 6}
