import numpy as np
import pytest

from vesselmip.depthmap import reconstruct
from vesselmip.errors import DimensionMismatchError
from vesselmip.phantom import standard_suite
from vesselmip.projection import Annotation2D, derive_annotation, mip
from vesselmip.voxcore import Axis


def single_ray(values, tau):
    v = np.asarray(values, dtype=np.float32).reshape(1, 1, -1)
    d = reconstruct(Annotation2D(Axis.Z, np.ones((1, 1), bool)), v, tau)
    return np.flatnonzero(d[0, 0]).tolist()


def test_flat_plateau_is_filled(backend):
    assert single_ray([0, 1, 1, 1, 0], 0.1) == [1, 2, 3]


def test_dip_blocks_fill(backend):
    assert single_ray([0, 1, 0.2, 1, 0], 0.1) == [1, 3]


def test_fill_boundary_is_inclusive(backend):
    # dip of exactly tau still fills (values exact in binary)
    assert single_ray([0, 1, 0.75, 1, 0], 0.25) == [1, 2, 3]
    assert single_ray([0, 1, 0.75, 1, 0], 0.125) == [1, 3]


def test_single_maximizer_marks_one_voxel(backend):
    assert single_ray([0.1, 0.9, 0.2], 0.05) == [1]


def test_empty_annotation_gives_empty_map(backend, rng):
    v = rng.random((4, 5, 6)).astype(np.float32)
    for axis in Axis:
        shape = [n for i, n in enumerate(v.shape) if i != axis]
        assert not reconstruct(Annotation2D(axis, np.zeros(shape, bool)), v).any()


def test_unannotated_rays_stay_empty(backend, rng):
    v = rng.random((4, 5, 6)).astype(np.float32)
    mask = rng.random((4, 6)) > 0.5
    d = reconstruct(Annotation2D(Axis.Y, mask), v, np.inf)
    assert np.array_equal(d.any(axis=1), mask)


def test_shape_and_tau_errors():
    v = np.zeros((4, 5, 6), dtype=np.float32)
    with pytest.raises(DimensionMismatchError):
        reconstruct(Annotation2D(Axis.Z, np.zeros((5, 4), bool)), v)
    with pytest.raises(ValueError):
        reconstruct(Annotation2D(Axis.Z, np.zeros((4, 5), bool)), v, -1.0)


@pytest.mark.parametrize("axis", list(Axis))
def test_tau_monotone_and_infinite_fill(backend, rng, axis):
    v = (rng.integers(0, 5, size=(6, 7, 8)) / 4).astype(np.float32)
    shape = [n for i, n in enumerate(v.shape) if i != axis]
    a = Annotation2D(axis, rng.random(shape) > 0.3)
    maps = [reconstruct(a, v, tau) for tau in (0.0, 0.1, 0.3, 0.6, np.inf)]
    for lo, hi in zip(maps, maps[1:]):
        assert not np.any(lo & ~hi)
    _, d = mip(v, axis)
    k = np.arange(v.shape[axis])
    span = (k >= d.z_fw[..., None]) & (k <= d.z_bw[..., None]) & a.mask[..., None]
    assert np.array_equal(np.moveaxis(maps[-1], axis, -1), span)


@pytest.mark.parametrize("axis", list(Axis))
def test_count_lower_bound_and_endpoints(rng, axis):
    v = (rng.integers(0, 3, size=(5, 6, 7)) / 2).astype(np.float32)
    shape = [n for i, n in enumerate(v.shape) if i != axis]
    a = Annotation2D(axis, rng.random(shape) > 0.4)
    dm = reconstruct(a, v, 0.0)
    _, d = mip(v, axis)
    distinct = a.mask & (d.z_fw != d.z_bw)
    same = a.mask & (d.z_fw == d.z_bw)
    assert dm.sum() >= 2 * distinct.sum() + same.sum()
    r = np.moveaxis(dm, axis, -1)
    assert np.all(np.take_along_axis(r, d.z_fw[..., None], -1)[..., 0][a.mask])
    assert np.all(np.take_along_axis(r, d.z_bw[..., None], -1)[..., 0][a.mask])


def test_soundness_on_suite():
    for p in standard_suite(20):
        for axis in Axis:
            a = derive_annotation(p.gt, axis)
            dm = reconstruct(a, p.intensity)
            assert not np.any(dm & ~p.gt)
            assert not np.any(dm.any(axis=int(axis)) & ~a.mask)
