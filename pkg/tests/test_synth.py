import numpy as np
import pytest

from dynadmm.exceptions import DomainError, ShapeError
from dynadmm.numerics import min_eigenvalue_symmetric
from dynadmm.synth import (
    GroundTruth,
    LassoStreamConfig,
    QuadStreamConfig,
    RngStream,
    SharingStreamConfig,
    drift_design,
    drift_ground_truth,
    drift_point,
    drift_spd,
    init_design,
    init_ground_truth,
    init_point,
    init_spd,
    lasso_stream,
    quadratic_stream,
    sample_observation,
    sharing_stream,
    symmetric_uniform,
)


def test_rng_stream_reproducibility_and_derivation():
    a = RngStream(42).uniform(-1.0, 1.0, size=100)
    b = RngStream(42).uniform(-1.0, 1.0, size=100)
    np.testing.assert_array_equal(a, b)
    c = RngStream(40).derive(2).uniform(-1.0, 1.0, size=100)
    np.testing.assert_array_equal(a, c)
    assert not np.array_equal(a, RngStream(43).uniform(-1.0, 1.0, size=100))
    with pytest.raises(DomainError):
        RngStream(-1)
    with pytest.raises(DomainError):
        RngStream(1.5)


def test_symmetric_uniform_is_symmetric_and_bounded():
    rng = RngStream(1)
    for _ in range(20):
        sym = symmetric_uniform(6, rng)
        np.testing.assert_array_equal(sym, sym.T)
        assert np.abs(sym).max() <= 1.0


def test_spd_walk_respects_the_eigenvalue_floor():
    rng = RngStream(2)
    floor = 1.0
    mat = init_spd(5, floor, rng)
    assert min_eigenvalue_symmetric(mat) >= floor - 1e-9
    for _ in range(1000):
        mat = drift_spd(mat, 0.2, floor, rng)
        assert min_eigenvalue_symmetric(mat) >= floor - 1e-9


def test_floor_shift_is_exact_identity_translation():
    # when the candidate dips below the floor, the repaired matrix sits
    # exactly on it (eigenvalues translate under identity shifts)
    rng = RngStream(3)
    shifted = 0
    mat = init_spd(4, 1.0, rng)
    for _ in range(300):
        candidate = mat + 0.5 * symmetric_uniform(4, rng)
        smallest = min_eigenvalue_symmetric(candidate)
        repaired = candidate if smallest >= 1.0 else candidate + (1.0 - smallest) * np.eye(4)
        if smallest < 1.0:
            shifted += 1
            assert min_eigenvalue_symmetric(repaired) == pytest.approx(1.0, abs=1e-9)
        mat = repaired
    assert shifted > 0


def test_drift_spd_with_zero_eta_is_a_fixed_point():
    rng = RngStream(4)
    mat = init_spd(4, 1.0, rng)
    np.testing.assert_array_equal(drift_spd(mat, 0.0, 1.0, rng), mat)
    with pytest.raises(DomainError):
        drift_spd(mat, -0.1, 1.0, rng)
    with pytest.raises(DomainError):
        drift_spd(mat, 0.1, 0.0, rng)


def test_point_and_design_walk_ranges():
    rng = RngStream(5)
    point = init_point(8, rng)
    assert np.all(np.abs(point) <= 1.0)
    stepped = drift_point(point, 0.3, rng)
    assert np.all(np.abs(stepped - point) <= 0.3)
    design = init_design(4, 6, rng)
    assert design.shape == (4, 6) and np.abs(design).max() <= 1.0
    stepped_design = drift_design(design, 0.05, rng)
    assert np.all(np.abs(stepped_design - design) <= 0.05)


def test_uniform_and_gaussian_moments_monte_carlo():
    rng = RngStream(6)
    draws = rng.uniform(-1.0, 1.0, size=200_000)
    assert abs(draws.mean()) < 0.01
    assert draws.var() == pytest.approx(1.0 / 3.0, abs=0.01)
    noise = rng.normal(0.5, size=200_000)
    assert abs(noise.mean()) < 0.01
    assert noise.var() == pytest.approx(0.25, abs=0.01)


def test_ground_truth_walk_keeps_support_and_exact_zeros():
    rng = RngStream(7)
    truth = init_ground_truth(p=30, q=2, rng=rng)
    assert truth.support.size == 2
    assert np.all(truth.values[truth.support] >= 0.0)
    assert np.all(truth.values[truth.support] <= 1.0)
    off = np.setdiff1d(np.arange(30), truth.support)
    for _ in range(200):
        stepped = drift_ground_truth(truth, 0.1, rng)
        np.testing.assert_array_equal(stepped.support, truth.support)
        assert np.all(stepped.values[off] == 0.0)
        assert np.all(np.abs(stepped.values - truth.values) <= 0.1 + 1e-15)
        truth = stepped


def test_ground_truth_validation():
    with pytest.raises(DomainError):
        init_ground_truth(p=3, q=0, rng=RngStream(8))
    with pytest.raises(DomainError):
        init_ground_truth(p=3, q=4, rng=RngStream(8))
    with pytest.raises(ShapeError):
        GroundTruth(np.array([0, 0]), np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ShapeError):
        GroundTruth(np.array([5]), np.array([1.0, 0.0]))
    with pytest.raises(ShapeError):
        GroundTruth(np.array([0]), np.array([1.0, 0.5]))


def test_sample_observation_clean_and_noisy():
    rng = RngStream(9)
    truth = init_ground_truth(p=5, q=2, rng=rng)
    design = init_design(3, 5, rng)
    clean = sample_observation(design, truth, 0.0, rng)
    np.testing.assert_array_equal(clean, design @ truth.values)
    rows = np.array([sample_observation(design, truth, 0.1, rng) for _ in range(20_000)])
    residual = rows - design @ truth.values
    assert residual.std() == pytest.approx(0.1, abs=0.005)
    with pytest.raises(DomainError):
        sample_observation(design, truth, -0.1, rng)


def test_sharing_stream_shape_floor_and_reproducibility():
    cfg = SharingStreamConfig(n=4, p=3, eta=0.2, floor=1.0, gamma=1.0)
    first = sharing_stream(cfg, 10, RngStream(10))
    again = sharing_stream(cfg, 10, RngStream(10))
    assert len(first) == 10
    for sp, sp2 in zip(first, again):
        assert sp.n == 4 and sp.p == 3
        for blk, blk2 in zip(sp.blocks, sp2.blocks):
            np.testing.assert_array_equal(blk.weight, blk2.weight)
            np.testing.assert_array_equal(blk.center, blk2.center)
            assert min_eigenvalue_symmetric(blk.weight) >= 1.0 - 1e-9


def test_sharing_stream_is_constant_under_zero_eta():
    cfg = SharingStreamConfig(n=2, p=2, eta=0.0, floor=1.0, gamma=1.0)
    slices = sharing_stream(cfg, 5, RngStream(11))
    for sp in slices[1:]:
        for blk, blk0 in zip(sp.blocks, slices[0].blocks):
            np.testing.assert_array_equal(blk.weight, blk0.weight)
            np.testing.assert_array_equal(blk.center, blk0.center)


def test_lasso_stream_drift_and_reproducibility():
    cfg = LassoStreamConfig(m=5, p=12, q=2, eta=0.1, sigma=0.1, gamma=0.2)
    first = lasso_stream(cfg, 8, RngStream(12))
    again = lasso_stream(cfg, 8, RngStream(12))
    assert len(first) == 8
    support = first[0][1].support
    for (lp, truth), (lp2, truth2) in zip(first, again):
        np.testing.assert_array_equal(lp.design, lp2.design)
        np.testing.assert_array_equal(lp.target, lp2.target)
        np.testing.assert_array_equal(truth.values, truth2.values)
        np.testing.assert_array_equal(truth.support, support)
    for (lp_prev, _), (lp_next, _) in zip(first, first[1:]):
        assert np.all(np.abs(lp_next.design - lp_prev.design) <= 0.1)


def test_quadratic_stream_fixed_coupling_and_floors():
    cfg = QuadStreamConfig(dim=4, eta=0.3, floor=1.0)
    stream = quadratic_stream(cfg, 12, RngStream(13))
    assert [inst.k for inst in stream] == list(range(1, 13))
    A0, B0 = stream[0].A, stream[0].B
    np.testing.assert_array_equal(B0, -np.eye(4))
    for inst in stream:
        np.testing.assert_array_equal(inst.A, A0)
        np.testing.assert_array_equal(inst.B, B0)
        np.testing.assert_array_equal(inst.c, np.zeros(4))
        assert min_eigenvalue_symmetric(inst.f.weight) >= 1.0 - 1e-9
        assert min_eigenvalue_symmetric(inst.g.weight) >= 1.0 - 1e-9
    again = quadratic_stream(cfg, 12, RngStream(13))
    for inst, inst2 in zip(stream, again):
        np.testing.assert_array_equal(inst.f.weight, inst2.f.weight)
        np.testing.assert_array_equal(inst.g.center, inst2.g.center)


def test_quadratic_stream_b_override():
    cfg = QuadStreamConfig(dim=3, eta=0.1, floor=0.5)
    B = np.diag([2.0, -1.0, 0.5])
    stream = quadratic_stream(cfg, 3, RngStream(14), b_matrix=B)
    np.testing.assert_array_equal(stream[0].B, B)
    with pytest.raises(ShapeError):
        quadratic_stream(cfg, 3, RngStream(14), b_matrix=np.zeros((3, 3)))
    with pytest.raises(ShapeError):
        quadratic_stream(cfg, 3, RngStream(14), b_matrix=np.eye(2))
