import numpy as np
import pytest
from scipy.linalg import det

from dynadmm.exceptions import NumericalError, ShapeError
from dynadmm.numerics import (
    SpdFactor,
    as_matrix,
    as_vector,
    max_eigenvalue_symmetric,
    min_eigenvalue_symmetric,
    solve_spd,
    spectral_norm,
)


def philox(seed):
    return np.random.Generator(np.random.Philox(key=seed))


def random_symmetric(p, gen):
    raw = gen.uniform(-1.0, 1.0, size=(p, p))
    return np.triu(raw) + np.triu(raw, 1).T


def random_spd(p, gen, shift=1.0):
    root = gen.uniform(-1.0, 1.0, size=(p, p))
    return root.T @ root + shift * np.eye(p)


# Frozen 4x4 case: Philox(7) upper triangle mirrored; expected value computed
# by sign bisection of det(M - t I) (smallest root of the characteristic
# polynomial), independent of the eigensolver route.
FROZEN_SYM = np.array(
    [
        [0.74414690964097452, -0.40926923697243289, -0.15980464298551555, -0.18921550843201085],
        [-0.40926923697243289, 0.39326578525645428, -0.40728481493476476, 0.24112402290809065],
        [-0.15980464298551555, -0.40728481493476476, 0.67070110735691957, 0.066212534919123822],
        [-0.18921550843201085, 0.24112402290809065, 0.066212534919123822, 0.53800648597466383],
    ]
)
FROZEN_MIN_EIG = -0.1397717054874344


def char_poly_min_root(sym, step=1e-3, iters=200):
    # det(M - tI) > 0 strictly below the spectrum; first sign change brackets
    # the smallest root.
    n = sym.shape[0]
    t = min(sym[i, i] - np.abs(sym[i]).sum() + abs(sym[i, i]) for i in range(n))
    while det(sym - t * np.eye(n)) > 0:
        t += step
    hi, lo = t, t - step
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if det(sym - mid * np.eye(n)) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_min_eigenvalue_matches_char_poly_bisection():
    got = min_eigenvalue_symmetric(FROZEN_SYM)
    assert got == pytest.approx(FROZEN_MIN_EIG, abs=1e-9)
    assert got == pytest.approx(char_poly_min_root(FROZEN_SYM), abs=1e-9)


def test_eigen_extremes_on_diagonal_matrices():
    diag = np.diag([1.0, 2.0, 3.0])
    assert min_eigenvalue_symmetric(diag) == pytest.approx(1.0)
    assert max_eigenvalue_symmetric(diag) == pytest.approx(3.0)
    assert min_eigenvalue_symmetric(np.eye(5)) == pytest.approx(1.0)
    assert max_eigenvalue_symmetric(np.eye(5)) == pytest.approx(1.0)


def test_identity_shift_moves_both_extremes():
    gen = philox(11)
    for _ in range(50):
        p = int(gen.integers(2, 9))
        sym = random_symmetric(p, gen)
        shift = float(gen.uniform(-3.0, 3.0))
        assert min_eigenvalue_symmetric(sym + shift * np.eye(p)) == pytest.approx(
            min_eigenvalue_symmetric(sym) + shift, abs=1e-10
        )
        assert max_eigenvalue_symmetric(sym + shift * np.eye(p)) == pytest.approx(
            max_eigenvalue_symmetric(sym) + shift, abs=1e-10
        )


def test_eigen_extremes_bound_rayleigh_quotients():
    gen = philox(12)
    for _ in range(50):
        p = int(gen.integers(2, 9))
        sym = random_symmetric(p, gen)
        lo = min_eigenvalue_symmetric(sym)
        hi = max_eigenvalue_symmetric(sym)
        for _ in range(10):
            v = gen.normal(size=p)
            quot = (v @ sym @ v) / (v @ v)
            assert lo - 1e-10 <= quot <= hi + 1e-10


def test_eigen_routines_reject_asymmetric_and_non_square():
    with pytest.raises(ShapeError):
        min_eigenvalue_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ShapeError):
        min_eigenvalue_symmetric(np.ones((2, 3)))
    # asymmetry below the relative tolerance is repaired, not rejected
    almost = np.eye(3)
    almost[0, 1] = 1e-12
    assert min_eigenvalue_symmetric(almost) == pytest.approx(1.0)


def test_spectral_norm_values_and_properties():
    assert spectral_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0)
    assert spectral_norm(np.array([[0.0, 2.0, 0.0]])) == pytest.approx(2.0)
    gen = philox(13)
    for _ in range(50):
        rows = int(gen.integers(1, 7))
        cols = int(gen.integers(1, 7))
        mat = gen.uniform(-2.0, 2.0, size=(rows, cols))
        norm = spectral_norm(mat)
        assert norm == pytest.approx(spectral_norm(mat.T), abs=1e-12)
        scale = float(gen.uniform(-3.0, 3.0))
        assert spectral_norm(scale * mat) == pytest.approx(abs(scale) * norm, abs=1e-10)
        v = gen.normal(size=cols)
        assert np.linalg.norm(mat @ v) <= norm * np.linalg.norm(v) + 1e-10


def test_spectral_norm_of_symmetric_is_largest_abs_eigenvalue():
    gen = philox(14)
    for _ in range(25):
        sym = random_symmetric(int(gen.integers(2, 8)), gen)
        expected = max(abs(min_eigenvalue_symmetric(sym)), abs(max_eigenvalue_symmetric(sym)))
        assert spectral_norm(sym) == pytest.approx(expected, abs=1e-10)


def test_solve_spd_two_by_two_hand_case():
    got = solve_spd(np.array([[3.0, 1.0], [1.0, 3.0]]), np.array([2.0, 2.0]))
    np.testing.assert_allclose(got, [0.5, 0.5], atol=1e-12)


def test_solve_spd_residual_postcondition_bulk():
    gen = philox(15)
    for _ in range(1000):
        p = int(gen.integers(1, 21))
        mat = random_spd(p, gen, shift=float(gen.uniform(0.1, 2.0)))
        rhs = gen.uniform(-5.0, 5.0, size=p)
        x = solve_spd(mat, rhs)
        assert np.linalg.norm(mat @ x - rhs) <= 1e-9 * (1.0 + np.linalg.norm(rhs))


def test_solve_spd_rejects_indefinite_and_singular():
    with pytest.raises(NumericalError) as err:
        solve_spd(np.array([[1.0, 2.0], [2.0, 1.0]]), np.array([1.0, 1.0]))
    assert "positive definite" in str(err.value)
    with pytest.raises(NumericalError):
        solve_spd(np.zeros((2, 2)), np.array([1.0, 1.0]))


def test_spd_factor_reuse_matches_fresh_solves():
    gen = philox(16)
    mat = random_spd(6, gen)
    factor = SpdFactor(mat)
    for _ in range(10):
        rhs = gen.normal(size=6)
        np.testing.assert_allclose(factor.solve(rhs), solve_spd(mat, rhs), atol=1e-12)
    with pytest.raises(ShapeError):
        factor.solve(np.ones(5))


def test_array_coercion_rejects_bad_input():
    with pytest.raises(ShapeError):
        as_matrix(np.ones((0, 2)))
    with pytest.raises(ShapeError):
        as_matrix(np.array([[np.nan, 1.0], [1.0, 1.0]]))
    with pytest.raises(ShapeError):
        as_vector(np.ones((2, 2)))
    with pytest.raises(ShapeError):
        as_vector(np.array([np.inf]))
