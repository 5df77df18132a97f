"""Seeded random-walk generators for time-varying problem streams.

All randomness flows through ``RngStream``, a thin wrapper over numpy's
counter-based Philox bit generator, so a stream regenerated from the same
(seed, config) pair is bit-identical. Every generator documents its draw
order; changing that order is a breaking change for reproducibility.

Drift model: each tracked quantity takes independent uniform[-1, 1] steps
scaled by ``eta``. Symmetric matrices drift by a mirrored-upper-triangle
uniform perturbation and are pushed back onto ``min_eig >= floor`` by
adding a multiple of the identity whenever the perturbation dips below the
floor (the shift is exact: eigenvalues translate under identity shifts).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ShapeError
from .numerics import as_matrix, as_vector, min_eigenvalue_symmetric
from .problem import ProblemInstance, QuadraticForm
from .sharing import SharingProblem
from .lasso import LassoProblem


class RngStream:
    """Seeded Philox stream; ``derive`` offsets the key for per-trial use."""

    def __init__(self, seed: int):
        if int(seed) != seed or seed < 0:
            raise DomainError(f"seed must be a nonnegative integer, got {seed}")
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.Philox(key=self.seed))

    def derive(self, offset: int) -> "RngStream":
        return RngStream(self.seed + int(offset))

    def uniform(self, low: float, high: float, size=None) -> np.ndarray:
        return self.generator.uniform(low, high, size=size)

    def normal(self, scale: float, size=None) -> np.ndarray:
        return self.generator.normal(0.0, scale, size=size)

    def distinct_indices(self, n: int, k: int) -> np.ndarray:
        return np.sort(self.generator.choice(n, size=k, replace=False))


def _check_eta(eta: float) -> float:
    if not np.isfinite(eta) or eta < 0.0:
        raise DomainError(f"eta must be nonnegative, got {eta}")
    return float(eta)


def _check_floor(floor: float) -> float:
    if not np.isfinite(floor) or floor <= 0.0:
        raise DomainError(f"floor must be positive, got {floor}")
    return float(floor)


def symmetric_uniform(p: int, rng: RngStream) -> np.ndarray:
    """Symmetric matrix with uniform[-1, 1] entries: draw a full square,
    keep the upper triangle, mirror it."""
    raw = rng.uniform(-1.0, 1.0, size=(p, p))
    return np.triu(raw) + np.triu(raw, 1).T


def floor_spd(candidate: np.ndarray, floor: float) -> np.ndarray:
    """Shift by the identity onto ``min_eig >= floor`` when needed.

    The trigger carries a 1e-12 relative slack so that a matrix already
    sitting on the floor is returned bit-identically instead of being
    nudged by eigensolver roundoff (zero-drift streams must be constant).
    """
    smallest = min_eigenvalue_symmetric(candidate)
    if smallest >= floor - 1e-12 * (1.0 + abs(floor)):
        return candidate
    return candidate + (floor - smallest) * np.eye(candidate.shape[0])


def init_spd(p: int, floor: float, rng: RngStream) -> np.ndarray:
    """Fresh symmetric uniform draw, floored."""
    return floor_spd(symmetric_uniform(p, rng), _check_floor(floor))


def drift_spd(prev, eta: float, floor: float, rng: RngStream) -> np.ndarray:
    """One random-walk step ``prev + eta * symmetric_uniform``, floored."""
    prev = as_matrix(prev)
    return floor_spd(prev + _check_eta(eta) * symmetric_uniform(prev.shape[0], rng), _check_floor(floor))


def init_point(p: int, rng: RngStream) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=p)


def drift_point(prev, eta: float, rng: RngStream) -> np.ndarray:
    prev = as_vector(prev)
    return prev + _check_eta(eta) * rng.uniform(-1.0, 1.0, size=prev.shape[0])


def init_design(m: int, p: int, rng: RngStream) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(m, p))


def drift_design(prev, eta: float, rng: RngStream) -> np.ndarray:
    prev = as_matrix(prev)
    return prev + _check_eta(eta) * rng.uniform(-1.0, 1.0, size=prev.shape)


@dataclass(frozen=True)
class GroundTruth:
    """Sparse reference signal: fixed support, dense value vector that is
    exactly zero off support."""

    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64)
        values = as_vector(self.values)
        if support.ndim != 1 or support.size == 0:
            raise ShapeError("support must be a nonempty index vector")
        if np.unique(support).size != support.size:
            raise ShapeError("support indices must be distinct")
        if support.min() < 0 or support.max() >= values.shape[0]:
            raise ShapeError("support index out of range")
        off = np.setdiff1d(np.arange(values.shape[0]), support)
        if np.any(values[off] != 0.0):
            raise ShapeError("off-support entries must be exactly zero")
        object.__setattr__(self, "support", np.sort(support))
        object.__setattr__(self, "values", values)


def init_ground_truth(p: int, q: int, rng: RngStream) -> GroundTruth:
    """Pick q distinct support indices, fill them with uniform[0, 1]."""
    if not 1 <= q <= p:
        raise DomainError(f"need 1 <= q <= p, got q={q}, p={p}")
    support = rng.distinct_indices(p, q)
    values = np.zeros(p)
    values[support] = rng.uniform(0.0, 1.0, size=q)
    return GroundTruth(support, values)


def drift_ground_truth(prev: GroundTruth, eta: float, rng: RngStream) -> GroundTruth:
    """Random-walk the support entries; the support itself never moves."""
    values = prev.values.copy()
    values[prev.support] += _check_eta(eta) * rng.uniform(-1.0, 1.0, size=prev.support.size)
    return GroundTruth(prev.support, values)


def sample_observation(design, truth: GroundTruth, sigma: float, rng: RngStream) -> np.ndarray:
    """Noisy linear measurement ``design @ truth.values + sigma * gaussian``."""
    design = as_matrix(design)
    if not np.isfinite(sigma) or sigma < 0.0:
        raise DomainError(f"sigma must be nonnegative, got {sigma}")
    clean = design @ truth.values
    if sigma == 0.0:
        return clean
    return clean + rng.normal(sigma, size=design.shape[0])


@dataclass(frozen=True)
class SharingStreamConfig:
    """n quadratic blocks of size p, drift scale eta, eigenvalue floor,
    shared l1 price gamma."""

    n: int
    p: int
    eta: float
    floor: float
    gamma: float


def sharing_stream(cfg: SharingStreamConfig, steps: int, rng: RngStream) -> list[SharingProblem]:
    """Per step and per block, in block order: weight draw then center draw.

    The first emitted slice uses the freshly initialized data; later slices
    drift from their predecessor.
    """
    out = []
    weights = [init_spd(cfg.p, cfg.floor, rng) for _ in range(cfg.n)]
    centers = [init_point(cfg.p, rng) for _ in range(cfg.n)]
    for _ in range(steps):
        if out:
            weights = [drift_spd(w, cfg.eta, cfg.floor, rng) for w in weights]
            centers = [drift_point(c, cfg.eta, rng) for c in centers]
        blocks = tuple(QuadraticForm(w, c) for w, c in zip(weights, centers))
        out.append(SharingProblem(blocks, cfg.gamma))
    return out


@dataclass(frozen=True)
class LassoStreamConfig:
    """m observations of a p-dimensional q-sparse walk, drift scale eta,
    observation noise sigma, l1 weight gamma."""

    m: int
    p: int
    q: int
    eta: float
    sigma: float
    gamma: float


def lasso_stream(
    cfg: LassoStreamConfig, steps: int, rng: RngStream
) -> list[tuple[LassoProblem, GroundTruth]]:
    """Per step: design drift, truth drift, then the noise draw."""
    out: list[tuple[LassoProblem, GroundTruth]] = []
    design = init_design(cfg.m, cfg.p, rng)
    truth = init_ground_truth(cfg.p, cfg.q, rng)
    for _ in range(steps):
        if out:
            design = drift_design(design, cfg.eta, rng)
            truth = drift_ground_truth(truth, cfg.eta, rng)
        target = sample_observation(design, truth, cfg.sigma, rng)
        out.append((LassoProblem(design, target, cfg.gamma), truth))
    return out


@dataclass(frozen=True)
class QuadStreamConfig:
    """Fully quadratic stream over R^dim on both blocks."""

    dim: int
    eta: float
    floor: float


def quadratic_stream(
    cfg: QuadStreamConfig, steps: int, rng: RngStream, b_matrix=None
) -> list[ProblemInstance]:
    """Both objective terms are floored quadratic walks; the coupling is a
    fixed uniform[-1, 1] square A (redrawn until comfortably nonsingular),
    B = -I unless overridden by a nonsingular ``b_matrix``, and c = 0.

    Per-step draw order: f weight, f center, g weight, g center.
    """
    if b_matrix is None:
        B = -np.eye(cfg.dim)
    else:
        B = as_matrix(b_matrix)
        if B.shape != (cfg.dim, cfg.dim):
            raise ShapeError(f"b_matrix must be {(cfg.dim, cfg.dim)}, got {B.shape}")
        singular_values = np.linalg.svd(B, compute_uv=False)
        if singular_values[-1] <= 1e-12 * singular_values[0]:
            raise ShapeError("b_matrix is singular")
    A = rng.uniform(-1.0, 1.0, size=(cfg.dim, cfg.dim))
    while True:
        singular_values = np.linalg.svd(A, compute_uv=False)
        if singular_values[-1] > 1e-8 * singular_values[0]:
            break
        A = rng.uniform(-1.0, 1.0, size=(cfg.dim, cfg.dim))
    c = np.zeros(cfg.dim)
    out: list[ProblemInstance] = []
    f_weight = init_spd(cfg.dim, cfg.floor, rng)
    f_center = init_point(cfg.dim, rng)
    g_weight = init_spd(cfg.dim, cfg.floor, rng)
    g_center = init_point(cfg.dim, rng)
    for k in range(1, steps + 1):
        if out:
            f_weight = drift_spd(f_weight, cfg.eta, cfg.floor, rng)
            f_center = drift_point(f_center, cfg.eta, rng)
            g_weight = drift_spd(g_weight, cfg.eta, cfg.floor, rng)
            g_center = drift_point(g_center, cfg.eta, rng)
        out.append(
            ProblemInstance(
                k=k,
                f=QuadraticForm(f_weight, f_center),
                g=QuadraticForm(g_weight, g_center),
                A=A,
                B=B,
                c=c,
            )
        )
    return out
