"""Alternating direction method of multipliers for streams of coupled
two-block problems.

One pass over a time-step instance performs, in order,

    x  <-  argmin_x  f(x) + lam^T A x + rho/2 ||A x + B z - c||^2
    z  <-  argmin_z  g(z) + lam^T B z + rho/2 ||A x+ + B z - c||^2
    lam <- lam + rho (A x+ + B z+ - c)

where x+ / z+ denote freshly updated values. Both minimizations are in
closed form: smooth terms reduce to symmetric positive definite solves,
the scaled l1 term reduces to entrywise soft thresholding (available when
``B`` is the negative identity and ``c`` is zero).

In dynamic operation the pass runs exactly once per incoming instance and
the state is warm started from the previous slice; there is no inner loop
and no stop rule. Iterating a fixed instance until a residual stop rule is
the static regime, used by the oracle layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .exceptions import DomainError, ShapeError, UnsupportedOperationError
from .numerics import SpdFactor, as_vector
from .problem import (
    LeastSquares,
    ProblemInstance,
    QuadraticForm,
    ScaledL1,
    constraint_gap,
)


@dataclass(frozen=True)
class AdmmState:
    """Iterate triple ``(x, z, lam)`` plus the step counter ``k``."""

    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    k: int

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x))
        object.__setattr__(self, "z", as_vector(self.z))
        object.__setattr__(self, "lam", as_vector(self.lam))
        if self.lam.shape != self.z.shape:
            raise ShapeError(
                f"multiplier has length {self.lam.shape[0]}, z has {self.z.shape[0]}"
            )
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"step counter must be a nonnegative integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class SolverConfig:
    """Penalty ``rho`` and operating mode.

    Dynamic mode runs one pass per instance; static mode (used by the
    oracle layer) iterates one fixed instance, reusing factorizations.
    """

    rho: float
    mode: Literal["dynamic", "static"] = "dynamic"

    def __post_init__(self):
        if not np.isfinite(self.rho) or self.rho <= 0.0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if self.mode not in ("dynamic", "static"):
            raise DomainError(f"mode must be 'dynamic' or 'static', got {self.mode!r}")


def initial_state(dim_x: int, dim_z: int) -> AdmmState:
    """All-zeros start: x0 = 0, z0 = 0, lam0 = 0, k = 0."""
    return AdmmState(np.zeros(dim_x), np.zeros(dim_z), np.zeros(dim_z), 0)


def soft_threshold(a, kappa: float) -> np.ndarray:
    """Entrywise shrinkage ``sign(a) * max(|a| - kappa, 0)``.

    Entries with ``|a| <= kappa`` map to exact zeros.

    Parameters
    ----------
    a : array_like
    kappa : float
        Threshold, must be positive.
    """
    if not np.isfinite(kappa) or kappa <= 0.0:
        raise DomainError(f"threshold must be positive, got {kappa}")
    a = np.asarray(a, dtype=np.float64)
    return np.sign(a) * np.maximum(np.abs(a) - kappa, 0.0)


def x_normal_matrix(inst: ProblemInstance, rho: float) -> np.ndarray:
    """Coefficient matrix of the x update's stationarity system."""
    if isinstance(inst.f, QuadraticForm):
        return 2.0 * inst.f.weight + rho * (inst.A.T @ inst.A)
    if isinstance(inst.f, LeastSquares):
        F = inst.f.design
        return F.T @ F + rho * (inst.A.T @ inst.A)
    raise UnsupportedOperationError("f is nonsmooth; the x update has no closed form")


def _x_rhs(inst: ProblemInstance, rho: float, z: np.ndarray, lam: np.ndarray) -> np.ndarray:
    if isinstance(inst.f, QuadraticForm):
        base = 2.0 * (inst.f.weight @ inst.f.center)
    else:
        base = inst.f.design.T @ inst.f.target
    return base - inst.A.T @ lam + rho * (inst.A.T @ (inst.c - inst.B @ z))


def x_update(
    state: AdmmState,
    inst: ProblemInstance,
    rho: float,
    factor: Optional[SpdFactor] = None,
) -> np.ndarray:
    """Minimize the augmented Lagrangian over x at fixed ``(z, lam)``.

    Parameters
    ----------
    state : AdmmState
        Supplies the current ``z`` and ``lam``.
    inst : ProblemInstance
        Instance with smooth ``f`` (quadratic or least squares).
    rho : float
        Penalty, positive.
    factor : SpdFactor, optional
        Cached factorization of ``x_normal_matrix(inst, rho)``; pass it when
        iterating a fixed instance to avoid refactorizing.

    Returns
    -------
    numpy.ndarray
        The unique stationary point of the x subproblem.
    """
    if rho <= 0.0 or not np.isfinite(rho):
        raise DomainError(f"rho must be positive, got {rho}")
    if factor is None:
        factor = SpdFactor(x_normal_matrix(inst, rho))
    return factor.solve(_x_rhs(inst, rho, state.z, state.lam))


def z_normal_matrix(inst: ProblemInstance, rho: float) -> np.ndarray:
    """Coefficient matrix of the quadratic z update's stationarity system."""
    if isinstance(inst.g, QuadraticForm):
        return 2.0 * inst.g.weight + rho * (inst.B.T @ inst.B)
    raise UnsupportedOperationError("z normal matrix exists only for quadratic g")


def _is_negated_identity(B: np.ndarray) -> bool:
    return B.shape[0] == B.shape[1] and np.array_equal(B, -np.eye(B.shape[0]))


def z_update(
    state: AdmmState,
    inst: ProblemInstance,
    rho: float,
    x_new,
    factor: Optional[SpdFactor] = None,
) -> np.ndarray:
    """Minimize the augmented Lagrangian over z at fixed ``(x_new, lam)``.

    For ``ScaledL1`` g the closed form is soft thresholding and requires
    ``B = -I`` and ``c = 0``; other couplings raise
    ``UnsupportedOperationError``. For ``QuadraticForm`` g any ``B`` works
    through a symmetric positive definite solve.
    """
    if rho <= 0.0 or not np.isfinite(rho):
        raise DomainError(f"rho must be positive, got {rho}")
    x_new = as_vector(x_new)
    if isinstance(inst.g, ScaledL1):
        if not _is_negated_identity(inst.B) or np.any(inst.c != 0.0):
            raise UnsupportedOperationError(
                "soft-threshold z update needs B = -I and c = 0"
            )
        return soft_threshold(inst.A @ x_new + state.lam / rho, inst.g.gamma / rho)
    if isinstance(inst.g, QuadraticForm):
        if factor is None:
            factor = SpdFactor(z_normal_matrix(inst, rho))
        rhs = (
            2.0 * (inst.g.weight @ inst.g.center)
            - inst.B.T @ state.lam
            + rho * (inst.B.T @ (inst.c - inst.A @ x_new))
        )
        return factor.solve(rhs)
    raise UnsupportedOperationError(
        "z update supports QuadraticForm or ScaledL1 g only"
    )


def dual_update(state: AdmmState, inst: ProblemInstance, rho: float, x_new, z_new) -> np.ndarray:
    """Multiplier ascent ``lam + rho (A x_new + B z_new - c)``."""
    if rho <= 0.0 or not np.isfinite(rho):
        raise DomainError(f"rho must be positive, got {rho}")
    return state.lam + rho * constraint_gap(inst, x_new, z_new)


def step(state: AdmmState, inst: ProblemInstance, config: SolverConfig) -> AdmmState:
    """One full x -> z -> lam pass; the step counter advances by one."""
    x_new = x_update(state, inst, config.rho)
    z_new = z_update(state, inst, config.rho, x_new)
    lam_new = dual_update(state, inst, config.rho, x_new, z_new)
    return AdmmState(x_new, z_new, lam_new, state.k + 1)


def run_dynamic(stream: Sequence[ProblemInstance], config: SolverConfig) -> list[AdmmState]:
    """Track a stream: one pass per instance, warm started throughout.

    Parameters
    ----------
    stream : sequence of ProblemInstance
        Time slices in order; all must share (dim_x, dim_z). An empty
        stream yields an empty list.
    config : SolverConfig
        Must have ``mode="dynamic"``.

    Returns
    -------
    list of AdmmState
        One state per instance, ``k`` counting from 1. The start is the
        all-zeros state.
    """
    if config.mode != "dynamic":
        raise DomainError(f"run_dynamic requires dynamic mode, got {config.mode!r}")
    stream = list(stream)
    if not stream:
        return []
    dims = (stream[0].dim_x, stream[0].dim_z)
    for idx, inst in enumerate(stream):
        if (inst.dim_x, inst.dim_z) != dims:
            raise ShapeError(
                f"stream instance {idx} has dims ({inst.dim_x}, {inst.dim_z}), "
                f"expected {dims}"
            )
    state = initial_state(*dims)
    out = []
    for inst in stream:
        state = step(state, inst, config)
        out.append(state)
    return out
