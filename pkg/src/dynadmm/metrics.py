"""Tracking-analysis quantities and runtime inequality audits.

Everything here measures a dynamic ADMM run against the optima of the
per-step problems.  The central object is the weighted pair norm

    ``|(z, lam)| = sqrt((rho/2)*|B z|^2 + (1/(2 rho))*|lam|^2)``

on (z, dual) pairs.  Under strong convexity of both objective terms and
a Lipschitz gradient for g, each ADMM pass contracts the pair-norm error
by ``1/sqrt(1 + delta)`` toward the current optimum, where ``delta``
depends on the convexity constants, and the error a drifting problem can
sustain is governed by the per-step optimum drift.  The audit helpers
return *margins*, bound minus observed quantity, so a nonnegative margin
certifies the corresponding inequality at that step.

Scaling conventions match :mod:`dynadmm.problem`: a ``QuadraticForm``
carries no 1/2 factor, so its strong-convexity modulus is twice the
smallest eigenvalue of the weight and its gradient-Lipschitz constant is
twice the largest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import DomainError, ShapeError, UnsupportedOperationError
from .numerics import as_matrix, as_vector, min_eigenvalue_symmetric, spectral_norm
from .oracle import OptimalTriple
from .problem import FunctionSpec, ProblemInstance, QuadraticForm, gradient, is_smooth
from .solver import AdmmState

__all__ = [
    "DualPair",
    "PairNormContext",
    "ConvexityConstants",
    "ContractionParams",
    "ErrorMargins",
    "SteadyStateBounds",
    "SteadyStateReport",
    "TrajectoryRecord",
    "pair_norm",
    "contraction_constant",
    "max_contraction",
    "drift",
    "optimum_displacement",
    "contraction_margin",
    "tracking_margin",
    "z_error_margin",
    "lam_error_margin",
    "primal_dual_margins",
    "steady_state_bounds",
    "sparsity_deviation",
    "constants_from_stream",
    "audit_trajectory",
    "trailing_max",
    "steady_state_report",
]

# Relative cutoff below which B is treated as singular.
_SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class DualPair:
    """A (z, lam) pair, the state the pair norm acts on.

    Both vectors live in the constraint space, so they share a length.
    """

    z: np.ndarray
    lam: np.ndarray

    def __post_init__(self) -> None:
        z = as_vector(self.z)
        lam = as_vector(self.lam)
        if z.shape != lam.shape:
            raise ShapeError(
                f"z has length {z.shape[0]} but lam has length {lam.shape[0]}"
            )
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "lam", lam)

    @property
    def dim(self) -> int:
        return self.z.shape[0]

    def difference(self, other: "DualPair") -> "DualPair":
        if other.dim != self.dim:
            raise ShapeError(
                f"cannot subtract pair of dimension {other.dim} from {self.dim}"
            )
        return DualPair(self.z - other.z, self.lam - other.lam)


@dataclass(frozen=True)
class PairNormContext:
    """Fixed data of the pair norm: the constraint matrix B and rho.

    B must be square and nonsingular, otherwise the norm would vanish on
    nonzero z directions and stop being a norm.
    """

    b_matrix: np.ndarray
    rho: float

    def __post_init__(self) -> None:
        b = as_matrix(self.b_matrix)
        if b.shape[0] != b.shape[1]:
            raise ShapeError(f"b_matrix must be square, got {b.shape}")
        if not (isinstance(self.rho, (int, float)) and math.isfinite(self.rho)):
            raise DomainError("rho must be a finite number")
        if self.rho <= 0.0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        svals = np.linalg.svd(b, compute_uv=False)
        if svals[-1] <= _SINGULAR_RTOL * max(svals[0], 1.0):
            raise DomainError(
                "b_matrix is singular to working precision; the pair norm "
                "requires a nonsingular B"
            )
        object.__setattr__(self, "b_matrix", b)
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "_b_norm", float(svals[0]))
        object.__setattr__(self, "_b_min_sv", float(svals[-1]))

    @property
    def dim(self) -> int:
        return self.b_matrix.shape[0]

    @property
    def b_norm(self) -> float:
        """Spectral norm of B."""
        return self._b_norm  # type: ignore[attr-defined]

    @property
    def b_min_eig(self) -> float:
        """Smallest eigenvalue of B^T B (squared smallest singular value)."""
        return self._b_min_sv**2  # type: ignore[attr-defined]


def pair_norm(pair: DualPair, ctx: PairNormContext) -> float:
    """Weighted norm sqrt((rho/2)|Bz|^2 + (1/(2 rho))|lam|^2)."""
    if pair.dim != ctx.dim:
        raise ShapeError(
            f"pair has dimension {pair.dim} but context expects {ctx.dim}"
        )
    bz = ctx.b_matrix @ pair.z
    val = 0.5 * ctx.rho * float(bz @ bz) + 0.5 / ctx.rho * float(pair.lam @ pair.lam)
    return math.sqrt(val)


@dataclass(frozen=True)
class ConvexityConstants:
    """Uniform curvature data of a problem stream.

    f_strong and g_strong are the strong-convexity moduli of the smooth
    terms f and g, g_lipschitz the Lipschitz constant of grad g, and
    b_min_eig the smallest eigenvalue of B^T B.  a_norm and b_norm are
    the spectral norms of the coupling matrices.
    """

    f_strong: float
    g_strong: float
    g_lipschitz: float
    b_min_eig: float
    a_norm: float
    b_norm: float

    def __post_init__(self) -> None:
        for name in ("f_strong", "g_strong", "g_lipschitz", "b_min_eig", "b_norm"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise DomainError(f"{name} must be a finite number")
            if value <= 0.0:
                raise DomainError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, float(value))
        if not (isinstance(self.a_norm, (int, float)) and math.isfinite(self.a_norm)):
            raise DomainError("a_norm must be a finite number")
        if self.a_norm < 0.0:
            raise DomainError(f"a_norm must be nonnegative, got {self.a_norm}")
        object.__setattr__(self, "a_norm", float(self.a_norm))
        if self.g_lipschitz < self.g_strong:
            raise DomainError(
                f"g_lipschitz ({self.g_lipschitz}) cannot be smaller than "
                f"g_strong ({self.g_strong})"
            )


def contraction_constant(consts: ConvexityConstants, rho: float, t: float) -> float:
    """Per-step contraction constant delta for a given split parameter t.

    delta = min(2*g_strong*t/(rho*b_norm^2),
                2*b_min_eig*rho*(1 - t)/g_lipschitz)  for t in (0, 1).
    """
    if not (isinstance(rho, (int, float)) and math.isfinite(rho) and rho > 0.0):
        raise DomainError(f"rho must be positive, got {rho}")
    if not (isinstance(t, (int, float)) and math.isfinite(t)):
        raise DomainError("t must be a finite number")
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must lie strictly inside (0, 1), got {t}")
    first = 2.0 * consts.g_strong * t / (rho * consts.b_norm**2)
    second = 2.0 * consts.b_min_eig * rho * (1.0 - t) / consts.g_lipschitz
    return min(first, second)


@dataclass(frozen=True)
class ContractionParams:
    """A split parameter with its contraction constant and the optimum."""

    t: float
    delta: float
    delta_max: float
    t_star: float

    def __post_init__(self) -> None:
        for name in ("t", "delta", "delta_max", "t_star"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise DomainError(f"{name} must be a finite number")
            object.__setattr__(self, name, float(value))
        if not 0.0 < self.t < 1.0:
            raise DomainError(f"t must lie strictly inside (0, 1), got {self.t}")
        if not 0.0 < self.t_star < 1.0:
            raise DomainError(
                f"t_star must lie strictly inside (0, 1), got {self.t_star}"
            )
        if self.delta <= 0.0 or self.delta_max <= 0.0:
            raise DomainError("delta and delta_max must be positive")
        # tiny slack: delta(t_star) equals delta_max in exact arithmetic
        if self.delta > self.delta_max * (1.0 + 1e-12):
            raise DomainError(
                f"delta ({self.delta}) exceeds delta_max ({self.delta_max})"
            )


def max_contraction(consts: ConvexityConstants, rho: float) -> ContractionParams:
    """Best split parameter and the largest achievable contraction constant.

    The two branches of the min in :func:`contraction_constant` are an
    increasing and a decreasing linear function of t, so the max sits at
    their crossing:

        t_star = b_min_eig*rho^2*b_norm^2 / (g_strong*g_lipschitz
                 + b_min_eig*rho^2*b_norm^2)
        delta_max = 2*g_strong*b_min_eig*rho / (g_strong*g_lipschitz
                    + b_min_eig*rho^2*b_norm^2)
    """
    if not (isinstance(rho, (int, float)) and math.isfinite(rho) and rho > 0.0):
        raise DomainError(f"rho must be positive, got {rho}")
    denom = consts.g_strong * consts.g_lipschitz + consts.b_min_eig * rho**2 * consts.b_norm**2
    t_star = consts.b_min_eig * rho**2 * consts.b_norm**2 / denom
    delta_max = 2.0 * consts.g_strong * consts.b_min_eig * rho / denom
    delta = contraction_constant(consts, rho, t_star)
    return ContractionParams(t=t_star, delta=delta, delta_max=delta_max, t_star=t_star)


def drift(
    z_opt_prev: np.ndarray,
    z_opt_cur: np.ndarray,
    g_prev: FunctionSpec,
    g_cur: FunctionSpec,
    ctx: PairNormContext,
    b_min_eig: Optional[float] = None,
) -> float:
    """Optimum drift between two consecutive problem instances.

        sqrt(rho/2)*|B|*|z*_prev - z*_cur|
        + 1/sqrt(2*rho*b_min_eig) * |grad g_prev(z*_prev) - grad g_cur(z*_cur)|

    Needs gradients of g at the optima, so both g terms must be smooth.
    For l1 regularizers use :func:`optimum_displacement` instead.
    """
    if not (is_smooth(g_prev) and is_smooth(g_cur)):
        raise UnsupportedOperationError(
            "drift needs the gradient of g at both optima; for a nonsmooth "
            "g track optimum_displacement instead"
        )
    z_prev = as_vector(z_opt_prev)
    z_cur = as_vector(z_opt_cur)
    if z_prev.shape != z_cur.shape:
        raise ShapeError(
            f"optima have mismatched lengths {z_prev.shape[0]} and {z_cur.shape[0]}"
        )
    alpha = ctx.b_min_eig if b_min_eig is None else float(b_min_eig)
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise DomainError(f"b_min_eig must be positive, got {alpha}")
    move = float(np.linalg.norm(z_prev - z_cur))
    grad_gap = float(np.linalg.norm(gradient(g_prev, z_prev) - gradient(g_cur, z_cur)))
    rho = ctx.rho
    return math.sqrt(0.5 * rho) * ctx.b_norm * move + grad_gap / math.sqrt(
        2.0 * rho * alpha
    )


def optimum_displacement(
    z_opt_prev: np.ndarray, z_opt_cur: np.ndarray, ctx: PairNormContext
) -> float:
    """Displacement part of the drift, sqrt(rho/2)*|B|*|z*_prev - z*_cur|.

    This is only the first of the two drift terms.  The gradient term has
    no meaning for a nonsmooth regularizer, so for l1 runs this is a
    descriptive statistic of how fast the optima move, not a certified
    drift value; tracking-bound audits stay disabled on such runs.
    """
    z_prev = as_vector(z_opt_prev)
    z_cur = as_vector(z_opt_cur)
    if z_prev.shape != z_cur.shape:
        raise ShapeError(
            f"optima have mismatched lengths {z_prev.shape[0]} and {z_cur.shape[0]}"
        )
    return math.sqrt(0.5 * ctx.rho) * ctx.b_norm * float(np.linalg.norm(z_prev - z_cur))


def contraction_margin(
    pair_cur: DualPair,
    pair_opt: DualPair,
    pair_prev: DualPair,
    delta: float,
    ctx: PairNormContext,
) -> float:
    """Single-step contraction audit toward the current optimum.

    Returns (1/sqrt(1+delta))*|u_prev - u*| - |u_cur - u*| in the pair
    norm.  Nonnegative means the step contracted at least as fast as the
    constant delta promises.
    """
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    err_cur = pair_norm(pair_cur.difference(pair_opt), ctx)
    err_prev = pair_norm(pair_prev.difference(pair_opt), ctx)
    return err_prev / math.sqrt(1.0 + delta) - err_cur


def tracking_margin(
    pair_cur: DualPair,
    pair_opt_cur: DualPair,
    pair_prev: DualPair,
    pair_opt_prev: DualPair,
    delta: float,
    drift_k: float,
    ctx: PairNormContext,
    *,
    k: int,
) -> float:
    """Dynamic tracking audit against the previous step's own optimum.

    Returns (1/sqrt(1+delta))*(|u_prev - u*_prev| + d_k) - |u_cur - u*_cur|.
    Only defined from the second step on, since d_k compares two optima.
    """
    if k < 2:
        raise DomainError(f"tracking margin is defined for k >= 2, got k={k}")
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    if drift_k < 0.0:
        raise DomainError(f"drift must be nonnegative, got {drift_k}")
    err_cur = pair_norm(pair_cur.difference(pair_opt_cur), ctx)
    err_prev = pair_norm(pair_prev.difference(pair_opt_prev), ctx)
    return (err_prev + drift_k) / math.sqrt(1.0 + delta) - err_cur


def z_error_margin(
    z_err: float, pair_err: float, consts: ConvexityConstants, rho: float
) -> float:
    """Margin of |z - z*| <= sqrt(2/(b_min_eig*rho)) * pair error."""
    _require_nonnegative(z_err, "z_err")
    _require_nonnegative(pair_err, "pair_err")
    if rho <= 0.0:
        raise DomainError(f"rho must be positive, got {rho}")
    return math.sqrt(2.0 / (consts.b_min_eig * rho)) * pair_err - z_err


def lam_error_margin(lam_err: float, pair_err: float, rho: float) -> float:
    """Margin of |lam - lam*| <= sqrt(2*rho) * pair error."""
    _require_nonnegative(lam_err, "lam_err")
    _require_nonnegative(pair_err, "pair_err")
    if rho <= 0.0:
        raise DomainError(f"rho must be positive, got {rho}")
    return math.sqrt(2.0 * rho) * pair_err - lam_err


@dataclass(frozen=True)
class ErrorMargins:
    """Margins of the primal/dual error bounds at one step."""

    x: float
    z: float
    lam: float

    def __post_init__(self) -> None:
        for name in ("x", "z", "lam"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise DomainError(f"{name} margin must be finite")
            object.__setattr__(self, name, float(value))


def primal_dual_margins(
    x_err: float,
    z_err: float,
    lam_err: float,
    pair_err: float,
    pair_err_prev: float,
    consts: ConvexityConstants,
    rho: float,
    drift_k: float,
    *,
    k: int,
) -> ErrorMargins:
    """Audit the x/z/lam error bounds implied by the pair-norm errors.

    The x bound needs the previous step's pair error and the drift, so it
    is defined for k >= 2 only; the z and lam bounds hold from k = 1 and
    are also exposed separately as :func:`z_error_margin` and
    :func:`lam_error_margin`.

        |x - x*|   <= (a_norm/f_strong) * ((sqrt(2 rho)
                      + b_norm*sqrt(2 rho/b_min_eig)) * e_k
                      + b_norm*sqrt(2 rho/b_min_eig) * e_{k-1}
                      + sqrt(2 rho) * d_k)
        |z - z*|   <= sqrt(2/(b_min_eig*rho)) * e_k
        |lam-lam*| <= sqrt(2 rho) * e_k

    with e_k the pair-norm error at step k.
    """
    if k < 2:
        raise DomainError(f"the x error bound is defined for k >= 2, got k={k}")
    _require_nonnegative(x_err, "x_err")
    _require_nonnegative(pair_err_prev, "pair_err_prev")
    if drift_k < 0.0:
        raise DomainError(f"drift must be nonnegative, got {drift_k}")
    if rho <= 0.0:
        raise DomainError(f"rho must be positive, got {rho}")
    root_two_rho = math.sqrt(2.0 * rho)
    cross = consts.b_norm * math.sqrt(2.0 * rho / consts.b_min_eig)
    x_bound = (consts.a_norm / consts.f_strong) * (
        (root_two_rho + cross) * pair_err
        + cross * pair_err_prev
        + root_two_rho * drift_k
    )
    return ErrorMargins(
        x=x_bound - x_err,
        z=z_error_margin(z_err, pair_err, consts, rho),
        lam=lam_error_margin(lam_err, pair_err, rho),
    )


@dataclass(frozen=True)
class SteadyStateBounds:
    """Asymptotic error ceilings under a uniform drift bound."""

    pair_error: float
    x_error: float
    z_error: float
    lam_error: float

    def __post_init__(self) -> None:
        for name in ("pair_error", "x_error", "z_error", "lam_error"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise DomainError(f"{name} must be finite")
            if value < 0.0:
                raise DomainError(f"{name} must be nonnegative, got {value}")
            object.__setattr__(self, name, float(value))


def steady_state_bounds(
    d: float, delta: float, consts: ConvexityConstants, rho: float
) -> SteadyStateBounds:
    """Limit superior bounds on the tracking errors for drift at most d.

        pair:  d / (sqrt(1+delta) - 1)
        x:     (a_norm/f_strong) * ((sqrt(2 rho)
               + b_norm*sqrt(8 rho/b_min_eig)) / (sqrt(1+delta) - 1)
               + sqrt(2 rho)) * d
        z:     sqrt(2/(b_min_eig*rho)) * pair
        lam:   sqrt(2 rho) * pair
    """
    if not (isinstance(d, (int, float)) and math.isfinite(d) and d >= 0.0):
        raise DomainError(f"drift bound d must be nonnegative, got {d}")
    if not (isinstance(delta, (int, float)) and math.isfinite(delta) and delta > 0.0):
        raise DomainError(
            f"delta must be positive for a nondegenerate bound, got {delta}"
        )
    if rho <= 0.0:
        raise DomainError(f"rho must be positive, got {rho}")
    gap = math.sqrt(1.0 + delta) - 1.0
    pair = d / gap
    x = (
        (consts.a_norm / consts.f_strong)
        * (
            (math.sqrt(2.0 * rho) + consts.b_norm * math.sqrt(8.0 * rho / consts.b_min_eig))
            / gap
            + math.sqrt(2.0 * rho)
        )
        * d
    )
    z = math.sqrt(2.0 / (consts.b_min_eig * rho)) * pair
    lam = math.sqrt(2.0 * rho) * pair
    return SteadyStateBounds(pair_error=pair, x_error=x, z_error=z, lam_error=lam)


def sparsity_deviation(x: np.ndarray, support: Sequence[int]) -> float:
    """l2 norm of the entries of x outside the given support indices."""
    vec = as_vector(x)
    mask = np.ones(vec.shape[0], dtype=bool)
    for idx in support:
        i = int(idx)
        if i != idx:
            raise ShapeError(f"support index {idx!r} is not an integer")
        if not 0 <= i < vec.shape[0]:
            raise ShapeError(
                f"support index {i} out of range for a vector of length {vec.shape[0]}"
            )
        mask[i] = False
    return float(np.linalg.norm(vec[mask]))


def constants_from_stream(stream: Sequence[ProblemInstance]) -> ConvexityConstants:
    """Extract uniform curvature constants from a quadratic problem stream.

    Every instance must use QuadraticForm for both f and g and share one
    (A, B) pair; the moduli are min/max over the observed steps.  The
    factor 2 reflects the no-1/2 quadratic convention.
    """
    if len(stream) == 0:
        raise DomainError("cannot extract constants from an empty stream")
    a0 = stream[0].A
    b0 = stream[0].B
    f_min = math.inf
    g_min = math.inf
    g_max = -math.inf
    for idx, inst in enumerate(stream):
        if not isinstance(inst.f, QuadraticForm) or not isinstance(inst.g, QuadraticForm):
            raise UnsupportedOperationError(
                f"instance {idx} has f={type(inst.f).__name__}, "
                f"g={type(inst.g).__name__}; curvature constants and bound "
                "audits need QuadraticForm for both terms"
            )
        if inst.A.shape != a0.shape or not np.array_equal(inst.A, a0):
            raise DomainError(
                f"instance {idx} changes the coupling matrix A; constants "
                "are defined for a fixed constraint geometry"
            )
        if inst.B.shape != b0.shape or not np.array_equal(inst.B, b0):
            raise DomainError(
                f"instance {idx} changes the coupling matrix B; constants "
                "are defined for a fixed constraint geometry"
            )
        f_min = min(f_min, min_eigenvalue_symmetric(inst.f.weight))
        eigs = np.linalg.eigvalsh(inst.g.weight)
        g_min = min(g_min, float(eigs[0]))
        g_max = max(g_max, float(eigs[-1]))
    if f_min <= 0.0 or g_min <= 0.0:
        raise DomainError(
            "stream is not uniformly strongly convex: smallest weight "
            f"eigenvalues are {f_min} (f) and {g_min} (g)"
        )
    svals = np.linalg.svd(b0, compute_uv=False)
    if svals[-1] <= _SINGULAR_RTOL * max(svals[0], 1.0):
        raise DomainError("B is singular to working precision")
    return ConvexityConstants(
        f_strong=2.0 * f_min,
        g_strong=2.0 * g_min,
        g_lipschitz=2.0 * g_max,
        b_min_eig=float(svals[-1] ** 2),
        a_norm=spectral_norm(a0),
        b_norm=float(svals[0]),
    )


@dataclass(frozen=True)
class TrajectoryRecord:
    """Per-step audit row: errors against the optimum plus bound margins.

    Fields that need the previous step's optimum (drift, tracking margin,
    x margin) are None on the first record.
    """

    k: int
    state: AdmmState
    optimum: OptimalTriple
    err_x: float
    err_z: float
    err_lam: float
    err_pair: float
    drift: Optional[float]
    contraction_margin: float
    tracking_margin: Optional[float]
    x_margin: Optional[float]
    z_margin: float
    lam_margin: float

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DomainError(f"step index must be at least 1, got {self.k}")
        for name in ("err_x", "err_z", "err_lam", "err_pair"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise DomainError(f"{name} must be finite and nonnegative")
        for name in ("drift", "contraction_margin", "tracking_margin", "x_margin",
                     "z_margin", "lam_margin"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise DomainError(f"{name} must be finite when present")


def audit_trajectory(
    stream: Sequence[ProblemInstance],
    states: Sequence[AdmmState],
    optima: Sequence[OptimalTriple],
    rho: float,
) -> list[TrajectoryRecord]:
    """Audit a dynamic run against per-step optima, one record per step.

    Expects the run to have started from the zero state, which is what
    :func:`dynadmm.solver.run_dynamic` does; the first contraction margin
    is measured from that zero state.  The stream must satisfy the
    curvature requirements of :func:`constants_from_stream`.
    """
    if not len(stream) == len(states) == len(optima):
        raise ShapeError(
            f"stream, states and optima must align: got lengths "
            f"{len(stream)}, {len(states)}, {len(optima)}"
        )
    if len(stream) == 0:
        raise DomainError("cannot audit an empty trajectory")
    consts = constants_from_stream(stream)
    params = max_contraction(consts, rho)
    ctx = PairNormContext(stream[0].B, rho)
    dim_z = stream[0].dim_z
    prev_pair = DualPair(np.zeros(dim_z), np.zeros(dim_z))
    prev_err_pair = 0.0
    records: list[TrajectoryRecord] = []
    for i, (inst, state, opt) in enumerate(zip(stream, states, optima)):
        cur_pair = DualPair(state.z, state.lam)
        opt_pair = DualPair(opt.z, opt.lam)
        err_pair = pair_norm(cur_pair.difference(opt_pair), ctx)
        err_x = float(np.linalg.norm(state.x - opt.x))
        err_z = float(np.linalg.norm(state.z - opt.z))
        err_lam = float(np.linalg.norm(state.lam - opt.lam))
        c_margin = contraction_margin(cur_pair, opt_pair, prev_pair, params.delta, ctx)
        if i == 0:
            d_k = None
            t_margin = None
            x_margin = None
        else:
            d_k = drift(
                optima[i - 1].z,
                opt.z,
                stream[i - 1].g,
                inst.g,
                ctx,
                b_min_eig=consts.b_min_eig,
            )
            t_margin = tracking_margin(
                cur_pair,
                opt_pair,
                prev_pair,
                DualPair(optima[i - 1].z, optima[i - 1].lam),
                params.delta,
                d_k,
                ctx,
                k=i + 1,
            )
            x_margin = primal_dual_margins(
                err_x,
                err_z,
                err_lam,
                err_pair,
                prev_err_pair,
                consts,
                rho,
                d_k,
                k=i + 1,
            ).x
        records.append(
            TrajectoryRecord(
                k=state.k,
                state=state,
                optimum=opt,
                err_x=err_x,
                err_z=err_z,
                err_lam=err_lam,
                err_pair=err_pair,
                drift=d_k,
                contraction_margin=c_margin,
                tracking_margin=t_margin,
                x_margin=x_margin,
                z_margin=z_error_margin(err_z, err_pair, consts, rho),
                lam_margin=lam_error_margin(err_lam, err_pair, rho),
            )
        )
        prev_pair = cur_pair
        prev_err_pair = err_pair
    return records


def trailing_max(
    values: Sequence[float], fraction: float = 0.25, min_window: int = 100
) -> float:
    """Max over the trailing window, the finite-sample limsup estimate.

    The window covers the final ``fraction`` of the sequence but at least
    ``min_window`` entries, clipped to the sequence length.
    """
    n = len(values)
    if n == 0:
        raise DomainError("trailing_max needs a nonempty sequence")
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"fraction must lie in (0, 1], got {fraction}")
    if min_window < 1:
        raise DomainError(f"min_window must be at least 1, got {min_window}")
    window = min(n, max(min_window, math.ceil(n * fraction)))
    return float(max(values[n - window:]))


@dataclass(frozen=True)
class SteadyStateReport:
    """Observed trailing maxima next to their steady-state ceilings."""

    drift_bound: float
    bounds: SteadyStateBounds
    trailing_pair: float
    trailing_x: float
    trailing_z: float
    trailing_lam: float

    def slacks(self) -> tuple[float, float, float, float]:
        """Bound minus observed for (pair, x, z, lam); nonnegative is good."""
        return (
            self.bounds.pair_error - self.trailing_pair,
            self.bounds.x_error - self.trailing_x,
            self.bounds.z_error - self.trailing_z,
            self.bounds.lam_error - self.trailing_lam,
        )

    def within_bounds(self, tolerance: float = 0.0) -> bool:
        return all(slack >= -tolerance for slack in self.slacks())


def steady_state_report(
    records: Sequence[TrajectoryRecord],
    consts: ConvexityConstants,
    rho: float,
    delta: float,
    fraction: float = 0.25,
    min_window: int = 100,
) -> SteadyStateReport:
    """Compare trailing error maxima against the steady-state ceilings.

    The drift bound d is taken as the max observed per-step drift, so the
    report checks the bounds in their sharpest observed form.
    """
    drifts = [r.drift for r in records if r.drift is not None]
    if not drifts:
        raise DomainError(
            "steady-state report needs at least one step with a defined drift"
        )
    d = max(drifts)
    bounds = steady_state_bounds(d, delta, consts, rho)
    return SteadyStateReport(
        drift_bound=d,
        bounds=bounds,
        trailing_pair=trailing_max([r.err_pair for r in records], fraction, min_window),
        trailing_x=trailing_max([r.err_x for r in records], fraction, min_window),
        trailing_z=trailing_max([r.err_z for r in records], fraction, min_window),
        trailing_lam=trailing_max([r.err_lam for r in records], fraction, min_window),
    )


def _require_nonnegative(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0.0):
        raise DomainError(f"{name} must be finite and nonnegative, got {value}")
