"""Per-slice optimum computation and the stationarity residual that defines
"solved".

Two routes exist. ``solve_exact_kkt`` handles the all-quadratic case with
one symmetric indefinite solve of the stationarity system. For slices with
an l1 block there is no finite closed form, so ``solve_static_admm``
iterates the solver's own update equations on the frozen slice until the
stationarity residual drops below tolerance. The two routes cross-validate
on quadratic slices, where both are available.

``kkt_residual`` is the single notion of optimality used everywhere: the
max-norm of the smooth stationarity conditions, the constraint violation,
and (for the l1 block under consensus coupling B = -I) the distance of the
multiplier from the subdifferential. Entries of z with ``|z_i| <= 1e-9``
count as zeros for the subdifferential test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import scipy.linalg

from .exceptions import (
    ConvergenceError,
    DomainError,
    NumericalError,
    ShapeError,
    UnsupportedOperationError,
)
from .numerics import SpdFactor, as_vector
from .problem import (
    ProblemInstance,
    QuadraticForm,
    ScaledL1,
    gradient,
    is_smooth,
)
from .solver import soft_threshold, x_normal_matrix, z_normal_matrix

# entries at or below this magnitude count as exact zeros in the l1
# subdifferential test
ZERO_TOL = 1e-9


@dataclass(frozen=True)
class OracleConfig:
    """Stop rule and route selection for per-slice solves.

    ``rho`` is the penalty of the static iteration. It is fixed at 1 by
    default and deliberately decoupled from whatever penalty the tracker
    uses: the optimum does not depend on it, only the path there does.
    ``check_every`` sets how often the (comparatively costly) stationarity
    residual is evaluated inside the static loop; the returned triple always
    satisfies the tolerance regardless.
    """

    tolerance: float = 1e-10
    max_iterations: int = 100_000
    method: Literal["static_admm", "exact_kkt"] = "static_admm"
    rho: float = 1.0
    check_every: int = 4

    def __post_init__(self):
        if not np.isfinite(self.tolerance) or self.tolerance <= 0.0:
            raise DomainError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.method not in ("static_admm", "exact_kkt"):
            raise DomainError(f"unknown method {self.method!r}")
        if not np.isfinite(self.rho) or self.rho <= 0.0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if self.check_every < 1:
            raise DomainError(f"check_every must be >= 1, got {self.check_every}")


@dataclass(frozen=True)
class OptimalTriple:
    """A solved slice: primal pair, multiplier, and the residual they attain."""

    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    kkt_residual: float

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x))
        object.__setattr__(self, "z", as_vector(self.z))
        object.__setattr__(self, "lam", as_vector(self.lam))


def kkt_residual(inst: ProblemInstance, x, z, lam) -> float:
    """Max-norm stationarity residual of ``(x, z, lam)`` on ``inst``.

    Components: ``||grad f(x) + A^T lam||_inf``, ``||A x + B z - c||_inf``,
    and for g either ``||grad g(z) + B^T lam||_inf`` (smooth) or the l1
    subdifferential distance (requires B = -I).
    """
    x, z, lam = as_vector(x), as_vector(z), as_vector(lam)
    if not is_smooth(inst.f):
        raise UnsupportedOperationError("residual needs smooth f")
    parts = [
        float(np.linalg.norm(gradient(inst.f, x) + inst.A.T @ lam, np.inf)),
        float(np.linalg.norm(inst.A @ x + inst.B @ z - inst.c, np.inf)),
    ]
    if is_smooth(inst.g):
        parts.append(float(np.linalg.norm(gradient(inst.g, z) + inst.B.T @ lam, np.inf)))
    else:
        if not np.array_equal(inst.B, -np.eye(inst.dim_z)):
            raise UnsupportedOperationError(
                "l1 subdifferential residual needs consensus coupling B = -I"
            )
        gamma = inst.g.gamma
        on = np.abs(z) > ZERO_TOL
        off_violation = np.maximum(np.abs(lam[~on]) - gamma, 0.0)
        on_violation = np.abs(lam[on] - gamma * np.sign(z[on]))
        worst = 0.0
        if off_violation.size:
            worst = max(worst, float(off_violation.max()))
        if on_violation.size:
            worst = max(worst, float(on_violation.max()))
        parts.append(worst)
    return max(parts)


def solve_exact_kkt(inst: ProblemInstance) -> OptimalTriple:
    """All-quadratic slices: one symmetric indefinite solve of

        [2 Wf   0    A^T] [x]     [2 Wf cf]
        [ 0    2 Wg  B^T] [z]  =  [2 Wg cg]
        [ A     B     0 ] [lam]   [  c   ]
    """
    if not isinstance(inst.f, QuadraticForm) or not isinstance(inst.g, QuadraticForm):
        raise UnsupportedOperationError("exact solve needs quadratic f and g")
    N, M = inst.dim_x, inst.dim_z
    K = np.zeros((N + 2 * M, N + 2 * M))
    K[:N, :N] = 2.0 * inst.f.weight
    K[:N, N + M :] = inst.A.T
    K[N : N + M, N : N + M] = 2.0 * inst.g.weight
    K[N : N + M, N + M :] = inst.B.T
    K[N + M :, :N] = inst.A
    K[N + M :, N : N + M] = inst.B
    rhs = np.concatenate(
        [2.0 * (inst.f.weight @ inst.f.center), 2.0 * (inst.g.weight @ inst.g.center), inst.c]
    )
    try:
        sol = scipy.linalg.solve(K, rhs, assume_a="sym", check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as err:
        raise NumericalError(f"stationarity system is singular: {err}") from None
    if np.linalg.norm(K @ sol - rhs) > 1e-9 * (1.0 + np.linalg.norm(rhs)):
        raise NumericalError("stationarity system solve failed its residual check")
    x, z, lam = sol[:N], sol[N : N + M], sol[N + M :]
    return OptimalTriple(x, z, lam, kkt_residual(inst, x, z, lam))


@dataclass
class _StaticKernel:
    """Precomputed affine maps for iterating one frozen slice.

    With K the x normal matrix, the x pass is x = x0 - W (lam + rho B z),
    so the loop can live in (z, lam) space; A x is tracked through the
    M x M map G = A W. For quadratic g the z pass is likewise affine.
    """

    inst: ProblemInstance
    rho: float
    x0: np.ndarray = field(init=False)
    W: np.ndarray = field(init=False)
    ax0: np.ndarray = field(init=False)
    G: np.ndarray = field(init=False)
    z0: Optional[np.ndarray] = field(init=False, default=None)
    V: Optional[np.ndarray] = field(init=False, default=None)

    def __post_init__(self):
        inst, rho = self.inst, self.rho
        x_factor = SpdFactor(x_normal_matrix(inst, rho))
        if isinstance(inst.f, QuadraticForm):
            base = 2.0 * (inst.f.weight @ inst.f.center)
        else:
            base = inst.f.design.T @ inst.f.target
        self.x0 = x_factor.solve(base + rho * (inst.A.T @ inst.c))
        self.W = x_factor.solve(inst.A.T)  # K^{-1} A^T, shape (N, M)
        self.ax0 = inst.A @ self.x0
        self.G = inst.A @ self.W
        if isinstance(inst.g, QuadraticForm):
            z_factor = SpdFactor(z_normal_matrix(inst, rho))
            self.z0 = z_factor.solve(
                2.0 * (inst.g.weight @ inst.g.center) + rho * (inst.B.T @ inst.c)
            )
            self.V = z_factor.solve(inst.B.T)

    def x_from(self, z: np.ndarray, lam: np.ndarray) -> np.ndarray:
        return self.x0 - self.W @ (lam + self.rho * (self.inst.B @ z))


def solve_static_admm(
    inst: ProblemInstance,
    config: OracleConfig = OracleConfig(),
    start: Optional[OptimalTriple] = None,
) -> OptimalTriple:
    """Iterate the update equations on the frozen slice until the
    stationarity residual is at or below ``config.tolerance``.

    Parameters
    ----------
    inst : ProblemInstance
        Slice to solve; f must be smooth, g quadratic or l1-consensus.
    config : OracleConfig
        Tolerance, iteration cap, penalty of the static iteration.
    start : OptimalTriple or AdmmState, optional
        Warm start; only its ``z`` and ``lam`` are used. Defaults to zeros.
        A good warm start (the previous slice's optimum) cuts the iteration
        count by an order of magnitude on slowly drifting streams.

    Raises
    ------
    ConvergenceError
        If the cap is hit; the message reports the last residual.
    """
    rho = config.rho
    kernel = _StaticKernel(inst, rho)
    l1_g = isinstance(inst.g, ScaledL1)
    if l1_g:
        if not np.array_equal(inst.B, -np.eye(inst.dim_z)) or np.any(inst.c != 0.0):
            raise UnsupportedOperationError(
                "static l1 iteration needs consensus coupling B = -I, c = 0"
            )
        kappa = inst.g.gamma / rho
    if start is None:
        z = np.zeros(inst.dim_z)
        lam = np.zeros(inst.dim_z)
    else:
        z = np.array(start.z, dtype=np.float64)
        lam = np.array(start.lam, dtype=np.float64)
        if z.shape != (inst.dim_z,) or lam.shape != (inst.dim_z,):
            raise ShapeError(
                f"warm start carries shapes ({z.shape}, {lam.shape}), "
                f"slice expects length {inst.dim_z}"
            )
    B, c = inst.B, inst.c
    bz = B @ z
    inv_rho = 1.0 / rho
    for iteration in range(1, config.max_iterations + 1):
        t = lam + rho * bz
        ax = kernel.ax0 - kernel.G @ t
        if l1_g:
            z = soft_threshold(ax + lam * inv_rho, kappa)
            bz = -z
        else:
            z = kernel.z0 - kernel.V @ (lam + rho * ax)
            bz = B @ z
        lam = lam + rho * (ax + bz - c)
        if iteration % config.check_every == 0 or iteration == config.max_iterations:
            x = kernel.x0 - kernel.W @ t
            residual = kkt_residual(inst, x, z, lam)
            if residual <= config.tolerance:
                return OptimalTriple(x, z, lam, residual)
    raise ConvergenceError(
        f"static solve stalled at residual {residual:.3e} after "
        f"{config.max_iterations} iterations (tolerance {config.tolerance:.1e})"
    )


def solve(
    inst: ProblemInstance,
    config: OracleConfig = OracleConfig(),
    start: Optional[OptimalTriple] = None,
) -> OptimalTriple:
    """Route to the configured method."""
    if config.method == "exact_kkt":
        return solve_exact_kkt(inst)
    return solve_static_admm(inst, config, start=start)
