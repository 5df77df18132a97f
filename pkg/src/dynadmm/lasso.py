"""l1-regularized least squares in splitting form.

One time step carries ``minimize 0.5 ||F x - h||^2 + gamma ||z||_1`` with
the consensus constraint ``x - z = 0``, i.e. A = I, B = -I, c = 0. The x
pass then reduces to the ridge-like solve ``(F^T F + rho I) x = F^T h +
rho z - lam``; the z pass is plain soft thresholding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ShapeError
from .numerics import SpdFactor, as_matrix, as_vector
from .problem import LeastSquares, ProblemInstance, ScaledL1
from .solver import AdmmState


@dataclass(frozen=True)
class LassoProblem:
    """Design/observation pair plus the l1 weight ``gamma``."""

    design: np.ndarray
    target: np.ndarray
    gamma: float

    def __post_init__(self):
        design = as_matrix(self.design)
        target = as_vector(self.target)
        if design.shape[0] != target.shape[0]:
            raise ShapeError(
                f"design is {design.shape}, target has length {target.shape[0]}"
            )
        if not np.isfinite(self.gamma) or self.gamma <= 0.0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def p(self) -> int:
        return self.design.shape[1]

    @property
    def m(self) -> int:
        return self.design.shape[0]


def assemble(lp: LassoProblem, k: int) -> ProblemInstance:
    """Materialize the consensus-split instance for time index ``k``."""
    p = lp.p
    return ProblemInstance(
        k=k,
        f=LeastSquares(lp.design, lp.target),
        g=ScaledL1(lp.gamma),
        A=np.eye(p),
        B=-np.eye(p),
        c=np.zeros(p),
    )


def lasso_x_update(state: AdmmState, lp: LassoProblem, rho: float) -> np.ndarray:
    """x pass on the raw data: solve ``(F^T F + rho I) x = F^T h + rho z - lam``.

    Agrees with the generic x update on the assembled instance; kept as a
    direct route because the consensus coupling makes A^T A the identity.
    """
    if rho <= 0.0 or not np.isfinite(rho):
        raise DomainError(f"rho must be positive, got {rho}")
    p = lp.p
    if state.z.shape[0] != p or state.lam.shape[0] != p:
        raise ShapeError(
            f"state carries z/lam of length {state.z.shape[0]}, expected {p}"
        )
    F = lp.design
    normal = F.T @ F + rho * np.eye(p)
    rhs = F.T @ lp.target + rho * state.z - state.lam
    return SpdFactor(normal).solve(rhs)
