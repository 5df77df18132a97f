"""Resource-sharing specialization: n local quadratic costs coupled through
a soft-thresholded common resource.

The aggregate problem at one time step is

    minimize  sum_i (x_i - center_i)^T weight_i (x_i - center_i) + gamma ||z||_1
    subject to  x_1 + ... + x_n - z = 0,

which is the coupled two-block form with A = [I_p ... I_p], B = -I_p and
c = 0. ``assemble`` materializes that instance; ``sharing_x_update``
implements the x pass directly on the block data, by default through the
dense (n p) x (n p) solve and optionally through a block-elimination route
that only ever factors p x p matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import DomainError, ShapeError
from .numerics import SpdFactor
from .problem import ProblemInstance, QuadraticForm, ScaledL1
from .solver import AdmmState


@dataclass(frozen=True)
class SharingProblem:
    """Per-agent quadratic costs plus the shared l1 price ``gamma``."""

    blocks: tuple[QuadraticForm, ...]
    gamma: float

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ShapeError("need at least one block")
        p = blocks[0].dim
        for i, blk in enumerate(blocks):
            if not isinstance(blk, QuadraticForm):
                raise ShapeError(f"block {i} is {type(blk).__name__}, expected QuadraticForm")
            if blk.dim != p:
                raise ShapeError(f"block {i} has dimension {blk.dim}, expected {p}")
        if not np.isfinite(self.gamma) or self.gamma <= 0.0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def p(self) -> int:
        return self.blocks[0].dim


def coupling_matrix(n: int, p: int) -> np.ndarray:
    """The summing map ``[I_p ... I_p]`` of shape (p, n p)."""
    return np.tile(np.eye(p), (1, n))


def assemble(sp: SharingProblem, k: int) -> ProblemInstance:
    """Materialize the coupled instance for time index ``k``.

    The block costs collapse into one block-diagonal quadratic over
    R^{n p}; the shared term is ``gamma ||z||_1`` over R^p.
    """
    weight = scipy.linalg.block_diag(*(blk.weight for blk in sp.blocks))
    center = np.concatenate([blk.center for blk in sp.blocks])
    return ProblemInstance(
        k=k,
        f=QuadraticForm(weight, center),
        g=ScaledL1(sp.gamma),
        A=coupling_matrix(sp.n, sp.p),
        B=-np.eye(sp.p),
        c=np.zeros(sp.p),
    )


def sharing_x_update(
    state: AdmmState, sp: SharingProblem, rho: float, structured: bool = False
) -> np.ndarray:
    """x pass on the block data: solve
    ``(2 blockdiag(weights) + rho A^T A) x = 2 blockdiag(weights) centers - A^T lam + rho A^T z``.

    Parameters
    ----------
    state : AdmmState
        Current ``z`` and ``lam`` (both length p).
    sp : SharingProblem
    rho : float
        Penalty, positive.
    structured : bool
        When true, solve by block elimination (n solves of size p plus one
        p x p correction) instead of the dense (n p) x (n p) factorization.
        Both routes agree to solver precision.

    Returns
    -------
    numpy.ndarray
        Stacked block minimizer of length n p.
    """
    if rho <= 0.0 or not np.isfinite(rho):
        raise DomainError(f"rho must be positive, got {rho}")
    n, p = sp.n, sp.p
    if state.z.shape[0] != p or state.lam.shape[0] != p:
        raise ShapeError(
            f"state carries z/lam of length {state.z.shape[0]}, expected {p}"
        )
    # A^T v stacks v into every block; the per-block right-hand side is
    # 2 W_i center_i - lam + rho z.
    shared = rho * state.z - state.lam
    if not structured:
        A = coupling_matrix(n, p)
        weight = scipy.linalg.block_diag(*(2.0 * blk.weight for blk in sp.blocks))
        rhs = np.concatenate(
            [2.0 * (blk.weight @ blk.center) + shared for blk in sp.blocks]
        )
        return SpdFactor(weight + rho * (A.T @ A)).solve(rhs)

    # Block elimination: with D = blockdiag(2 W_i) and A^T A = ones(n,n) kron I_p,
    #   (D + rho A^T A)^{-1} r = D^{-1} r - D^{-1} A^T S^{-1} A D^{-1} r,
    #   S = I_p / rho + sum_i (2 W_i)^{-1}.
    factors = [SpdFactor(2.0 * blk.weight) for blk in sp.blocks]
    eye = np.eye(p)
    inv_sum = np.zeros((p, p))
    block_solutions = []
    for blk, fac in zip(sp.blocks, factors):
        inv_sum += np.column_stack([fac.solve(eye[:, j]) for j in range(p)])
        block_solutions.append(fac.solve(2.0 * (blk.weight @ blk.center) + shared))
    correction = SpdFactor(eye / rho + 0.5 * (inv_sum + inv_sum.T)).solve(
        np.sum(block_solutions, axis=0)
    )
    return np.concatenate([y - fac.solve(correction) for y, fac in zip(block_solutions, factors)])
