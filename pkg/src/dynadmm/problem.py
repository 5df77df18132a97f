"""Problem data model: objective terms and the per-step coupled instance.

A time-step instance is

    minimize  f(x) + g(z)   subject to  A x + B z = c,

with ``f`` over R^N, ``g`` over R^M, ``A`` of shape (M, N), ``B`` of shape
(M, M) and ``c`` in R^M. Objective terms come from a closed set of three
variants; there is deliberately no extension point, every consumer
dispatches exhaustively on the variant.

Scaling conventions differ between the two smooth variants and both are
load-bearing downstream:

* ``QuadraticForm`` evaluates to ``(v - center)^T weight (v - center)``
  with no 1/2 factor, so its gradient carries a factor 2 and its strong
  convexity modulus is ``2 * min_eig(weight)``.
* ``LeastSquares`` evaluates to ``0.5 * ||design @ v - target||^2`` with
  the 1/2 factor, so its gradient is ``design^T (design @ v - target)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import DomainError, ShapeError, UnsupportedOperationError
from .numerics import as_matrix, as_vector, require_symmetric


@dataclass(frozen=True)
class QuadraticForm:
    """Strongly convex quadratic ``v -> (v - center)^T weight (v - center)``.

    ``weight`` must be symmetric positive definite. No 1/2 factor.
    """

    weight: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        weight = require_symmetric(self.weight)
        center = as_vector(self.center)
        if weight.shape[0] != center.shape[0]:
            raise ShapeError(
                f"weight is {weight.shape}, center has length {center.shape[0]}"
            )
        try:
            np.linalg.cholesky(weight)
        except np.linalg.LinAlgError:
            raise DomainError("weight matrix is not positive definite") from None
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "center", center)

    @property
    def dim(self) -> int:
        return self.center.shape[0]


@dataclass(frozen=True)
class LeastSquares:
    """Residual quadratic ``v -> 0.5 * ||design @ v - target||^2``."""

    design: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        design = as_matrix(self.design)
        target = as_vector(self.target)
        if design.shape[0] != target.shape[0]:
            raise ShapeError(
                f"design is {design.shape}, target has length {target.shape[0]}"
            )
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "target", target)

    @property
    def dim(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True)
class ScaledL1:
    """Nonsmooth term ``v -> gamma * ||v||_1`` with ``gamma > 0``.

    Dimension-free: applies to vectors of any length.
    """

    gamma: float

    def __post_init__(self):
        gamma = float(self.gamma)
        if not np.isfinite(gamma) or gamma <= 0.0:
            raise DomainError(f"gamma must be positive and finite, got {gamma}")
        object.__setattr__(self, "gamma", gamma)

    @property
    def dim(self) -> None:
        return None


FunctionSpec = Union[QuadraticForm, LeastSquares, ScaledL1]


def is_smooth(spec: FunctionSpec) -> bool:
    return not isinstance(spec, ScaledL1)


def evaluate(spec: FunctionSpec, v) -> float:
    """Objective value of one term at ``v``.

    Parameters
    ----------
    spec : FunctionSpec
        Term to evaluate.
    v : array_like
        Point, length must match the term's dimension (any length for
        ``ScaledL1``).
    """
    v = as_vector(v)
    if isinstance(spec, QuadraticForm):
        _check_dim(spec, v)
        dev = v - spec.center
        return float(dev @ spec.weight @ dev)
    if isinstance(spec, LeastSquares):
        _check_dim(spec, v)
        res = spec.design @ v - spec.target
        return float(0.5 * (res @ res))
    if isinstance(spec, ScaledL1):
        return float(spec.gamma * np.abs(v).sum())
    raise UnsupportedOperationError(f"unknown function variant {type(spec).__name__}")


def gradient(spec: FunctionSpec, v) -> np.ndarray:
    """Gradient of a smooth term at ``v``.

    Raises
    ------
    UnsupportedOperationError
        If ``spec`` is ``ScaledL1`` (nonsmooth; it has no gradient).
    """
    v = as_vector(v)
    if isinstance(spec, QuadraticForm):
        _check_dim(spec, v)
        return 2.0 * (spec.weight @ (v - spec.center))
    if isinstance(spec, LeastSquares):
        _check_dim(spec, v)
        return spec.design.T @ (spec.design @ v - spec.target)
    if isinstance(spec, ScaledL1):
        raise UnsupportedOperationError("ScaledL1 is nonsmooth; no gradient")
    raise UnsupportedOperationError(f"unknown function variant {type(spec).__name__}")


def _check_dim(spec: FunctionSpec, v: np.ndarray) -> None:
    if spec.dim is not None and spec.dim != v.shape[0]:
        raise ShapeError(f"point has length {v.shape[0]}, term expects {spec.dim}")


@dataclass(frozen=True)
class ProblemInstance:
    """One time slice: terms ``f`` (over x) and ``g`` (over z) coupled by
    ``A x + B z = c``.

    ``k`` is the time index (>= 0). Arrays are normalized to float64 and
    treated as immutable after construction.
    """

    k: int
    f: FunctionSpec
    g: FunctionSpec
    A: np.ndarray
    B: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"time index must be a nonnegative integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        A = as_matrix(self.A)
        B = as_matrix(self.B)
        c = as_vector(self.c)
        if B.shape[0] != B.shape[1]:
            raise ShapeError(f"B must be square, got {B.shape}")
        if A.shape[0] != B.shape[0]:
            raise ShapeError(f"A has {A.shape[0]} rows, B is {B.shape}")
        if c.shape[0] != B.shape[0]:
            raise ShapeError(f"c has length {c.shape[0]}, constraint rows {B.shape[0]}")
        if self.f.dim is not None and self.f.dim != A.shape[1]:
            raise ShapeError(f"f acts on R^{self.f.dim}, A has {A.shape[1]} columns")
        if self.g.dim is not None and self.g.dim != B.shape[1]:
            raise ShapeError(f"g acts on R^{self.g.dim}, B has {B.shape[1]} columns")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "c", c)

    @property
    def dim_x(self) -> int:
        return self.A.shape[1]

    @property
    def dim_z(self) -> int:
        return self.B.shape[1]


def constraint_gap(inst: ProblemInstance, x, z) -> np.ndarray:
    """The constraint violation vector ``A x + B z - c``."""
    x = as_vector(x)
    z = as_vector(z)
    if x.shape[0] != inst.dim_x or z.shape[0] != inst.dim_z:
        raise ShapeError(
            f"point has shapes ({x.shape[0]}, {z.shape[0]}), "
            f"instance expects ({inst.dim_x}, {inst.dim_z})"
        )
    return inst.A @ x + inst.B @ z - inst.c


def primal_residual(inst: ProblemInstance, x, z) -> float:
    """Euclidean norm of the constraint violation at ``(x, z)``."""
    return float(np.linalg.norm(constraint_gap(inst, x, z)))


def augmented_lagrangian(inst: ProblemInstance, x, z, lam, rho: float) -> float:
    """Value of ``f(x) + g(z) + lam^T (Ax + Bz - c) + rho/2 ||Ax + Bz - c||^2``.

    Parameters
    ----------
    inst : ProblemInstance
    x, z, lam : array_like
        Primal pair and multiplier; ``lam`` has the constraint dimension.
    rho : float
        Penalty, must be positive.
    """
    if rho <= 0.0 or not np.isfinite(rho):
        raise DomainError(f"rho must be positive, got {rho}")
    lam = as_vector(lam)
    if lam.shape[0] != inst.c.shape[0]:
        raise ShapeError(
            f"multiplier has length {lam.shape[0]}, expected {inst.c.shape[0]}"
        )
    gap = constraint_gap(inst, x, z)
    value = evaluate(inst.f, x) + evaluate(inst.g, z)
    return float(value + lam @ gap + 0.5 * rho * (gap @ gap))
