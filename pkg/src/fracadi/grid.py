"""Domain, grid, and field conventions shared by every solver module.

A field is a ``(M1-1, M2-1)`` float64 array holding interior node values
only; the homogeneous Dirichlet boundary is structural and never stored.
Axis 0 runs along x (index ``i``), axis 1 along y (index ``j``).  C-order
flattening of a field (``i`` outer, ``j`` fastest) is the canonical
vectorization, and fixes the factor order of the dense Kronecker systems
used for verification.

All arithmetic is 64-bit binary floating point: the benchmark errors this
package reproduces reach 1e-12, which single precision cannot resolve.
Node coordinates are direct affine functions of the index (``a + i*hx``),
never accumulated sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class DomainSpec:
    """Rectangle (a,b)x(c,d) with fractional orders, diffusivities, final time.

    Fractional orders ``alpha`` (x direction) and ``beta`` (y direction)
    must lie strictly inside (1, 2); diffusion coefficients are positive.
    """

    a: float
    b: float
    c: float
    d: float
    alpha: float
    beta: float
    kappa1: float
    kappa2: float
    T: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d", "alpha", "beta", "kappa1", "kappa2", "T"):
            _require_finite(name, getattr(self, name))
        if not self.b > self.a:
            raise ValueError(f"domain requires b > a, got a={self.a}, b={self.b}")
        if not self.d > self.c:
            raise ValueError(f"domain requires d > c, got c={self.c}, d={self.d}")
        if not 1.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha}")
        if not 1.0 < self.beta < 2.0:
            raise ValueError(f"beta must lie in (1, 2), got {self.beta}")
        if not self.kappa1 > 0.0:
            raise ValueError(f"kappa1 must be positive, got {self.kappa1}")
        if not self.kappa2 > 0.0:
            raise ValueError(f"kappa2 must be positive, got {self.kappa2}")
        if not self.T > 0.0:
            raise ValueError(f"final time T must be positive, got {self.T}")


@dataclass(frozen=True)
class Grid2D:
    """Uniform tensor grid with ``M1`` (x) and ``M2`` (y) subintervals.

    Nodes are ``x_i = a + i*hx`` for ``i = 0..M1`` and ``y_j = c + j*hy``
    for ``j = 0..M2``; fields live on the ``(M1-1) x (M2-1)`` interior.
    """

    domain: DomainSpec
    M1: int
    M2: int

    def __post_init__(self) -> None:
        if self.M1 < 2 or self.M2 < 2:
            raise ValueError(f"need M1, M2 >= 2, got M1={self.M1}, M2={self.M2}")

    @property
    def hx(self) -> float:
        return (self.domain.b - self.domain.a) / self.M1

    @property
    def hy(self) -> float:
        return (self.domain.d - self.domain.c) / self.M2

    @property
    def nx(self) -> int:
        """Interior point count along x."""
        return self.M1 - 1

    @property
    def ny(self) -> int:
        """Interior point count along y."""
        return self.M2 - 1

    def x_nodes(self) -> np.ndarray:
        return self.domain.a + np.arange(self.M1 + 1) * self.hx

    def y_nodes(self) -> np.ndarray:
        return self.domain.c + np.arange(self.M2 + 1) * self.hy

    def full_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape (M1+1, M2+1) covering all nodes."""
        return np.meshgrid(self.x_nodes(), self.y_nodes(), indexing="ij")

    def interior_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape (M1-1, M2-1) over interior nodes."""
        X, Y = self.full_mesh()
        return X[1:-1, 1:-1], Y[1:-1, 1:-1]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid ``t_n = n*tau`` with ``tau = T/N``."""

    T: float
    N: int

    def __post_init__(self) -> None:
        _require_finite("T", self.T)
        if not self.T > 0.0:
            raise ValueError(f"final time T must be positive, got {self.T}")
        if self.N < 1:
            raise ValueError(f"need at least one time step, got N={self.N}")

    @property
    def tau(self) -> float:
        return self.T / self.N

    def t(self, n: int) -> float:
        return n * self.tau


@dataclass(frozen=True)
class ProblemSpec:
    """A concrete initial-boundary-value problem.

    ``source(x, y, t, u)`` and ``initial(x, y)`` must accept numpy arrays
    for the spatial arguments and evaluate elementwise.  ``lipschitz`` is
    an optional Lipschitz constant of the source in ``u``, used only for
    the advisory time-step bound.
    """

    domain: DomainSpec
    source: Callable
    initial: Callable
    lipschitz: Optional[float] = None

    def __post_init__(self) -> None:
        if not callable(self.source):
            raise ValueError("source must be callable")
        if not callable(self.initial):
            raise ValueError("initial must be callable")
        if self.lipschitz is not None and not self.lipschitz > 0.0:
            raise ValueError(f"lipschitz constant must be positive, got {self.lipschitz}")


def sample_field(fn: Callable, grid: Grid2D) -> np.ndarray:
    """Evaluate ``fn(x, y)`` on the interior nodes and validate finiteness."""
    Xi, Yi = grid.interior_mesh()
    values = np.asarray(fn(Xi, Yi), dtype=float)
    if values.shape != Xi.shape:
        values = np.broadcast_to(values, Xi.shape).copy()
    if not np.isfinite(values).all():
        bad = np.argwhere(~np.isfinite(values))[0]
        raise ValueError(
            f"sampled field is non-finite at interior index ({bad[0] + 1}, {bad[1] + 1})"
        )
    return values


def sample_initial(problem: ProblemSpec, grid: Grid2D) -> np.ndarray:
    """Interior samples of the initial condition.

    Boundary values are handled structurally as zero; the problem class
    assumes the initial profile is compatible with the homogeneous
    Dirichlet boundary.
    """
    if grid.domain != problem.domain:
        raise ValueError("grid was built for a different domain than the problem")
    return sample_field(problem.initial, grid)
