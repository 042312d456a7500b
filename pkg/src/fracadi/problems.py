"""Concrete problem instances: a manufactured benchmark and an excitable-media model.

The manufactured problem has the closed-form solution

    u(x, y, t) = exp(-t) * x^4 (1-x)^4 * y^4 (1-y)^4

on the unit square.  Its source combines three pieces: a quadratic
reaction ``u^2``; the x-direction block, which cancels the fractional
x-derivative of the solution using the power rule for two-sided
fractional derivatives of monomials (Gamma-ratio coefficients against
``x^{k-alpha} + (1-x)^{k-alpha}`` with binomial weights 1, -4, 6, -4, 1);
the symmetric y-direction block; plus a compensation term that cancels
the reaction when evaluated on the exact solution.

The excitable-media model couples the fractional-diffusion potential
``u`` with a pointwise linear recovery variable ``w``:

    du/dt = k1 d^a u/d|x|^a + k2 d^b u/d|y|^b + u(1-u)(u-mu) - w
    dw/dt = eps * (lam*u - gamma*w - delta)

The recovery equation has no spatial operator, so ``w`` is integrated as
a per-node ODE with the same temporal scheme as ``u`` (implicit first
step, two-step backward difference afterwards, both linear in ``w``), and
no boundary condition is imposed on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import DomainSpec, Grid2D, ProblemSpec, TimeGrid
from .operators import riesz_weight
from .stepper import AdiWorkspace, NonFiniteFieldError, adi_step_fields

_QUARTIC_WEIGHTS = (1.0, -4.0, 6.0, -4.0, 1.0)  # x^4(1-x)^4 in monomials x^4..x^8


def _two_sided_power_block(s: np.ndarray, gamma: float) -> np.ndarray:
    """Sum of Gamma-ratio monomial terms ``s^{k-gamma} + (1-s)^{k-gamma}``."""
    total = 0.0
    for k, wk in zip(range(4, 9), _QUARTIC_WEIGHTS):
        ratio = math.gamma(k + 1.0) / math.gamma(k + 1.0 - gamma)
        total = total + wk * ratio * (s ** (k - gamma) + (1.0 - s) ** (k - gamma))
    return total


def manufactured_source(x, y, t, u, alpha, beta, kappa1, kappa2):
    """Source that makes ``exp(-t) x^4(1-x)^4 y^4(1-y)^4`` the exact solution.

    ``g(x, y, t, u) - g(x, y, t, 0) = u**2``: the quadratic reaction is the
    only u-dependent term.  Accepts scalars or numpy arrays.
    """
    ca = riesz_weight(alpha)
    cb = riesz_weight(beta)
    vx = x**4 * (1.0 - x) ** 4
    wy = y**4 * (1.0 - y) ** 4
    et = np.exp(-t)
    x_block = vx + kappa1 * ca * _two_sided_power_block(x, alpha)
    y_block = et * vx * y**8 * (1.0 - y) ** 8 + kappa2 * cb * _two_sided_power_block(
        y, beta
    )
    return u**2 - et * wy * x_block - et * vx * y_block


def manufactured_exact(x, y, t):
    """Closed-form solution of the manufactured benchmark."""
    return np.exp(-t) * x**4 * (1.0 - x) ** 4 * y**4 * (1.0 - y) ** 4


@dataclass(frozen=True)
class ManufacturedProblem:
    """Manufactured benchmark on the unit square with configurable orders."""

    alpha: float
    beta: float
    kappa1: float = 2.0
    kappa2: float = 4.0

    def exact(self, x, y, t):
        return manufactured_exact(x, y, t)

    def source(self, x, y, t, u):
        return manufactured_source(x, y, t, u, self.alpha, self.beta, self.kappa1, self.kappa2)

    def domain(self, T: float = 1.0) -> DomainSpec:
        return DomainSpec(
            a=0.0, b=1.0, c=0.0, d=1.0,
            alpha=self.alpha, beta=self.beta,
            kappa1=self.kappa1, kappa2=self.kappa2, T=T,
        )

    def problem(self, T: float = 1.0) -> ProblemSpec:
        return ProblemSpec(
            domain=self.domain(T),
            source=self.source,
            initial=lambda x, y: manufactured_exact(x, y, 0.0),
        )


@dataclass(frozen=True)
class FhnParams:
    """Reaction and recovery parameters of the excitable-media model."""

    mu: float = 0.1
    gamma: float = 1.0
    eps: float = 0.01
    lam: float = 0.5
    delta: float = 0.0


def fhn_reaction(u, w, mu: float = 0.1):
    """Cubic excitation minus recovery: ``u(1-u)(u-mu) - w``."""
    return u * (1.0 - u) * (u - mu) - w


def fhn_recovery_step(
    u_extrap: np.ndarray,
    w_prev: np.ndarray,
    w_prev2: Optional[np.ndarray],
    tau: float,
    n: int,
    params: FhnParams = FhnParams(),
) -> np.ndarray:
    """Pointwise implicit update of the recovery variable.

    n=1 solves the backward-Euler relation
    ``(w^1 - w^0)/tau = eps*(lam*u - gamma*w^1 - delta)``; n>=2 solves the
    two-step backward-difference relation
    ``(3w^n - 4w^{n-1} + w^{n-2})/(2 tau) = eps*(lam*u - gamma*w^n - delta)``.
    Both are linear in ``w^n``, so the solve is a scalar division.
    """
    if n < 1:
        raise ValueError(f"step index must be >= 1, got {n}")
    drive = params.eps * (params.lam * u_extrap - params.delta)
    if n == 1:
        return (w_prev + tau * drive) / (1.0 + tau * params.eps * params.gamma)
    if w_prev2 is None:
        raise ValueError(f"step {n} needs the second recovery history field")
    return (2.0 * tau * drive + 4.0 * w_prev - w_prev2) / (
        3.0 + 2.0 * tau * params.eps * params.gamma
    )


def fhn_domain(alpha: float, beta: float, kappa1: float, kappa2: float, T: float) -> DomainSpec:
    """The model's fixed square domain (0, 2.5)^2."""
    return DomainSpec(
        a=0.0, b=2.5, c=0.0, d=2.5,
        alpha=alpha, beta=beta, kappa1=kappa1, kappa2=kappa2, T=T,
    )


def fhn_initial(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    """Piecewise-constant initial data on the interior nodes.

    The potential is 1 on the quarter ``(0, 1.25] x (0, 1.25)`` and 0
    elsewhere; the recovery variable is 0.1 on the half ``y in [1.25, 2.5)``
    and 0 below it.  Interval endpoints follow the half-open memberships
    exactly: a node at ``y = 1.25`` gets ``u = 0`` and ``w = 0.1``.
    """
    d = grid.domain
    if (d.a, d.b, d.c, d.d) != (0.0, 2.5, 0.0, 2.5):
        raise ValueError(
            f"initial data is defined on (0, 2.5)^2, got ({d.a}, {d.b}) x ({d.c}, {d.d})"
        )
    Xi, Yi = grid.interior_mesh()
    u0 = np.where((Xi > 0.0) & (Xi <= 1.25) & (Yi > 0.0) & (Yi < 1.25), 1.0, 0.0)
    w0 = np.where(Yi >= 1.25, 0.1, 0.0)
    return u0, w0


def run_fhn(
    grid: Grid2D,
    timegrid: TimeGrid,
    params: FhnParams = FhnParams(),
    observer: Optional[Callable] = None,
    workers: int = 1,
    initial_fields: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the coupled model; returns ``(u^N, w^N)``.

    Per step: extrapolate both fields, evaluate the reaction at the
    extrapolants, advance the potential with the two-sweep solver, then
    update the recovery variable pointwise.  The fully explicit coupling
    keeps the implicit core unchanged.  ``observer(n, t, u, w)`` runs
    after each step.  ``initial_fields`` overrides the model's standard
    piecewise-constant data (useful for smoke tests).
    """
    tau = timegrid.tau
    ws = AdiWorkspace(grid, tau, workers)
    if initial_fields is None:
        u_prev, w_prev = fhn_initial(grid)
    else:
        u_prev, w_prev = initial_fields
        if u_prev.shape != (grid.nx, grid.ny) or w_prev.shape != (grid.nx, grid.ny):
            raise ValueError("initial fields must match the interior grid shape")
    u_prev2: Optional[np.ndarray] = None
    w_prev2: Optional[np.ndarray] = None
    g_full = np.zeros((grid.M1 + 1, grid.M2 + 1))
    for n in range(1, timegrid.N + 1):
        if n == 1:
            u_ext, w_ext = u_prev, w_prev
        else:
            u_ext = 2.0 * u_prev - u_prev2
            w_ext = 2.0 * w_prev - w_prev2
        # boundary samples stay zero: u vanishes there and w carries no
        # boundary dynamics, so the reaction vanishes too
        with np.errstate(over="ignore", invalid="ignore"):
            g_int = fhn_reaction(u_ext, w_ext, params.mu)
        if not np.isfinite(g_int).all():
            raise NonFiniteFieldError(n, timegrid.t(n), "reaction")
        g_full[1:-1, 1:-1] = g_int
        u_new = adi_step_fields(ws, n, u_prev, u_prev2, g_full)
        w_new = fhn_recovery_step(u_ext, w_prev, w_prev2, tau, n, params)
        if not np.isfinite(u_new).all():
            raise NonFiniteFieldError(n, timegrid.t(n), "potential")
        if not np.isfinite(w_new).all():
            raise NonFiniteFieldError(n, timegrid.t(n), "recovery")
        if observer is not None:
            observer(n, timegrid.t(n), u_new, w_new)
        u_prev2, u_prev = u_prev, u_new
        w_prev2, w_prev = w_prev, w_new
    return u_prev, w_prev
