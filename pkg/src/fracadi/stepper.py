"""Two-sweep alternating-direction time integrator.

The time discretization is a two-step backward difference (backward Euler
on the very first step) with the nonlinear source evaluated at the linear
extrapolant ``2*u^{n-1} - u^{n-2}`` (``u^0`` on the first step), so every
step is linear.  After multiplying through by ``tau*sigma_n`` the implicit
part factorizes exactly into two one-dimensional operators,

    (Bx - tau*sigma*Dx)(By - tau*sigma*Dy) u^n = H + tau*sigma*Bx By g^n,

with the step weight ``sigma_1 = 1`` and ``sigma_n = 2/3`` afterwards, and
``H`` an explicit combination of the two history fields.  The production
path is this factored form; the splitting is algebraically exact, so only
roundoff separates it from the unfactored system.

Each step runs two sweeps: an x-direction solve per y-line produces the
intermediate field ``u*``, then a y-direction solve per x-line produces
``u^n``.  Under homogeneous Dirichlet data the intermediate boundary
values are identically zero and are never stored.  Line solves within one
sweep are independent; time steps are strictly sequential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import Grid2D, ProblemSpec, TimeGrid, sample_initial
from .linalg import SweepMatrix, build_sweep_matrix, sweep_solve
from .operators import (
    apply_compact_1d,
    apply_frac_1d,
    build_frac_operator,
    compact_smooth_2d,
)

SIGMA_FIRST_STEP = 1.0
SIGMA_LATER = 2.0 / 3.0


def sigma_schedule(n: int) -> float:
    """Step weight: 1 on the first step, 2/3 on every later step."""
    if n < 1:
        raise ValueError(f"step index must be >= 1, got {n}")
    return SIGMA_FIRST_STEP if n == 1 else SIGMA_LATER


class NonFiniteFieldError(ArithmeticError):
    """A field picked up NaN/Inf entries during time stepping."""

    def __init__(self, step: int, t: float, what: str = "solution"):
        self.step = step
        self.t = t
        super().__init__(f"non-finite {what} field at step {step} (t={t})")


@dataclass
class StepperState:
    """History needed to advance to step ``n``.

    ``u_prev`` is ``u^{n-1}``; ``u_prev2`` is ``u^{n-2}`` and must be
    present exactly when ``n >= 2``.
    """

    n: int
    u_prev: np.ndarray
    u_prev2: Optional[np.ndarray] = None
    t_prev: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"step index must be >= 1, got {self.n}")
        if self.n >= 2 and self.u_prev2 is None:
            raise ValueError(f"step {self.n} needs the second history field u_prev2")
        if self.n == 1 and self.u_prev2 is not None:
            raise ValueError("first step must not carry a second history field")


class AdiWorkspace:
    """Per-run cache of 1D operators and factored sweep systems.

    Sweep matrices are built lazily and keyed by step weight, so a run
    factors at most twice per axis (once for sigma=1, once for 2/3);
    ``factor_counts`` records how often each axis actually factored.
    Everything cached here is immutable after build and shareable across
    concurrent line solves.
    """

    def __init__(self, grid: Grid2D, tau: float, workers: int = 1):
        if not (math.isfinite(tau) and tau > 0.0):
            raise ValueError(f"time step must be positive, got {tau!r}")
        if workers < 1:
            raise ValueError(f"worker count must be >= 1, got {workers}")
        d = grid.domain
        self.grid = grid
        self.tau = tau
        self.workers = workers
        self.op_x = build_frac_operator(d.alpha, d.kappa1, grid.hx, grid.nx)
        self.op_y = build_frac_operator(d.beta, d.kappa2, grid.hy, grid.ny)
        self._sweeps: dict[tuple[str, float], SweepMatrix] = {}
        self.factor_counts = {"x": 0, "y": 0}

    def sweep(self, axis: str, sigma: float) -> SweepMatrix:
        key = (axis, sigma)
        if key not in self._sweeps:
            op = self.op_x if axis == "x" else self.op_y
            self._sweeps[key] = build_sweep_matrix(op, self.tau * sigma)
            self.factor_counts[axis] += 1
        return self._sweeps[key]


def bdf2_apply(
    u_n: np.ndarray,
    u_nm1: np.ndarray,
    u_nm2: Optional[np.ndarray],
    tau: float,
    n: int,
) -> np.ndarray:
    """Discrete time derivative: backward Euler at n=1, BDF2 at n>=2.

    Kept for truncation-order diagnostics; the production step uses the
    factored form, which is algebraically identical.
    """
    if n < 1:
        raise ValueError(f"step index must be >= 1, got {n}")
    if n == 1:
        return (u_n - u_nm1) / tau
    if u_nm2 is None:
        raise ValueError(f"step {n} needs u_nm2")
    return (3.0 * u_n - 4.0 * u_nm1 + u_nm2) / (2.0 * tau)


def extrapolant(state: StepperState) -> np.ndarray:
    """Source-evaluation field: ``u^0`` at n=1, else ``2u^{n-1} - u^{n-2}``."""
    if state.n == 1:
        return state.u_prev
    return 2.0 * state.u_prev - state.u_prev2


def linearized_source(
    problem: ProblemSpec, grid: Grid2D, t_n: float, state: StepperState
) -> np.ndarray:
    """Source samples on the full grid, shape (M1+1, M2+1).

    The u-argument is the linear extrapolant of the history fields,
    extended by the homogeneous Dirichlet zero on the boundary.  Boundary
    samples of the source itself are generally nonzero and are required by
    the compact smoothing stencils, which is why the full grid is returned
    rather than the interior block.
    """
    X, Y = grid.full_mesh()
    u_full = np.zeros_like(X)
    u_full[1:-1, 1:-1] = extrapolant(state)
    g = np.asarray(problem.source(X, Y, t_n, u_full), dtype=float)
    if g.shape != X.shape:
        g = np.broadcast_to(g, X.shape).copy()
    if not np.isfinite(g).all():
        i, j = np.argwhere(~np.isfinite(g))[0]
        raise ValueError(
            f"source is non-finite at node (x={X[i, j]}, y={Y[i, j]}, t={t_n})"
        )
    return g


def history_rhs(state: StepperState, ws: AdiWorkspace) -> np.ndarray:
    """Explicit part of the step built from the history fields.

    n=1:   (Bx By + tau^2 Dx Dy) u^0
    n>=2:  (Bx By + (4/9) tau^2 Dx Dy) ((4/3) u^{n-1} - (1/3) u^{n-2})

    computed as four one-dimensional tensor applications.
    """
    tau = ws.tau
    if state.n == 1:
        w = state.u_prev
        coef = tau * tau
    else:
        w = (4.0 / 3.0) * state.u_prev - (1.0 / 3.0) * state.u_prev2
        coef = (4.0 / 9.0) * tau * tau
    smoothed = apply_compact_1d(ws.op_x, apply_compact_1d(ws.op_y, w, "y"), "x")
    differenced = apply_frac_1d(ws.op_x, apply_frac_1d(ws.op_y, w, "y"), "x")
    return smoothed + coef * differenced


def adi_step_fields(
    ws: AdiWorkspace,
    n: int,
    u_prev: np.ndarray,
    u_prev2: Optional[np.ndarray],
    g_full: np.ndarray,
) -> np.ndarray:
    """Advance one step given the source already sampled on the full grid.

    This is the core used both by :func:`adi_step` and by drivers that
    assemble their own source field (e.g. coupled reaction systems).
    """
    state = StepperState(n=n, u_prev=u_prev, u_prev2=u_prev2)
    sigma = sigma_schedule(n)
    rhs = history_rhs(state, ws) + (ws.tau * sigma) * compact_smooth_2d(
        g_full, ws.op_x.c2, ws.op_y.c2
    )
    u_star = sweep_solve(ws.sweep("x", sigma), rhs, "x", ws.workers)
    return sweep_solve(ws.sweep("y", sigma), u_star, "y", ws.workers)


def adi_step(
    state: StepperState,
    ws: AdiWorkspace,
    problem: ProblemSpec,
    grid: Grid2D,
    timegrid: TimeGrid,
) -> np.ndarray:
    """One two-sweep step: returns ``u^n`` for ``n = state.n``."""
    if grid is not ws.grid and grid != ws.grid:
        raise ValueError("workspace was built for a different grid")
    if timegrid.tau != ws.tau:
        raise ValueError(
            f"workspace time step {ws.tau} does not match time grid {timegrid.tau}"
        )
    g_full = linearized_source(problem, grid, timegrid.t(state.n), state)
    return adi_step_fields(ws, state.n, state.u_prev, state.u_prev2, g_full)


def run(
    problem: ProblemSpec,
    grid: Grid2D,
    timegrid: TimeGrid,
    ws: Optional[AdiWorkspace] = None,
    observer: Optional[Callable] = None,
    workers: int = 1,
) -> np.ndarray:
    """Integrate to the final time and return ``u^N``.

    ``observer(n, t_n, u_n)`` is invoked after each accepted step and is
    the only trajectory-retention mechanism; the stepper itself keeps
    exactly two history fields.  The first non-finite field aborts the run
    with its step index (nonlinear sources can blow up; fail loudly).
    """
    if ws is None:
        ws = AdiWorkspace(grid, timegrid.tau, workers)
    u_prev = sample_initial(problem, grid)
    u_prev2: Optional[np.ndarray] = None
    for n in range(1, timegrid.N + 1):
        state = StepperState(
            n=n, u_prev=u_prev, u_prev2=u_prev2, t_prev=timegrid.t(n - 1)
        )
        u_new = adi_step(state, ws, problem, grid, timegrid)
        if not np.isfinite(u_new).all():
            raise NonFiniteFieldError(n, timegrid.t(n))
        if observer is not None:
            observer(n, timegrid.t(n), u_new)
        u_prev2, u_prev = u_prev, u_new
    return u_prev


def stability_bound(L: float, nu: float) -> float:
    """Advisory time-step bound ``(1 - nu)/(9 L)`` for a Lipschitz source.

    ``L`` must be a global Lipschitz constant of the source in ``u``; for
    merely locally Lipschitz sources the bound is advisory only.
    """
    if not (math.isfinite(L) and L > 0.0):
        raise ValueError(f"Lipschitz constant must be positive, got {L!r}")
    if not 0.0 < nu < 1.0:
        raise ValueError(f"margin nu must lie in (0, 1), got {nu!r}")
    return (1.0 - nu) / (9.0 * L)
