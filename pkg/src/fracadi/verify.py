"""Oracles and metrology: dense full-system checks, error norms, order fits.

The dense Kronecker assembly of the two 1D sweep operators gives an
independent, unsplit reference for the two-sweep step on small grids;
quadratic-form suites check the operator inequalities the scheme's
stability rests on; truncation probes fit observed orders of the time
and space discretizations on refinement ladders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .grid import Grid2D, TimeGrid
from .operators import (
    apply_compact_1d,
    apply_frac_1d,
    compact_accuracy_probe,
    compact_smooth_2d,
    riesz_weight,
)
from .problems import ManufacturedProblem
from .stepper import AdiWorkspace, StepperState, adi_step_fields, history_rhs, run, sigma_schedule

ORACLE_MAX_UNKNOWNS = 4096
DEFAULT_SEED = 20240801


# ---------------------------------------------------------------------------
# Error norms and observed orders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorPair:
    """Discrete L2 (cell-weighted) and max-norm errors over interior nodes."""

    l2: float
    max: float


def error_norms(numeric: np.ndarray, exact_fn, grid: Grid2D, t: float) -> ErrorPair:
    """Errors of an interior field against ``exact_fn(x, y, t)``.

    The L2 norm carries the ``hx*hy`` cell weight (reducing to ``h^2`` on
    square grids); the max norm runs over interior nodes only.
    """
    Xi, Yi = grid.interior_mesh()
    diff = np.asarray(exact_fn(Xi, Yi, t), dtype=float) - numeric
    l2 = math.sqrt(grid.hx * grid.hy * float(np.sum(diff * diff)))
    return ErrorPair(l2=l2, max=float(np.abs(diff).max()))


def observed_order(err_coarse: float, err_fine: float) -> float:
    """log2 ratio of consecutive refinement errors."""
    if not err_coarse > 0.0 or not err_fine > 0.0:
        raise ValueError(
            f"observed order needs positive errors, got {err_coarse!r}, {err_fine!r}"
        )
    return math.log2(err_coarse / err_fine)


# ---------------------------------------------------------------------------
# Dense full-system oracle
# ---------------------------------------------------------------------------

def kron_sweep_matrix(
    bx: np.ndarray, dx: np.ndarray, by: np.ndarray, dy: np.ndarray, tau_sigma: float
) -> np.ndarray:
    """Unsplit operator ``(Bx - ts*Dx) (x) (By - ts*Dy)`` over C-ravelled fields."""
    return np.kron(bx - tau_sigma * dx, by - tau_sigma * dy)


def _guard_scale(ws: AdiWorkspace) -> None:
    unknowns = ws.grid.nx * ws.grid.ny
    if unknowns > ORACLE_MAX_UNKNOWNS:
        raise ValueError(
            f"oracle assembly is capped at {ORACLE_MAX_UNKNOWNS} unknowns, "
            f"requested {unknowns} ({ws.grid.nx} x {ws.grid.ny})"
        )


def assemble_full_system(ws: AdiWorkspace, sigma: float) -> np.ndarray:
    """Dense matrix of the implicit step over the C-ravelled interior."""
    _guard_scale(ws)
    return kron_sweep_matrix(
        ws.op_x.compact_matrix(), ws.op_x.dense,
        ws.op_y.compact_matrix(), ws.op_y.dense,
        ws.tau * sigma,
    )


def assemble_history_operator(ws: AdiWorkspace, n: int) -> np.ndarray:
    """Dense matrix of the explicit history combination at step ``n``."""
    _guard_scale(ws)
    coef = (ws.tau * sigma_schedule(n)) ** 2
    bb = np.kron(ws.op_x.compact_matrix(), ws.op_y.compact_matrix())
    dd = np.kron(ws.op_x.dense, ws.op_y.dense)
    return bb + coef * dd


def adi_oracle_gap(
    ws: AdiWorkspace,
    n: int,
    u_prev: np.ndarray,
    u_prev2: Optional[np.ndarray],
    g_full: np.ndarray,
) -> float:
    """Max-norm gap between one two-sweep step and the dense unsplit solve.

    The dense side assembles the history part through the Kronecker
    operator and solves the unfactored system directly, so agreement
    certifies both the splitting and the tensorized history assembly.
    """
    sigma = sigma_schedule(n)
    u_split = adi_step_fields(ws, n, u_prev, u_prev2, g_full)

    w = u_prev if n == 1 else (4.0 / 3.0) * u_prev - (1.0 / 3.0) * u_prev2
    rhs = assemble_history_operator(ws, n) @ w.ravel()
    rhs = rhs + (ws.tau * sigma) * compact_smooth_2d(g_full, ws.op_x.c2, ws.op_y.c2).ravel()
    u_dense = np.linalg.solve(assemble_full_system(ws, sigma), rhs).reshape(u_prev.shape)
    return float(np.abs(u_split - u_dense).max())


def splitting_residual(
    ws: AdiWorkspace,
    n: int,
    u_new: np.ndarray,
    u_prev: np.ndarray,
    u_prev2: Optional[np.ndarray],
    g_full: np.ndarray,
) -> tuple[float, float]:
    """Residual of the unfactored step equation at a computed ``u^n``.

    Returns ``(max residual, max rhs)``; the factorization is exact, so
    only roundoff should remain.
    """
    sigma = sigma_schedule(n)
    ts = ws.tau * sigma
    state = StepperState(n=n, u_prev=u_prev, u_prev2=u_prev2)
    rhs = history_rhs(state, ws) + ts * compact_smooth_2d(g_full, ws.op_x.c2, ws.op_y.c2)

    inner = apply_compact_1d(ws.op_y, u_new, "y") - ts * apply_frac_1d(ws.op_y, u_new, "y")
    lhs = apply_compact_1d(ws.op_x, inner, "x") - ts * apply_frac_1d(ws.op_x, inner, "x")
    return float(np.abs(lhs - rhs).max()), float(np.abs(rhs).max())


# ---------------------------------------------------------------------------
# Operator quadratic-form suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PropertyCheck:
    name: str
    worst_margin: float  # normalized; nonnegative when the inequality holds
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class PropertyReport:
    seed: int
    num_fields: int
    checks: tuple[PropertyCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def operator_property_suite(
    grid: Grid2D, num_fields: int = 100, seed: int = DEFAULT_SEED, tol: float = 1e-12
) -> PropertyReport:
    """Randomized checks of the quadratic-form inequalities.

    On standard-normal interior fields, with the cell-weighted inner
    product: the smoothed norm is pinched between one third of and the
    full squared norm; each one-direction fractional form is nonpositive;
    the cross form is nonnegative; and both mixed smoothed-fractional
    forms are nonpositive.  Margins are normalized per field; a violation
    beyond ``tol`` times the field scale fails.
    """
    if grid.nx > 63 or grid.ny > 63:
        raise ValueError("property suite is meant for small grids (interior <= 63)")
    ws = AdiWorkspace(grid, tau=1.0)
    weight = grid.hx * grid.hy
    rng = np.random.default_rng(seed)

    names = (
        "smoothed_norm_lower",
        "smoothed_norm_upper",
        "frac_x_nonpositive",
        "frac_y_nonpositive",
        "frac_cross_nonnegative",
        "mixed_x_nonpositive",
        "mixed_y_nonpositive",
    )
    worst = {name: math.inf for name in names}

    def ip(u, v):
        return weight * float(np.sum(u * v))

    for _ in range(num_fields):
        u = rng.standard_normal((grid.nx, grid.ny))
        nrm2 = ip(u, u)
        dx_u = apply_frac_1d(ws.op_x, u, "x")
        dy_u = apply_frac_1d(ws.op_y, u, "y")
        by_u = apply_compact_1d(ws.op_y, u, "y")
        bb = ip(apply_compact_1d(ws.op_x, by_u, "x"), u)
        qx = ip(dx_u, u)
        qy = ip(dy_u, u)
        qxy = ip(apply_frac_1d(ws.op_y, dx_u, "y"), u)
        mx = ip(apply_compact_1d(ws.op_y, dx_u, "y"), u)
        my = ip(apply_compact_1d(ws.op_x, dy_u, "x"), u)

        scale_x = max(ip(np.abs(dx_u), np.abs(u)), 1e-300)
        scale_y = max(ip(np.abs(dy_u), np.abs(u)), 1e-300)
        scale_xy = max(weight * float(np.sum(np.abs(apply_frac_1d(ws.op_y, dx_u, "y")) * np.abs(u))), 1e-300)

        margins = {
            "smoothed_norm_lower": (bb - nrm2 / 3.0) / nrm2,
            "smoothed_norm_upper": (nrm2 - bb) / nrm2,
            "frac_x_nonpositive": -qx / scale_x,
            "frac_y_nonpositive": -qy / scale_y,
            "frac_cross_nonnegative": qxy / scale_xy,
            "mixed_x_nonpositive": -mx / scale_x,
            "mixed_y_nonpositive": -my / scale_y,
        }
        for name in names:
            worst[name] = min(worst[name], margins[name])

    checks = tuple(
        PropertyCheck(
            name=name,
            worst_margin=worst[name],
            tolerance=tol,
            passed=worst[name] >= -tol,
        )
        for name in names
    )
    return PropertyReport(seed=seed, num_fields=num_fields, checks=checks)


# ---------------------------------------------------------------------------
# Analytic fractional derivatives of polynomials (oracle helper)
# ---------------------------------------------------------------------------

def polynomial_riesz_derivative(coeffs: Sequence[float], gamma: float, x) -> np.ndarray:
    """Two-sided fractional derivative on (0, 1) of a vanishing polynomial.

    ``coeffs`` are ascending monomial coefficients of a polynomial ``p``
    with ``p(0) = p'(0) = p(1) = p'(1) = 0`` (so its zero extension is
    differentiable).  Each monomial maps under the one-sided derivatives
    by the power rule ``x^k -> Gamma(k+1)/Gamma(k+1-gamma) x^{k-gamma}``;
    the right-sided part uses the re-expansion of ``p`` in powers of
    ``(1 - x)``.  This path shares no code with the benchmark source
    expression it cross-checks.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size < 3 or c[0] != 0.0 or c[1] != 0.0:
        raise ValueError("polynomial must vanish to second order at 0")
    q = Polynomial(c)(Polynomial([1.0, -1.0])).coef
    x = np.asarray(x, dtype=float)
    left = np.zeros_like(x)
    right = np.zeros_like(x)
    for k in range(2, c.size):
        if c[k] != 0.0:
            left = left + c[k] * math.gamma(k + 1.0) / math.gamma(k + 1.0 - gamma) * x ** (k - gamma)
    for j in range(2, q.size):
        if q[j] != 0.0:
            right = right + q[j] * math.gamma(j + 1.0) / math.gamma(j + 1.0 - gamma) * (1.0 - x) ** (j - gamma)
    return riesz_weight(gamma) * (left + right)


def _bump_poly_coeffs(power: int) -> np.ndarray:
    """Monomial coefficients of ``x^power (1-x)^power``."""
    return (Polynomial([0.0, 1.0]) ** power * Polynomial([1.0, -1.0]) ** power).coef


# ---------------------------------------------------------------------------
# Truncation-order probes
# ---------------------------------------------------------------------------

PROBE_KINDS = ("bdf2-first-step", "bdf2-interior", "compact-space")


def truncation_order_probe(kind: str, levels: int = 4) -> float:
    """Least-squares observed order of one discretization building block.

    ``bdf2-interior`` and ``bdf2-first-step`` probe the discrete time
    derivative on ``u(t) = exp(-t)`` (orders 2 and 1); ``compact-space``
    probes the smoothed fractional stencil at order 1.5 on the bump
    ``x^6 (1-x)^6``, whose zero extension is smooth enough for the full
    fourth order (order-4 vanishing, as in the benchmark profile, falls
    just short of the stencil's regularity class on fine grids).
    """
    if levels < 2:
        raise ValueError("order probe needs at least two ladder levels")
    if kind == "bdf2-interior":
        taus = np.array([0.1 / 2**k for k in range(levels)])
        t_star = 1.0
        errs = np.array(
            [
                abs(
                    (3.0 * math.exp(-t_star) - 4.0 * math.exp(-(t_star - tau)) + math.exp(-(t_star - 2 * tau)))
                    / (2.0 * tau)
                    - (-math.exp(-t_star))
                )
                for tau in taus
            ]
        )
        return float(np.polyfit(np.log(taus), np.log(errs), 1)[0])
    if kind == "bdf2-first-step":
        taus = np.array([0.1 / 2**k for k in range(levels)])
        errs = np.array(
            [abs((math.exp(-tau) - 1.0) / tau - (-math.exp(-tau))) for tau in taus]
        )
        return float(np.polyfit(np.log(taus), np.log(errs), 1)[0])
    if kind == "compact-space":
        gamma = 1.5
        coeffs = _bump_poly_coeffs(6)
        hs = [1.0 / 8.0 / 2**k for k in range(levels)]
        errs = compact_accuracy_probe(
            gamma,
            lambda s: np.polynomial.polynomial.polyval(s, coeffs),
            lambda s: polynomial_riesz_derivative(coeffs, gamma, s),
            hs,
        )
        return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    raise ValueError(f"unknown probe kind {kind!r}; expected one of {PROBE_KINDS}")


# ---------------------------------------------------------------------------
# Convergence studies of the full solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceLevel:
    h: float
    tau: float
    errors: ErrorPair
    rate_max: Optional[float]
    rate_l2: Optional[float]


@dataclass(frozen=True)
class ConvergenceReport:
    alpha: float
    beta: float
    kappa1: float
    kappa2: float
    levels: tuple[ConvergenceLevel, ...]


def manufactured_convergence(
    alpha: float,
    beta: float,
    kappa1: float,
    kappa2: float,
    ladder: Sequence[tuple[int, int]],
    T: float = 1.0,
    workers: int = 1,
) -> ConvergenceReport:
    """Solve the manufactured benchmark over an ``(M, N)`` ladder.

    Rates are log2 ratios of consecutive errors, so their meaning follows
    from how the ladder couples ``h`` and ``tau`` (spatial studies refine
    as ``(h/2, tau/4)``, temporal studies fix ``h`` and halve ``tau``).
    """
    if len(ladder) < 1:
        raise ValueError("convergence ladder must have at least one level")
    prob = ManufacturedProblem(alpha=alpha, beta=beta, kappa1=kappa1, kappa2=kappa2)
    levels: list[ConvergenceLevel] = []
    prev: Optional[ErrorPair] = None
    for M, N in ladder:
        grid = Grid2D(prob.domain(T), M, M)
        timegrid = TimeGrid(T, N)
        u = run(prob.problem(T), grid, timegrid, workers=workers)
        errors = error_norms(u, prob.exact, grid, T)
        rate_max = observed_order(prev.max, errors.max) if prev is not None else None
        rate_l2 = observed_order(prev.l2, errors.l2) if prev is not None else None
        levels.append(
            ConvergenceLevel(h=grid.hx, tau=timegrid.tau, errors=errors, rate_max=rate_max, rate_l2=rate_l2)
        )
        prev = errors
    return ConvergenceReport(alpha=alpha, beta=beta, kappa1=kappa1, kappa2=kappa2, levels=tuple(levels))
