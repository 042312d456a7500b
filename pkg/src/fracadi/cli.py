"""Command-line surface: convergence studies, self-checks, and simulations.

Subcommands:
  convergence   error/order tables for the manufactured benchmark, either
                from a built-in preset (table-4.1 .. table-4.4, matching
                the published reference study of this scheme) or from a
                custom ladder
  check         operator-property, oracle-equivalence, coefficient, and
                truncation-order self-checks
  fhn           excitable-media simulation with field snapshot export

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 self-check failure.  All outputs are plain text: CSV tables, one-line-
header field snapshots, and a JSON manifest echoing the full config.
Floats are printed with shortest round-trip formatting, so identical
configurations at a fixed worker count yield byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np
from scipy.linalg import LinAlgError

from . import __version__
from .grid import DomainSpec, Grid2D, TimeGrid
from .operators import riesz_coefficients
from .problems import FhnParams, fhn_domain, fhn_initial, run_fhn
from .stepper import AdiWorkspace, NonFiniteFieldError
from .verify import (
    DEFAULT_SEED,
    ORACLE_MAX_UNKNOWNS,
    adi_oracle_gap,
    manufactured_convergence,
    operator_property_suite,
    truncation_order_probe,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4

_MAIN_PAIRS = ((1.1, 1.5), (1.3, 1.7), (1.5, 1.9), (1.8, 1.8))
_DIAG_PAIRS = ((1.1, 1.1), (1.5, 1.5), (1.9, 1.9))

PRESETS = {
    "table-4.1": {
        "pairs": _MAIN_PAIRS,
        "kappa": (2.0, 4.0),
        "ladder": ((8, 64), (16, 256), (32, 1024), (64, 4096)),
        "mode": "spatial",
    },
    "table-4.2": {
        "pairs": _MAIN_PAIRS,
        "kappa": (2.0, 4.0),
        "ladder": ((200, 10), (200, 20), (200, 40), (200, 80)),
        "mode": "temporal",
    },
    "table-4.3": {
        "pairs": _DIAG_PAIRS,
        "kappa": (0.5, 0.5),
        "ladder": ((40, 40), (80, 80), (160, 160), (320, 320)),
        "mode": "coupled",
    },
    "table-4.4": {
        "pairs": _DIAG_PAIRS,
        "kappa": (1.5, 1.5),
        "ladder": ((5, 25), (10, 100), (20, 400), (40, 1600)),
        "mode": "spatial",
    },
}


def _fmt(value) -> str:
    """Shortest round-trip decimal for a float; empty string for missing."""
    if value is None:
        return ""
    return repr(float(value))


def _write_manifest(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_convergence_csv(path: str, reports) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["alpha", "beta", "h", "tau", "max_error", "rate_max", "l2_error", "rate_l2"]
        )
        for rep in reports:
            for lv in rep.levels:
                writer.writerow(
                    [
                        _fmt(rep.alpha),
                        _fmt(rep.beta),
                        _fmt(lv.h),
                        _fmt(lv.tau),
                        _fmt(lv.errors.max),
                        _fmt(lv.rate_max),
                        _fmt(lv.errors.l2),
                        _fmt(lv.rate_l2),
                    ]
                )


def write_field_snapshot(path: str, field: np.ndarray, grid: Grid2D, t: float, alpha: float, beta: float) -> None:
    """Self-describing text snapshot: header (M1, M2, t, alpha, beta), then rows.

    Row ``i`` holds the interior values at fixed ``x_i``, ordered by ``j``.
    """
    with open(path, "w") as fh:
        fh.write(f"{grid.M1} {grid.M2} {_fmt(t)} {_fmt(alpha)} {_fmt(beta)}\n")
        for row in field:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def _build_ladder(mode: str, m0: int, n0: int, levels: int):
    if mode == "spatial":
        return tuple((m0 * 2**k, n0 * 4**k) for k in range(levels))
    if mode == "temporal":
        return tuple((m0, n0 * 2**k) for k in range(levels))
    if mode == "coupled":
        return tuple((m0 * 2**k, n0 * 2**k) for k in range(levels))
    raise ValueError(f"unknown refinement mode {mode!r}")


def cmd_convergence(args) -> int:
    if args.preset is not None:
        preset = PRESETS.get(args.preset)
        if preset is None:
            raise ValueError(
                f"unknown preset {args.preset!r}; available: {', '.join(sorted(PRESETS))}"
            )
        pairs = preset["pairs"]
        kappa1, kappa2 = preset["kappa"]
        ladder = preset["ladder"]
        mode = preset["mode"]
        label = args.preset
    else:
        if args.alpha is None or args.beta is None:
            raise ValueError("custom runs need --alpha and --beta (or use --preset)")
        pairs = ((args.alpha, args.beta),)
        kappa1, kappa2 = args.kappa1, args.kappa2
        ladder = _build_ladder(args.mode, args.m0, args.n0, args.levels)
        mode = args.mode
        label = "custom"
    if len(ladder) < 2:
        raise ValueError("convergence study needs a ladder of at least 2 levels")

    os.makedirs(args.out, exist_ok=True)
    reports = []
    for alpha, beta in pairs:
        started = time.perf_counter()
        rep = manufactured_convergence(
            alpha, beta, kappa1, kappa2, ladder, T=args.t_final, workers=args.workers
        )
        elapsed = time.perf_counter() - started
        reports.append(rep)
        print(f"alpha={alpha} beta={beta}  ({elapsed:.2f} s)")
        for lv in rep.levels:
            rm = "*" if lv.rate_max is None else f"{lv.rate_max:.3f}"
            rl = "*" if lv.rate_l2 is None else f"{lv.rate_l2:.3f}"
            print(
                f"  h={lv.h:<12.6g} tau={lv.tau:<12.6g} "
                f"max={lv.errors.max:.4e} rate={rm:<7} l2={lv.errors.l2:.4e} rate={rl}"
            )

    csv_path = os.path.join(args.out, f"convergence_{label}.csv")
    write_convergence_csv(csv_path, reports)
    _write_manifest(
        os.path.join(args.out, f"convergence_{label}_manifest.json"),
        {
            "command": "convergence",
            "version": __version__,
            "preset": args.preset,
            "mode": mode,
            "pairs": [list(p) for p in pairs],
            "kappa": [kappa1, kappa2],
            "ladder": [list(l) for l in ladder],
            "t_final": args.t_final,
            "workers": args.workers,
            "outputs": [os.path.basename(csv_path)],
        },
    )
    print(f"wrote {csv_path}")
    return EXIT_OK


def _check_coefficients() -> list[tuple[str, bool, str]]:
    results = []
    g = riesz_coefficients(2.0, 3)
    ok = np.array_equal(g, [2.0, -1.0, 0.0, 0.0])
    results.append(("coefficients.classical-sequence", ok, f"g={g.tolist()}"))

    worst = 0.0
    for gamma in (1.1, 1.5, 1.9):
        g = riesz_coefficients(gamma, 1000)
        ok_g = g[0] > 0.0
        for k in range(1, 1001):
            expected = (1.0 - (gamma + 1.0) / (gamma / 2.0 + k)) * g[k - 1]
            err = abs(g[k] - expected)
            ulp = np.spacing(abs(expected)) if expected != 0.0 else np.spacing(1.0)
            worst = max(worst, err / ulp if ulp else 0.0)
        if not ok_g:
            results.append((f"coefficients.positivity[{gamma}]", False, f"g0={g[0]}"))
    results.append(
        ("coefficients.recurrence-1000", worst <= 4.0, f"worst residual {worst:.2f} ulp")
    )
    return results


def _unit_domain(alpha: float, beta: float) -> DomainSpec:
    return DomainSpec(
        a=0.0, b=1.0, c=0.0, d=1.0, alpha=alpha, beta=beta,
        kappa1=1.0, kappa2=1.0, T=1.0,
    )


def cmd_check(args) -> int:
    # fail fast on an oversized oracle request before any heavy work
    unknowns = (args.oracle_m - 1) ** 2
    if unknowns > ORACLE_MAX_UNKNOWNS:
        raise ValueError(
            f"oracle check is capped at {ORACLE_MAX_UNKNOWNS} unknowns; "
            f"--oracle-m {args.oracle_m} would need {unknowns}"
        )
    results: list[tuple[str, bool, str]] = []
    results.extend(_check_coefficients())

    rng = np.random.default_rng(args.seed)
    worst_gap = 0.0
    for alpha in (1.1, 1.5, 1.9):
        for beta in (1.1, 1.5, 1.9):
            grid = Grid2D(_unit_domain(alpha, beta), args.oracle_m, args.oracle_m)
            ws = AdiWorkspace(grid, tau=0.01)
            u1 = rng.standard_normal((grid.nx, grid.ny))
            u2 = rng.standard_normal((grid.nx, grid.ny))
            g_full = rng.standard_normal((grid.M1 + 1, grid.M2 + 1))
            gap1 = adi_oracle_gap(ws, 1, u1, None, g_full)
            gap2 = adi_oracle_gap(ws, 2, u1, u2, g_full)
            worst_gap = max(worst_gap, gap1, gap2)
    results.append(
        ("oracle.split-vs-dense", worst_gap <= 1e-12, f"worst gap {worst_gap!r}")
    )

    prop_failures: list[tuple[str, bool, str]] = []
    min_margin = float("inf")
    for alpha in (1.1, 1.5, 1.9):
        for beta in (1.1, 1.5, 1.9):
            report = operator_property_suite(
                Grid2D(_unit_domain(alpha, beta), 16, 16), seed=args.seed
            )
            min_margin = min(min_margin, *(c.worst_margin for c in report.checks))
            for chk in report.checks:
                if not chk.passed:
                    prop_failures.append(
                        (
                            f"properties.{chk.name}[{alpha},{beta}]",
                            False,
                            f"worst margin {chk.worst_margin:.2e}",
                        )
                    )
    results.extend(prop_failures)
    results.append(
        (
            "properties.quadratic-forms",
            not prop_failures,
            f"9 order pairs, 100 fields each; min margin {min_margin!r}",
        )
    )

    bands = {
        "bdf2-interior": (1.9, 2.1),
        "bdf2-first-step": (0.9, 1.1),
        "compact-space": (3.8, 4.2),
    }
    for kind, (lo, hi) in bands.items():
        slope = truncation_order_probe(kind)
        results.append(
            (f"truncation.{kind}", lo <= slope <= hi, f"slope {slope:.3f} in [{lo}, {hi}]")
        )

    failed = [r for r in results if not r[1]]
    for name, ok, detail in results:
        print(f"{'ok  ' if ok else 'FAIL'} {name}  ({detail})")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed (seed={args.seed})")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_fhn(args) -> int:
    if args.snapshot_every < 1:
        raise ValueError(f"--snapshot-every must be >= 1, got {args.snapshot_every}")
    domain = fhn_domain(args.alpha, args.beta, args.kappa, args.kappa, args.t_final)
    grid = Grid2D(domain, args.m, args.m)
    timegrid = TimeGrid(args.t_final, args.n)
    os.makedirs(args.out, exist_ok=True)

    if args.init == "zero":
        initial = (np.zeros((grid.nx, grid.ny)), np.zeros((grid.nx, grid.ny)))
    else:
        initial = fhn_initial(grid)

    written: list[str] = []

    def snap(n: int, t: float, u: np.ndarray, w: np.ndarray) -> None:
        u_name = f"u_{n:06d}.txt"
        write_field_snapshot(os.path.join(args.out, u_name), u, grid, t, args.alpha, args.beta)
        written.append(u_name)
        if args.write_w:
            w_name = f"w_{n:06d}.txt"
            write_field_snapshot(os.path.join(args.out, w_name), w, grid, t, args.alpha, args.beta)
            written.append(w_name)

    snap(0, 0.0, initial[0], initial[1])

    def observer(n: int, t: float, u: np.ndarray, w: np.ndarray) -> None:
        if n % args.snapshot_every == 0 or n == timegrid.N:
            snap(n, t, u, w)

    started = time.perf_counter()
    run_fhn(
        grid,
        timegrid,
        FhnParams(),
        observer=observer,
        workers=args.workers,
        initial_fields=initial,
    )
    elapsed = time.perf_counter() - started

    _write_manifest(
        os.path.join(args.out, "fhn_manifest.json"),
        {
            "command": "fhn",
            "version": __version__,
            "m": args.m,
            "n": args.n,
            "t_final": args.t_final,
            "kappa": args.kappa,
            "alpha": args.alpha,
            "beta": args.beta,
            "snapshot_every": args.snapshot_every,
            "init": args.init,
            "workers": args.workers,
            "outputs": written,
        },
    )
    print(f"wrote {len(written)} snapshot file(s) to {args.out} ({elapsed:.2f} s)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracadi",
        description="Fourth-order compact ADI solver for 2D fractional reaction-diffusion problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser("convergence", help="error/order study on the manufactured benchmark")
    conv.add_argument("--preset", default=None,
                      help=f"built-in study: one of {', '.join(sorted(PRESETS))}")
    conv.add_argument("--alpha", type=float, default=None)
    conv.add_argument("--beta", type=float, default=None)
    conv.add_argument("--kappa1", type=float, default=2.0)
    conv.add_argument("--kappa2", type=float, default=4.0)
    conv.add_argument("--mode", choices=("spatial", "temporal", "coupled"), default="spatial")
    conv.add_argument("--m0", type=int, default=8, help="grid intervals at the first level")
    conv.add_argument("--n0", type=int, default=64, help="time steps at the first level")
    conv.add_argument("--levels", type=int, default=2)
    conv.add_argument("--t-final", type=float, default=1.0)
    conv.add_argument("--workers", type=int, default=1)
    conv.add_argument("--out", default=".")
    conv.set_defaults(func=cmd_convergence)

    chk = sub.add_parser("check", help="run the built-in verification suites")
    chk.add_argument("--seed", type=int, default=DEFAULT_SEED)
    chk.add_argument("--oracle-m", type=int, default=8, help="grid intervals for the dense oracle")
    chk.set_defaults(func=cmd_check)

    fhn = sub.add_parser("fhn", help="excitable-media simulation with snapshots")
    fhn.add_argument("--m", type=int, default=50, help="grid intervals per axis")
    fhn.add_argument("--n", type=int, default=200, help="time steps")
    fhn.add_argument("--t-final", type=float, default=100.0)
    fhn.add_argument("--kappa", type=float, default=1e-4, help="diffusivity for both axes")
    fhn.add_argument("--alpha", type=float, default=1.7)
    fhn.add_argument("--beta", type=float, default=1.7)
    fhn.add_argument("--snapshot-every", type=int, default=50)
    fhn.add_argument("--write-w", action="store_true", help="also write recovery-variable snapshots")
    fhn.add_argument("--init", choices=("step", "zero"), default="step")
    fhn.add_argument("--workers", type=int, default=1)
    fhn.add_argument("--out", default="fhn_out")
    fhn.set_defaults(func=cmd_fhn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonFiniteFieldError, LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
