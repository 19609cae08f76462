"""Command-line front end emitting CSV tables and verification reports.

Subcommands::

    scaling      p(r) curve of the optimal map on an r grid
    threshold    purity threshold r* for one (N, M) pair
    mstar        largest M with an above-unity scaling factor
    optimal-map  sector table of the argmax extremal map
    figure2      both scaling-curve panels (M = N+1 sweep and N = 5 sweep)
    figure3      threshold gaps 1 - r* versus N for both output choices
    verify       dense-matrix checks of the closed forms, exit 1 on failure

All numeric CSV fields use 12 significant digits; output is assembled in
memory and written in one step, so an error never leaves a partial file.
Exit codes: 0 success, 1 verification failure, 2 invalid arguments.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .analysis import optimal_map, scaling_profile
from .channels import (
    SearchSpaceTooLargeError,
    coefficients_for,
    validate_trace_preserving,
)
from .oracle import (
    SizeCapError,
    permutation_twirl_deviation,
    schur_isometry,
    symmetric_marginal_deviation,
    verify_closed_form,
)
from .thresholds import limiting_threshold, m_star, r_star

__all__ = ["RunConfig", "main"]

# r grid used when probing whether an N = 1 channel ever reaches p >= 1.
_NO_BROADCAST_GRID = 257


@dataclass(frozen=True)
class RunConfig:
    """Validated arguments of one CLI invocation."""

    command: str
    n_in: Optional[int] = None
    m_out: Optional[int] = None
    m_range: Optional[tuple[int, int]] = None
    n_range: Optional[tuple[int, int]] = None
    r: float = 0.5
    r_min: float = 0.0
    r_max: float = 1.0
    steps: int = 101
    tol: float = 1e-6
    cap: int = 200
    seed: int = 7
    output_path: Optional[str] = None
    inject_fault: bool = False

    def validate(self) -> None:
        if not 0.0 <= self.r_min < self.r_max <= 1.0:
            raise ValueError(
                f"need 0 <= r-min < r-max <= 1, got [{self.r_min}, {self.r_max}]"
            )
        if self.steps < 2:
            raise ValueError(f"need at least 2 grid steps, got {self.steps}")
        if self.tol <= 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"Bloch length must lie in [0, 1], got {self.r}")
        if self.cap < 1:
            raise ValueError(f"cap must be positive, got {self.cap}")
        for label, value in (("--n", self.n_in), ("--m", self.m_out)):
            if value is not None and value < 1:
                raise ValueError(f"{label} must be a positive qubit count, got {value}")
        for label, pair in (("--m-range", self.m_range), ("--n-range", self.n_range)):
            if pair is not None and not 1 <= pair[0] <= pair[1]:
                raise ValueError(f"{label} bounds must satisfy 1 <= A <= B, got {pair}")


def _fmt(value: float) -> str:
    return f"{float(value):.12g}"


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an inclusive integer range like 4..10, got {text!r}"
        ) from None


# ---------------------------------------------------------------------------
# row builders (pure; the tests drive these directly)


def scaling_rows(config: RunConfig) -> list[list[str]]:
    if config.m_range is not None:
        m_values = range(config.m_range[0], config.m_range[1] + 1)
    else:
        m_values = [config.m_out]
    rows = [["n", "m", "r", "r_prime", "p"]]
    grid = np.linspace(config.r_min, config.r_max, config.steps)
    for m in m_values:
        profile = scaling_profile(config.n_in, m)
        r_prime = np.atleast_1d(profile.r_prime(grid))
        p = np.atleast_1d(profile.p(grid))
        for i, r in enumerate(grid):
            rows.append(
                [str(config.n_in), str(m), _fmt(r), _fmt(r_prime[i]), _fmt(p[i])]
            )
    return rows


def threshold_rows(config: RunConfig) -> list[list[str]]:
    result = r_star(config.n_in, config.m_out, tol=config.tol)
    value = _fmt(result.r_star) if result.exists else "none"
    return [["n", "m", "r_star"], [str(config.n_in), str(config.m_out), value]]


def mstar_rows(config: RunConfig) -> list[list[str]]:
    result = m_star(config.n_in, cap=config.cap, tol=config.tol)
    value = f">={config.cap}" if result.capped else str(result.m_star)
    return [["n", "m_star"], [str(config.n_in), value]]


def optimal_map_rows(config: RunConfig) -> list[list[str]]:
    result = optimal_map(config.n_in, config.m_out, config.r)
    rows = [["input_spin", "output_spin", "coupled_spin"]]
    for l, j, J in result.best_map.sectors():
        rows.append([str(l), str(j), str(J)])
    return rows


def figure2_rows(config: RunConfig) -> list[list[str]]:
    """Both scaling-curve panels on one grid.

    Left panel: one extra output copy, ``M = N+1`` with ``N`` stepping
    from 10 to 100 by tens (curves rise with ``N``).  Right panel: five
    input copies, ``M`` from 5 to 9 (curves fall as ``M`` grows).
    """
    rows = [["panel", "n", "m", "r", "r_prime", "p"]]
    grid = np.linspace(config.r_min, config.r_max, config.steps)
    panels = [("left", [(n, n + 1) for n in range(10, 101, 10)]),
              ("right", [(5, m) for m in range(5, 10)])]
    for panel, pairs in panels:
        for n, m in pairs:
            profile = scaling_profile(n, m)
            r_prime = np.atleast_1d(profile.r_prime(grid))
            p = np.atleast_1d(profile.p(grid))
            for i, r in enumerate(grid):
                rows.append(
                    [panel, str(n), str(m), _fmt(r), _fmt(r_prime[i]), _fmt(p[i])]
                )
    return rows


def figure3_rows(config: RunConfig) -> list[list[str]]:
    """Threshold gaps ``1 - r*`` for adjacent and maximal output counts.

    The second column uses ``M = N+1``; the third uses ``M = M*(N)``, or the
    extrapolated ``M -> oo`` limit once ``M*`` exceeds the search cap.
    """
    lo, hi = config.n_range if config.n_range is not None else (4, 12)
    rows = [["n", "gap_adjacent", "gap_maximal"]]
    for n in range(lo, hi + 1):
        adjacent = r_star(n, n + 1, tol=config.tol)
        if not adjacent.exists:
            rows.append([str(n), "none", "none"])
            continue
        best = m_star(n, cap=config.cap, tol=config.tol)
        if best.capped:
            maximal = limiting_threshold(n, tol=config.tol)
        else:
            maximal = r_star(n, best.m_star, tol=config.tol).r_star
        rows.append([str(n), _fmt(1.0 - adjacent.r_star), _fmt(1.0 - maximal)])
    return rows


def verify_lines(config: RunConfig) -> tuple[list[str], bool]:
    """Human-readable dense-verification report and overall pass flag."""
    n, m = config.n_in, config.m_out
    emap = optimal_map(n, m, config.r).best_map
    coeffs = coefficients_for(emap)
    if config.inject_fault:
        key = next(iter(coeffs.weights))
        corrupted = dict(coeffs.weights)
        corrupted[key] = corrupted[key] * Fraction(101, 100)
        coeffs = type(coeffs)(n, m, corrupted)

    lines = [f"verifying N={n} -> M={m} (seed {config.seed})"]
    checks: list[tuple[str, float, float]] = []

    tp = validate_trace_preserving(coeffs)
    checks.append(("coefficient_trace_preservation", tp.max_residual(), 1e-12))

    report = verify_closed_form(
        n, m, emap, seed=config.seed, cap=max(config.cap, 12), coefficients=coeffs
    )
    checks.extend((c.name, c.deviation, c.tolerance) for c in report.checks)

    unitarity = 0.0
    for qubits in {n, m}:
        u = schur_isometry(qubits).matrix()
        unitarity = max(unitarity, float(np.max(np.abs(u.T @ u - np.eye(2**qubits)))))
    checks.append(("schur_unitarity", unitarity, 1e-12))
    checks.append(("symmetric_marginal", symmetric_marginal_deviation(2), 1e-12))
    checks.append(("permutation_twirl", permutation_twirl_deviation(min(m, 4)), 1e-12))

    failures = []
    for name, deviation, tolerance in checks:
        ok = deviation < tolerance
        if not ok:
            failures.append(name)
        lines.append(
            f"{name}: deviation {deviation:.3e} (tolerance {tolerance:g}) "
            + ("PASS" if ok else "FAIL")
        )

    if n == 1:
        profile = scaling_profile(n, m)
        grid = np.linspace(0.0, 1.0, _NO_BROADCAST_GRID)
        margin = 1.0 - float(np.max(profile.p(grid)))
        if margin > 0.0:
            lines.append(f"no-broadcasting confirmed (margin {margin:.6g} below p = 1)")
        else:
            failures.append("no_broadcasting")
            lines.append(f"no_broadcasting: p reaches {1.0 - margin:.12g} FAIL")

    if failures:
        lines.append(f"FAIL: {len(failures)} of {len(checks)} checks: " + ", ".join(failures))
    else:
        lines.append(f"PASS: all {len(checks)} checks")
    return lines, not failures


_BUILDERS = {
    "scaling": scaling_rows,
    "threshold": threshold_rows,
    "mstar": mstar_rows,
    "optimal-map": optimal_map_rows,
    "figure2": figure2_rows,
    "figure3": figure3_rows,
}


# ---------------------------------------------------------------------------
# argument plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superbroadcast",
        description="Optimal universal broadcasting: scaling curves, "
        "thresholds, and dense verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, **defaults) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", dest="output_path", default=None,
                       help="output file (default stdout)")
        p.add_argument("--tol", type=float, default=defaults.get("tol", 1e-6),
                       help="bisection tolerance")
        p.add_argument("--cap", type=int, default=defaults.get("cap", 200),
                       help="search / register-size cap")
        p.add_argument("--seed", type=int, default=7, help="random seed")
        return p

    p = add("scaling", "p(r) of the optimal map on an r grid")
    p.add_argument("--n", dest="n_in", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--m", dest="m_out", type=int)
    group.add_argument("--m-range", dest="m_range", type=_parse_range,
                       metavar="A..B", help="inclusive output-count range")
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)

    p = add("threshold", "purity threshold r*(N, M)")
    p.add_argument("--n", dest="n_in", type=int, required=True)
    p.add_argument("--m", dest="m_out", type=int, required=True)

    p = add("mstar", "largest output count with p(0) > 1")
    p.add_argument("--n", dest="n_in", type=int, required=True)

    p = add("optimal-map", "sector table of the argmax extremal map")
    p.add_argument("--n", dest="n_in", type=int, required=True)
    p.add_argument("--m", dest="m_out", type=int, required=True)
    p.add_argument("--r", type=float, default=0.5)

    p = add("figure2", "both scaling-curve panels")
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)

    p = add("figure3", "threshold gaps 1 - r* versus N")
    p.add_argument("--n-range", dest="n_range", type=_parse_range,
                   metavar="A..B", default=(4, 12))

    p = add("verify", "dense checks of the closed forms", cap=12)
    p.add_argument("--n", dest="n_in", type=int, required=True)
    p.add_argument("--m", dest="m_out", type=int, required=True)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {
        name: getattr(args, name)
        for name in (
            "n_in", "m_out", "m_range", "n_range", "r", "r_min", "r_max",
            "steps", "tol", "cap", "seed", "output_path", "inject_fault",
        )
        if hasattr(args, name)
    }
    return RunConfig(command=args.command, **fields)


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as handle:
            handle.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config_from_args(args)
    try:
        config.validate()
    except ValueError as exc:
        parser.error(str(exc))
    try:
        if config.command == "verify":
            lines, ok = verify_lines(config)
            _write(config.output_path, "\n".join(lines) + "\n")
            return 0 if ok else 1
        rows = _BUILDERS[config.command](config)
        _write(config.output_path, "\n".join(",".join(row) for row in rows) + "\n")
        return 0
    except (SearchSpaceTooLargeError, SizeCapError, ValueError) as exc:
        parser.error(str(exc))
    return 2  # unreachable; parser.error raises SystemExit


if __name__ == "__main__":
    sys.exit(main())
