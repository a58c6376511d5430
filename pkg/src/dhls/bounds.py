"""Two-sided bounds on lambda_N, N-sweeps and log-slope estimates."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import ContractError, ConvergenceError
from .grid import Convention, GridSpec, point_of
from .kernel import DEFAULT_DENSE_LIMIT, make_operator, pair_sum, row_sum
from .optimizer import solve_optimizer

# relative slack for the non-strict sandwich, where lambda equals a bound (N < 3)
SANDWICH_SLACK = 1e-12


def within_sandwich(lower: float, lam: float, upper: float) -> bool:
    eps = SANDWICH_SLACK * max(abs(lam), 1.0)
    return lower - eps <= lam <= upper + eps


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n, 2 pi^(n/2) / Gamma(n/2)."""
    if n < 1:
        raise ContractError(f"sphere_area needs n >= 1, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def lower_bound_uniform(g: GridSpec) -> float:
    """J(a, a) for the constant unit vector a = L^(-1/2)."""
    return pair_sum(g) / g.num_points


def upper_bound_center(g: GridSpec) -> float:
    """Largest row sum of the kernel matrix.

    Row sums are ranked with the (possibly fast) operator and the winner
    is recomputed exactly, so the value is a true discrete sum.
    """
    op = make_operator(g, dense_limit=DEFAULT_DENSE_LIMIT)
    sums = op.matvec(np.ones(g.num_points))
    best = int(np.argmax(sums))
    return row_sum(g, point_of(best, g))


def upper_bound_integral(g: GridSpec) -> float:
    """Closed form |S^{n-1}| (ln N + ln(2)/2) from the continuum estimate; reported only."""
    return sphere_area(g.dimension) * (math.log(g.side) + 0.5 * math.log(2.0))


@dataclass(frozen=True)
class BoundsReport:
    grid: GridSpec
    lower_uniform: float
    upper_center: float
    sphere_area: float
    log_N: float
    lam: Optional[float] = None
    upper_integral: float = float("nan")

    @property
    def sandwich_ok(self) -> bool:
        return self.lam is None or within_sandwich(self.lower_uniform, self.lam, self.upper_center)


def bounds_report(g: GridSpec, lam: Optional[float] = None) -> BoundsReport:
    return BoundsReport(
        grid=g,
        lower_uniform=lower_bound_uniform(g),
        upper_center=upper_bound_center(g),
        sphere_area=sphere_area(g.dimension),
        log_N=math.log(g.side),
        lam=lam,
        upper_integral=upper_bound_integral(g),
    )


@dataclass
class SweepRow:
    n: int
    N: int
    lam: float = float("nan")
    lower: float = float("nan")
    upper: float = float("nan")
    iterations: int = field(default=0, compare=False)
    wall_ms: float = field(default=float("nan"), compare=False)
    error: str = ""

    @property
    def ln_N(self) -> float:
        return math.log(self.N)


@dataclass
class SweepTable:
    rows: list[SweepRow] = field(default_factory=list)

    def row(self, N: int) -> SweepRow:
        for r in self.rows:
            if r.N == N:
                return r
        raise KeyError(f"no row for N={N}")

    def slopes(self) -> list[tuple[tuple[int, int], float]]:
        """Slope between each pair of consecutive successful rows."""
        ok = [r for r in self.rows if not r.error]
        return [((a.N, b.N), slope_estimate(self, a.N, b.N)) for a, b in zip(ok, ok[1:])]


def sweep_row(
    n: int,
    N: int,
    tol: float = 1e-10,
    *,
    convention: Convention = Convention.UNIT,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    max_iter: int = 100_000,
    shift: float = 1.0,
) -> SweepRow:
    g = GridSpec(n, N, convention)
    t0 = time.perf_counter()
    opt = solve_optimizer(g, tol, max_iter, shift=shift, dense_limit=dense_limit, with_gap=False)
    lower = lower_bound_uniform(g)
    upper = upper_bound_center(g)
    wall = (time.perf_counter() - t0) * 1e3
    row = SweepRow(n, N, opt.lam, lower, upper, opt.iterations, wall)
    if not within_sandwich(lower, opt.lam, upper):
        row.error = f"sandwich violated: {lower!r} <= {opt.lam!r} <= {upper!r} fails"
    return row


def sweep(
    n: int,
    N_values: Iterable[int],
    tol: float = 1e-10,
    *,
    strict: bool = True,
    **kwargs,
) -> SweepTable:
    """Solve and bound each N in turn.

    With ``strict`` a solver failure is raised naming the offending N;
    otherwise it is recorded in the row's ``error`` field.
    """
    N_values = list(N_values)
    if any(b <= a for a, b in zip(N_values, N_values[1:])):
        raise ContractError("N_values must be strictly increasing")
    table = SweepTable()
    for N in N_values:
        try:
            row = sweep_row(n, N, tol, **kwargs)
        except ConvergenceError as exc:
            if strict:
                raise ConvergenceError(f"N={N}: {exc}", partial=exc.partial) from exc
            row = SweepRow(n, N, error=f"not converged: {exc}")
        if row.error and strict:
            raise ContractError(f"N={N}: {row.error}")
        table.rows.append(row)
    return table


def slope_estimate(table: SweepTable, N1: int, N2: int) -> float:
    """(lambda_{N2} - lambda_{N1}) / (ln N2 - ln N1)."""
    if not N1 < N2:
        raise ContractError("need N1 < N2")
    r1, r2 = table.row(N1), table.row(N2)
    return (r2.lam - r1.lam) / (math.log(N2) - math.log(N1))
