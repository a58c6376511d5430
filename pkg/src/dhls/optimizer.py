"""The optimizer of the critical discrete inequality.

The maximum of J(a, b) = a^T A b over unit vectors is the Perron eigenvalue
of the kernel matrix, attained at a = b = its positive eigenvector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import eig
from .errors import ContractError, ConvergenceError
from .grid import GridSpec
from .kernel import DEFAULT_DENSE_LIMIT, KernelOperator, Mode, make_operator, quadratic_form


@dataclass(frozen=True)
class OptimizerResult:
    grid: GridSpec
    lam: float
    vector: np.ndarray
    el_residual: float
    gap_ratio: float
    iterations: int
    mode: Mode = Mode.DENSE

    @property
    def min_entry(self) -> float:
        return float(self.vector.min())

    def as_array(self) -> np.ndarray:
        """Optimizer reshaped onto the grid."""
        return self.vector.reshape(self.grid.shape)


def solve_optimizer(
    g: GridSpec,
    tol: float = eig.DEFAULT_TOL,
    max_iter: int = eig.DEFAULT_MAX_ITER,
    *,
    shift: float = 1.0,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    mode: Mode | str | None = None,
    start: Optional[np.ndarray] = None,
    with_gap: bool = True,
    op: Optional[KernelOperator] = None,
) -> OptimizerResult:
    """Compute (lambda_N, a) for grid ``g``.

    Raises :class:`ConvergenceError` with the partial :class:`OptimizerResult`
    attached if power iteration does not reach ``tol``.
    """
    if tol <= 0:
        raise ContractError("tol must be positive")
    if op is None:
        op = make_operator(g, mode, dense_limit)
    # power iteration stops on a residual relative to lambda; the largest row
    # sum bounds lambda, so this keeps the absolute residual below tol
    lam_bound = max(float(op.matvec(np.ones(g.num_points)).max()), 1.0)
    res = eig.power_iteration(op, g.num_points, shift=shift, tol=tol / lam_bound, max_iter=max_iter, start=start)
    gap = float("nan")
    if res.converged and with_gap and g.num_points > 1:
        gap = eig.spectral_report(op, res, tol=max(tol, 1e-10), max_iter=max_iter).gap_ratio
    out = OptimizerResult(g, res.eigenvalue, res.vector, res.residual, gap, res.iterations, op.mode)
    if not res.converged:
        raise ConvergenceError(
            f"power iteration on {g} stopped after {max_iter} iterations with residual {res.residual:.3e}",
            partial=out,
        )
    return out


def el_check(res: OptimizerResult, op: Optional[KernelOperator] = None) -> tuple[float, float]:
    """Both Euler-Lagrange residuals |lam a - A b|, |lam b - A a| with a = b."""
    op = op or make_operator(res.grid, res.mode)
    a = res.vector
    r = float(np.linalg.norm(res.lam * a - op.matvec(a)))
    return r, r


def inequality_check(
    res: OptimizerResult,
    trials: int,
    seed: int,
    op: Optional[KernelOperator] = None,
) -> float:
    """Largest J(a, b)/(|a||b|) over ``trials`` seeded random pairs."""
    if trials < 1:
        raise ContractError("trials must be at least 1")
    op = op or make_operator(res.grid, res.mode)
    rng = np.random.default_rng(seed)
    L = res.grid.num_points
    worst = -np.inf
    for _ in range(trials):
        a = rng.standard_normal(L)
        b = rng.standard_normal(L)
        ratio = quadratic_form(op, a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        worst = max(worst, ratio)
    return float(worst)
