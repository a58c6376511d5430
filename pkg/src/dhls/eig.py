"""Power iteration, deflation and operator-norm estimates for matrix-free operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ContractError, ConvergenceError

Apply = Callable[[np.ndarray], np.ndarray]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class EigenResult:
    eigenvalue: float
    vector: np.ndarray
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SpectralReport:
    """Top two eigenvalues of C = A^T A for a symmetric kernel operator A."""

    mu_L: float
    mu_L_minus_1: float
    converged: bool = True

    @property
    def gap_ratio(self) -> float:
        return self.mu_L_minus_1 / self.mu_L if self.mu_L > 0 else float("nan")


def uniform_start(L: int) -> np.ndarray:
    return np.full(L, L**-0.5)


def abs_map(v: np.ndarray) -> np.ndarray:
    """Entrywise absolute value."""
    return np.abs(np.asarray(v, dtype=np.float64))


def sign_normalize(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its entry sum is positive.

    Vectors whose sum vanishes to rounding (odd eigenvectors) are oriented
    by their largest-magnitude entry instead.
    """
    s = v.sum()
    if abs(s) <= 1e-12 * np.sqrt(v.size) * max(np.abs(v).max(initial=0.0), 1e-300):
        s = v[np.argmax(np.abs(v))]
    return -v if s < 0 else v


def power_iteration(
    apply: Apply,
    L: int,
    shift: float = 1.0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: Optional[np.ndarray] = None,
    orth: Optional[np.ndarray] = None,
) -> EigenResult:
    """Dominant eigenpair of a symmetric operator by shifted power iteration.

    Iterates v <- (A + shift I) v / |...| and reports the Rayleigh quotient
    of A itself. Stops when |Av - lam v| <= tol * max(|lam|, 1). If ``orth``
    is given (a unit vector), every iterate is projected onto its orthogonal
    complement, which deflates that direction.

    A result with ``converged=False`` is returned when ``max_iter`` is hit.
    """
    if shift < 0:
        raise ContractError("shift must be nonnegative")
    if tol <= 0:
        raise ContractError("tol must be positive")
    v = uniform_start(L) if start is None else np.array(start, dtype=np.float64)
    if v.shape != (L,):
        raise ContractError(f"start vector must have length {L}")

    def project(x):
        return x if orth is None else x - (orth @ x) * orth

    v = project(v)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ContractError("start vector has no component in the search space")
    v = v / nv

    lam, res = 0.0, np.inf
    for k in range(1, max_iter + 1):
        w = project(apply(v))
        lam = float(v @ w)
        res = float(np.linalg.norm(w - lam * v))
        if res <= tol * max(abs(lam), 1.0):
            return EigenResult(lam, sign_normalize(v), res, k, True)
        y = w + shift * v
        ny = np.linalg.norm(y)
        if ny == 0:
            break
        v = y / ny
    return EigenResult(lam, sign_normalize(v), res, max_iter, False)


def _random_start(L: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(L)


def second_eigenvalue(
    apply: Apply,
    perron: EigenResult,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> EigenResult:
    """Second-largest (algebraic) eigenvalue of a symmetric nonnegative operator.

    Works on the complement of the Perron vector; the shift |lambda_1| makes
    A + shift I positive semidefinite there, since every eigenvalue of a
    nonnegative matrix is at least -lambda_1 in value.
    """
    if not perron.converged:
        raise ContractError("Perron eigenpair must be converged before deflation")
    L = perron.vector.size
    if L < 2:
        raise ContractError("no second eigenvalue on a one-point grid")
    return power_iteration(
        apply,
        L,
        shift=abs(perron.eigenvalue),
        tol=tol,
        max_iter=max_iter,
        start=_random_start(L, seed),
        orth=perron.vector,
    )


def spectral_report(
    apply: Apply,
    perron: EigenResult,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> SpectralReport:
    """mu_L and mu_{L-1} of C = A^2 for symmetric A with Perron pair ``perron``.

    mu_{L-1} is the top eigenvalue of C restricted to the complement of the
    Perron vector, i.e. the square of the second-largest |eigenvalue| of A.
    """
    if not perron.converged:
        raise ContractError("Perron eigenpair must be converged before deflation")
    L = perron.vector.size
    mu_L = perron.eigenvalue**2
    if L == 1:
        return SpectralReport(mu_L, 0.0)
    res = power_iteration(
        lambda x: apply(apply(x)),
        L,
        shift=0.0,
        tol=tol,
        max_iter=max_iter,
        start=_random_start(L, seed),
        orth=perron.vector,
    )
    return SpectralReport(mu_L, res.eigenvalue, res.converged)


def operator_norm(
    apply: Apply,
    apply_transpose: Apply,
    L: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: Optional[np.ndarray] = None,
) -> float:
    """Spectral norm |A|_2 as the square root of the top eigenvalue of A^T A."""
    if tol <= 0:
        raise ContractError("tol must be positive")
    if L == 0:
        return 0.0
    res = power_iteration(
        lambda x: apply_transpose(apply(x)), L, shift=0.0, tol=tol, max_iter=max_iter, start=start
    )
    if not res.converged:
        raise ConvergenceError(f"operator norm did not converge in {max_iter} iterations", partial=res)
    return float(np.sqrt(max(res.eigenvalue, 0.0)))
