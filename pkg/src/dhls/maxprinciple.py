"""Discrete maximum principle and the monotone-decay certificate.

``solve_fixed_point`` solves u = A u + f for a nonnegative contraction A by
plain iteration; every iterate stays in the nonnegative cone, so the limit
does too.

``build_decay_system`` writes the first differences of a centred-grid
optimizer along one axis, d_r = a_(r1-1, r') - a_(r1, r') for 1 <= r1 <= N,
as such a system: the reflection symmetry a_(x, r') = a_(-x, r') folds the
eigen-equation for the left half onto the right half, leaving a
nonnegative matrix with norm at most lambda / (lambda + (2N-1)^-n) and a
nonnegative forcing term coming from the two boundary layers x = +-N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import eig
from .errors import ContractError, ConvergenceError
from .grid import Convention
from .kernel import kernel_from_sqdist
from .optimizer import OptimizerResult

DECAY_TOL = 1e-10


@dataclass(frozen=True)
class FixedPointSystem:
    matrix: np.ndarray
    forcing: np.ndarray
    norm_estimate: float

    @classmethod
    def from_arrays(cls, matrix, forcing, tol: float = 1e-12) -> FixedPointSystem:
        A = np.asarray(matrix, dtype=np.float64)
        f = np.asarray(forcing, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or f.shape != (A.shape[0],):
            raise ContractError(f"incompatible shapes {A.shape} and {f.shape}")
        norm = eig.operator_norm(lambda x: A @ x, lambda x: A.T @ x, A.shape[0], tol=tol)
        return cls(A, f, norm)

    @property
    def size(self) -> int:
        return self.forcing.size

    @property
    def nonnegative(self) -> bool:
        return bool((self.matrix >= 0).all() and (self.forcing >= 0).all())


def solve_fixed_point(sys: FixedPointSystem, tol: float = 1e-12, max_iter: int = 1_000_000) -> np.ndarray:
    """Iterate u <- A u + f from u = f.

    Stops once |u_{k+1} - u_k| <= tol (1 - |A|), which bounds both the
    error and the residual |u - (A u + f)| by tol.
    """
    rho = sys.norm_estimate
    if not rho < 1:
        raise ContractError(f"matrix norm {rho!r} is not below 1")
    if (sys.forcing < 0).any():
        raise ContractError("forcing term has negative entries")
    A, f = sys.matrix, sys.forcing
    u = f.copy()
    stop = tol * (1.0 - rho)
    for _ in range(max_iter):
        nxt = A @ u + f
        step = np.linalg.norm(nxt - u)
        u = nxt
        if step <= stop:
            return u
    raise ConvergenceError(f"fixed point not reached in {max_iter} iterations", partial=u)


@dataclass(frozen=True)
class DecaySystem:
    axis: int
    lam: float
    points: np.ndarray  # (L', n) row labels r, first coordinate along ``axis``
    matrix: np.ndarray
    forcing: np.ndarray  # F = f / (lam + |2 r1 - 1|^-n)
    boundary: np.ndarray  # f itself
    d: np.ndarray
    near: np.ndarray  # C: prefactor * |t - r|^-n
    far: np.ndarray  # D: prefactor * |t~ - r|^-n, t~ = (1 - t1, t')
    opnorm: float
    delta_N: float

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.d - (self.matrix @ self.d + self.forcing)), initial=0.0))

    @property
    def norm_bound(self) -> float:
        return self.lam / (self.lam + self.delta_N)


def _sqdist(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    diff = p[:, None, :] - q[None, :, :]
    return (diff * diff).sum(axis=-1)


def build_decay_system(opt: OptimizerResult, axis: int = 1, tol: float = 1e-12) -> DecaySystem:
    """Difference system along ``axis`` (1-based) for a centred-grid optimizer."""
    g = opt.grid
    if g.convention is not Convention.CENTERED:
        raise ContractError("decay system needs a centred grid")
    n, N = g.dimension, g.side
    if not 1 <= axis <= n:
        raise ContractError(f"axis must be in 1..{n}")
    a = np.moveaxis(opt.as_array(), axis - 1, 0)  # cube: relabel axes

    rest = [np.arange(-N, N + 1)] * (n - 1)
    mesh = np.meshgrid(np.arange(1, N + 1), *rest, indexing="ij")
    r = np.stack([m.ravel() for m in mesh], axis=1).astype(np.int64)
    r_refl = r.copy()
    r_refl[:, 0] = 1 - r[:, 0]

    def at(x1, rows):
        return a[(x1 + N,) + tuple((rows[:, 1:] + N).T)]

    d = at(r[:, 0] - 1, r) - at(r[:, 0], r)
    prefactor = 1.0 / (opt.lam + np.abs(2 * r[:, 0] - 1).astype(np.float64) ** (-n))

    near = kernel_from_sqdist(_sqdist(r, r), n) * prefactor[:, None]
    far = kernel_from_sqdist(_sqdist(r, r_refl), n) * prefactor[:, None]
    np.fill_diagonal(far, 0.0)  # the t = r reflected term sits in the prefactor
    A = near - far

    # boundary layers t1 = N + 1 and t1 = -N, both weighted by a_(N, t')
    if n == 1:
        tprime = np.zeros((1, 0), dtype=np.int64)
    else:
        tm = np.meshgrid(*rest, indexing="ij")
        tprime = np.stack([m.ravel() for m in tm], axis=1).astype(np.int64)
    top = np.column_stack([np.full(len(tprime), N + 1), tprime])
    bottom = np.column_stack([np.full(len(tprime), -N), tprime])
    a_edge = a[(np.full(len(tprime), 2 * N),) + tuple((tprime + N).T)]
    f = (kernel_from_sqdist(_sqdist(r, top), n) - kernel_from_sqdist(_sqdist(r, bottom), n)) @ a_edge
    F = prefactor * f

    opnorm = eig.operator_norm(lambda x: A @ x, lambda x: A.T @ x, len(d), tol=tol)
    return DecaySystem(
        axis=axis,
        lam=opt.lam,
        points=r,
        matrix=A,
        forcing=F,
        boundary=f,
        d=d,
        near=near,
        far=far,
        opnorm=opnorm,
        delta_N=float(2 * N - 1) ** (-n),
    )


def direct_differences(opt: OptimizerResult, axis: int) -> np.ndarray:
    """Signed steps toward the centre along ``axis``; all >= 0 iff the decay inequalities hold.

    For r_i >= 1 this is a_(r_i - 1) - a_(r_i); for r_i <= 0 it is
    a_(r_i) - a_(r_i - 1).
    """
    N = opt.grid.side
    a = np.moveaxis(opt.as_array(), axis - 1, 0)
    step = a[:-1] - a[1:]  # a_(x-1) - a_(x) for x = -N+1..N
    sign = np.where(np.arange(-N + 1, N + 1) >= 1, 1.0, -1.0)
    return step * sign.reshape((-1,) + (1,) * (a.ndim - 1))


@dataclass(frozen=True)
class AxisDecay:
    axis: int
    min_direct: float
    min_d: float
    min_F: float
    opnorm_A: float
    norm_bound: float
    delta_N: float
    residual: float
    fixed_point_gap: float
    passed: bool


@dataclass(frozen=True)
class DecayReport:
    axes: list[AxisDecay] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.axes) and all(ax.passed for ax in self.axes)


def verify_decay(
    opt: OptimizerResult,
    tol: float = DECAY_TOL,
    residual_tol: float = 1e-8,
    axes: Optional[list[int]] = None,
) -> DecayReport:
    """Check the monotone decay of a centred optimizer on every axis."""
    g = opt.grid
    if g.convention is not Convention.CENTERED:
        raise ContractError("decay check needs a centred grid")
    out = []
    for axis in axes or range(1, g.dimension + 1):
        direct = direct_differences(opt, axis)
        sys = build_decay_system(opt, axis)
        residual = sys.residual
        try:
            u = solve_fixed_point(FixedPointSystem(sys.matrix, sys.forcing, sys.opnorm))
            gap = float(np.max(np.abs(u - sys.d), initial=0.0))
        except (ContractError, ConvergenceError):
            gap = float("nan")
        min_d = float(sys.d.min(initial=np.inf))
        min_F = float(sys.forcing.min(initial=np.inf))
        ok = (
            float(direct.min(initial=np.inf)) >= -tol
            and min_d >= -tol
            and min_F >= 0.0
            and sys.opnorm < 1.0
            and residual <= residual_tol
        )
        out.append(
            AxisDecay(
                axis=axis,
                min_direct=float(direct.min(initial=np.inf)),
                min_d=min_d,
                min_F=min_F,
                opnorm_A=sys.opnorm,
                norm_bound=sys.norm_bound,
                delta_N=sys.delta_N,
                residual=residual,
                fixed_point_gap=gap,
                passed=bool(ok),
            )
        )
    return DecayReport(out)
