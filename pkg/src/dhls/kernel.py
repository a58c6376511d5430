"""The zero-diagonal lattice kernel A(r, s) = |r - s|^(-n).

Two application paths share one interface: an explicit dense matrix (the
oracle) and zero-padded FFT convolution, which is exact up to rounding
because the kernel depends only on r - s.
"""

from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np
import scipy.fft

from .errors import CapacityError, DimensionError
from .grid import GridSpec, linear_index

DEFAULT_DENSE_LIMIT = 4096


class Mode(str, enum.Enum):
    DENSE = "dense"
    FAST = "fast"


def kernel_value(x: Sequence[int], n: int) -> float:
    """|x|^(-n), with 0 at the origin."""
    sq = sum(int(c) * int(c) for c in x)
    if sq == 0:
        return 0.0
    return float(sq) ** (-n / 2.0)


def kernel_from_sqdist(sq: np.ndarray, n: int) -> np.ndarray:
    """Elementwise kernel from exact integer squared distances."""
    sq = np.asarray(sq)
    out = np.zeros(sq.shape, dtype=np.float64)
    nz = sq != 0
    out[nz] = sq[nz].astype(np.float64) ** (-n / 2.0)
    return out


def offset_kernel(g: GridSpec) -> np.ndarray:
    """Kernel on all offsets in {-(span-1), ..., span-1}^n, origin at the centre."""
    m = g.span
    ax = np.arange(-(m - 1), m, dtype=np.int64)
    sq = np.zeros((2 * m - 1,) * g.dimension, dtype=np.int64)
    for i in range(g.dimension):
        shape = [1] * g.dimension
        shape[i] = -1
        sq = sq + (ax**2).reshape(shape)
    return kernel_from_sqdist(sq, g.dimension)


class KernelOperator:
    """Symmetric kernel operator on a grid.

    Use :func:`dense_matrix` or :func:`fast_operator` (or :func:`make_operator`)
    rather than calling the constructor directly.
    """

    def __init__(self, grid: GridSpec, mode: Mode, matrix=None, kernel_hat=None, pad=None):
        self.grid = grid
        self.mode = Mode(mode)
        self.matrix = matrix
        self._kernel_hat = kernel_hat
        self._pad = pad
        if self.matrix is not None:
            self.matrix.setflags(write=False)

    @property
    def size(self) -> int:
        return self.grid.num_points

    def __repr__(self):
        return f"KernelOperator({self.grid}, mode={self.mode.value})"

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.size,):
            raise DimensionError(f"expected vector of length {self.size}, got shape {v.shape}")
        if self.mode is Mode.DENSE:
            return self.matrix @ v
        g = self.grid
        padded = scipy.fft.rfftn(v.reshape(g.shape), s=self._pad, workers=1)
        full = scipy.fft.irfftn(padded * self._kernel_hat, s=self._pad, workers=1)
        return np.ascontiguousarray(full[tuple(slice(0, g.span) for _ in range(g.dimension))]).ravel()

    __call__ = matvec

    def to_dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return _build_dense(self.grid)


def _build_dense(g: GridSpec) -> np.ndarray:
    pts = g.coords
    sq = np.zeros((g.num_points, g.num_points), dtype=np.int64)
    for i in range(g.dimension):
        diff = pts[:, i][:, None] - pts[:, i][None, :]
        sq += diff * diff
    return kernel_from_sqdist(sq, g.dimension)


def dense_matrix(g: GridSpec, dense_limit: int = DEFAULT_DENSE_LIMIT) -> KernelOperator:
    if g.num_points > dense_limit:
        raise CapacityError(
            f"grid has {g.num_points} points, over dense_limit={dense_limit}; use the fast convolution path"
        )
    return KernelOperator(g, Mode.DENSE, matrix=_build_dense(g))


def fast_operator(g: GridSpec) -> KernelOperator:
    m = g.span
    pad = tuple(scipy.fft.next_fast_len(2 * m - 1, real=True) for _ in range(g.dimension))
    k = offset_kernel(g)
    # place offset x at index x mod pad so the cyclic product is a linear convolution
    wrapped = np.zeros(pad, dtype=np.float64)
    idx = np.arange(-(m - 1), m)
    wrapped[np.ix_(*[idx % p for p in pad])] = k
    kernel_hat = scipy.fft.rfftn(wrapped, workers=1)
    return KernelOperator(g, Mode.FAST, kernel_hat=kernel_hat, pad=pad)


def make_operator(g: GridSpec, mode: Mode | str | None = None, dense_limit: int = DEFAULT_DENSE_LIMIT) -> KernelOperator:
    """Dense below ``dense_limit`` points, fast convolution above, unless ``mode`` forces one."""
    if mode is None:
        mode = Mode.DENSE if g.num_points <= dense_limit else Mode.FAST
    mode = Mode(mode)
    if mode is Mode.DENSE:
        return dense_matrix(g, dense_limit=max(dense_limit, g.num_points))
    return fast_operator(g)


def quadratic_form(op: KernelOperator, a: np.ndarray, b: np.ndarray) -> float:
    """J(a, b) = a^T A b."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (op.size,):
        raise DimensionError(f"expected vector of length {op.size}, got shape {a.shape}")
    return float(a @ op.matvec(b))


def row_sum(g: GridSpec, s0: Sequence[int]) -> float:
    """Sum of kernel values from ``s0`` to every other grid point (exactly rounded)."""
    linear_index(s0, g)  # range check
    diff = g.coords - np.asarray(s0, dtype=np.int64)
    sq = (diff * diff).sum(axis=1)
    return math.fsum(kernel_from_sqdist(sq, g.dimension))


def pair_sum(g: GridSpec) -> float:
    """sum over r != s of |r - s|^(-n), via counts of each offset.

    Offset x occurs prod_i (span - |x_i|) times among ordered pairs.
    """
    m = g.span
    ax = np.arange(-(m - 1), m, dtype=np.int64)
    counts = np.ones((2 * m - 1,) * g.dimension, dtype=np.float64)
    for i in range(g.dimension):
        shape = [1] * g.dimension
        shape[i] = -1
        counts = counts * (m - np.abs(ax)).reshape(shape)
    return math.fsum((counts * offset_kernel(g)).ravel())
