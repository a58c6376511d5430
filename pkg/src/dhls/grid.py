"""Index arithmetic on cube-shaped boxes of Z^n and their isometries."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ContractError, GridRangeError

MAX_DIMENSION = 4


class Convention(str, enum.Enum):
    UNIT = "unit"  # 1 <= r_i <= N
    CENTERED = "centered"  # -N <= r_i <= N


@dataclass(frozen=True)
class GridSpec:
    """A box of integer lattice points.

    ``side`` is N in both conventions; the number of points per axis is
    N for ``UNIT`` and 2N+1 for ``CENTERED``.
    """

    dimension: int
    side: int
    convention: Convention = Convention.UNIT

    def __post_init__(self):
        if not isinstance(self.dimension, (int, np.integer)) or not 1 <= self.dimension <= MAX_DIMENSION:
            raise ContractError(f"dimension must be in 1..{MAX_DIMENSION}, got {self.dimension!r}")
        if not isinstance(self.side, (int, np.integer)) or self.side < 1:
            raise ContractError(f"side must be a positive integer, got {self.side!r}")
        object.__setattr__(self, "convention", Convention(self.convention))

    @property
    def span(self) -> int:
        """Points per axis."""
        return self.side if self.convention is Convention.UNIT else 2 * self.side + 1

    @property
    def lo(self) -> int:
        return 1 if self.convention is Convention.UNIT else -self.side

    @property
    def hi(self) -> int:
        return self.side

    @property
    def num_points(self) -> int:
        return self.span**self.dimension

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.span,) * self.dimension

    @cached_property
    def coords(self) -> np.ndarray:
        """All lattice points as an (L, n) int64 array in linear-index order."""
        axes = [np.arange(self.lo, self.hi + 1, dtype=np.int64)] * self.dimension
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def contains(self, p: Sequence[int]) -> bool:
        return len(p) == self.dimension and all(self.lo <= c <= self.hi for c in p)

    def reflect_coord(self, c):
        """Mirror a coordinate about the box center."""
        if self.convention is Convention.UNIT:
            return self.side + 1 - c
        return -c


def linear_index(p: Sequence[int], g: GridSpec) -> int:
    """Row-major index of ``p`` with axis 1 varying slowest."""
    if not g.contains(p):
        raise GridRangeError(f"point {tuple(p)} outside {g}")
    idx = 0
    for c in p:
        idx = idx * g.span + (int(c) - g.lo)
    return idx


def point_of(i: int, g: GridSpec) -> tuple[int, ...]:
    if not 0 <= i < g.num_points:
        raise GridRangeError(f"index {i} outside [0, {g.num_points})")
    out = []
    for _ in range(g.dimension):
        i, rem = divmod(i, g.span)
        out.append(rem + g.lo)
    return tuple(reversed(out))


def linear_indices(points: np.ndarray, g: GridSpec) -> np.ndarray:
    """Vectorised ``linear_index`` for an (m, n) array of points."""
    points = np.asarray(points, dtype=np.int64)
    if points.ndim != 2 or points.shape[1] != g.dimension:
        raise GridRangeError(f"expected shape (m, {g.dimension}), got {points.shape}")
    if points.size and (points.min() < g.lo or points.max() > g.hi):
        raise GridRangeError("point array has entries outside the grid")
    weights = g.span ** np.arange(g.dimension - 1, -1, -1, dtype=np.int64)
    return (points - g.lo) @ weights


@dataclass(frozen=True)
class Isometry:
    """Signed coordinate permutation.

    The image of p has coordinate i equal to p[permutation[i]], mirrored
    about the box center when ``reflections[i]`` is set.
    """

    permutation: tuple[int, ...]
    reflections: tuple[bool, ...]

    @property
    def is_identity(self) -> bool:
        return self.permutation == tuple(range(len(self.permutation))) and not any(self.reflections)

    def compose(self, other: Isometry, g: GridSpec) -> Isometry:
        """Return ``self`` after ``other`` (self(other(p)))."""
        n = len(self.permutation)
        perm = tuple(other.permutation[self.permutation[i]] for i in range(n))
        refl = tuple(self.reflections[i] != other.reflections[self.permutation[i]] for i in range(n))
        return Isometry(perm, refl)


def isometry_group(g: GridSpec) -> list[Isometry]:
    """All 2^n * n! signed permutations of the box."""
    n = g.dimension
    return [
        Isometry(tuple(perm), tuple(flips))
        for perm in itertools.permutations(range(n))
        for flips in itertools.product((False, True), repeat=n)
    ]


def group_order(n: int) -> int:
    return 2**n * math.factorial(n)


def apply_isometry(phi: Isometry, p: Sequence[int], g: GridSpec) -> tuple[int, ...]:
    if not g.contains(p):
        raise GridRangeError(f"point {tuple(p)} outside {g}")
    return tuple(
        g.reflect_coord(p[src]) if flip else p[src]
        for src, flip in zip(phi.permutation, phi.reflections)
    )


def apply_isometry_points(phi: Isometry, points: np.ndarray, g: GridSpec) -> np.ndarray:
    """Vectorised ``apply_isometry`` over an (m, n) array."""
    out = np.asarray(points, dtype=np.int64)[:, list(phi.permutation)]
    for i, flip in enumerate(phi.reflections):
        if flip:
            out[:, i] = g.reflect_coord(out[:, i])
    return out


def permutation_indices(phi: Isometry, g: GridSpec) -> np.ndarray:
    """Index map ``k -> linear_index(phi(point_of(k)))`` for the whole grid."""
    return linear_indices(apply_isometry_points(phi, g.coords, g), g)
