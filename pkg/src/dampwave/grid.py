"""Uniform lattices on [-X, X]^d and vector fields living on them.

All spatial derivatives are centered finite differences with zero extension
beyond the lattice edge, so the first-derivative operator is exactly
antisymmetric with respect to the lattice inner product. The Laplacian is the
composition ``sum_j D_j D_j`` of those same first-derivative stencils, which
keeps the discrete energy identity of the wave solver exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DerivativeOrderError, ParameterError, ShapeError

MultiIndex = tuple[int, ...]

#: default cap on lattice points (n_per_axis ** d)
DEFAULT_MEMORY_BUDGET = 2**24

# centered first-derivative weights, ordered from offset -k to +k
_FIRST_DERIVATIVE = {
    2: np.array([-1.0, 0.0, 1.0]) / 2.0,
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
}


@dataclass(frozen=True)
class Grid:
    """Uniform lattice with ``n`` nodes per axis on ``[-X, X]^d``.

    ``n`` must be odd so that the origin is a lattice node; node coordinates
    are built as integer multiples of ``h`` and are therefore exactly
    symmetric about the origin.
    """

    d: int
    n: int
    X: float
    stencil_order: int = 4
    max_order: int = 8
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ParameterError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.stencil_order not in _FIRST_DERIVATIVE:
            raise ParameterError(f"stencil_order must be 2 or 4, got {self.stencil_order}")
        if self.n % 2 == 0:
            raise ParameterError(f"n_per_axis must be odd so the origin is a node, got {self.n}")
        if self.n < 2 * self.stencil_order + 1:
            raise ParameterError(
                f"n_per_axis={self.n} too small for stencil order {self.stencil_order}"
            )
        if not self.X > 0:
            raise ParameterError(f"half width must be positive, got {self.X}")
        if self.n**self.d > self.memory_budget:
            raise ParameterError(
                f"{self.n}^{self.d} points exceed the memory budget of {self.memory_budget}"
            )

    @property
    def h(self) -> float:
        return 2.0 * self.X / (self.n - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def stencil_radius(self) -> int:
        return self.stencil_order // 2

    @cached_property
    def axis(self) -> np.ndarray:
        k = self.n // 2
        return self.h * np.arange(-k, k + 1, dtype=float)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return tuple(np.meshgrid(*([self.axis] * self.d), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords))

    def points(self) -> np.ndarray:
        """Lattice points as an array of shape ``(*self.shape, d)``."""
        return np.stack(self.coords, axis=-1)

    def refined(self) -> "Grid":
        """Same domain with the spacing halved."""
        return Grid(self.d, 2 * self.n - 1, self.X, self.stencil_order,
                    self.max_order, self.memory_budget)

    def scaled(self, factor: float) -> "Grid":
        """Same node count on ``[-factor X, factor X]^d``."""
        return Grid(self.d, self.n, self.X * factor, self.stencil_order,
                    self.max_order, self.memory_budget)

    def zeros(self, components: int | None = None) -> "Field":
        m = self.d if components is None else components
        return Field(self, np.zeros((m, *self.shape)))


@dataclass(frozen=True, eq=False)
class Field:
    """Real vector field; ``data`` has shape ``(components, *grid.shape)``.

    The physical unknown ``u = (u^1, ..., u^d)`` has ``d`` components; scalar
    test functions used by the inequality suites have one.
    """

    grid: Grid
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != self.grid.d + 1 or data.shape[1:] != self.grid.shape:
            raise ShapeError(
                f"field data of shape {data.shape} does not fit grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise ParameterError("field contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def components(self) -> int:
        return self.data.shape[0]

    def _check(self, other: "Field"):
        if other.grid != self.grid or other.data.shape != self.data.shape:
            raise ShapeError("fields live on different grids or have different component counts")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.data + other.data)

    def __sub__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.data - other.data)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.data)

    def __mul__(self, c: float) -> "Field":
        return Field(self.grid, c * self.data)

    __rmul__ = __mul__

    def component(self, i: int) -> "Field":
        return Field(self.grid, self.data[i : i + 1])


def multi_indices(d: int, max_order: int) -> list[MultiIndex]:
    """All multi-indices with ``|a| <= max_order``, graded then lexicographic."""
    out: list[MultiIndex] = []
    for order in range(max_order + 1):
        level = [a for a in itertools.product(range(order + 1), repeat=d) if sum(a) == order]
        out.extend(sorted(level, reverse=True))
    return out


def unit(d: int, j: int, k: int = 1) -> MultiIndex:
    a = [0] * d
    a[j] = k
    return tuple(a)


def _d1(arr: np.ndarray, axis: int, grid: Grid) -> np.ndarray:
    # arr has a leading component axis, spatial axes follow
    w = _FIRST_DERIVATIVE[grid.stencil_order] / grid.h
    return correlate1d(arr, w, axis=axis + 1, mode="constant", cval=0.0)


def _check_index(grid: Grid, a: Sequence[int]) -> MultiIndex:
    a = tuple(int(k) for k in a)
    if len(a) != grid.d or any(k < 0 for k in a):
        raise ParameterError(f"multi-index {a} invalid for d={grid.d}")
    if sum(a) > grid.max_order:
        raise DerivativeOrderError(
            f"derivative order {sum(a)} exceeds configured maximum {grid.max_order}"
        )
    return a


def deriv_array(arr: np.ndarray, grid: Grid, a: Sequence[int]) -> np.ndarray:
    """``deriv`` on a raw ``(components, *shape)`` array."""
    a = _check_index(grid, a)
    out = arr
    for axis, k in enumerate(a):
        for _ in range(k):
            out = _d1(out, axis, grid)
    return out


def deriv(f: Field, a: Sequence[int]) -> Field:
    """Mixed partial derivative ``d^a f``, axes applied in increasing order."""
    return Field(f.grid, deriv_array(f.data, f.grid, a))


def gradient(f: Field) -> np.ndarray:
    """Array of shape ``(components, d, *shape)`` with ``[i, j] = d_j f^i``."""
    g = f.grid
    return np.stack([_d1(f.data, j, g) for j in range(g.d)], axis=1)


def laplacian_array(arr: np.ndarray, grid: Grid) -> np.ndarray:
    out = np.zeros_like(arr)
    for j in range(grid.d):
        out += _d1(_d1(arr, j, grid), j, grid)
    return out


def laplacian(f: Field) -> Field:
    return Field(f.grid, laplacian_array(f.data, f.grid))


class DerivativeTree:
    """Memoized ``d^a f`` for many multi-indices of one field.

    Each entry is obtained from its parent (the index with the last nonzero
    axis decremented), which reproduces the axis order of :func:`deriv`
    bit for bit.
    """

    def __init__(self, data: np.ndarray, grid: Grid):
        self.grid = grid
        self._cache: dict[MultiIndex, np.ndarray] = {(0,) * grid.d: data}

    def __getitem__(self, a: MultiIndex) -> np.ndarray:
        a = tuple(a)
        hit = self._cache.get(a)
        if hit is not None:
            return hit
        _check_index(self.grid, a)
        last = max(j for j, k in enumerate(a) if k > 0)
        parent = list(a)
        parent[last] -= 1
        value = _d1(self[tuple(parent)], last, self.grid)
        self._cache[a] = value
        return value

    def grad(self, a: MultiIndex) -> list[np.ndarray]:
        """``[d_j d^a f for j]`` (gradient applied after ``d^a``)."""
        return [self[tuple(k + (1 if i == j else 0) for i, k in enumerate(a))]
                for j in range(self.grid.d)]


def _sum(x: np.ndarray) -> float:
    # numpy's pairwise summation over a contiguous buffer: deterministic order
    return float(np.sum(np.ascontiguousarray(x).ravel()))


def inner_array(f: np.ndarray, g: np.ndarray, grid: Grid) -> float:
    return _sum(f * g) * grid.cell_volume


def l2_inner(f: Field, g: Field) -> float:
    """Lattice quadrature of ``sum_i int f^i g^i dx``."""
    f._check(g)
    return inner_array(f.data, g.data, f.grid)


def lp_norm(f: Field, p: float) -> float:
    """``L^p`` norm of the pointwise Euclidean length of ``f``."""
    if p != math.inf and not p >= 1:
        raise ParameterError(f"p must be >= 1 or inf, got {p}")
    pointwise = np.sqrt(np.sum(f.data**2, axis=0))
    if p == math.inf:
        return float(pointwise.max())
    if p == 2:
        return math.sqrt(_sum(f.data**2) * f.grid.cell_volume)
    return (_sum(pointwise**p) * f.grid.cell_volume) ** (1.0 / p)


def norm_sq_array(arr: np.ndarray, grid: Grid) -> float:
    return _sum(arr * arr) * grid.cell_volume


def sobolev_norm_sq(f: Field, l: int) -> float:
    """``sum_{|a| <= l} ||d^a f||_2^2``."""
    if l < 0:
        raise ParameterError(f"Sobolev order must be nonnegative, got {l}")
    if l > f.grid.max_order:
        raise DerivativeOrderError(f"Sobolev order {l} exceeds maximum {f.grid.max_order}")
    tree = DerivativeTree(f.data, f.grid)
    return sobolev_from_tree(tree, l)


def sobolev_from_tree(tree: DerivativeTree, l: int) -> float:
    return sum(norm_sq_array(tree[a], tree.grid) for a in multi_indices(tree.grid.d, l))


