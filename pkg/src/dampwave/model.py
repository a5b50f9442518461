"""Coefficient families: damping matrix, quasilinear tensor, radial multiplier.

The damping profile is ``beta(|x|) I`` (or ``beta(|x|)(I + eps xx^T/|x|^2)``)
with ``beta`` a quintic smoothstep from 0 on ``|x| <= r0`` to ``b0`` on
``|x| >= R``. The ``uniform`` profile is the constant ``b0 I``. Spatial
derivatives of any order are produced symbolically with sympy and compiled
once per (profile, dimension, multi-index).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import ParameterError, ShapeError
from .grid import Field, Grid, MultiIndex, gradient, _d1

PROFILES = ("isotropic_step", "anisotropic", "uniform")


def smoothstep5(s):
    """``6s^5 - 15s^4 + 10s^3`` clipped to [0, 1]; two derivatives vanish at both ends."""
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10.0 + s * (-15.0 + 6.0 * s))


@dataclass(frozen=True)
class DampingSpec:
    """Damping family evaluated as ``scale * B(scale * x)``.

    ``scale`` is 1 for the physical coefficient and becomes the rescaling
    factor after :func:`rescale`; the floor ``scale*b0`` then holds beyond
    ``R/scale``.
    """

    b0: float
    R: float
    r0: float | None = None
    profile: str = "isotropic_step"
    eps: float = 0.0
    scale: float = 1.0
    max_order: int = 8

    def __post_init__(self):
        if not self.b0 > 0 or not self.R > 0:
            raise ParameterError("b0 and R must be positive")
        r0 = 0.5 * self.R if self.r0 is None else self.r0
        if not 0 <= r0 < self.R:
            raise ParameterError(f"need 0 <= r0 < R, got r0={r0}, R={self.R}")
        object.__setattr__(self, "r0", float(r0))
        if self.profile not in PROFILES:
            raise ParameterError(f"unknown damping profile {self.profile!r}")
        if not 0 <= self.eps < 1:
            raise ParameterError("anisotropy eps must lie in [0, 1)")
        if self.profile != "anisotropic" and self.eps != 0:
            raise ParameterError("eps is only meaningful for the anisotropic profile")

    @property
    def floor(self) -> float:
        """Lower bound of the quadratic form beyond :attr:`radius`."""
        return self.scale * self.b0

    @property
    def radius(self) -> float:
        return self.R / self.scale

    @property
    def dead_radius(self) -> float:
        return self.r0 / self.scale

    @property
    def sup_norm(self) -> float:
        """``sup_x`` of the spectral norm of the unscaled coefficient."""
        return self.b0 * (1.0 + self.eps)

    @property
    def isotropic(self) -> bool:
        return self.profile != "anisotropic"


def _beta(spec: DampingSpec, r: np.ndarray) -> np.ndarray:
    if spec.profile == "uniform":
        return np.full_like(r, spec.b0)
    return spec.b0 * smoothstep5((r - spec.r0) / (spec.R - spec.r0))


def eval_B(spec: DampingSpec, x) -> np.ndarray:
    """Damping matrix at points ``x`` of shape ``(..., d)``; returns ``(..., d, d)``."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    lam = spec.scale
    y = lam * x
    r = np.sqrt(np.sum(y * y, axis=-1))
    beta = _beta(spec, r)
    eye = np.eye(d)
    B = beta[..., None, None] * eye
    if not spec.isotropic:
        with np.errstate(invalid="ignore", divide="ignore"):
            n = np.where(r[..., None] > 0, y / np.where(r > 0, r, 1.0)[..., None], 0.0)
        B = B + spec.eps * beta[..., None, None] * n[..., :, None] * n[..., None, :]
    return lam * B


def damping_on_grid(spec: DampingSpec, grid: Grid) -> np.ndarray:
    """``B_scale`` sampled on the lattice, shape ``(d, d, *grid.shape)``."""
    B = eval_B(spec, grid.points())
    return np.moveaxis(B, (-2, -1), (0, 1))


@lru_cache(maxsize=None)
def _symbolic_branches(profile: str, d: int, b: MultiIndex):
    """Compiled ``d^b`` of the ramp and outer branches of every matrix entry."""
    xs = sp.symbols(f"x0:{d}")
    b0, r0, R, eps = sp.symbols("b0 r0 R eps", positive=True)
    r = sp.sqrt(sum(xi**2 for xi in xs))
    s = (r - r0) / (R - r0)
    ramp = b0 * (6 * s**5 - 15 * s**4 + 10 * s**3)
    compiled = {}
    for p, q in itertools.product(range(d), repeat=2):
        delta = 1 if p == q else 0
        shape = delta if profile == "isotropic_step" else delta + eps * xs[p] * xs[q] / r**2
        exprs = []
        for beta in (ramp, b0):
            e = beta * shape
            for axis, k in enumerate(b):
                if k:
                    e = sp.diff(e, xs[axis], k)
            exprs.append(sp.lambdify((*xs, b0, r0, R, eps), e, "numpy"))
        compiled[p, q] = exprs
    return compiled


def deriv_B(spec: DampingSpec, x, b) -> np.ndarray:
    """Closed-form ``d^b B_scale`` at points ``x`` (shape ``(..., d)``)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    b = tuple(int(k) for k in b)
    if len(b) != d or any(k < 0 for k in b):
        raise ParameterError(f"multi-index {b} invalid for d={d}")
    if sum(b) > spec.max_order:
        raise ParameterError(f"derivative order {sum(b)} exceeds maximum {spec.max_order}")
    if sum(b) == 0:
        return eval_B(spec, x)
    if spec.profile == "uniform":
        return np.zeros((*x.shape[:-1], d, d))
    lam = spec.scale
    y = lam * x
    flat = y.reshape(-1, d)
    r = np.sqrt(np.sum(flat**2, axis=1))
    ramp = (r > spec.r0) & (r < spec.R)
    outer = r >= spec.R
    out = np.zeros((flat.shape[0], d, d))
    branches = _symbolic_branches(spec.profile, d, b)
    args = (spec.b0, spec.r0, spec.R, spec.eps)
    for (p, q), (f_ramp, f_outer) in branches.items():
        for mask, fn in ((ramp, f_ramp), (outer, f_outer)):
            if mask.any():
                pts = flat[mask]
                val = fn(*(pts[:, j] for j in range(d)), *args)
                out[mask, p, q] = np.broadcast_to(val, (int(mask.sum()),))
    # chain rule for B_lam(x) = lam * B(lam x)
    out *= lam ** (sum(b) + 1)
    return out.reshape(*x.shape[:-1], d, d)


def rescale(spec: DampingSpec, lam: float) -> DampingSpec:
    """Coefficient of the rescaled problem, ``x -> lam * B(lam x)``."""
    if not 0 < lam <= 1:
        raise ParameterError(f"rescaling factor must lie in (0, 1], got {lam}")
    return replace(spec, scale=spec.scale * lam)


# ---------------------------------------------------------------------------
# quasilinear tensor

_PAIR_PERMUTATIONS = list(itertools.permutations(range(3)))


@dataclass(frozen=True, eq=False)
class NonlinearTensor:
    """Constant coefficients indexed ``[i, j, k, l, m, n]``."""

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 6 or len(set(c.shape)) != 1:
            raise ShapeError(f"tensor must have shape (d,)*6, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    @property
    def strength(self) -> float:
        """``max_i sum_{jklmn} |N^{ijk}_{lmn}|``, used by the CFL monitor."""
        return float(np.abs(self.coeffs).reshape(self.d, -1).sum(axis=1).max())

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    @classmethod
    def zero(cls, d: int) -> "NonlinearTensor":
        return cls(np.zeros((d,) * 6))


def _pair_permuted(t: np.ndarray, perm) -> np.ndarray:
    # permute the index pairs (i,l), (j,m), (k,n) simultaneously
    return np.transpose(t, (*perm, *(3 + p for p in perm)))


def is_symmetric(t: np.ndarray) -> bool:
    return all(np.array_equal(t, _pair_permuted(t, p)) for p in _PAIR_PERMUTATIONS)


def symmetrize(raw) -> NonlinearTensor:
    """Average over the six simultaneous permutations of the index pairs.

    The two swaps ``(i,l) <-> (j,m)`` and ``(j,m) <-> (k,n)`` generate this
    group. Orbit members are summed in sorted order so that every entry of an
    orbit receives bit-identical values; orbits that are already constant are
    left untouched, which makes the projection exactly idempotent.
    """
    t = np.asarray(raw, dtype=float)
    if t.ndim != 6 or len(set(t.shape)) != 1:
        raise ShapeError(f"tensor must have shape (d,)*6, got {t.shape}")
    stack = np.sort(np.stack([_pair_permuted(t, p) for p in _PAIR_PERMUTATIONS]), axis=0)
    mean = stack.sum(axis=0) / len(_PAIR_PERMUTATIONS)
    constant = stack[0] == stack[-1]
    return NonlinearTensor(np.where(constant, stack[0], mean))


def random_tensor(d: int, seed: int, strength: float) -> NonlinearTensor:
    """Symmetrized tensor with raw entries uniform in [-1, 1], times ``strength``."""
    rng = np.random.default_rng(seed)
    raw = rng.uniform(-1.0, 1.0, size=(d,) * 6)
    return NonlinearTensor(symmetrize(raw).coeffs * strength)


def nonlinear_term_array(N: NonlinearTensor, u: np.ndarray, v: np.ndarray, grid: Grid,
                         du: np.ndarray | None = None, dv: np.ndarray | None = None) -> np.ndarray:
    """Raw-array version of :func:`nonlinear_term`; gradients may be supplied."""
    if du is None:
        du = np.stack([_d1(u, j, grid) for j in range(grid.d)], axis=1)
    if dv is None:
        dv = du if v is u else np.stack([_d1(v, j, grid) for j in range(grid.d)], axis=1)
    flux = np.einsum("ijklmn,jm...,kn...->il...", N.coeffs, du, dv, optimize=True)
    out = np.zeros_like(u)
    for l in range(grid.d):
        out += _d1(flux[:, l], l, grid)
    return out


def nonlinear_term(N: NonlinearTensor, u: Field, v: Field) -> Field:
    """``sum N^{ijk}_{lmn} d_l(d_m u^j d_n v^k)``; the outer derivative acts on the product."""
    if u.grid != v.grid:
        raise ShapeError("fields live on different grids")
    d = u.grid.d
    if N.d != d or u.components != d or v.components != d:
        raise ShapeError("tensor, fields and grid must share the dimension d")
    if N.is_zero():
        return u.grid.zeros()
    du = gradient(u)
    dv = du if v is u else gradient(v)
    return Field(u.grid, nonlinear_term_array(N, u.data, v.data, u.grid, du, dv))


# ---------------------------------------------------------------------------
# radial multiplier h(x) = x phi(|x|)


@dataclass(frozen=True)
class MultiplierSpec:
    b0: float
    R: float
    lam: float

    def __post_init__(self):
        if not (self.b0 > 0 and self.R > 0 and self.lam > 0):
            raise ParameterError("multiplier parameters must be positive")

    @property
    def knee(self) -> float:
        return self.R / self.lam

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r <= self.knee, self.b0, self.b0 * self.R / (self.lam * r))

    def dphi(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r <= self.knee, 0.0, -self.b0 * self.R / (self.lam * r * r))


def multiplier(spec: MultiplierSpec, x):
    """``(h, div h, Dh)`` at points ``x`` of shape ``(..., d)``."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    r = np.sqrt(np.sum(x * x, axis=-1))
    phi = spec.phi(r)
    dphi = spec.dphi(r)
    h = x * phi[..., None]
    safe_r = np.where(r > 0, r, 1.0)
    # dphi vanishes near the origin, so the safe radius never changes a value
    jac = phi[..., None, None] * np.eye(d) + (dphi / safe_r)[..., None, None] * (
        x[..., :, None] * x[..., None, :]
    )
    div = d * phi + dphi * r
    return h, div, jac


def multiplier_on_grid(spec: MultiplierSpec, grid: Grid) -> np.ndarray:
    """``h`` on the lattice, shape ``(d, *grid.shape)``."""
    h, _, _ = multiplier(spec, grid.points())
    return np.moveaxis(h, -1, 0)
