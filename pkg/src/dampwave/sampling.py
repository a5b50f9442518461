"""Deterministic, analytically specified test functions.

A :class:`Profile` is a callable on coordinate arrays, so the same function
can be sampled on lattices of any resolution or composed with a dilation
(needed for the rescaled problem). Every family is smooth and compactly
supported.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainError, ParameterError
from .grid import Field, Grid

KINDS = ("bump", "band_limited", "odd_bump", "gaussian", "shell")


def smooth_bump(s: np.ndarray) -> np.ndarray:
    """``exp(1 - 1/(1 - s^2))`` for ``|s| < 1`` and zero elsewhere (peak value 1)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


def smooth_cutoff(s: np.ndarray) -> np.ndarray:
    """C-infinity transition: one for ``s <= 0``, zero for ``s >= 1``."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s < 1.0, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
        b = np.where(s > 0.0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
    return a / (a + b)


def truncated_gaussian(rho: np.ndarray, sigma: float) -> np.ndarray:
    """``exp(-(rho/sigma)^2)`` switched off smoothly between ``5 sigma`` and ``6 sigma``.

    The Gaussian is ``exp(-25)`` where the cutoff starts, so the profile keeps
    Gaussian spectral decay to far below round-off while being compactly
    supported.
    """
    return np.exp(-((rho / sigma) ** 2)) * smooth_cutoff(rho / sigma - 5.0)


def _norm(coords, center=None) -> np.ndarray:
    if center is None:
        return np.sqrt(sum(c * c for c in coords))
    return np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(coords, center)))


@dataclass(frozen=True)
class Profile:
    """Analytic field ``x -> amplitude * base(scale * x)``.

    ``odd`` records point symmetry ``f(-x) = -f(x)`` when the construction
    forces it; lattice sums are never used to decide it.
    """

    base: Callable[[tuple[np.ndarray, ...]], np.ndarray] = field(repr=False)
    components: int
    support_radius: float
    odd: bool = False
    kind: str = "custom"
    seed: int | None = None
    scale: float = 1.0
    amplitude: float = 1.0

    def __call__(self, coords: tuple[np.ndarray, ...]) -> np.ndarray:
        scaled = tuple(self.scale * c for c in coords)
        return self.amplitude * self.base(scaled)

    def on(self, grid: Grid) -> Field:
        if len(grid.coords) != grid.d:
            raise DomainError("grid dimension mismatch")
        return Field(grid, self(grid.coords))

    def dilated(self, lam: float, amplitude: float = 1.0) -> "Profile":
        """``x -> amplitude * self(lam * x)``."""
        return replace(self, scale=self.scale * lam, amplitude=self.amplitude * amplitude,
                       support_radius=self.support_radius / lam)

    def times(self, c: float) -> "Profile":
        return replace(self, amplitude=self.amplitude * c)


def sample_profile(seed: int, kind: str, support_radius: float, d: int,
                   components: int | None = None) -> Profile:
    """Random member of one analytic family, supported in ``|x| <= support_radius``."""
    if kind not in KINDS:
        raise ParameterError(f"unknown sample kind {kind!r}; expected one of {KINDS}")
    if not support_radius > 0:
        raise ParameterError("support radius must be positive")
    m = d if components is None else components
    rng = np.random.default_rng([seed, KINDS.index(kind)])
    r = float(support_radius)
    amp = rng.normal(size=m)
    amp /= max(np.abs(amp).max(), 1e-12)

    if kind == "bump":
        width = r * rng.uniform(0.35, 1.0)
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        center = direction * (r - width) * rng.uniform(0.0, 1.0)

        def base(x):
            b = smooth_bump(_norm(x, center) / width)
            return np.stack([a * b for a in amp])

        odd = False
    elif kind == "gaussian":
        width = r * rng.uniform(0.5, 1.0)
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        center = direction * (r - width) * rng.uniform(0.0, 1.0)
        sigma = width / 6.0

        def base(x):
            g = truncated_gaussian(_norm(x, center), sigma)
            return np.stack([a * g for a in amp])

        odd = False
    elif kind == "band_limited":
        n_modes = int(rng.integers(2, 6))
        kmax = 4.0 * np.pi / r
        wavevectors = rng.uniform(-kmax, kmax, size=(n_modes, d))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n_modes)
        weights = rng.normal(size=(m, n_modes))

        def base(x):
            env = smooth_bump(_norm(x) / r)
            waves = [np.cos(sum(k[j] * x[j] for j in range(d)) + ph)
                     for k, ph in zip(wavevectors, phases)]
            return np.stack([env * sum(w * wv for w, wv in zip(row, waves)) for row in weights])

        odd = False
    elif kind == "odd_bump":
        width = r * rng.uniform(0.5, 1.0)
        sigma = width / 6.0
        coeff = rng.normal(size=(m, d))
        kappa = rng.uniform(0.0, 1.0 / sigma)

        def base(x):
            rho = _norm(x)
            env = truncated_gaussian(rho, sigma) * (1.0 + 0.5 * np.cos(kappa * rho))
            return np.stack([env * sum(c[j] * x[j] for j in range(d)) / sigma for c in coeff])

        odd = True
    else:  # shell
        center_radius = r * rng.uniform(0.4, 0.6)
        thickness = min(center_radius, r - center_radius) * rng.uniform(0.5, 0.9)

        def base(x):
            s = smooth_bump((_norm(x) - center_radius) / thickness)
            return np.stack([a * s for a in amp])

        odd = False

    return Profile(base=base, components=m, support_radius=r, odd=odd, kind=kind, seed=seed)


def sample_function(grid: Grid, seed: int, kind: str, support_radius: float,
                    components: int | None = None) -> Field:
    """Sample one family member on ``grid``; the support must lie inside the box."""
    if support_radius >= grid.X:
        raise DomainError(f"support radius {support_radius} must be below half width {grid.X}")
    return sample_profile(seed, kind, support_radius, grid.d, components).on(grid)


def gaussian_profile(d: int, width: float = 1.0, components: int = 1,
                     cutoff: float | None = None) -> Profile:
    """Radial ``exp(-|x|^2 / width^2)``.

    With ``cutoff`` the profile is multiplied by a smooth transition from one
    at ``|x| = cutoff - width`` to zero at ``|x| = cutoff``, which makes it
    compactly supported while changing it only by about
    ``exp(-(cutoff/width - 1)^2)``.
    """
    if cutoff is not None and not cutoff > width:
        raise ParameterError("cutoff must exceed the width")

    def base(x):
        rho = _norm(x)
        g = np.exp(-(rho / width) ** 2)
        if cutoff is not None:
            g = g * smooth_cutoff((rho - (cutoff - width)) / width)
        return np.stack([g] * components)

    support = np.inf if cutoff is None else float(cutoff)
    return Profile(base=base, components=components, support_radius=support, kind="gaussian")


def plateau_profile(d: int, inner: float, outer: float, components: int = 1) -> Profile:
    """Equal to one on ``|x| <= inner``, smoothly zero beyond ``outer``."""
    if not 0 < inner < outer:
        raise ParameterError("need 0 < inner < outer")

    def base(x):
        rho = _norm(x)
        val = smooth_cutoff((rho - inner) / (outer - inner))
        return np.stack([val] * components)

    return Profile(base=base, components=components, support_radius=outer, kind="plateau")
