"""Sampled checks of the functional inequalities used by the energy method.

Each check evaluates a ratio ``LHS / RHS`` on many analytic samples, at two
lattice resolutions (``n`` and ``2n - 1`` on the same box). A check passes
when every ratio is finite and the largest ratio (the empirical constant)
drifts by at most :data:`REFINEMENT_DRIFT` between the two resolutions.
Sampled tests cannot prove an inequality; refinement stability is the
falsifiable surrogate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import HypothesisError, ParameterError
from .grid import (
    DerivativeTree,
    Field,
    Grid,
    _sum,
    gradient,
    inner_array,
    lp_norm,
    multi_indices,
    norm_sq_array,
    sobolev_norm_sq,
)
from .model import DampingSpec, damping_on_grid, rescale
from .sampling import KINDS, Profile, plateau_profile, sample_profile

REFINEMENT_DRIFT = 0.2
DEFAULT_KINDS = ("bump", "band_limited", "shell")


@dataclass
class InequalityReport:
    name: str
    samples: int
    ratios: np.ndarray = field(repr=False)
    constants: dict[int, float]
    sweep: dict = field(default_factory=dict)
    skipped: int = 0
    extra: dict = field(default_factory=dict)
    drift_tolerance: float = REFINEMENT_DRIFT

    @property
    def max_ratio(self) -> float:
        return max(self.constants.values(), default=0.0)

    @property
    def drift(self) -> float:
        vals = list(self.constants.values())
        if len(vals) < 2:
            return 0.0
        hi, lo = max(vals), min(vals)
        return 0.0 if hi == 0 else (hi - lo) / hi

    @property
    def passed(self) -> bool:
        r = np.asarray(self.ratios, dtype=float)
        finite = bool(np.all(np.isfinite(r)) and np.all(r >= 0))
        return finite and math.isfinite(self.max_ratio) and self.drift <= self.drift_tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "skipped": self.skipped,
            "max_ratio": self.max_ratio,
            "constants": {str(k): v for k, v in self.constants.items()},
            "drift": self.drift,
            "sweep": self.sweep,
            "extra": self.extra,
            "verdict": "PASS" if self.passed else "FAIL",
        }


def default_samples(d: int, count: int, support_radius: float, kinds=DEFAULT_KINDS,
                    components: int = 1, seed0: int = 0) -> list[Profile]:
    """``count`` profiles cycling through ``kinds`` with consecutive seeds."""
    for k in kinds:
        if k not in KINDS:
            raise ParameterError(f"unknown sample kind {k!r}")
    return [sample_profile(seed0 + s, kinds[s % len(kinds)], support_radius, d, components)
            for s in range(count)]


def _resolutions(grid: Grid, refine: bool) -> list[Grid]:
    return [grid, grid.refined()] if refine else [grid]


def _run(name: str, samples: Sequence, grids: list[Grid],
         ratio: Callable[[object, Grid], float | None], **extra) -> InequalityReport:
    ratios, constants, skipped = [], {}, 0
    for g in grids:
        vals = []
        for s in samples:
            r = ratio(s, g)
            if r is None:
                skipped += 1
                continue
            vals.append(r)
        ratios.extend(vals)
        constants[g.n] = float(max(vals)) if vals else 0.0
    return InequalityReport(name, len(samples), np.array(ratios), constants,
                            skipped=skipped, extra=extra)


def _norm_h(f: Field, l: int) -> float:
    return math.sqrt(sobolev_norm_sq(f, l))


# ---------------------------------------------------------------------------


def sobolev_check(samples: Sequence[Profile], grid: Grid, refine: bool = True) -> InequalityReport:
    """``|f|_inf <= C |f|_{H^{floor(d/2)+1}}``."""
    l = grid.d // 2 + 1

    def ratio(p, g):
        f = p.on(g)
        den = _norm_h(f, l)
        return None if den == 0 else lp_norm(f, math.inf) / den

    rep = _run("sobolev", samples, _resolutions(grid, refine), ratio)
    rep.sweep["order"] = l
    return rep


def _splits(d: int, k: int):
    for b in multi_indices(d, k):
        for c in multi_indices(d, k - sum(b)):
            if sum(b) + sum(c) == k:
                yield b, c


def gnm_ratios(f: Field, g: Field, k: int) -> dict:
    """Ratio for every split ``|b| + |c| = k`` of ``|d^b f d^c g|_2`` over the product bound."""
    grid = f.grid
    tf, tg = DerivativeTree(f.data, grid), DerivativeTree(g.data, grid)
    rhs = (lp_norm(f, math.inf) * _norm_h(g, k) + _norm_h(f, k) * lp_norm(g, math.inf))
    out = {}
    for b, c in _splits(grid.d, k):
        lhs = math.sqrt(norm_sq_array(tf[b] * tg[c], grid))
        out[b, c] = lhs / rhs if rhs > 0 else math.nan
    return out


def gnm_check(pairs: Sequence[tuple[Profile, Profile]], k: int, grid: Grid,
              refine: bool = True) -> InequalityReport:
    """``|d^b f d^c g|_2 <= C(|f|_inf |g|_{H^k} + |f|_{H^k} |g|_inf)`` over all ``|b|+|c| = k``."""
    if k < 0 or k > grid.max_order:
        raise ParameterError(f"order k={k} outside [0, {grid.max_order}]")
    asym = []

    def ratio(pair, g):
        f, h = pair[0].on(g), pair[1].on(g)
        r = gnm_ratios(f, h, k)
        vals = [v for v in r.values() if math.isfinite(v)]
        if not vals:
            return None
        if pair[0] is pair[1]:
            asym.append(max(abs(r[b, c] - r[c, b]) for b, c in r))
        return max(vals)

    rep = _run("gagliardo_nirenberg_moser", pairs, _resolutions(grid, refine), ratio)
    rep.sweep["k"] = k
    rep.extra["swap_asymmetry"] = float(max(asym, default=0.0))
    return rep


def gn_exponent(q: float, d: int) -> float:
    if not 1 <= q < d:
        raise ParameterError(f"need 1 <= q < d, got q={q}, d={d}")
    return 1.0 / (1.0 / q - 1.0 / d)


def gn_check(samples: Sequence[Profile], p: float, q: float, grid: Grid,
             refine: bool = True) -> InequalityReport:
    """``|g|_p <= C |grad g|_q`` with ``1/p = 1/q - 1/d``."""
    d = grid.d
    expected = gn_exponent(q, d)
    if not math.isclose(p, expected, rel_tol=1e-12):
        raise ParameterError(f"exponent mismatch: 1/p must equal 1/q - 1/d, so p={expected}")

    def ratio(prof, g):
        f = prof.on(g)
        grad = gradient(f)
        gf = Field(g, grad.reshape(-1, *g.shape))
        den = lp_norm(gf, q)
        return None if den == 0 else lp_norm(f, p) / den

    rep = _run("gagliardo_nirenberg", samples, _resolutions(grid, refine), ratio)
    rep.sweep.update(p=p, q=q, d=d)
    return rep


def hardy_terms(f: Field) -> tuple[float, float, float]:
    """``(|f/|x||_2^2 without the origin node, origin deficit, |grad f|_2^2)``.

    The excluded origin cell is replaced by a ball of equal volume on which
    ``f`` is taken constant: ``int_ball f(0)^2/|x|^2 = 4 pi r f(0)^2``.
    """
    g = f.grid
    r = g.radius
    inside = r > 0
    weighted = _sum(np.sum(f.data**2, axis=0)[inside] / r[inside] ** 2) * g.cell_volume
    center = tuple(n // 2 for n in g.shape)
    f0 = float(np.sum(f.data[(slice(None), *center)] ** 2))
    r_ball = g.h * (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0)
    deficit = 4.0 * math.pi * r_ball * f0
    grad = norm_sq_array(gradient(f).reshape(-1, *g.shape), g)
    return weighted, deficit, grad


def hardy_check(samples: Sequence[Profile], grid: Grid, refine: bool = True) -> InequalityReport:
    """``|f/|x||_2 <= C |grad f|_2`` (three dimensions only)."""
    if grid.d < 3:
        raise ParameterError("the Hardy inequality needs d >= 3")
    deficits = []

    def ratio(prof, g):
        w, deficit, grad = hardy_terms(prof.on(g))
        deficits.append(deficit)
        return None if grad == 0 else math.sqrt((w + deficit) / grad)

    rep = _run("hardy", samples, _resolutions(grid, refine), ratio)
    rep.extra["max_origin_deficit"] = float(max(deficits, default=0.0))
    rep.extra["sharp_constant"] = 2.0 / (grid.d - 2)
    return rep


def poincare_constant(f: Field, spec: DampingSpec, lam: float) -> float | None:
    """Smallest ``C`` with ``|f|^2 <= C(<f, B_lam f>/lam + |grad f|^2/lam^2)``."""
    g = f.grid
    B = damping_on_grid(rescale(spec, lam), g)
    Bf = np.einsum("ij...,j...->i...", B, f.data) if f.components == g.d else B[0, 0] * f.data
    form = inner_array(f.data, Bf, g)
    grad = norm_sq_array(gradient(f).reshape(-1, *g.shape), g)
    den = form / lam + grad / lam**2
    return None if den <= 0 else norm_sq_array(f.data, g) / den


def poincare_check(spec: DampingSpec, lam_sweep: Sequence[float], samples: Sequence[Profile],
                   grid: Grid, refine: bool = True) -> InequalityReport:
    """Empirical constant of the lambda-uniform Poincare-type inequality.

    For each ``lam`` the samples are dilated to ``x -> f(lam x)`` and
    evaluated on the box scaled by ``1/lam``, so the damped shell, the
    transition and the dead zone are probed in the same proportions at every
    ``lam``. The recommended constant is twice the empirical one, floored at
    1/4.
    """
    for lam in lam_sweep:
        if not 0 < lam <= 1:
            raise ParameterError(f"lam must lie in (0, 1], got {lam}")
    grids = _resolutions(grid, refine)
    ratios, constants, skipped, per_lam = [], {}, 0, {}
    for g in grids:
        best = 0.0
        for lam in lam_sweep:
            gl = g.scaled(1.0 / lam)
            vals = []
            for p in samples:
                c = poincare_constant(p.dilated(lam).on(gl), spec, lam)
                if c is None:
                    skipped += 1
                    continue
                vals.append(c)
            m = max(vals, default=0.0)
            per_lam.setdefault(str(lam), {})[str(g.n)] = m
            best = max(best, m)
            ratios.extend(vals)
        constants[g.n] = best
    rep = InequalityReport("poincare", len(samples), np.array(ratios), constants,
                           skipped=skipped)
    rep.sweep = {"lam": list(lam_sweep), "per_lam": per_lam}
    rep.extra["C1"] = max(2.0 * rep.max_ratio, 0.25)
    rep.extra["dead_zone_scale"] = 4.0 * spec.R**2
    return rep


# ---------------------------------------------------------------------------
# pairing with data under the decay hypotheses


PAIRING_HYPOTHESES = ("lp_integrable", "weighted_l2", "mean_zero")


def _require_hypothesis(f: Profile, hypothesis: str, d: int):
    if hypothesis not in PAIRING_HYPOTHESES:
        raise ParameterError(f"unknown hypothesis {hypothesis!r}")
    if hypothesis in ("lp_integrable", "weighted_l2") and d < 3:
        raise HypothesisError(f"{hypothesis}: dimension gate d >= 3 failed (d={d})")
    if hypothesis == "mean_zero":
        if d not in (1, 2):
            raise HypothesisError(f"mean_zero: dimension gate d in (1, 2) failed (d={d})")
        if not f.odd:
            raise HypothesisError("mean_zero: data is not mean-zero by construction")
    if not math.isfinite(f.support_radius):
        raise HypothesisError(f"{hypothesis}: data must be compactly supported")


def gradient_sobolev_norm(g: Field, l: int) -> float:
    """``|grad g|_{H^l}``."""
    tree = DerivativeTree(g.data, g.grid)
    total = 0.0
    for a in multi_indices(g.grid.d, l):
        total += sum(norm_sq_array(x, g.grid) for x in tree.grad(a))
    return math.sqrt(total)


def pairing_check(f: Profile, hypothesis: str, samples: Sequence[Profile], grid: Grid,
                  L0: int | None = None, refine: bool = True) -> InequalityReport:
    """Empirical ``E0(f) = max_g <g, f> / |grad g|_{H^{L0-2}}``."""
    d = grid.d
    _require_hypothesis(f, hypothesis, d)
    L0 = d // 2 + 3 if L0 is None else L0
    l = L0 - 2
    shift_defect = []

    def ratio(prof, g):
        fg = f.on(g)
        gg = prof.on(g)
        if gg.components != fg.components:
            raise ParameterError("sample and data must have the same components")
        num = inner_array(gg.data, fg.data, g)
        den = gradient_sobolev_norm(gg, l)
        if hypothesis == "mean_zero":
            plate = plateau_profile(d, f.support_radius, min(f.support_radius * 1.5, 0.99 * g.X),
                                    fg.components).on(g)
            shifted = inner_array(gg.data + plate.data, fg.data, g)
            scale = math.sqrt(norm_sq_array(fg.data, g) * norm_sq_array(gg.data + plate.data, g))
            shift_defect.append(abs(shifted - num) / scale if scale > 0 else 0.0)
        return None if den == 0 else abs(num) / den

    rep = _run("pairing", samples, _resolutions(grid, refine), ratio)
    rep.sweep.update(hypothesis=hypothesis, order=l)
    fg = f.on(grid)
    if hypothesis == "mean_zero":
        rep.extra["shift_defect"] = float(max(shift_defect, default=0.0))
        if d == 1:
            # <g, f> = -<g', F> with F the primitive of f, compactly supported
            F = np.cumsum(fg.data, axis=1) * grid.h
            rep.extra["primitive_bound"] = math.sqrt(norm_sq_array(F, grid))
    elif hypothesis == "weighted_l2":
        moment = math.sqrt(norm_sq_array(fg.data * grid.radius, grid))
        rep.extra["weighted_norm"] = moment
        rep.extra["hardy_bound"] = moment * 2.0 / (d - 2)
    else:
        p = 2.0 * d / (d + 2)
        rep.extra["lp_norm"] = lp_norm(fg, p)
        rep.extra["p"] = p
    rep.extra["E0"] = rep.max_ratio
    return rep


def homogeneity_defect(check: Callable[[Sequence[Profile]], InequalityReport],
                       samples: Sequence[Profile], c: float) -> float:
    """Relative change of the empirical constant when every sample is scaled by ``c``."""
    a = check(samples).max_ratio
    b = check([s.times(c) for s in samples]).max_ratio
    return abs(a - b) / a if a else abs(b)


def pairs_from(samples: Sequence[Profile], seed: int = 0) -> list[tuple[Profile, Profile]]:
    """Deterministic pairing of samples, including a few identical pairs."""
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(samples))
    pairs = [(samples[i], samples[j]) for i, j in zip(range(len(samples)), idx)]
    for i in range(min(5, len(samples))):
        pairs[i] = (samples[i], samples[i])
    return pairs


__all__ = [
    "InequalityReport",
    "default_samples",
    "gn_check",
    "gnm_check",
    "gnm_ratios",
    "hardy_check",
    "hardy_terms",
    "pairing_check",
    "pairs_from",
    "poincare_check",
    "poincare_constant",
    "sobolev_check",
]
