"""Hypothesis classification of initial data and decay-rate fitting."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .energetics import MONITORED, Ledger
from .errors import FitError, ParameterError
from .grid import Field, Grid, _sum, lp_norm, norm_sq_array
from .model import DampingSpec, damping_on_grid, rescale
from .solver import InitialData

#: wire names of the three data hypotheses
HYPOTHESIS_TAGS = {"lp_integrable": "H1", "weighted_l2": "H2", "mean_zero": "H3"}

DEFAULT_SLACK = 0.3
HIGHER_SLACK = 0.4
MIN_FIT_SAMPLES = 20


@dataclass
class HypothesisReport:
    d: int
    lp_norms: dict[str, float]
    weighted_l2: float
    weighted_l1: float
    integrals: list[float]
    mean_zero_by_construction: bool
    flags: dict[str, bool]
    transfer: dict = field(default_factory=dict)

    @property
    def any(self) -> bool:
        return any(self.flags.values())

    @property
    def label(self) -> str:
        on = [HYPOTHESIS_TAGS[k] for k, v in self.flags.items() if v]
        return "+".join(on) if on else "none"

    def as_dict(self) -> dict:
        out = asdict(self)
        out["flags"] = {HYPOTHESIS_TAGS[k]: v for k, v in self.flags.items()}
        out["label"] = self.label
        return out


def _source(data: InitialData, spec: DampingSpec | None, grid: Grid) -> Field:
    u0, u1 = data.fields(grid)
    if spec is None:
        return u1
    B = damping_on_grid(spec, grid)
    return Field(grid, np.einsum("ij...,j...->i...", B, u0.data) + u1.data)


def _moments(f: Field) -> tuple[dict, float, float, list[float]]:
    g = f.grid
    d = g.d
    lp = {}
    if d >= 3:
        top = 2.0 * d / (d + 2)
        for p in np.linspace(1.0, top, 5):
            lp[f"{p:.4g}"] = lp_norm(f, float(p))
    r = g.radius
    weighted2 = math.sqrt(norm_sq_array(f.data * r, g))
    weighted1 = _sum(np.sqrt(np.sum(f.data**2, axis=0)) * r) * g.cell_volume
    integrals = [_sum(c) * g.cell_volume for c in f.data]
    return lp, weighted2, weighted1, integrals


def classify_data(data: InitialData, spec: DampingSpec | None, lam: float,
                  grid: Grid) -> HypothesisReport:
    """Norms and moments of ``f = B u0 + u1`` and the three hypothesis flags.

    Mean-zero is declared only when the construction forces it (odd data and
    an even damping coefficient), never from a small lattice sum. The
    rescaled source ``B_lam v0 + v1`` is evaluated on the dilated box to
    confirm that each hypothesis carries over.
    """
    if not 0 < lam <= 1:
        raise ParameterError(f"lam must lie in (0, 1], got {lam}")
    d = grid.d
    f = _source(data, spec, grid)
    lp, w2, w1, integrals = _moments(f)
    compact = math.isfinite(data.support_radius)
    odd = data.odd
    flags = {
        "lp_integrable": d >= 3 and compact and all(math.isfinite(v) for v in lp.values()),
        "weighted_l2": d >= 3 and compact and math.isfinite(w2),
        "mean_zero": d in (1, 2) and odd,
    }
    vgrid = grid.scaled(1.0 / lam)
    vspec = None if spec is None else rescale(spec, lam)
    fv = _source(data.rescaled(lam), vspec, vgrid)
    lpv, w2v, _, integrals_v = _moments(fv)
    # int f_lam = lam^{-d} int f and |x| f_lam has norm lam^{-d/2 - 1} |x f|
    transfer = {
        "integrals": integrals_v,
        "integral_ratio": [
            (iv / (lam**-d * i)) if abs(i) > 1e-300 else None
            for iv, i in zip(integrals_v, integrals)
        ],
        "weighted_l2_ratio": (w2v / (lam ** (-d / 2 - 1) * w2)) if w2 > 0 else None,
        "flags": {HYPOTHESIS_TAGS[k]: v for k, v in flags.items()},
    }
    return HypothesisReport(d, lp, w2, w1, integrals, odd, flags, transfer)


# ---------------------------------------------------------------------------


@dataclass
class DecayFit:
    name: str
    window: tuple[float, float]
    slope: float
    rms: float
    target: float
    slack: float
    samples: int
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.note == "identically zero":
            return True
        return bool(math.isfinite(self.slope) and self.slope <= self.target + self.slack)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["window"] = list(self.window)
        out["verdict"] = "PASS" if self.passed else "FAIL"
        return out


def fit_decay(times, values, window: tuple[float, float], target: float,
              slack: float = DEFAULT_SLACK, name: str = "quantity") -> DecayFit:
    """Least-squares slope of ``log q`` against ``log(1 + t)`` on ``window``."""
    t1, t2 = window
    if not (t1 >= 1 and t2 > t1):
        raise FitError(f"fit window must satisfy t2 > t1 >= 1, got {window}")
    t = np.asarray(times, dtype=float)
    q = np.asarray(values, dtype=float)
    sel = (t >= t1 * (1 - 1e-12)) & (t <= t2 * (1 + 1e-12))
    if sel.sum() < MIN_FIT_SAMPLES:
        raise FitError(f"{name}: only {int(sel.sum())} samples in window {window}")
    tw, qw = t[sel], q[sel]
    if np.all(qw == 0):
        return DecayFit(name, (t1, t2), -math.inf, 0.0, target, slack, int(sel.sum()),
                        "identically zero")
    if np.any(qw <= 0) or not np.all(np.isfinite(qw)):
        raise FitError(f"{name}: nonpositive or non-finite values in the fit window")
    x, y = np.log1p(tw), np.log(qw)
    slope, icpt = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return DecayFit(name, (t1, t2), float(slope), rms, target, slack, int(sel.sum()))


def rate_targets(hypothesis: bool, mu_max: int, L: int, L0: int) -> list[tuple[str, str, float, float]]:
    """``(fit name, ledger column, target exponent, slack)`` for each fitted quantity."""
    if not hypothesis:
        return [("l2", "l2_u", 0.0, DEFAULT_SLACK), ("energy", "E", -1.0, DEFAULT_SLACK)]
    out = [("l2", "l2_u", -1.0, DEFAULT_SLACK)]
    for mu in range(mu_max + 1):
        slack = DEFAULT_SLACK if mu == 0 else HIGHER_SLACK
        sfx = "" if mu == 0 else f"_mu{mu}"
        out.append((f"sobolev{sfx or '_mu0'}", "H_L" if mu == 0 else f"H_L_mu{mu}",
                    -(2 * mu + 1.0), slack))
        out.append((f"energy{sfx or '_mu0'}", "E" if mu == 0 else f"E_mu{mu}",
                    -(2 * mu + 2.0), slack))
        out.append((f"sup{sfx or '_mu0'}", "linf_u" if mu == 0 else f"linf_mu{mu}",
                    -(2 * mu + 1.0), slack))
    if L > L0:
        out.append(("laplacian", "lap_sq", -3.0, HIGHER_SLACK))
    return out


def verify_rates(ledger: Ledger, hypotheses: HypothesisReport | None, mu_max: int = 0,
                 window: tuple[float, float] | None = None) -> list[DecayFit]:
    """One fit per quantity; targets depend on whether a decay hypothesis holds."""
    t = ledger.times
    if t.size == 0:
        raise FitError("empty ledger")
    T = float(t[-1])
    if window is None:
        window = (max(T / 10.0, 1.0), T)
    params = ledger.params
    if mu_max > 0 and (f"E_mu{mu_max}" not in ledger.columns):
        raise ParameterError(f"ledger does not track mu={mu_max}")
    hyp = hypotheses is not None and hypotheses.any
    fits = []
    for name, col, target, slack in rate_targets(hyp, mu_max, params.L, params.L0):
        q = ledger.columns[col]
        if col.startswith("linf"):
            q = q**2
        fits.append(fit_decay(t, q, window, target, slack, name))
    return fits


# ---------------------------------------------------------------------------
# report document


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def report(config: dict, hypotheses: HypothesisReport | None, ledger: Ledger | None,
           fits: list[DecayFit], constants: dict | None = None, meta: dict | None = None) -> dict:
    """Single JSON-ready document; every monitored inequality appears under its tag."""
    ledger_section = {}
    if ledger is not None:
        ledger_section = ledger.by_tag()
        for name, tag in MONITORED.items():
            ledger_section.setdefault(tag, {"name": name, "tag": tag, "verdict": "NOT_RUN"})
    consts = dict(constants or {})
    if ledger is not None:
        consts.update(ledger.constants)
        consts.update(ledger.params.as_dict())
    doc = {
        "config": config,
        "hypotheses": None if hypotheses is None else hypotheses.as_dict(),
        "ledger": ledger_section,
        "fits": [f.as_dict() for f in fits],
        "constants": consts,
        "meta": meta or {},
    }
    return _jsonable(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)


def verdicts_of(doc: dict) -> list[str]:
    """Every PASS/FAIL verdict string in a report document."""
    out = []
    for v in doc.get("ledger", {}).values():
        if v.get("verdict") in ("PASS", "FAIL"):
            out.append(v["verdict"])
    out.extend(f["verdict"] for f in doc.get("fits", []))
    for v in doc.get("meta", {}).get("checks", {}).values():
        out.append(v)
    return out
