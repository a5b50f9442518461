"""Command-line experiment runner.

Every command reads one YAML configuration, writes its artifacts atomically
into the output directory and exits with status 0 exactly when every verdict
in the emitted report is PASS. Configuration problems exit with status 2.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import yaml

from . import __version__
from .decay import classify_data, dumps, report, verdicts_of, verify_rates
from .energetics import FunctionalParams, ledger
from .errors import BlowUpError, ConfigError, DampwaveError, FitError
from .grid import Grid
from .inequalities import (
    PAIRING_HYPOTHESES,
    default_samples,
    gn_check,
    gn_exponent,
    gnm_check,
    hardy_check,
    pairing_check,
    pairs_from,
    poincare_check,
    sobolev_check,
)
from .model import PROFILES, DampingSpec, random_tensor
from .sampling import KINDS, gaussian_profile, sample_profile
from .solver import InitialData, RunConfig, base_order, normalized, rescaling_roundtrip, simulate

ENV_OUT = "DAMPWAVE_OUT"
DEFAULT_OUT = "dampwave_out"
SERIES_COLUMNS = ("t", "E", "E_L", "G", "Etilde", "D", "l2_u", "l2_udot", "linf_u", "diss",
                  "resid_eq29")
PER_MU_COLUMNS = ("E_mu", "E_L_mu", "G_mu", "D_mu", "linf_mu")
SUITES = ("poincare", "sobolev", "gnm", "gn", "hardy", "pairing")
HARDY_TOLERANCE = 0.05
_REQUIRED = object()


# ---------------------------------------------------------------------------
# configuration


def _get(block: dict, key: str, path: str, kind=float, default=_REQUIRED):
    full = f"{path}.{key}" if path else key
    if block is None or key not in block or block[key] is None:
        if default is _REQUIRED:
            raise ConfigError(f"missing required key '{full}'", full)
        return default
    value = block[key]
    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key '{full}' has invalid value {value!r}", full) from None


def _block(cfg: dict, key: str, required: bool = True) -> dict | None:
    if key not in cfg or cfg[key] is None:
        if required:
            raise ConfigError(f"missing required block '{key}'", key)
        return None
    if not isinstance(cfg[key], dict):
        raise ConfigError(f"block '{key}' must be a mapping", key)
    return cfg[key]


def load_config(path: str | os.PathLike) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", "config") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}", "config") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping of blocks", "config")
    return doc


def apply_seed(doc: dict, seed: int | None) -> dict:
    """Pin every seed in the configuration to values derived from ``seed``."""
    doc = copy.deepcopy(doc)
    if seed is None:
        return doc
    data = doc.get("data") or {}
    for offset, key in enumerate(("u1", "u0")):
        if isinstance(data.get(key), dict):
            data[key]["seed"] = seed + offset
    tensor = (doc.get("model") or {}).get("tensor")
    if isinstance(tensor, dict):
        tensor["seed"] = seed + 2
    if isinstance(doc.get("suite"), dict):
        doc["suite"]["seed"] = seed
    return doc


def build_grid(doc: dict) -> Grid:
    g = _block(doc, "grid")
    d = _get(g, "d", "grid", int)
    n = _get(g, "n", "grid", int)
    X = _get(g, "X", "grid")
    order = _get(g, "stencil_order", "grid", int, 4)
    try:
        return Grid(d, n, X, stencil_order=order)
    except DampwaveError as exc:
        raise ConfigError(f"grid: {exc}", "grid") from None


def build_damping(doc: dict) -> DampingSpec | None:
    m = _block(doc, "model", required=False)
    if m is None or m.get("b0") is None:
        return None
    profile = _get(m, "profile", "model", str, "isotropic_step")
    if profile not in PROFILES:
        raise ConfigError(f"model.profile must be one of {PROFILES}", "model.profile")
    try:
        return DampingSpec(_get(m, "b0", "model"), _get(m, "R", "model"),
                           r0=_get(m, "r0", "model", float, None), profile=profile,
                           eps=_get(m, "eps", "model", float, 0.0))
    except DampwaveError as exc:
        raise ConfigError(f"model: {exc}", "model") from None


def build_tensor(doc: dict, d: int):
    m = _block(doc, "model", required=False) or {}
    t = m.get("tensor")
    if t is None:
        return None
    if not isinstance(t, dict):
        raise ConfigError("model.tensor must be a mapping", "model.tensor")
    strength = _get(t, "strength", "model.tensor")
    if strength == 0:
        return None
    return random_tensor(d, _get(t, "seed", "model.tensor", int, 0), strength)


def _profile(block, path: str, d: int, components: int):
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ConfigError(f"'{path}' must be a mapping", path)
    family = _get(block, "family", path, str)
    comps = _get(block, "components", path, int, components)
    if family == "gaussian_cutoff":
        return gaussian_profile(d, _get(block, "width", path, float, 1.0), comps,
                                cutoff=_get(block, "support", path))
    if family not in KINDS:
        raise ConfigError(f"{path}.family must be one of {KINDS + ('gaussian_cutoff',)}",
                          f"{path}.family")
    try:
        return sample_profile(_get(block, "seed", path, int, 0), family,
                              _get(block, "support", path), d, comps)
    except DampwaveError as exc:
        raise ConfigError(f"{path}: {exc}", path) from None


def build_data(doc: dict, grid: Grid, tensor) -> InitialData:
    data = _block(doc, "data")
    comps = grid.d if tensor is not None else _get(data, "components", "data", int, 1)
    u0 = _profile(data.get("u0"), "data.u0", grid.d, comps)
    u1 = _profile(data.get("u1"), "data.u1", grid.d, comps)
    init = InitialData(u0=u0, u1=u1)
    amplitude = _get(data, "amplitude", "data", float, None)
    energy = _get(data, "energy", "data", float, None)
    if amplitude is not None and energy is not None:
        raise ConfigError("data.amplitude and data.energy are mutually exclusive", "data.energy")
    if amplitude is not None:
        init = init.times(amplitude)
    if energy is not None:
        if not energy > 0:
            raise ConfigError("data.energy must be positive", "data.energy")
        init = normalized(init, grid, base_order(grid.d), energy)
    return init


def build_run(doc: dict, grid: Grid, damping, tensor) -> tuple[RunConfig, dict]:
    r = _block(doc, "run")
    lam = _get(r, "lam", "run", float, 1.0)
    if not 0 < lam <= 1:
        raise ConfigError(f"run.lam must lie in (0, 1], got {lam}", "run.lam")
    L0 = base_order(grid.d)
    L = _get(r, "L", "run", int, L0)
    if L < L0:
        raise ConfigError(f"run.L must be at least {L0} in dimension {grid.d}", "run.L")
    mu_max = _get(r, "mu_max", "run", int, 0)
    if not 0 <= mu_max <= L - L0:
        raise ConfigError(f"run.mu_max must lie in [0, L - L0] = [0, {L - L0}]", "run.mu_max")
    T = _get(r, "T_final", "run")
    if not T >= 0:
        raise ConfigError("run.T_final must be nonnegative", "run.T_final")
    extra = {"mu_max": mu_max, "C1": r.get("C1", 0.25), "window": r.get("window")}
    try:
        cfg = RunConfig(grid, damping=damping, tensor=tensor, lam=lam,
                        dt=_get(r, "dt", "run", float, None),
                        cfl_safety=_get(r, "cfl_safety", "run", float, 0.5),
                        T_final=T, sample_every=_get(r, "sample_every", "run", int, 1),
                        L=L, delta=_get(r, "delta", "run", float, 0.1))
    except DampwaveError as exc:
        raise ConfigError(f"run: {exc}", "run") from None
    return cfg, extra


def resolve_c1(value) -> float:
    """``run.C1`` is a number or the path of a persisted estimate."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        c1 = float(value)
    elif isinstance(value, str):
        try:
            c1 = float(json.loads(Path(value).read_text())["C1"])
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read C1 estimate from {value}: {exc}", "run.C1") from None
    else:
        raise ConfigError("run.C1 must be a number or a path", "run.C1")
    if not c1 >= 0.25:
        raise ConfigError("run.C1 must be at least 1/4", "run.C1")
    return c1


# ---------------------------------------------------------------------------
# artifacts


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def series_csv(led) -> str:
    cols = list(SERIES_COLUMNS)
    for mu in led.mu_list:
        cols.extend(f"{c}{mu}" for c in PER_MU_COLUMNS)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for i in range(len(led.times)):
        w.writerow([repr(float(led.columns[c][i])) for c in cols])
    return buf.getvalue()


def _exit_status(doc: dict) -> int:
    verdicts = verdicts_of(doc)
    return 0 if verdicts and all(v == "PASS" for v in verdicts) else 1


def _meta(command: str, threads, **extra) -> dict:
    return {"command": command, "version": __version__, "threads": threads, **extra}


# ---------------------------------------------------------------------------
# commands


def _run_simulation(doc: dict, fits_only: bool, threads, command: str) -> tuple[dict, str | None]:
    grid = build_grid(doc)
    damping = build_damping(doc)
    tensor = build_tensor(doc, grid.d)
    cfg, extra = build_run(doc, grid, damping, tensor)
    data = build_data(doc, grid, tensor)
    c1 = resolve_c1(extra["C1"])
    hyp = classify_data(data, damping, cfg.lam, grid)
    try:
        traj = simulate(cfg, data)
    except BlowUpError as exc:
        meta = _meta(command, threads, blowup_time=exc.time, checks={"finite_solution": "FAIL"})
        return report(doc, hyp, None, [], {}, meta), None
    params = FunctionalParams.from_config(cfg, C1=c1)
    led = ledger(traj, params, mu_list=range(1, extra["mu_max"] + 1), hypothesis=hyp.any)
    meta = _meta(command, threads, diagnostics=dict(traj.diagnostics), n_samples=len(traj))
    fits = []
    window = tuple(extra["window"]) if extra["window"] is not None else None
    try:
        fits = verify_rates(led, hyp, mu_max=extra["mu_max"], window=window)
    except FitError as exc:
        if fits_only:
            raise
        meta["fits_skipped"] = str(exc)
    doc_out = report(doc, hyp, None if fits_only else led, fits, {"C1": c1}, meta)
    return doc_out, None if fits_only else series_csv(led)


def cmd_simulate(doc: dict, out: Path, threads, fits_only: bool = False) -> int:
    command = "verify-decay" if fits_only else "simulate"
    rep, csv_text = _run_simulation(doc, fits_only, threads, command)
    if csv_text is not None:
        atomic_write(out / "series.csv", csv_text)
    atomic_write(out / ("decay.json" if fits_only else "report.json"), dumps(rep) + "\n")
    return _exit_status(rep)


def _suite_settings(doc: dict, grid: Grid) -> dict:
    s = _block(doc, "suite")
    checks = s.get("checks", list(SUITES))
    if not isinstance(checks, list) or any(c not in SUITES for c in checks):
        raise ConfigError(f"suite.checks must be a list drawn from {SUITES}", "suite.checks")
    if "hardy" in checks and grid.d < 3:
        raise ConfigError(f"hardy check requires d >= 3 (dimension gate), got d={grid.d}",
                          "suite.checks")
    if "gn" in checks and grid.d < 2:
        raise ConfigError("gn check requires d >= 2 so that 1 <= q < d", "suite.checks")
    kinds = tuple(s.get("kinds", ("bump", "band_limited", "shell")))
    if any(k not in KINDS for k in kinds):
        raise ConfigError(f"suite.kinds must be drawn from {KINDS}", "suite.kinds")
    lambdas = [float(x) for x in s.get("lambdas", [1.0, 0.5, 0.25])]
    for lam in lambdas:
        if not 0 < lam <= 1:
            raise ConfigError(f"suite.lambdas entries must lie in (0, 1], got {lam}",
                              "suite.lambdas")
    return {
        "checks": checks,
        "kinds": kinds,
        "count": _get(s, "samples", "suite", int, 100),
        "support": _get(s, "support", "suite", float, 0.75 * grid.X),
        "seed": _get(s, "seed", "suite", int, 0),
        "refine": _get(s, "refine", "suite", bool, True),
        "lambdas": lambdas,
        "gnm_order": _get(s, "gnm_order", "suite", int, 2),
        "gn_q": _get(s, "gn_q", "suite", float, 2.0),
        "pairing": s.get("pairing", []),
        "pairing_kinds": tuple(s.get("pairing_kinds", kinds)),
    }


def _pairing_items(items, d: int) -> list[tuple[str, object]]:
    if not isinstance(items, list):
        raise ConfigError("suite.pairing must be a list", "suite.pairing")
    out = []
    for i, item in enumerate(items):
        path = f"suite.pairing[{i}]"
        hyp = _get(item, "hypothesis", path, str)
        if hyp not in PAIRING_HYPOTHESES:
            raise ConfigError(f"{path}.hypothesis must be one of {PAIRING_HYPOTHESES}",
                              f"{path}.hypothesis")
        out.append((hyp, _profile(item, path, d, 1)))
    return out


def cmd_verify_inequalities(doc: dict, out: Path, threads) -> int:
    grid = build_grid(doc)
    st = _suite_settings(doc, grid)
    damping = build_damping(doc)
    pairing = _pairing_items(st["pairing"], grid.d)
    if "poincare" in st["checks"] and damping is None:
        raise ConfigError("poincare check needs a damping block (model.b0, model.R)", "model.b0")
    d = grid.d
    samples = default_samples(d, st["count"], st["support"], st["kinds"], 1, st["seed"])
    suites, checks, constants = {}, {}, {}

    def record(name, rep, ok=True):
        suites[name] = rep.as_dict()
        checks[name] = "PASS" if rep.passed and ok else "FAIL"

    if "poincare" in st["checks"]:
        rep = poincare_check(damping, st["lambdas"], samples, grid, st["refine"])
        constants["C1"] = rep.extra["C1"]
        constants["C1_empirical"] = rep.max_ratio
        record("poincare", rep, rep.extra["C1"] >= 0.25)
    if "sobolev" in st["checks"]:
        record("sobolev", sobolev_check(samples, grid, st["refine"]))
    if "gnm" in st["checks"]:
        rep = gnm_check(pairs_from(samples, st["seed"]), st["gnm_order"], grid, st["refine"])
        record("gnm", rep)
    if "gn" in st["checks"]:
        q = st["gn_q"]
        try:
            p = gn_exponent(q, d)
        except DampwaveError as exc:
            raise ConfigError(str(exc), "suite.gn_q") from None
        record("gn", gn_check(samples, p, q, grid, st["refine"]))
    if "hardy" in st["checks"]:
        rep = hardy_check(samples, grid, st["refine"])
        record("hardy", rep, rep.max_ratio <= rep.extra["sharp_constant"] + HARDY_TOLERANCE)
    if "pairing" in st["checks"]:
        psamples = default_samples(d, st["count"], st["support"], st["pairing_kinds"], 1,
                                   st["seed"])
        for i, (hyp, f) in enumerate(pairing):
            rep = pairing_check(f, hyp, psamples, grid, refine=st["refine"])
            bound = rep.extra.get("primitive_bound", rep.extra.get("hardy_bound", math.inf))
            ok = rep.max_ratio <= bound * (1 + 1e-9)
            if hyp == "mean_zero":
                ok = ok and rep.extra["shift_defect"] <= 1e-10
            record(f"pairing_{hyp}_{i}", rep, ok)
    if "C1" in constants:
        atomic_write(out / "c1.json", json.dumps({"C1": constants["C1"]}, sort_keys=True) + "\n")
    meta = _meta("verify-inequalities", threads, suites=suites, checks=checks)
    rep_doc = report(doc, None, None, [], constants, meta)
    atomic_write(out / "inequalities.json", dumps(rep_doc) + "\n")
    return _exit_status(rep_doc)


def cmd_rescaling_test(doc: dict, out: Path, threads) -> int:
    grid = build_grid(doc)
    damping = build_damping(doc)
    tensor = build_tensor(doc, grid.d)
    r = _block(doc, "run")
    lam = _get(r, "lam", "run", float, 0.5)
    if not 0 < lam <= 1:
        raise ConfigError(f"run.lam must lie in (0, 1], got {lam}", "run.lam")
    tolerance = _get(r, "tolerance", "run", float, 1e-2)
    unscaled = dict(doc, run={k: v for k, v in r.items() if k not in ("lam", "tolerance")})
    cfg, _ = build_run(unscaled, grid, damping, tensor)
    data = build_data(doc, grid, tensor)
    vg = r.get("v_grid")
    v_grid = None
    if vg is not None:
        v_grid = Grid(grid.d, _get(vg, "n", "run.v_grid", int), _get(vg, "X", "run.v_grid"),
                      stencil_order=grid.stencil_order)
    res = rescaling_roundtrip(cfg, data, lam, v_grid=v_grid)
    checks = {
        "equivalence": "PASS" if res.max_rel_diff <= tolerance else "FAIL",
        "norm_identity": "PASS" if res.identity_rel_err <= 1e-2 else "FAIL",
    }
    meta = _meta("rescaling-test", threads, rescaling=res.as_dict(), checks=checks)
    rep_doc = report(doc, None, None, [], {"lam": lam, "tolerance": tolerance}, meta)
    atomic_write(out / "rescaling.json", dumps(rep_doc) + "\n")
    return _exit_status(rep_doc)


# ---------------------------------------------------------------------------


def _threads(value: str):
    if value == "auto":
        return "auto"
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("--threads takes a positive integer or 'auto'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("--threads takes a positive integer or 'auto'")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dampwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dampwave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "run, evaluate the ledger and fit decay rates"),
        ("verify-decay", "run and report decay fits only"),
        ("verify-inequalities", "functional-inequality suites"),
        ("rescaling-test", "compare a run with its rescaled counterpart"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML configuration file")
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${ENV_OUT} or ./{DEFAULT_OUT})")
        p.add_argument("--seed", type=int, default=None, help="pin every seed in the config")
        p.add_argument("--threads", type=_threads, default="auto",
                       help="worker threads, recorded in the report")
    return parser


COMMANDS = {
    "simulate": lambda doc, out, th: cmd_simulate(doc, out, th),
    "verify-decay": lambda doc, out, th: cmd_simulate(doc, out, th, fits_only=True),
    "verify-inequalities": cmd_verify_inequalities,
    "rescaling-test": cmd_rescaling_test,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out or os.environ.get(ENV_OUT) or DEFAULT_OUT)
    try:
        doc = apply_seed(load_config(args.config), args.seed)
        status = COMMANDS[args.command](doc, out, args.threads)
    except ConfigError as exc:
        print(f"dampwave: config error [{exc.key}]: {exc}", file=sys.stderr)
        return 2
    except DampwaveError as exc:
        print(f"dampwave: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"dampwave: I/O error: {exc}", file=sys.stderr)
        return 2
    print(f"dampwave {args.command}: {'PASS' if status == 0 else 'FAIL'} -> {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
