"""Command-line experiment runner.

Usage::

    ruinalarm <command> --config exp.cfg [--out DIR] [--seed N] [--paths N] [--no-cache] [--workers N]

The config file holds ``[model] [alarm] [simulation] [compare] [output]``
sections of ``key = value`` lines; ``#`` starts a comment.  An optional
``command = ...`` line may precede the first section.  Lists are comma
separated.
"""

import argparse
from dataclasses import dataclass, field, replace
import hashlib
import json
import logging
import math
import os
from pathlib import Path
import sys
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .alarm import AlarmParams, AlarmSchedule, build_alarm_system
from .analytic import psi_finite_exponential, survival_finite_discrete_ik
from .bounds import (
    PB_MODES,
    BoundReport,
    finite_time_bounds,
    ultimate_delta_bounds,
    write_bounds_csv,
)
from .compare import rate_label, schedule_from_pool, survival_table
from .model import (
    CapitalSchedule,
    Degenerate,
    Exponential,
    Logarithmic,
    Pareto,
    RiskModel,
    loading_factor,
)
from .simulate import (
    DEFAULT_HORIZON,
    PsiSurface,
    RuinCDF,
    simulate_pool,
    surface_from_pool,
    time_grid,
)
from . import svg

logger = logging.getLogger(__name__)

COMMANDS = ("ruin-dist", "alarm", "alarm-system", "compare", "bounds", "analytic-check")
SECTIONS = ("model", "alarm", "simulation", "compare", "output")
NEEDS = {
    "ruin-dist": ("model", "simulation"),
    "alarm": ("model", "alarm", "simulation"),
    "alarm-system": ("model", "alarm", "simulation"),
    "compare": ("model", "alarm", "simulation", "compare"),
    "bounds": ("model", "alarm", "simulation", "compare"),
    "analytic-check": ("model", "simulation"),
}
CLAIM_KEYS = {"exponential": ("rho",), "pareto": ("rho", "kappa"), "logarithmic": ("p",), "degenerate": ("value",)}
CACHE_ENV = "RUINALARM_CACHE_DIR"
EXIT_CONFIG = 2
EXIT_RUNTIME = 1


class ConfigError(ValueError):
    """All problems found in a config, one message per line."""

    def __init__(self, errors: Sequence[str]):
        super().__init__("\n".join(errors))
        self.errors = list(errors)


# ---------------------------------------------------------------- schema

def _num(text: str) -> float:
    v = float(text)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def _int(text: str) -> int:
    return int(text)


def _str(text: str) -> str:
    if not text:
        raise ValueError("empty value")
    return text


def _floats(text: str) -> Tuple[float, ...]:
    items = [s.strip() for s in text.split(",")]
    if any(not s for s in items):
        raise ValueError("empty list item")
    return tuple(_num(s) for s in items)


def _words(text: str) -> Tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


@dataclass(frozen=True)
class _Key:
    parse: Callable[[str], Any]
    check: Optional[Callable[[Any], Optional[str]]] = None
    default: Any = None
    required: bool = False


def _positive(v):
    return None if v > 0 else "must be > 0"


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


def _unit_open(v):
    return None if 0 < v < 1 else "out of range (0, 1)"


def _pos_int(v):
    return None if v >= 1 else "must be >= 1"


def _choice(options):
    return lambda v: None if v in options else f"must be one of {', '.join(options)}"


def _all(check):
    def run(vals):
        for v in vals:
            msg = check(v)
            if msg:
                return f"item {v!r} {msg}"
        return None
    return run


def _ascending(vals):
    return None if all(b > a for a, b in zip(vals, vals[1:])) else "must be strictly increasing"


def _formats(vals):
    bad = [v for v in vals if v not in ("csv", "svg")]
    return f"unknown format(s) {', '.join(bad)}; allowed: csv, svg" if bad else None


SCHEMA: Dict[str, Dict[str, _Key]] = {
    "model": {
        "claims": _Key(_str, _choice(tuple(CLAIM_KEYS)), required=True),
        "rho": _Key(_num, _positive),
        "kappa": _Key(_num, _positive),
        "p": _Key(_num, _unit_open),
        "value": _Key(_num, _positive),
        "lambda": _Key(_num, _positive, required=True),
        "premium_rate": _Key(_num, _nonneg, required=True),
        "u0": _Key(_num, _nonneg, required=True),
        "ruin_level": _Key(_num, None, 0.0),
    },
    "alarm": {
        "alpha": _Key(_num, _unit_open, required=True),
        "beta": _Key(_num, _unit_open, required=True),
        "d": _Key(_num, _positive, required=True),
        "grid_dt": _Key(_num, _positive, 0.01),
        "horizon": _Key(_num, _positive, DEFAULT_HORIZON),
        "max_alarms": _Key(_int, _pos_int, 50),
        "injection_fraction": _Key(_num, _nonneg),
        "injections": _Key(_floats, _all(_nonneg)),
        "times": _Key(_floats, lambda v: _all(_nonneg)(v) or _ascending(v)),
    },
    "simulation": {
        "n_paths": _Key(_int, _pos_int, 100_000),
        "master_seed": _Key(_int, _nonneg, 0),
        "min_survivors": _Key(_int, _pos_int, 10_000),
        "sim_budget": _Key(_int, _pos_int),
        "horizon": _Key(_num, _positive, DEFAULT_HORIZON),
        "grid_dt": _Key(_num, _positive, 0.01),
        "workers": _Key(_int, _pos_int, 1),
    },
    "compare": {
        "rates": _Key(_floats, _all(_nonneg), (0.0,)),
        "report_times": _Key(_floats, _all(_positive)),
        "bound_rate": _Key(_num, _nonneg, 0.1),
        "bound_times": _Key(_floats, _all(_positive)),
        "pb_mode": _Key(_str, _choice(PB_MODES), "empirical"),
        "capital_step": _Key(_num, _positive, 1.0),
    },
    "output": {
        "directory": _Key(_str, None, "out"),
        "formats": _Key(_words, _formats, ("csv",)),
    },
}
# keys that change neither results nor file contents
UNHASHED = {("simulation", "workers"), ("output", "directory"), ("output", "formats")}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated config; ``sections[name]`` maps every schema key to its value (``None`` when unset)."""

    sections: Dict[str, Dict[str, Any]]
    present: Tuple[str, ...]
    command: Optional[str] = None

    def __getitem__(self, section: str) -> Dict[str, Any]:
        return self.sections[section]

    def has(self, section: str) -> bool:
        return section in self.present

    def with_value(self, section: str, key: str, value) -> "ExperimentConfig":
        secs = {s: dict(v) for s, v in self.sections.items()}
        secs[section][key] = value
        present = self.present if section in self.present else self.present + (section,)
        return replace(self, sections=secs, present=present)


def parse_config(text: str, command: Optional[str] = None) -> ExperimentConfig:
    """Parse and validate a config.

    Every problem is collected before raising, each prefixed with its line number.

    Args:
        text: config file contents.
        command: when given, the sections this command needs must be present
            and any ``command =`` line in the file must agree.

    Raises:
        ConfigError: listing every problem found.
    """
    errors: List[str] = []
    raw: Dict[str, Dict[str, Tuple[str, int]]] = {}
    seen_at: Dict[str, int] = {}
    file_command: Optional[str] = None
    section: Optional[str] = None
    for n, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("[") and body.endswith("]"):
            name = body[1:-1].strip()
            if name not in SECTIONS:
                errors.append(f"line {n}: unknown section [{name}]")
                section = None
                continue
            if name in seen_at:
                errors.append(f"line {n}: section [{name}] repeated (first at line {seen_at[name]})")
            seen_at.setdefault(name, n)
            raw.setdefault(name, {})
            section = name
            continue
        if "=" not in body:
            errors.append(f"line {n}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in body.split("=", 1))
        if section is None:
            if key == "command" and not seen_at:
                if value not in COMMANDS:
                    errors.append(f"line {n}: command must be one of {', '.join(COMMANDS)}")
                file_command = value
            else:
                errors.append(f"line {n}: key '{key}' outside any section")
            continue
        if key not in SCHEMA[section]:
            errors.append(f"line {n}: unknown key '{key}' in [{section}]")
            continue
        if key in raw[section]:
            errors.append(f"line {n}: key '{key}' repeated in [{section}] (first at line {raw[section][key][1]})")
            continue
        raw[section][key] = (value, n)

    sections: Dict[str, Dict[str, Any]] = {}
    for sec, keys in SCHEMA.items():
        vals: Dict[str, Any] = {}
        given = raw.get(sec, {})
        for key, spec in keys.items():
            if key not in given:
                if spec.required and sec in raw:
                    errors.append(f"line {seen_at[sec]}: [{sec}] missing required key '{key}'")
                vals[key] = spec.default
                continue
            text_value, n = given[key]
            try:
                v = spec.parse(text_value)
            except ValueError as exc:
                errors.append(f"line {n}: [{sec}] {key} = {text_value!r}: cannot parse ({exc})")
                vals[key] = spec.default
                continue
            msg = spec.check(v) if spec.check else None
            if msg:
                errors.append(f"line {n}: [{sec}] {key} = {text_value}: {msg}")
            vals[key] = v
        sections[sec] = vals

    if "model" in raw and sections["model"]["claims"] in CLAIM_KEYS:
        kind = sections["model"]["claims"]
        for key in CLAIM_KEYS[kind]:
            if key not in raw["model"]:
                errors.append(f"line {seen_at['model']}: [model] {kind} claims need '{key}'")
        for key in sum(CLAIM_KEYS.values(), ()):
            if key in raw["model"] and key not in CLAIM_KEYS[kind]:
                errors.append(f"line {raw['model'][key][1]}: [model] '{key}' does not apply to {kind} claims")
    if "alarm" in raw:
        a = raw["alarm"]
        if "injection_fraction" in a and "injections" in a:
            errors.append(f"line {a['injections'][1]}: [alarm] injection given both as injection_fraction "
                          f"(line {a['injection_fraction'][1]}) and as injections")
        elif "injection_fraction" not in a and "injections" not in a:
            errors.append(f"line {seen_at['alarm']}: [alarm] needs injection_fraction or injections")
        if "times" in a and "injections" in a and len(sections["alarm"]["times"]) != len(sections["alarm"]["injections"]):
            errors.append(f"line {a['times'][1]}: [alarm] times and injections differ in length")
    if file_command and command and file_command != command:
        errors.append(f"config declares command '{file_command}' but '{command}' was requested")
    command = command or file_command
    if command in NEEDS:
        for sec in NEEDS[command]:
            if sec not in raw:
                errors.append(f"line {len(text.splitlines()) or 1}: command '{command}' needs a [{sec}] section")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(sections, tuple(s for s in SECTIONS if s in raw), command)


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def serialize_config(cfg: ExperimentConfig, hashed_only: bool = False) -> str:
    """Canonical text form: schema order, unset keys omitted, floats in ``repr`` form.

    ``hashed_only`` drops the keys that do not affect results.
    """
    lines = []
    if cfg.command and not hashed_only:
        lines.append(f"command = {cfg.command}")
    for sec in SECTIONS:
        if not cfg.has(sec):
            continue
        body = [f"{key} = {_fmt(cfg[sec][key])}" for key in SCHEMA[sec]
                if cfg[sec][key] is not None and not (hashed_only and (sec, key) in UNHASHED)]
        if body or not hashed_only:
            lines += ([""] if lines else []) + [f"[{sec}]"] + body
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg, hashed_only=True).encode()).hexdigest()


def header_lines(cfg: ExperimentConfig, command: str) -> List[str]:
    return [f"ruinalarm {__version__} command={command} config_sha256={config_hash(cfg)}"]


# ---------------------------------------------------------------- builders

def build_model(cfg: ExperimentConfig) -> RiskModel:
    m = cfg["model"]
    kind = m["claims"]
    if kind == "exponential":
        claims = Exponential(m["rho"])
    elif kind == "pareto":
        claims = Pareto(m["rho"], m["kappa"])
    elif kind == "logarithmic":
        claims = Logarithmic(m["p"])
    else:
        claims = Degenerate(m["value"])
    return RiskModel(claims, m["lambda"], m["premium_rate"], m["u0"], m["ruin_level"])


def build_params(cfg: ExperimentConfig) -> AlarmParams:
    a = cfg["alarm"]
    return AlarmParams(a["alpha"], a["beta"], a["d"], a["grid_dt"], a["horizon"])


def _injection_policy(cfg: ExperimentConfig):
    a = cfg["alarm"]
    return a["injections"] if a["injections"] is not None else a["injection_fraction"]


def fixed_schedule(cfg: ExperimentConfig) -> Optional[CapitalSchedule]:
    """The schedule given by ``[alarm] times``, or None when alarms are to be found."""
    a = cfg["alarm"]
    if a["times"] is None:
        return None
    u0 = cfg["model"]["u0"]
    inj = a["injections"] if a["injections"] is not None else (a["injection_fraction"] * u0,) * len(a["times"])
    return CapitalSchedule(u0, a["times"], inj)


def _sim(cfg):
    return cfg["simulation"]


# ---------------------------------------------------------------- cache

class SurfaceCache:
    """Directory of ``PsiSurface`` CSV files keyed by a content hash.

    The key covers the model, both grids, the path count and the seed.
    Writers take an advisory lock per key.
    """

    def __init__(self, directory=None, enabled: bool = True):
        if directory is None:
            directory = os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "ruinalarm"
        self.directory = Path(directory)
        self.enabled = enabled

    @staticmethod
    def key(model: RiskModel, capital_grid, grid, n_paths: int, master_seed: int, horizon: float) -> str:
        payload = {
            "version": __version__,
            "claims": [type(model.claims).__name__, repr(model.claims)],
            "lam": repr(model.lam), "c": repr(model.premium_rate), "ruin_level": repr(model.ruin_level),
            "capital_grid": [repr(float(x)) for x in capital_grid],
            "time_grid": [repr(float(x)) for x in grid],
            "n_paths": n_paths, "master_seed": master_seed, "horizon": repr(float(horizon)),
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()

    def get_or_build(self, key: str, build: Callable[[], PsiSurface]) -> Tuple[PsiSurface, bool]:
        """Return ``(surface, hit)``."""
        if not self.enabled:
            return build(), False
        from filelock import FileLock

        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{key}.csv"
        with FileLock(str(self.directory / f"{key}.lock")):
            if path.exists():
                logger.info("surface cache hit %s", path)
                return PsiSurface.from_csv(path), True
            surface = build()
            tmp = path.with_suffix(".tmp")
            surface.to_csv(tmp, [f"ruinalarm {__version__} surface key={key}"])
            os.replace(tmp, path)
            return surface, False


# ---------------------------------------------------------------- commands

@dataclass
class RunContext:
    cfg: ExperimentConfig
    command: str
    out: Path
    workers: int = 1
    cache: SurfaceCache = field(default_factory=lambda: SurfaceCache(enabled=False))
    echo: Callable[[str], None] = print

    @property
    def headers(self) -> List[str]:
        return header_lines(self.cfg, self.command)

    @property
    def svg(self) -> bool:
        return "svg" in self.cfg["output"]["formats"]

    @property
    def csv(self) -> bool:
        return "csv" in self.cfg["output"]["formats"]


def _f4(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.4f}"


def _write_rows(path: Path, headers, columns, rows):
    with open(path, "w", newline="\n") as f:
        for h in headers:
            f.write(f"# {h}\n")
        f.write(",".join(columns) + "\n")
        for r in rows:
            f.write(",".join(r) + "\n")


def run_ruin_dist(ctx: RunContext) -> int:
    model = build_model(ctx.cfg)
    s = _sim(ctx.cfg)
    grid = time_grid(s["horizon"], s["grid_dt"])
    pool = simulate_pool(model, s["horizon"], s["n_paths"], s["master_seed"], model.initial_capital - model.ruin_level,
                         ctx.workers)
    tau = pool.ruin_times(model.initial_capital)
    cdf = RuinCDF.from_ruin_times(tau, grid)
    if ctx.csv:
        _write_rows(ctx.out / "ruin_cdf.csv", ctx.headers, ["t", "psi", "stderr"],
                    ([f"{t:.2f}", _f4(p), _f4(e)] for t, p, e in zip(cdf.time_grid, cdf.psi, cdf.stderr)))
    if ctx.svg:
        svg.line_chart(ctx.out / "ruin_cdf.svg", cdf.time_grid, [("psi(u0, t)", cdf.psi)],
                       title=f"Ruin probability, u0 = {model.initial_capital:g}", xlabel="t", ylabel="psi",
                       ylim=(0.0, 1.0))
        svg.histogram(ctx.out / "ruin_times.svg", tau[np.isfinite(tau)], title="Ruin times before the horizon",
                      xlabel="t")
    ctx.echo(f"ruin-dist: psi(u0={model.initial_capital:g}, {grid[-1]:.2f}) = {cdf.psi[-1]:.4f} "
             f"+/- {cdf.stderr[-1]:.4f} over {pool.n_paths} paths")
    return 0


def _alarm_system(ctx: RunContext, max_alarms: Optional[int] = None):
    model = build_model(ctx.cfg)
    s = _sim(ctx.cfg)
    params = build_params(ctx.cfg)
    limit = max_alarms or ctx.cfg["alarm"]["max_alarms"]
    return build_alarm_system(model, model.initial_capital, _injection_policy(ctx.cfg), params, max_alarms=limit,
                              sim_budget=s["sim_budget"], master_seed=s["master_seed"], n_paths=s["n_paths"],
                              min_survivors=s["min_survivors"], workers=ctx.workers)


def _echo_alarms(ctx: RunContext, sched: AlarmSchedule):
    for idx, t, u, cum, pb, pa, _ in sched.rows():
        ctx.echo(f"alarm {idx}: At({t:.2f}) inject {u:.4f} -> capital {cum:.4f}, P(B)={pb:.4f} "
                 f"(approx {pa:.4f})")
    ctx.echo(f"{sched.k} alarm(s); stopped: {sched.termination}")


def run_alarm(ctx: RunContext) -> int:
    sched, _ = _alarm_system(ctx, max_alarms=1)
    if ctx.csv:
        sched.to_csv(ctx.out / "alarm_times.csv", ctx.headers)
    ctx.echo(f"alarm: {'At(%.2f)' % sched.alarm_times[0] if sched.k else 'Never'}")
    return 0


def run_alarm_system(ctx: RunContext) -> int:
    sched, pool = _alarm_system(ctx)
    if ctx.csv:
        sched.to_csv(ctx.out / "alarm_times.csv", ctx.headers)
    if ctx.svg:
        grid = time_grid(ctx.cfg["alarm"]["horizon"], ctx.cfg["alarm"]["grid_dt"])
        tau = pool.ruin_times(sched.schedule)
        surv = 1.0 - RuinCDF.from_ruin_times(tau, grid).psi
        svg.line_chart(ctx.out / "alarm_system.svg", grid, [("alarm system", surv)], title="Survival with alarms",
                       xlabel="t", ylabel="P(T > t)", ylim=(0.0, 1.0), markers=sched.alarm_times)
    _echo_alarms(ctx, sched)
    return 0


def _schedule_and_pool(ctx: RunContext, stop_extra: float = 0.0):
    """Alarm schedule (fixed or found) plus a pool covering the simulation horizon."""
    model = build_model(ctx.cfg)
    s = _sim(ctx.cfg)
    params = build_params(ctx.cfg)
    fixed = fixed_schedule(ctx.cfg)
    if fixed is None:
        found, _ = _alarm_system(ctx)
        fixed = found.schedule
    horizon = max(s["horizon"], params.search_horizon)
    stop = max(fixed.total, stop_extra) - model.ruin_level
    pool = simulate_pool(model, horizon, s["n_paths"], s["master_seed"], stop, ctx.workers)
    return model, params, schedule_from_pool(pool, fixed, params.beta), pool


def run_compare(ctx: RunContext) -> int:
    model, params, alarms, pool = _schedule_and_pool(ctx)
    s = _sim(ctx.cfg)
    c = ctx.cfg["compare"]
    grid = time_grid(s["horizon"], s["grid_dt"])
    rep = survival_table(model, alarms.schedule, c["rates"], grid=grid, pool=pool, horizon=s["horizon"])
    times = c["report_times"]
    if ctx.csv:
        rep.to_csv(ctx.out / "survival.csv", ctx.headers, times)
    if ctx.svg:
        series = [("alarm system", rep.survival_alarm)]
        series += [(f"no alarm, r={rate_label(r)}", rep.survival_noalarm[n]) for n, r in enumerate(rep.rates)]
        svg.line_chart(ctx.out / "survival.svg", rep.time_grid, series, title="Survival: alarm vs lump sum",
                       xlabel="t", ylabel="P(T > t)", ylim=(0.0, 1.0), markers=alarms.schedule.times)
    ctx.echo("alarms: " + ", ".join(f"{a:.2f}" for a in alarms.schedule.times))
    ctx.echo("equivalent capitals: " + ", ".join(f"r={rate_label(r)}:{cap:.4f}"
                                                 for r, cap in zip(rep.rates, rep.equivalent_capitals)))
    for g in ([rep.grid_index(t) for t in times] if times else range(0, len(rep.time_grid), 100)):
        row = " ".join(f"{v:.4f}" for v in rep.survival_noalarm[:, g])
        ctx.echo(f"t={rep.time_grid[g]:.2f} alarm={rep.survival_alarm[g]:.4f} no-alarm={row}")
    return 0


def run_bounds(ctx: RunContext) -> int:
    model, params, alarms, pool = _schedule_and_pool(ctx)
    s = _sim(ctx.cfg)
    c = ctx.cfg["compare"]
    r = c["bound_rate"]
    sched = alarms.schedule
    times = c["bound_times"] or tuple(round(0.5 * (a + b), 2) for a, b in
                                      zip((0.0,) + sched.times, sched.times + (sched.last_time + 1.0,)))
    horizon = max(s["horizon"], params.search_horizon)
    if max(times) + params.d > horizon:
        raise ValueError(f"bound times plus d exceed the simulation horizon {horizon:g}")
    grid = time_grid(horizon, s["grid_dt"])
    step = c["capital_step"]
    cap_top = sched.total + model.premium_rate * sched.last_time + step
    caps = np.arange(0.0, cap_top + step, step)
    key = SurfaceCache.key(model, caps, grid, s["n_paths"], s["master_seed"], horizon)
    surface, hit = ctx.cache.get_or_build(key, lambda: surface_from_pool(
        pool.with_stop_level(caps[-1] - model.ruin_level, ctx.workers) if pool.stop_level < caps[-1] - model.ruin_level
        else pool, caps, grid))
    rep = survival_table(model, sched, [r], grid=grid, pool=pool, horizon=horizon)
    reports: List[BoundReport] = []
    for t in times:
        br = finite_time_bounds(surface, alarms, params, r, t, model, c["pb_mode"], pool)
        g = rep.grid_index(round(t, 10)) if np.any(np.abs(rep.time_grid - t) < 1e-9) else None
        if g is not None:
            br = br.with_delta(float(rep.delta[0, g]), float(rep.delta_stderr[0, g]))
        reports.append(br)
        ctx.echo(f"t={t:.2f} i={br.interval_index} delta_hat={_f4(br.delta_hat)} "
                 f"lower={br.tightest('lower'):.4f} upper={br.tightest('upper'):.4f} "
                 f"prop1_upper={br.get('prop1_upper').value:.4f}")
    ult = ultimate_delta_bounds(surface, alarms, params, r, model, c["pb_mode"], pool)
    reports.append(ult)
    ctx.echo(f"ultimate: lower={ult.tightest('lower'):.4f} upper={ult.tightest('upper'):.4f}"
             + (" (net profit condition fails: gap is 0)" if ult.active_branch == "npc_violated" else ""))
    if ctx.csv:
        write_bounds_csv(ctx.out / "bounds.csv", reports, ctx.headers)
    ctx.echo(f"surface cache {'hit' if hit else 'miss'}")
    return 0


def run_analytic_check(ctx: RunContext) -> int:
    model = build_model(ctx.cfg)
    s = _sim(ctx.cfg)
    times = (ctx.cfg["compare"]["report_times"] if ctx.cfg.has("compare") else None) or (1.0, 5.0, 10.0)
    horizon = max(max(times), s["horizon"])
    u = model.initial_capital
    claims = model.claims
    if isinstance(claims, Exponential):
        theta = loading_factor(model)
        method = "exponential-closed-form"

        def analytic(t):
            return psi_finite_exponential(claims.rate, theta, u, t, premium_rate=model.premium_rate)
    elif claims.is_integer:
        method = "discrete-series"

        def analytic(t):
            return 1.0 - survival_finite_discrete_ik(model, u, t)
    else:
        raise ValueError(f"no analytic ruin probability for {type(claims).__name__} claims")
    pool = simulate_pool(model, horizon, s["n_paths"], s["master_seed"], u - model.ruin_level, ctx.workers)
    tau = pool.ruin_times(u)
    rows = []
    for t in times:
        a = analytic(t)
        p = float(np.mean(tau <= t))
        se = math.sqrt(max(p * (1 - p), 1e-300) / pool.n_paths)
        z = (p - a) / se if se > 0 else math.nan
        rows.append([f"{t:.2f}", _f4(a), _f4(p), _f4(se), f"{z:.2f}", method])
        ctx.echo(f"t={t:.2f} analytic={a:.4f} monte_carlo={p:.4f} +/- {se:.4f} z={z:.2f}")
    if ctx.csv:
        _write_rows(ctx.out / "analytic_check.csv", ctx.headers, ["t", "analytic", "monte_carlo", "stderr", "z", "method"],
                    rows)
    return 0


RUNNERS = {
    "ruin-dist": run_ruin_dist,
    "alarm": run_alarm,
    "alarm-system": run_alarm_system,
    "compare": run_compare,
    "bounds": run_bounds,
    "analytic-check": run_analytic_check,
}


def run_experiment(cfg: ExperimentConfig, command: Optional[str] = None, out: Optional[os.PathLike] = None,
                   workers: Optional[int] = None, use_cache: bool = True, cache_dir=None,
                   echo: Callable[[str], None] = print) -> int:
    """Run one command and write its artifacts; returns the exit status."""
    command = command or cfg.command
    if command not in RUNNERS:
        echo(f"error: unknown command {command!r}")
        return EXIT_CONFIG
    out_dir = Path(out if out is not None else cfg["output"]["directory"])
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(cfg, command, out_dir, workers or cfg["simulation"]["workers"],
                     SurfaceCache(cache_dir, enabled=use_cache), echo)
    start = time.perf_counter()
    try:
        status = RUNNERS[command](ctx)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        echo(f"error in {command}: {exc}")
        return EXIT_RUNTIME
    logger.info("%s finished in %.2f s", command, time.perf_counter() - start)
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="ruinalarm", description="Alarm-system ruin experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--out", type=Path, help="output directory (overrides [output] directory)")
    ap.add_argument("--seed", type=int, help="master seed (overrides [simulation] master_seed)")
    ap.add_argument("--paths", type=int, help="number of paths (overrides [simulation] n_paths)")
    ap.add_argument("--no-cache", action="store_true", help=f"ignore the surface cache (location: ${CACHE_ENV})")
    ap.add_argument("--workers", type=int, help="simulation threads; results do not depend on it")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config.read_text(encoding="utf-8"), args.command)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"{args.config}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    overrides = [("seed", "master_seed", args.seed, 0), ("paths", "n_paths", args.paths, 1),
                 ("workers", "workers", args.workers, 1)]
    for flag, key, value, lo in overrides:
        if value is not None:
            if value < lo:
                print(f"error: --{flag} must be >= {lo}", file=sys.stderr)
                return EXIT_CONFIG
            cfg = cfg.with_value("simulation", key, value)
    return run_experiment(cfg, args.command, args.out, use_cache=not args.no_cache)


if __name__ == "__main__":
    sys.exit(main())
