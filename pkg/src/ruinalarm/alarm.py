"""Alarm times from ruin-time distributions and multi-alarm injection schedules.

An alarm sounds at the first time ``s`` at which survival so far is likely
(``P(T > s) >= 1 - beta``) while ruin within the next ``d`` time units,
given survival to ``s``, is likely too (``P(T <= s + d | T > s) >= 1 - alpha``).
On survival functions this reads ``S(s) >= max(1 - beta, S(s + d) / alpha)``.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Optional, Sequence, Tuple, Union
import warnings

import numpy as np

from .model import CapitalSchedule, RiskModel
from .simulate import (
    DEFAULT_DT,
    DEFAULT_HORIZON,
    DEFAULT_MIN_SURVIVORS,
    CensoringWarning,
    PathPool,
    conditional_cdf,
    simulate_pool,
    time_grid,
    topped_up_ruin_times,
)

logger = logging.getLogger(__name__)

_TOL = 1e-12


class CensoringError(ValueError):
    """The lead window ``s + d`` runs past the end of the ruin-time grid."""


@dataclass(frozen=True)
class AlarmParams:
    """Alarm definition parameters.

    Attributes:
        alpha: the conditional ruin probability over the lead window must reach ``1 - alpha``.
        beta: survival up to the alarm must be at least ``1 - beta``.
        d: lead window length.
        search_grid_dt: spacing of candidate alarm times.
        search_horizon: last time covered by the ruin-time grid.
    """

    alpha: float
    beta: float
    d: float
    search_grid_dt: float = DEFAULT_DT
    search_horizon: float = DEFAULT_HORIZON

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not self.search_grid_dt > 0:
            raise ValueError("search_grid_dt must be > 0")
        if not self.d >= self.search_grid_dt:
            raise ValueError(f"d={self.d} must be at least the grid step {self.search_grid_dt}")
        if not self.search_horizon > self.d:
            raise ValueError(f"search_horizon={self.search_horizon} must exceed d={self.d}")

    @property
    def consequence_level(self) -> float:
        """Guaranteed ruin mass inside the lead window, ``(1 - alpha)(1 - beta)``."""
        return (1.0 - self.alpha) * (1.0 - self.beta)


@dataclass(frozen=True)
class AlarmResult:
    """Outcome of an alarm search.

    Attributes:
        time: alarm time, or None when no alarm sounds.
        beta_fail_time: first scanned time where survival fell below ``1 - beta``.
        margin: ``S(s) - max(1 - beta, S(s + d) / alpha)`` at the alarm.
    """

    time: Optional[float]
    beta_fail_time: Optional[float] = None
    margin: Optional[float] = None

    @property
    def sounds(self) -> bool:
        return self.time is not None

    def __str__(self):
        return "Never" if self.time is None else f"At({self.time:.2f})"


def find_alarm(grid: np.ndarray, survival: np.ndarray, params: AlarmParams,
               after: Optional[float] = None) -> AlarmResult:
    """Scan for the first alarm time on a survival curve.

    Args:
        grid: ascending times; ``survival[g]`` is the (conditional) survival at ``grid[g]``.
        survival: survival probabilities, non-increasing.
        params: alarm parameters.
        after: when given, only candidates strictly later than this time count.

    Raises:
        CensoringError: a candidate's lead window ends past the grid before
            the scan can decide.
    """
    grid = np.asarray(grid, dtype=float)
    survival = np.asarray(survival, dtype=float)
    a, floor = params.alpha, 1.0 - params.beta
    end = grid[-1]
    start = 0 if after is None else int(np.searchsorted(grid, after + _TOL, side="left"))
    for g in range(start, len(grid)):
        s = grid[g]
        sv = survival[g]
        if sv < floor - _TOL:
            return AlarmResult(None, beta_fail_time=float(s))
        if s + params.d > end + 1e-9:
            raise CensoringError(f"lead window [{s:.4g}, {s + params.d:.4g}] passes the grid end {end:.4g}")
        ahead = float(np.interp(s + params.d, grid, survival))
        need = max(floor, ahead / a)
        if sv >= need - _TOL:
            return AlarmResult(float(s), margin=float(sv - need))
    return AlarmResult(None)


def find_alarm_cdf(cdf, params: AlarmParams, after: Optional[float] = None) -> AlarmResult:
    """``find_alarm`` on any object exposing ``time_grid`` and ``survival``."""
    return find_alarm(cdf.time_grid, cdf.survival, params, after)


@dataclass(frozen=True)
class AlarmSchedule:
    """Alarms built recursively with a capital injection at each one.

    Attributes:
        schedule: base capital, alarm times and injections.
        p_b: empirical probability of no ruin up to each alarm, ``P(B_i)``.
        p_b_stderr: binomial standard errors of ``p_b``.
        termination: why the recursion stopped: ``no-further-alarm``, ``max_alarms`` or ``horizon``.
        eq12: conditional ruin mass in ``(A_i, A_i + d]`` given survival to ``A_i``.
        beta: the beta used, for the ``(1 - beta)^i`` comparison.
        n_topup: extra paths simulated to keep enough survivors.
    """

    schedule: CapitalSchedule
    p_b: Tuple[float, ...]
    p_b_stderr: Tuple[float, ...]
    termination: str
    eq12: Tuple[float, ...] = ()
    beta: float = 0.0
    n_topup: int = 0
    n_paths: int = 0

    @property
    def alarm_times(self) -> Tuple[float, ...]:
        return self.schedule.times

    @property
    def injections(self) -> Tuple[float, ...]:
        return self.schedule.injections

    @property
    def k(self) -> int:
        return self.schedule.k

    @property
    def p_b_approx(self) -> Tuple[float, ...]:
        return tuple((1.0 - self.beta) ** i for i in range(1, self.k + 1))

    def rows(self):
        """Per-alarm tuples ``(index, time, injection, cumulative_capital, p_b, p_b_approx, eq12)``."""
        caps = np.cumsum(self.schedule.capitals)
        return [(i + 1, self.alarm_times[i], self.injections[i], float(caps[i + 1]), self.p_b[i],
                 self.p_b_approx[i], self.eq12[i] if i < len(self.eq12) else math.nan)
                for i in range(self.k)]

    def to_csv(self, path, header_lines: Sequence[str] = ()):
        with open(path, "w", newline="\n") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            f.write("index,alarm_time,injection,cumulative_capital,p_b_empirical,p_b_approx,eq12_estimate\n")
            for idx, t, u, cum, pb, pa, e12 in self.rows():
                f.write(f"{idx},{t:.2f},{u:.4f},{cum:.4f},{pb:.4f},{pa:.4f},{e12:.4f}\n")


def _injection_amounts(u0: float, policy: Union[float, Sequence[float]], max_alarms: int):
    if isinstance(policy, (int, float)):
        if policy < 0:
            raise ValueError("injection fraction must be >= 0")
        return [policy * u0] * max_alarms
    amounts = [float(x) for x in policy]
    if any(x < 0 for x in amounts):
        raise ValueError("injections must be >= 0")
    return amounts


def window_mass(grid: np.ndarray, survival: np.ndarray, s: float, d: float) -> float:
    """``P(s < T <= s + d)`` from a survival curve, by linear interpolation."""
    return float(np.interp(s, grid, survival) - np.interp(s + d, grid, survival))


def build_alarm_system(model: RiskModel, u0: Optional[float], injection_policy: Union[float, Sequence[float]],
                       params: AlarmParams, max_alarms: int = 50, sim_budget: Optional[int] = None,
                       master_seed: int = 0, n_paths: int = 100_000,
                       min_survivors: int = DEFAULT_MIN_SURVIVORS, workers: int = 1,
                       pool: Optional[PathPool] = None) -> Tuple[AlarmSchedule, PathPool]:
    """Build successive alarms, injecting capital at each.

    Every alarm is found on the ruin-time law of the injected process given
    survival up to the previous alarm.  All rounds reuse one pool of paths,
    extended when the survivors of the conditioning event run short.

    Args:
        model: risk model; ``model.initial_capital`` is used when ``u0`` is None.
        u0: initial capital.
        injection_policy: a fraction of ``u0`` injected at every alarm, or an explicit list.
        params: alarm parameters.
        max_alarms: cap on the number of alarms.
        sim_budget: maximum number of simulated paths including top-ups.
        master_seed: seed of the path stream.
        n_paths: initial number of paths.
        min_survivors: survivor quota for each conditional estimate.
        workers: simulation threads.
        pool: an existing pool to reuse (for instance one shared with a comparison).

    Returns:
        The schedule and the (possibly extended) path pool.
    """
    u0 = model.initial_capital if u0 is None else float(u0)
    amounts = _injection_amounts(u0, injection_policy, max_alarms)
    limit = min(max_alarms, len(amounts))
    horizon = params.search_horizon
    grid = time_grid(horizon, params.search_grid_dt)
    total = u0 + sum(amounts[:limit])
    stop = total - model.ruin_level
    if pool is None:
        pool = simulate_pool(model, horizon, n_paths, master_seed, stop, workers)
    elif pool.stop_level < stop:
        pool = pool.with_stop_level(stop, workers)
    schedule = CapitalSchedule(u0)
    p_b, p_err, eq12 = [], [], []
    n_topup = 0
    termination = "max_alarms"
    for i in range(limit + 1):
        if i == 0:
            tau = pool.ruin_times(schedule)
            cond = conditional_cdf(tau, 0.0, grid)
            after = None
        else:
            pool, tau, added = topped_up_ruin_times(pool, schedule, min_survivors, sim_budget, workers)
            n_topup += added
            cond = conditional_cdf(tau, schedule.last_time, grid, added)
            after = schedule.last_time
            pb = cond.p_condition
            p_b.append(pb)
            p_err.append(math.sqrt(pb * (1 - pb) / cond.n_total))
            logger.info("alarm %d at %.2f: P(B)=%.4f (%d survivors of %d)", i, after, pb,
                        cond.n_survivors, cond.n_total)
        if i == limit:
            break
        try:
            res = find_alarm(cond.time_grid, cond.survival, params, after=after)
        except CensoringError:
            warnings.warn("alarm search reached the simulation horizon", CensoringWarning, stacklevel=2)
            termination = "horizon"
            break
        if not res.sounds:
            termination = "no-further-alarm"
            break
        t_alarm = res.time
        eq12.append(window_mass(cond.time_grid, cond.survival, t_alarm, params.d))
        if i > 0 and t_alarm <= schedule.last_time:
            raise RuntimeError("alarm times must increase")
        schedule = schedule.with_event(t_alarm, amounts[i])
    result = AlarmSchedule(schedule, tuple(p_b), tuple(p_err), termination, tuple(eq12), params.beta,
                           n_topup, pool.n_paths)
    return result, pool


@dataclass(frozen=True)
class ConsequenceCheck:
    """Empirical ``P(A_i < T <= A_i + d | B_i)`` against ``(1 - alpha)(1 - beta)``."""

    alarm_times: Tuple[float, ...]
    estimates: Tuple[float, ...]
    stderr: Tuple[float, ...]
    target: float
    flagged: Tuple[bool, ...]

    @property
    def ok(self) -> bool:
        return not any(self.flagged)


def alarm_consequence_check(schedule: AlarmSchedule, model: RiskModel, params: AlarmParams,
                            n_paths: int = 100_000, master_seed: int = 0, workers: int = 1) -> ConsequenceCheck:
    """Re-estimate the lead-window ruin mass at each alarm on fresh paths.

    Alarm ``i`` is checked on the process carrying injections up to and
    including ``A_{i-1}``, conditioned on survival to ``A_{i-1}``; this is
    the quantity the recursive definition bounds from below.  An alarm is
    flagged when estimate + 3 sigma falls short of the target.
    """
    target = params.consequence_level
    if schedule.k == 0:
        return ConsequenceCheck((), (), (), target, ())
    sch = schedule.schedule
    pool = simulate_pool(model, params.search_horizon, n_paths, master_seed, sch.total - model.ruin_level, workers)
    est, err, flags = [], [], []
    for i, a in enumerate(sch.times):
        prefix = sch.prefix(i)
        tau = pool.ruin_times(prefix)
        cond_start = prefix.last_time
        alive_prev = tau > cond_start
        n_prev = int(alive_prev.sum())
        if n_prev == 0:
            est.append(math.nan)
            err.append(math.nan)
            flags.append(True)
            continue
        # P(A_i < T <= A_i + d | B_{i-1}) / P(T > A_i | B_{i-1}) >= 1 - alpha, times (1 - beta)
        hits = int(((tau > a) & (tau <= a + params.d)).sum())
        p = hits / n_prev
        se = math.sqrt(p * (1 - p) / n_prev)
        est.append(p)
        err.append(se)
        flags.append(p + 3 * se < target)
    return ConsequenceCheck(sch.times, tuple(est), tuple(err), target, tuple(flags))
