"""Alarm system versus a no-alarm system holding the discounted injections up front.

Both systems are evaluated on one pool of claim paths, so every difference
between them comes from the capital levels alone.
"""

from dataclasses import dataclass
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .alarm import AlarmSchedule
from .model import CapitalSchedule, RiskModel, _discount
from .simulate import DEFAULT_HORIZON, PathPool, simulate_pool, time_grid

_GRID_TOL = 1e-9


def equivalent_initial_capital(schedule: CapitalSchedule, r: float) -> float:
    """``u_0 + sum_i exp(-r A_i) u_i``; ``r = inf`` gives ``u_0``."""
    if r < 0:
        raise ValueError("rate must be >= 0")
    return math.fsum([schedule.base_capital] + [u * _discount(r, a) for a, u in zip(schedule.times, schedule.injections)])


def rate_label(r: float) -> str:
    """Column-name form of a rate: ``0``, ``0.1``, ``inf``."""
    return "inf" if math.isinf(r) else f"{r:g}"


def schedule_from_pool(pool: PathPool, schedule: CapitalSchedule, beta: float = 0.0) -> AlarmSchedule:
    """Attach empirical ``P(B_i)`` from ``pool`` to a given schedule.

    Useful for evaluating a schedule that was not built on this pool.
    """
    tau = pool.ruin_times(schedule)
    n = pool.n_paths
    pb = tuple(float((tau > a).mean()) for a in schedule.times)
    err = tuple(math.sqrt(p * (1 - p) / n) for p in pb)
    return AlarmSchedule(schedule, pb, err, "given", (), beta, 0, n)


@dataclass(frozen=True)
class ComparisonReport:
    """Survival curves of the alarm system and of no-alarm systems at several rates.

    Arrays indexed by rate have shape ``(len(rates), len(time_grid))``.
    """

    schedule: CapitalSchedule
    rates: Tuple[float, ...]
    equivalent_capitals: Tuple[float, ...]
    time_grid: np.ndarray
    survival_alarm: np.ndarray
    survival_noalarm: np.ndarray
    delta: np.ndarray
    delta_stderr: np.ndarray
    crossover_times: Tuple[Optional[float], ...]
    n_paths: int

    def rate_index(self, r: float) -> int:
        for i, q in enumerate(self.rates):
            if q == r or (math.isinf(q) and math.isinf(r)):
                return i
        raise KeyError(f"rate {r} not in report")

    def grid_index(self, t: float) -> int:
        g = int(np.searchsorted(self.time_grid, t - _GRID_TOL))
        if g >= len(self.time_grid) or abs(self.time_grid[g] - t) > _GRID_TOL:
            raise ValueError(f"t={t} is not a grid time")
        return g

    def to_csv(self, path, header_lines: Sequence[str] = (), times: Optional[Sequence[float]] = None):
        """Write ``t, s_alarm, s_noalarm_r<rate>.., delta_r<rate>..``.

        The comment header lists the equivalent capital for each rate.
        """
        labels = [rate_label(r) for r in self.rates]
        idx = range(len(self.time_grid)) if times is None else [self.grid_index(t) for t in times]
        with open(path, "w", newline="\n") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            caps = ",".join(f"r{lab}={c:.4f}" for lab, c in zip(labels, self.equivalent_capitals))
            f.write(f"# equivalent_capitals: {caps}\n")
            cols = ["t", "s_alarm"] + [f"s_noalarm_r{lab}" for lab in labels] + [f"delta_r{lab}" for lab in labels]
            f.write(",".join(cols) + "\n")
            for g in idx:
                vals = [f"{self.time_grid[g]:.2f}", f"{self.survival_alarm[g]:.4f}"]
                vals += [f"{v:.4f}" for v in self.survival_noalarm[:, g]]
                vals += [f"{v:.4f}" for v in self.delta[:, g]]
                f.write(",".join(vals) + "\n")


def _survival_counts(tau: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Fraction of paths with ruin time strictly after each grid time."""
    ruined = np.searchsorted(grid, tau[np.isfinite(tau)], side="left")
    ruined = ruined[ruined < len(grid)]
    return 1.0 - np.cumsum(np.bincount(ruined, minlength=len(grid))) / len(tau)


def delta_from_ruin_times(tau_alarm: np.ndarray, tau_flat: np.ndarray, grid: np.ndarray):
    """Paired estimate of ``P(T_alarm <= t) - P(T_flat <= t)`` and its standard error."""
    n = len(tau_alarm)
    m = len(grid)

    def ruined_by(idx):
        return np.cumsum(np.bincount(idx[idx < m], minlength=m))

    a = np.searchsorted(grid, tau_alarm, side="left")
    b = np.searchsorted(grid, tau_flat, side="left")
    both = ruined_by(np.maximum(a, b))
    n10 = ruined_by(a) - both
    n01 = ruined_by(b) - both
    delta = (n10 - n01) / n
    var = (n10 + n01) / n - delta**2
    return delta, np.sqrt(np.maximum(var, 0.0) / n)


def crossover(grid: np.ndarray, delta: np.ndarray) -> Optional[float]:
    """First grid time where ``delta <= 0`` there and at the next grid time.

    The start of the grid is skipped while ``delta`` is identically 0, that
    is before any path separates the two systems.
    """
    nonpos = delta <= 0
    started = np.flatnonzero(delta != 0)
    if started.size == 0:
        return None
    for g in range(started[0], len(grid) - 1):
        if nonpos[g] and nonpos[g + 1]:
            return float(grid[g])
    return None


def survival_table(model: RiskModel, schedule: CapitalSchedule, rates: Sequence[float],
                   grid: Optional[np.ndarray] = None, n_paths: int = 100_000, master_seed: int = 0,
                   horizon: float = DEFAULT_HORIZON, workers: int = 1,
                   pool: Optional[PathPool] = None) -> ComparisonReport:
    """Survival of the alarm system and of each equivalent-capital system on shared paths.

    Every alarm time is merged into the time grid.
    """
    rates = tuple(float(r) for r in rates)
    base = time_grid(horizon) if grid is None else np.asarray(grid, dtype=float)
    grid = np.union1d(base, np.asarray(schedule.times, dtype=float))
    caps = tuple(equivalent_initial_capital(schedule, r) for r in rates)
    stop = max((schedule.total,) + caps) - model.ruin_level
    if pool is None:
        pool = simulate_pool(model, horizon, n_paths, master_seed, stop, workers)
    elif pool.stop_level < stop:
        pool = pool.with_stop_level(stop, workers)
    tau_alarm = pool.ruin_times(schedule)
    s_alarm = _survival_counts(tau_alarm, grid)
    s_flat, deltas, errs, cross = [], [], [], []
    for cap in caps:
        tau = pool.ruin_times(cap)
        s_flat.append(_survival_counts(tau, grid))
        d, e = delta_from_ruin_times(tau_alarm, tau, grid)
        deltas.append(d)
        errs.append(e)
        cross.append(crossover(grid, d))
    return ComparisonReport(schedule, rates, caps, grid, s_alarm, np.array(s_flat), np.array(deltas),
                            np.array(errs), tuple(cross), pool.n_paths)


def delta_t(report: ComparisonReport, r: float, t: float) -> float:
    """``P(T_alarm <= t) - P(T_flat <= t)`` at a grid time; positive favours the no-alarm system."""
    return float(report.delta[report.rate_index(r), report.grid_index(t)])


def delta_stderr(report: ComparisonReport, r: float, t: float) -> float:
    return float(report.delta_stderr[report.rate_index(r), report.grid_index(t)])
