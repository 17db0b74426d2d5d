"""Monte Carlo engine for ruin times of compound-Poisson surplus processes.

Paths are generated in fixed-size blocks from a counter-based generator, so
any path can be regenerated on its own and results do not depend on the
number of worker threads.  Ruin can only happen at claim instants (premiums
and injections never decrease the surplus), which lets every query work on
the list of claim events alone.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import math
from typing import Iterator, List, NamedTuple, Optional, Sequence, Union
import warnings

import numpy as np

from .model import CapitalSchedule, RiskModel
from .rng import uniform_pair

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096
CHUNK_DRAWS = 32
DEFAULT_HORIZON = 10.0
DEFAULT_DT = 0.01
DEFAULT_MIN_SURVIVORS = 10_000

Level = Union[float, CapitalSchedule]


class CensoringWarning(UserWarning):
    """A query reaches the simulation horizon; later ruins are unobserved."""


class ConditioningError(RuntimeError):
    """No simulated path survives the conditioning event."""


def time_grid(horizon: float = DEFAULT_HORIZON, dt: float = DEFAULT_DT) -> np.ndarray:
    """Grid ``0, dt, 2 dt, ...`` up to ``horizon``, rounded so multiples of dt are exact decimals."""
    n = int(round(horizon / dt))
    return np.round(np.arange(n + 1) * dt, 10)


class PathEvent(NamedTuple):
    time: float
    cumulative_outgo: float


@dataclass(frozen=True)
class RuinOutcome:
    """``time`` is the ruin instant, or None if the path survived through ``horizon``."""

    time: Optional[float]
    horizon: float

    @property
    def ruined(self) -> bool:
        return self.time is not None


def _simulate_block(model: RiskModel, horizon: float, master_seed: int, path_ids: np.ndarray,
                    stop_level: float = math.inf):
    """Generate claim events for ``path_ids``.

    Each path stops at the first claim after ``horizon`` (excluded) or at
    the first claim whose net outgo exceeds ``stop_level`` (included).

    Returns:
        ``(counts, times, outgo, runmax)`` with events stored path-major.
    """
    n = len(path_ids)
    lam, c = model.lam, model.premium_rate
    active = np.arange(n)
    t_carry = np.zeros(n)
    s_carry = np.zeros(n)
    m_carry = np.full(n, -np.inf)
    rows, cols, t_parts, r_parts, m_parts = [], [], [], [], []
    j0 = 0
    while active.size:
        draws = np.arange(j0, j0 + CHUNK_DRAWS, dtype=np.uint64)
        u_gap, u_sev = uniform_pair(master_seed, path_ids[active][:, None].astype(np.uint64), draws[None, :])
        gaps = -np.log(u_gap) / lam
        sev = model.claims.ppf(u_sev)
        # carry prepended so cumsum order is identical for any chunking
        t = np.cumsum(np.concatenate((t_carry[active, None], gaps), axis=1), axis=1)[:, 1:]
        s = np.cumsum(np.concatenate((s_carry[active, None], sev), axis=1), axis=1)[:, 1:]
        r = s - c * t
        runmax = np.maximum.accumulate(np.concatenate((m_carry[active, None], r), axis=1), axis=1)[:, 1:]
        within = t <= horizon
        crossed = (r > stop_level) & within
        after_cross = np.cumsum(crossed, axis=1) - crossed > 0
        valid = within & ~after_cross
        rr, cc = np.nonzero(valid)
        rows.append(active[rr])
        cols.append(cc + j0)
        t_parts.append(t[rr, cc])
        r_parts.append(r[rr, cc])
        m_parts.append(runmax[rr, cc])
        done = ~within[:, -1] | crossed.any(axis=1)
        keep = ~done
        t_carry[active[keep]] = t[keep, -1]
        s_carry[active[keep]] = s[keep, -1]
        m_carry[active[keep]] = runmax[keep, -1]
        active = active[keep]
        j0 += CHUNK_DRAWS
    rows = np.concatenate(rows)
    order = np.lexsort((np.concatenate(cols), rows))
    counts = np.bincount(rows, minlength=n)
    return (counts, np.concatenate(t_parts)[order], np.concatenate(r_parts)[order],
            np.concatenate(m_parts)[order])


def simulate_path(model: RiskModel, horizon: float, master_seed: int, path_index: int = 0):
    """Claim events of one path on ``(0, horizon]``.

    The path is the same one the pooled simulator produces for
    ``path_index`` under ``master_seed``.
    """
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    counts, t, r, _ = _simulate_block(model, horizon, master_seed, np.array([path_index], dtype=np.int64))
    return [PathEvent(float(a), float(b)) for a, b in zip(t, r)]


def ruin_time(path: Sequence[PathEvent], level: Level, ruin_level: float = 0.0,
              horizon: float = DEFAULT_HORIZON) -> RuinOutcome:
    """First claim instant at which net outgo exceeds ``level(t) - ruin_level``."""
    for ev in path:
        cap = float(level.level(ev.time)) if isinstance(level, CapitalSchedule) else float(level)
        if ev.cumulative_outgo > cap - ruin_level:
            return RuinOutcome(ev.time, horizon)
    return RuinOutcome(None, horizon)


def _level_values(level: Level, t: np.ndarray) -> np.ndarray:
    if isinstance(level, CapitalSchedule):
        return level.level(t)
    return np.full(t.shape, float(level))


def _level_max(level: Level) -> float:
    return level.total if isinstance(level, CapitalSchedule) else float(level)


@dataclass(frozen=True)
class PathPool:
    """Stored claim events of paths ``0 .. n_paths-1`` for one model and seed.

    Events after the first excursion of net outgo above ``stop_level`` are
    dropped: such a path is already ruined for every threshold up to it.
    """

    model: RiskModel
    horizon: float
    master_seed: int
    stop_level: float
    counts: np.ndarray
    times: np.ndarray
    outgo: np.ndarray
    runmax: np.ndarray

    @property
    def n_paths(self) -> int:
        return len(self.counts)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.counts)))

    @property
    def path_of_event(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_paths), self.counts)

    def _check_threshold(self, threshold: float):
        if threshold > self.stop_level + 1e-9:
            raise ValueError(f"threshold {threshold} exceeds the pool's stop level {self.stop_level}")

    def ruin_times(self, level: Level) -> np.ndarray:
        """Ruin time of every path against ``level``; ``inf`` if none before the horizon."""
        self._check_threshold(_level_max(level) - self.model.ruin_level)
        thr = _level_values(level, self.times) - self.model.ruin_level
        hit = np.flatnonzero(self.outgo > thr)
        out = np.full(self.n_paths, np.inf)
        if hit.size:
            paths = self.path_of_event[hit]
            first_paths, first_idx = np.unique(paths, return_index=True)
            out[first_paths] = self.times[hit[first_idx]]
        return out

    def outgo_at(self, a: float) -> np.ndarray:
        """Net outgo ``R_a`` per path; ``inf`` for paths truncated before ``a``."""
        a = float(a)
        base = -self.model.premium_rate * a
        out = np.full(self.n_paths, base)
        mask = self.times <= a
        idx = np.flatnonzero(mask)
        if idx.size:
            paths = self.path_of_event[idx]
            # last event at or before a for each path
            rev_paths, rev_first = np.unique(paths[::-1], return_index=True)
            last = idx[::-1][rev_first]
            out[rev_paths] = self.outgo[last] - self.model.premium_rate * (a - self.times[last])
        offsets = self.offsets
        has = self.counts > 0
        last_ev = offsets[1:] - 1
        truncated = np.zeros(self.n_paths, dtype=bool)
        truncated[has] = (self.outgo[last_ev[has]] > self.stop_level) & (self.times[last_ev[has]] <= a)
        out[truncated] = np.inf
        return out

    def records(self):
        """Events where the running maximum of net outgo strictly increases.

        Returns ``(times, previous_max, new_max)``; ``previous_max`` is -inf
        for the first claim of a path.
        """
        first = np.zeros(len(self.times), dtype=bool)
        first[self.offsets[:-1][self.counts > 0]] = True
        prev = np.empty_like(self.runmax)
        prev[1:] = self.runmax[:-1]
        prev[first] = -np.inf
        rec = first | (self.runmax > prev)
        return self.times[rec], prev[rec], self.runmax[rec]

    def extend(self, n_more: int, workers: int = 1) -> "PathPool":
        """Pool with ``n_more`` additional paths drawn from the same stream."""
        extra = simulate_pool(self.model, self.horizon, n_more, self.master_seed, self.stop_level,
                              workers=workers, start=self.n_paths)
        return _concat([self, extra])

    def with_stop_level(self, stop_level: float, workers: int = 1) -> "PathPool":
        """Same paths, regenerated with a higher truncation level if needed."""
        if stop_level <= self.stop_level:
            return self
        new = max(stop_level, 2 * self.stop_level if self.stop_level > 0 else stop_level)
        return simulate_pool(self.model, self.horizon, self.n_paths, self.master_seed, new, workers=workers)


def _concat(pools: Sequence[PathPool]) -> PathPool:
    p0 = pools[0]
    return PathPool(p0.model, p0.horizon, p0.master_seed, p0.stop_level,
                    np.concatenate([p.counts for p in pools]),
                    np.concatenate([p.times for p in pools]),
                    np.concatenate([p.outgo for p in pools]),
                    np.concatenate([p.runmax for p in pools]))


def iter_blocks(model: RiskModel, horizon: float, n_paths: int, master_seed: int,
                stop_level: float = math.inf, workers: int = 1, start: int = 0) -> Iterator[PathPool]:
    """Yield consecutive path blocks in index order.

    Block boundaries are fixed multiples of ``BLOCK_SIZE`` so the worker
    count never changes what any block contains.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    bounds = []
    lo = start
    end = start + n_paths
    while lo < end:
        hi = min(end, (lo // BLOCK_SIZE + 1) * BLOCK_SIZE)
        bounds.append((lo, hi))
        lo = hi

    def run(b):
        ids = np.arange(b[0], b[1], dtype=np.int64)
        counts, t, r, m = _simulate_block(model, horizon, master_seed, ids, stop_level)
        return PathPool(model, horizon, master_seed, stop_level, counts, t, r, m)

    if workers <= 1:
        for b in bounds:
            yield run(b)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        step = 2 * workers
        for i in range(0, len(bounds), step):
            yield from ex.map(run, bounds[i:i + step])


def simulate_pool(model: RiskModel, horizon: float, n_paths: int, master_seed: int,
                  stop_level: float = math.inf, workers: int = 1, start: int = 0) -> PathPool:
    """Simulate and keep the claim events of ``n_paths`` paths."""
    return _concat(list(iter_blocks(model, horizon, n_paths, master_seed, stop_level, workers, start)))


def _cdf_counts(ruin_times: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Number of ruin times ``<= grid[g]`` for each grid point."""
    idx = np.searchsorted(grid, ruin_times[np.isfinite(ruin_times)], side="left")
    idx = idx[idx < len(grid)]
    return np.cumsum(np.bincount(idx, minlength=len(grid)))


def _stderr(p: np.ndarray, n: int) -> np.ndarray:
    return np.sqrt(p * (1.0 - p) / n)


def _check_grid(grid: np.ndarray, horizon: float):
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly ascending")
    if grid[-1] > horizon + 1e-9:
        raise ValueError(f"time grid ends at {grid[-1]}, beyond the simulation horizon {horizon}")


@dataclass(frozen=True)
class RuinCDF:
    """Empirical ruin-time distribution ``psi(t)`` on a time grid."""

    time_grid: np.ndarray
    psi: np.ndarray
    stderr: np.ndarray
    n_paths: int

    @property
    def survival(self) -> np.ndarray:
        return 1.0 - self.psi

    def at(self, t) -> np.ndarray:
        return np.interp(t, self.time_grid, self.psi)

    @classmethod
    def from_ruin_times(cls, ruin_times: np.ndarray, grid: np.ndarray) -> "RuinCDF":
        n = len(ruin_times)
        psi = _cdf_counts(ruin_times, grid) / n
        return cls(grid, psi, _stderr(psi, n), n)


def estimate_ruin_cdf(model: RiskModel, level: Optional[Level] = None, horizon: float = DEFAULT_HORIZON,
                      n_paths: int = 100_000, master_seed: int = 0, grid: Optional[np.ndarray] = None,
                      workers: int = 1) -> RuinCDF:
    """Empirical ``psi(t) = P(T <= t)`` against a constant capital or a schedule.

    Paths are streamed block by block, so memory does not grow with
    ``n_paths``.
    """
    if level is None:
        level = model.initial_capital
    grid = time_grid(horizon) if grid is None else np.asarray(grid, dtype=float)
    _check_grid(grid, horizon)
    stop = _level_max(level) - model.ruin_level
    counts = np.zeros(len(grid), dtype=np.int64)
    for block in iter_blocks(model, horizon, n_paths, master_seed, stop, workers):
        counts += _cdf_counts(block.ruin_times(level), grid)
    psi = counts / n_paths
    return RuinCDF(grid, psi, _stderr(psi, n_paths), n_paths)


@dataclass(frozen=True)
class ConditionalRuinCDF:
    """Ruin-time distribution given survival of the injected process through ``start``.

    ``psi`` is indexed by ``time_grid``, which begins at ``start``.
    """

    time_grid: np.ndarray
    psi: np.ndarray
    stderr: np.ndarray
    start: float
    n_survivors: int
    n_total: int
    n_topup: int

    @property
    def p_condition(self) -> float:
        return self.n_survivors / self.n_total

    @property
    def survival(self) -> np.ndarray:
        return 1.0 - self.psi

    def at(self, t) -> np.ndarray:
        return np.interp(t, self.time_grid, self.psi)


def conditional_cdf(ruin_times: np.ndarray, start: float, grid: np.ndarray, n_topup: int = 0) -> ConditionalRuinCDF:
    """Condition per-path ruin times on survival past ``start``."""
    surv = ruin_times[ruin_times > start]
    if surv.size == 0:
        raise ConditioningError(f"no path survives through {start}")
    sub = grid[grid >= start - 1e-12]
    psi = _cdf_counts(surv, sub) / surv.size
    return ConditionalRuinCDF(sub, psi, _stderr(psi, surv.size), start, int(surv.size),
                              len(ruin_times), n_topup)


def topped_up_ruin_times(pool: PathPool, schedule: CapitalSchedule, min_survivors: int,
                         max_paths: Optional[int], workers: int = 1):
    """Ruin times against ``schedule``, extending ``pool`` until enough paths survive its last alarm.

    Returns ``(pool, ruin_times, n_added)``.
    """
    start = schedule.last_time
    added = 0
    tau = pool.ruin_times(schedule)
    cap = max_paths if max_paths is not None else 100 * pool.n_paths
    while (tau > start).sum() < min_survivors and pool.n_paths < cap:
        n_surv = int((tau > start).sum())
        rate = max(n_surv, 1) / pool.n_paths
        need = int(math.ceil((min_survivors - n_surv) / rate * 1.1))
        more = max(BLOCK_SIZE, min(need, cap - pool.n_paths))
        pool = pool.extend(more, workers)
        added += more
        tau = pool.ruin_times(schedule)
    if (tau > start).sum() < min_survivors:
        warnings.warn(f"only {(tau > start).sum()} paths survive through {start} "
                      f"after simulating {pool.n_paths}", RuntimeWarning, stacklevel=2)
    return pool, tau, added


def estimate_conditional_ruin_cdf(model: RiskModel, schedule: CapitalSchedule,
                                  horizon: float = DEFAULT_HORIZON, n_paths: int = 100_000,
                                  master_seed: int = 0, min_survivors: int = DEFAULT_MIN_SURVIVORS,
                                  max_paths: Optional[int] = None, grid: Optional[np.ndarray] = None,
                                  workers: int = 1) -> ConditionalRuinCDF:
    """Ruin-time law of the injected process given no ruin up to its last alarm.

    If fewer than ``min_survivors`` paths survive, further paths are
    simulated (plain rejection on the survival event) up to ``max_paths``.
    The survival fraction over all simulated paths estimates ``P(B_i)``.
    """
    if min_survivors < 1:
        raise ValueError("min_survivors must be >= 1")
    grid = time_grid(horizon) if grid is None else np.asarray(grid, dtype=float)
    _check_grid(grid, horizon)
    pool = simulate_pool(model, horizon, n_paths, master_seed, schedule.total - model.ruin_level, workers)
    pool, tau, added = topped_up_ruin_times(pool, schedule, min_survivors, max_paths, workers)
    return conditional_cdf(tau, schedule.last_time, grid, added)


@dataclass(frozen=True)
class PsiSurface:
    """Empirical finite-horizon ruin probabilities ``psi(u, t)`` on a capital x time grid.

    Rows follow ``capital_grid`` and columns ``time_grid``.
    """

    capital_grid: np.ndarray
    time_grid: np.ndarray
    psi: np.ndarray
    stderr: np.ndarray
    n_paths: int

    def __call__(self, capital, t):
        """Bilinear interpolation of psi.

        Negative capital means immediate ruin (psi = 1 for t > 0); capital
        above the grid uses the top row and warns.
        """
        capital = np.asarray(capital, dtype=float)
        t = np.asarray(t, dtype=float)
        if np.any(t > self.time_grid[-1] + 1e-9):
            raise ValueError(f"time {np.max(t)} beyond surface horizon {self.time_grid[-1]}")
        if np.any(capital > self.capital_grid[-1] + 1e-9):
            warnings.warn(f"capital {np.max(capital)} above surface range {self.capital_grid[-1]}; "
                          "using top row", CensoringWarning, stacklevel=2)
        cg, tg = self.capital_grid, self.time_grid
        ci = np.clip(np.searchsorted(cg, capital, side="right") - 1, 0, len(cg) - 2)
        ti = np.clip(np.searchsorted(tg, t, side="right") - 1, 0, len(tg) - 2)
        wc = np.clip((capital - cg[ci]) / (cg[ci + 1] - cg[ci]), 0.0, 1.0)
        wt = np.clip((t - tg[ti]) / (tg[ti + 1] - tg[ti]), 0.0, 1.0)
        p = self.psi
        val = ((1 - wc) * (1 - wt) * p[ci, ti] + wc * (1 - wt) * p[ci + 1, ti]
               + (1 - wc) * wt * p[ci, ti + 1] + wc * wt * p[ci + 1, ti + 1])
        val = np.where(capital < 0, 1.0, val)
        return np.where(t <= 0, 0.0, val)

    def survival(self, capital, t):
        return 1.0 - self(capital, t)

    def ultimate(self, capital):
        """Ruin probability at the last time column, the proxy for infinite horizon."""
        return self(capital, self.time_grid[-1])

    def to_csv(self, path, header_lines: Sequence[str] = ()):
        with open(path, "w", newline="\n") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            f.write("capital,time,psi,stderr,n_paths\n")
            for i, u in enumerate(self.capital_grid):
                for j, t in enumerate(self.time_grid):
                    f.write(f"{float(u)!r},{float(t)!r},{float(self.psi[i, j])!r},{float(self.stderr[i, j])!r},{self.n_paths}\n")

    @classmethod
    def from_csv(cls, path) -> "PsiSurface":
        rows = []
        with open(path) as f:
            for line in f:
                if line.startswith("#") or line.startswith("capital"):
                    continue
                rows.append(line.rstrip("\n").split(","))
        caps = sorted({float(r[0]) for r in rows})
        times = sorted({float(r[1]) for r in rows})
        psi = np.array([float(r[2]) for r in rows]).reshape(len(caps), len(times))
        err = np.array([float(r[3]) for r in rows]).reshape(len(caps), len(times))
        return cls(np.array(caps), np.array(times), psi, err, int(rows[0][4]))


def surface_counts(pool: PathPool, capital_grid: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Count paths ruined by ``grid[t]`` at capital ``capital_grid[u]``.

    Each record of the running maximum ruins the path, at the record's
    time, for every threshold between the previous maximum and the new one.
    Those rectangles are summed through a 2-D difference array.
    """
    thr = capital_grid - pool.model.ruin_level
    tau, prev, new = pool.records()
    g_lo = np.searchsorted(thr, prev, side="left")
    g_hi = np.searchsorted(thr, new, side="left")
    ti = np.searchsorted(grid, tau, side="left")
    ok = (ti < len(grid)) & (g_hi > g_lo)
    nc, nt = len(thr) + 1, len(grid)
    flat = np.bincount(g_lo[ok] * nt + ti[ok], minlength=nc * nt) - np.bincount(g_hi[ok] * nt + ti[ok], minlength=nc * nt)
    diff = flat.reshape(nc, nt)
    return np.cumsum(np.cumsum(diff, axis=0), axis=1)[:-1]


def estimate_psi_surface(model: RiskModel, capital_grid, grid=None, n_paths: int = 100_000,
                         master_seed: int = 0, horizon: Optional[float] = None, workers: int = 1) -> PsiSurface:
    """Empirical ``psi(u, t)`` for all capitals at once from a common set of paths.

    Because every capital sees the same paths, the surface is exactly
    monotone in both arguments.
    """
    capital_grid = np.asarray(capital_grid, dtype=float)
    if np.any(np.diff(capital_grid) <= 0):
        raise ValueError("capital grid must be strictly ascending")
    if grid is None:
        grid = time_grid(horizon or DEFAULT_HORIZON)
    grid = np.asarray(grid, dtype=float)
    horizon = float(grid[-1]) if horizon is None else horizon
    _check_grid(grid, horizon)
    stop = float(capital_grid[-1]) - model.ruin_level
    counts = np.zeros((len(capital_grid), len(grid)), dtype=np.int64)
    for block in iter_blocks(model, horizon, n_paths, master_seed, stop, workers):
        counts += surface_counts(block, capital_grid, grid)
    psi = counts / n_paths
    return PsiSurface(capital_grid, grid, psi, _stderr(psi, n_paths), n_paths)


def surface_from_pool(pool: PathPool, capital_grid, grid) -> PsiSurface:
    capital_grid = np.asarray(capital_grid, dtype=float)
    grid = np.asarray(grid, dtype=float)
    psi = surface_counts(pool, capital_grid, grid) / pool.n_paths
    return PsiSurface(capital_grid, grid, psi, _stderr(psi, pool.n_paths), pool.n_paths)
