"""Analytical bounds on the ruin-probability gap between alarm and no-alarm systems.

The gap ``Delta(t) = P(T_alarm <= t) - P(T_flat <= t)`` is bounded by
telescoping through intermediate models ``M^0 .. M^k``: model ``j``
follows the alarm staircase up to ``A_j`` and then holds every remaining
injection, discounted back to ``A_j``.  Every ``psi(v, s)`` is read off an
empirical ``PsiSurface``; extrema over the value ``x`` of the net outgo at
an alarm are grid scans.

Notation, for a schedule with capitals ``u_0 .. u_k``:

* ``own(j)``: capital held just before ``A_j``, ``u_0 + .. + u_{j-1}``.
* ``after(j)``: level of model ``j`` after ``A_j``,
  ``u_0 + .. + u_j + sum_{n>j} u_n exp(-r (A_n - A_j))``.
* ``P_j = P(B_j)``: probability of no ruin up to ``A_j`` under the staircase.

Each bound is reported with a ``kind``:

* ``bound``: a valid inequality given ``psi`` and ``P_j``.
* ``approx``: uses ``P_j ~ (1 - beta)^j`` or a small-``beta`` expansion.
* ``printed``: the published expression, kept for reference.  These forms
  replace ``P_{j+1}`` by ``(1 - beta) P_j`` inside the lower bounds, and weight
  ``gamma`` by ``(1 - beta) sum P_j`` in the upper bounds.  The ruin mass
  between consecutive alarms is exactly ``P_j - P_{j+1}``, which the
  unsuffixed entries use instead.
"""

from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Sequence, Tuple
import warnings

import numpy as np

from .alarm import AlarmParams, AlarmSchedule
from .model import CapitalSchedule, RiskModel, level_after, level_before, loading_factor
from .simulate import PathPool, PsiSurface

logger = logging.getLogger(__name__)

PB_MODES = ("empirical", "approx")
X_QUANTILE = 0.001
KINDS = ("bound", "approx", "printed")


@dataclass(frozen=True)
class BoundEntry:
    bound_id: str
    side: str
    value: float
    kind: str = "bound"

    @property
    def vacuous(self) -> bool:
        """True when the bound carries no information, ``|value| >= 1`` on its side."""
        if self.side == "upper":
            return not self.value < 1.0
        return not self.value > -1.0


@dataclass(frozen=True)
class BoundReport:
    """All bounds evaluated at one time ``t`` (``inf`` for ultimate ruin).

    ``interval_index`` is ``i`` with ``t`` in ``(A_{i-1}, A_i]``.
    ``diagnostics`` holds the per-term pieces the bounds are assembled from.
    """

    t: float
    interval_index: int
    lower: Tuple[BoundEntry, ...]
    upper: Tuple[BoundEntry, ...]
    delta_hat: float = math.nan
    delta_stderr: float = math.nan
    gamma_t: float = math.nan
    delta_A_i: float = math.nan
    pb_mode: str = "empirical"
    active_branch: str = ""
    diagnostics: Tuple[Tuple[str, float], ...] = ()

    def get(self, bound_id: str) -> BoundEntry:
        for e in self.lower + self.upper:
            if e.bound_id == bound_id:
                return e
        raise KeyError(bound_id)

    def tightest(self, side: str, kinds: Sequence[str] = ("bound",)) -> float:
        """Smallest upper or largest lower value among entries of the given kinds."""
        entries = self.upper if side == "upper" else self.lower
        vals = [e.value for e in entries if e.kind in kinds and math.isfinite(e.value)]
        if not vals:
            return math.inf if side == "upper" else -math.inf
        return min(vals) if side == "upper" else max(vals)

    def with_delta(self, delta_hat: float, delta_stderr: float) -> "BoundReport":
        return BoundReport(self.t, self.interval_index, self.lower, self.upper, delta_hat, delta_stderr,
                           self.gamma_t, self.delta_A_i, self.pb_mode, self.active_branch, self.diagnostics)

    def with_entries(self, lower: Sequence[BoundEntry], upper: Sequence[BoundEntry]) -> "BoundReport":
        return BoundReport(self.t, self.interval_index, self.lower + tuple(lower), self.upper + tuple(upper),
                           self.delta_hat, self.delta_stderr, self.gamma_t, self.delta_A_i, self.pb_mode,
                           self.active_branch, self.diagnostics)

    def rows(self):
        for e in self.lower + self.upper:
            yield (self.t, self.interval_index, e.bound_id, e.side, e.value, e.vacuous, self.delta_hat,
                   self.delta_stderr, self.gamma_t, self.delta_A_i, self.pb_mode)


def write_bounds_csv(path, reports: Sequence[BoundReport], header_lines: Sequence[str] = ()):
    """Write ``t, interval_index, bound_id, side, value, vacuous_flag, delta_hat, ...`` rows."""

    def num(v):
        return "nan" if math.isnan(v) else f"{v:.4f}"

    with open(path, "w", newline="\n") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        f.write("t,interval_index,bound_id,side,value,vacuous_flag,delta_hat,delta_stderr,gamma_t,delta_A_i,pb_mode\n")
        for rep in reports:
            for t, i, bid, side, v, vac, dh, de, g, da, mode in rep.rows():
                t_txt = "inf" if math.isinf(t) else f"{t:.2f}"
                f.write(f"{t_txt},{i},{bid},{side},{num(v)},{int(vac)},{num(dh)},{num(de)},{num(g)},{num(da)},{mode}\n")


def prob_Bj(schedule: AlarmSchedule, j: int, mode: str = "empirical") -> float:
    """``P(B_j)``: empirical survival to ``A_j``, or ``(1 - beta)^j`` in approx mode."""
    if mode not in PB_MODES:
        raise ValueError(f"pb_mode must be one of {PB_MODES}")
    if not 0 <= j <= schedule.k:
        raise IndexError(f"j={j} outside 0..{schedule.k}")
    if j == 0:
        return 1.0
    if mode == "approx":
        return (1.0 - schedule.beta) ** j
    return schedule.p_b[j - 1]


def interval_index(schedule: CapitalSchedule, t: float) -> int:
    """``i`` with ``t`` in ``(A_{i-1}, A_i]``, where ``A_0 = 0`` and ``A_{k+1} = inf``."""
    return int(np.searchsorted(np.asarray(schedule.times), t, side="left")) + 1


def delta_A(schedule: CapitalSchedule, i: int) -> float:
    """Longest gap ``max_{0 <= j <= i-2} (A_{j+1} - A_j)``; nan for ``i < 2``."""
    a = (0.0,) + schedule.times
    gaps = [a[j + 1] - a[j] for j in range(0, min(i - 1, schedule.k))]
    return max(gaps) if gaps else math.nan


def corollary1_upper(i: int, alpha: float, beta: float, gamma: float, last_max: float) -> float:
    """``(i-1)(alpha + min{0, 1 - gamma + beta(1 + gamma - alpha)}) + (1 - beta(i-1)) last_max``.

    Small-``beta`` form of the gamma upper bound; non-increasing in ``gamma``.
    """
    return (i - 1) * (alpha + min(0.0, 1 - gamma + beta * (1 + gamma - alpha))) + (1 - beta * (i - 1)) * last_max


def discounted_total(schedule: CapitalSchedule, r: float) -> float:
    """``u_0 + sum_j u_j exp(-r A_j)``; ``r = inf`` keeps ``u_0`` only."""
    return schedule.base_capital + sum(u * (math.exp(-r * a) if math.isfinite(r) else 0.0)
                                       for a, u in zip(schedule.times, schedule.injections))


def _psi(surface: PsiSurface, v, s):
    """``psi(v, s)`` with ``psi = 1`` for negative capital and 0 for ``s <= 0``.

    ``s = inf`` reads the last time column.
    """
    v = np.asarray(v, dtype=float)
    s = np.minimum(np.asarray(s, dtype=float), surface.time_grid[-1])
    s = np.broadcast_to(s, v.shape)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        val = surface(np.maximum(v, 0.0), np.maximum(s, 0.0))
    val = np.where(v < 0, 1.0, val)
    return np.where(s <= 0, 0.0, val)


def _psi1(surface, v, s) -> float:
    return float(_psi(surface, v, s))


def x_grid(schedule: CapitalSchedule, j: int, surface: PsiSurface, model: RiskModel,
           pool: Optional[PathPool] = None) -> np.ndarray:
    """Values of ``R_{A_j}`` scanned by the extrema, up to ``own(j)``.

    The grid starts at the 0.1% quantile of ``R_{A_j}`` over ``pool`` (or
    at ``-c A_j``, the value with no claims) and steps by the surface's
    capital step.  At ``A_0 = 0`` the only value is 0.
    """
    if j == 0:
        return np.array([0.0])
    a_j = schedule.times[j - 1]
    top = level_before(schedule, j)
    if pool is not None:
        r = pool.outgo_at(a_j)
        lo = float(np.quantile(r[np.isfinite(r)], X_QUANTILE))
    else:
        lo = -model.premium_rate * a_j
    if lo >= top:
        return np.array([top])
    step = float(np.min(np.diff(surface.capital_grid)))
    return np.linspace(lo, top, int(math.ceil((top - lo) / step)) + 1)


class _Setup:
    """Levels, x grids and ``P_j`` for one schedule, rate and time."""

    def __init__(self, surface: PsiSurface, alarms: AlarmSchedule, r: float, t: float, model: RiskModel,
                 pool: Optional[PathPool], pb_mode: str):
        self.s = surface
        self.sched = alarms.schedule
        self.k = self.sched.k
        self.r = r
        self.t = t
        self.model = model
        self.pool = pool
        self.a = (0.0,) + self.sched.times + (math.inf,)
        self.u = self.sched.capitals
        self.i = interval_index(self.sched, t)
        self.pb = [prob_Bj(alarms, j, pb_mode) for j in range(min(self.i, self.k) + 1)]
        self._x = {}
        if math.isfinite(t) and t > surface.time_grid[-1] + 1e-9:
            raise ValueError(f"bounds need psi up to time {t:.4g}, surface ends at {surface.time_grid[-1]:.4g}")
        need_c = self.sched.total + model.premium_rate * self.sched.last_time
        if need_c > surface.capital_grid[-1] + 1e-9:
            warnings.warn(f"bounds need psi up to capital {need_c:.4g}, surface ends at "
                          f"{surface.capital_grid[-1]:.4g}; top row used", RuntimeWarning, stacklevel=3)

    def own(self, j):
        return level_before(self.sched, j)

    def after(self, j):
        return level_after(self.sched, min(j, self.k), self.r)

    def gap(self, j):
        return self.a[j + 1] - self.a[j]

    def since(self, j):
        """``t - A_j``."""
        return self.t - self.a[j]

    def xs(self, j):
        if j not in self._x:
            self._x[j] = x_grid(self.sched, j, self.s, self.model, self.pool)
        return self._x[j]


def _gamma(st: _Setup, js) -> float:
    if not len(js):
        return math.nan
    ratios = []
    for j in js:
        x = st.xs(j)
        num = _psi(st.s, st.after(j + 1) - x, st.gap(j)) + _psi(st.s, st.after(j) - x, st.since(j))
        den = _psi(st.s, st.own(j + 1) - x, st.gap(j))
        ratios.append(num[den > 0] / den[den > 0])
    vals = np.concatenate(ratios)
    if vals.size == 0:
        logger.warning("gamma: every denominator is zero, reporting +inf")
        return math.inf
    return float(np.min(vals))


def gamma_t(surface: PsiSurface, alarms: AlarmSchedule, t: float, r: float, model: RiskModel,
            pool: Optional[PathPool] = None) -> float:
    """Smallest ratio ``[psi(after(j+1) - x, gap_j) + psi(after(j) - x, t - A_j)] / psi(own(j+1) - x, gap_j)``.

    Minimum over ``j <= i - 2`` and the x grid.  Zero denominators are
    skipped; nan when ``t <= A_1`` (no ``j``), ``inf`` when every
    denominator vanishes.
    """
    st = _Setup(surface, alarms, r, t, model, pool, "empirical")
    return _gamma(st, range(st.i - 1))


def delta_bounds_prealarm(surface: PsiSurface, schedule: CapitalSchedule, r: float, t: float,
                          beta: float) -> Tuple[float, float, float]:
    """``(0, psi(u_0, A_1) - psi(u_0 + sum e^{-r A_j} u_j, t), beta)`` for ``t <= A_1``."""
    if schedule.k and t > schedule.times[0] + 1e-12:
        raise ValueError("pre-alarm bounds need t <= A_1")
    a1 = schedule.times[0] if schedule.k else t
    diff = _psi1(surface, schedule.base_capital, a1) - _psi1(surface, discounted_total(schedule, r), t)
    return 0.0, diff, beta


def _core(st: _Setup, params: AlarmParams, prefix: str):
    """Bounds shared by finite and ultimate horizons; returns (lower, upper, diagnostics, gamma, active)."""
    s, i, k, pb = st.s, st.i, st.k, st.pb
    al, be, d = params.alpha, params.beta, params.d
    js = range(i - 1)
    S = math.fsum(pb[: i - 1])
    S_approx = (1 - (1 - be) ** (i - 1)) / be
    has_last = i <= k
    if has_last:
        x = st.xs(i - 1)
        last = _psi(s, st.own(i) - x, st.since(i - 1)) - _psi(s, st.after(i - 1) - x, st.since(i - 1))
    else:
        last = np.zeros(1)
    last_max, last_min = float(np.max(last)), float(np.min(last))
    pb_last = pb[i - 1] if has_last else 0.0
    diag = [("last_term_max", last_max), ("last_term_min", last_min)]
    upper: List[BoundEntry] = []
    lower: List[BoundEntry] = []
    if i == 1:
        upper.append(BoundEntry(f"{prefix}_upper", "upper", last_max))
        lower.append(BoundEntry(f"{prefix}_lower", "lower", last_min))
        return lower, upper, diag, math.nan, ""

    p1_min, p2_max, lv_m = [], [], []
    for j in js:
        x = st.xs(j)
        p1 = _psi(s, st.after(j) - x, st.since(j)) - _psi(s, st.after(j + 1) - x, st.since(j))
        own_d = _psi(s, st.own(j + 1) - x, st.gap(j) + d)
        p2 = own_d - _psi(s, st.after(j + 1) - x, st.gap(j))
        p1_min.append(float(np.min(p1)))
        p2_max.append(float(np.max(p2)))
        lv_m.append(float(np.max(own_d - _psi(s, st.after(j + 1) - x, st.since(j)))))
    gamma = _gamma(st, js)
    g = gamma if math.isfinite(gamma) else 0.0
    mass = math.fsum(pb[j] - pb[j + 1] for j in js)

    head = pb_last * last_max - (1 - al) * (1 - be) * S
    maxmin = math.fsum((p2_max[j] - p1_min[j]) * pb[j] for j in js)
    plug_sum = math.fsum((_psi1(s, st.after(j + 1) - st.own(j), st.since(j))
                          + _psi1(s, st.own(j + 1) - st.own(j), st.gap(j) + d)) * pb[j] for j in js)
    gamma_branch = -g * mass + plug_sum
    gamma_branch_printed = -(1 - be) * g * S + plug_sum
    active = "gamma" if gamma_branch < maxmin else "maxmin"
    diag += [("maxmin_branch", maxmin), ("gamma_branch", gamma_branch),
             ("gamma_branch_printed", gamma_branch_printed), ("ruin_mass", mass), ("plug_sum", plug_sum)]
    diag += [(f"p1_min_{j}", p1_min[j]) for j in js] + [(f"p2_max_{j}", p2_max[j]) for j in js]

    upper += [
        BoundEntry(f"{prefix}_upper", "upper", head + min(gamma_branch, maxmin)),
        BoundEntry(f"{prefix}_upper_printed", "upper", head + min(gamma_branch_printed, maxmin), "printed"),
        BoundEntry("upper_maxmin", "upper", head + maxmin),
        BoundEntry("upper_gamma", "upper", head + gamma_branch),
        BoundEntry("upper_gamma_printed", "upper", head + gamma_branch_printed, "printed"),
    ]
    uni = -(1 - al) * (1 - be) - min(p1_min) + max(p2_max)
    last_approx = (1 - be) ** (i - 1) * last_max if has_last else 0.0
    upper += [
        BoundEntry("upper_uniform", "upper", uni * S + pb_last * last_max),
        BoundEntry("upper_uniform_approx", "upper", uni * S_approx + last_approx, "approx"),
        BoundEntry("upper_rough", "upper", (be + al * (1 - be)) * S_approx + last_approx, "approx"),
        BoundEntry("upper_gamma_rough", "upper", pb_last * last_max + (2 - (1 - al) * (1 - be)) * S - g * mass),
        BoundEntry("upper_gamma_rough_printed", "upper", pb_last * last_max + (2 - (1 - al + g) * (1 - be)) * S,
                   "printed"),
        BoundEntry("upper_gamma_approx_printed", "upper",
                   last_approx + (1 + al - g + be * (1 - al + g)) * S_approx, "printed"),
    ]
    if has_last and be * (i - 1) < 1:
        upper += [
            BoundEntry("upper_beta0", "upper", al * (i - 1) + (1 - (i - 1) * be) * last_max, "approx"),
            BoundEntry("cor1_upper_printed", "upper", corollary1_upper(i, al, be, g, last_max), "printed"),
        ]

    def pbar(v, tt):
        return 1.0 - _psi1(s, v, tt)

    def lower_sum(a1, a2, m, p_next):
        return math.fsum(-al * p_next[j]
                         + pbar(0.0, st.since(j + 1)) * (pb[j] * pbar(a1[j], st.gap(j)) - p_next[j])
                         + pb[j] * pbar(a2[j], st.since(j)) - pb[j] * m[j] for j in js)

    nxt = [pb[j + 1] for j in js]
    nxt_printed = [(1 - be) * pb[j] for j in js]
    lv_a1 = [st.after(j + 1) - st.own(j) for j in js]
    lv_a2 = [st.after(j) - st.own(j) for j in js]
    pr_a1 = [0.0] * len(js)
    pr_a2 = [st.u[j] for j in js]
    pr_m = [_psi1(s, st.u[j], st.gap(j) + d) for j in js]
    tail = pb_last * last_min
    lower += [
        BoundEntry("lower_levels", "lower", lower_sum(lv_a1, lv_a2, lv_m, nxt) + tail),
        BoundEntry("lower_levels_printed", "lower", lower_sum(lv_a1, lv_a2, lv_m, nxt_printed) + tail, "printed"),
        BoundEntry(f"{prefix}_lower", "lower", lower_sum(pr_a1, pr_a2, pr_m, nxt) + tail),
        BoundEntry(f"{prefix}_lower_printed", "lower", lower_sum(pr_a1, pr_a2, pr_m, nxt_printed) + tail, "printed"),
    ]
    dA = delta_A(st.sched, i)
    pbar_t, pbar_last = pbar(0.0, st.t), pbar(0.0, st.since(i - 1))
    psi_dA, psi_dAd = _psi1(s, 0.0, dA), _psi1(s, 0.0, dA + d)
    brace = -al + be * (al + pbar_t) - psi_dA * pbar_last + pbar_t - psi_dAd
    excess = math.fsum(nxt[j] - nxt_printed[j] for j in js)
    lower += [
        BoundEntry("lower_deltaA", "lower", brace * S - (al + pbar_last) * excess + tail),
        BoundEntry("lower_deltaA_printed", "lower", brace * S + tail, "printed"),
        BoundEntry("lower_deltaA_approx", "lower",
                   brace * S_approx + ((1 - be) ** (i - 1) * last_min if has_last else 0.0), "approx"),
    ]
    if has_last and be * (i - 1) < 1:
        cor_l = (i - 1) * (-al + pbar_t - psi_dA * pbar_last - psi_dAd) + last_min
        lower.append(BoundEntry("cor1_lower", "lower", cor_l, "approx"))
    return lower, upper, diag, gamma, active


def finite_time_bounds(surface: PsiSurface, alarms: AlarmSchedule, params: AlarmParams, r: float, t: float,
                       model: RiskModel, pb_mode: str = "empirical", pool: Optional[PathPool] = None,
                       delta_hat: float = math.nan, delta_stderr: float = math.nan) -> BoundReport:
    """Every lower and upper bound on ``Delta(t)`` at one finite ``t > 0``.

    Args:
        surface: ``psi`` on a grid covering capitals up to about
            ``total capital + c A_k`` and times up to ``t + d``.
        alarms: schedule with ``P(B_j)``.
        params: alarm parameters (``alpha``, ``beta``, ``d``).
        r: discount rate of the no-alarm system.
        t: evaluation time.
        model: risk model, for the fallback x grid.
        pb_mode: ``empirical`` or ``approx``.
        pool: paths used for the x grid quantiles.
        delta_hat: Monte Carlo gap stored alongside the bounds.
        delta_stderr: its standard error.

    When ``t > A_k`` the report also carries the direct sandwich.
    """
    if not (t > 0 and math.isfinite(t)):
        raise ValueError("t must be finite and > 0")
    st = _Setup(surface, alarms, r, t, model, pool, pb_mode)
    lower, upper, diag, gamma, active = _core(st, params, "prop1")
    if st.i == 1:
        _, diff, beta_c = delta_bounds_prealarm(surface, st.sched, r, t, params.beta)
        upper += [BoundEntry("prealarm_psi", "upper", diff), BoundEntry("prealarm_beta", "upper", beta_c)]
        lower.append(BoundEntry("prealarm_zero", "lower", 0.0))
    if st.k and t > st.sched.last_time:
        lo, up = direct_entries(direct_bounds(surface, alarms, r, t, pb_mode))
        lower += lo
        upper += up
    return BoundReport(t, st.i, tuple(lower), tuple(upper), delta_hat, delta_stderr, gamma,
                       delta_A(st.sched, st.i), pb_mode, active, tuple(diag))


def delta_upper_bound(surface, alarms, params, r, t, model, pb_mode="empirical", pool=None) -> Tuple[BoundEntry, ...]:
    return finite_time_bounds(surface, alarms, params, r, t, model, pb_mode, pool).upper


def delta_lower_bound(surface, alarms, params, r, t, model, pb_mode="empirical", pool=None) -> Tuple[BoundEntry, ...]:
    return finite_time_bounds(surface, alarms, params, r, t, model, pb_mode, pool).lower


def ultimate_delta_bounds(surface: Optional[PsiSurface], alarms: AlarmSchedule, params: AlarmParams, r: float,
                          model: RiskModel, pb_mode: str = "empirical", pool: Optional[PathPool] = None,
                          delta_hat: float = math.nan, delta_stderr: float = math.nan) -> BoundReport:
    """Bounds on the gap in ultimate ruin probability.

    Without the net profit condition every capital level is eventually
    ruined, so the gap is exactly 0 and no surface is needed.  Otherwise
    ultimate probabilities are read from the surface's last time column,
    which truncates the horizon.
    """
    sched = alarms.schedule
    k = sched.k
    if loading_factor(model) <= 0:
        return BoundReport(math.inf, k + 1, (BoundEntry("npc_violated", "lower", 0.0),),
                           (BoundEntry("npc_violated", "upper", 0.0),), 0.0, 0.0, math.nan,
                           delta_A(sched, k + 1), pb_mode, "npc_violated")
    if surface is None:
        raise ValueError("a surface is required when the net profit condition holds")
    st = _Setup(surface, alarms, r, math.inf, model, pool, pb_mode)
    lower, upper, diag, gamma, active = _core(st, params, "prop2")
    al, be, d = params.alpha, params.beta, params.d
    dA = delta_A(sched, k + 1)
    if k:
        g = gamma if math.isfinite(gamma) else 0.0
        pbar_ult = 1.0 - _psi1(surface, 0.0, math.inf)
        psi_dA, psi_dAd = _psi1(surface, 0.0, dA), _psi1(surface, 0.0, dA + d)
        if k * be < 1:
            upper.append(BoundEntry("cor2_upper_beta0_printed", "upper",
                                    k * (al + min(0.0, 1 - g + (1 - al + g) * be)), "printed"))
            lower.append(BoundEntry("cor2_lower_beta0", "lower",
                                    k * (-al + pbar_ult * (1 - psi_dA) - psi_dAd), "approx"))
        p1_min = min(v for n, v in diag if n.startswith("p1_min_"))
        surv_gap = max(float(np.max(_psi(surface, st.own(j + 1) - st.xs(j), st.gap(j))
                                    - _psi(surface, st.after(j + 1) - st.xs(j), st.gap(j)))) for j in range(k))
        upper.append(BoundEntry("cor2_upper_kinf", "upper", (surv_gap - p1_min - (1 - al) * (1 - be)) / be,
                                "approx"))
        lower.append(BoundEntry("cor2_lower_kinf", "lower",
                                al + pbar_ult - (al - pbar_ult * (1 - psi_dA) + psi_dAd) / be, "approx"))
    return BoundReport(math.inf, k + 1, tuple(lower), tuple(upper), delta_hat, delta_stderr, gamma, dA, pb_mode,
                       active, tuple(diag))


@dataclass(frozen=True)
class DirectBounds:
    """Sandwich on ``Delta(t)`` for ``t > A_k``.

    ``lower``/``upper`` are the published form with ``P(B_k)^2``;
    ``lower_corrected``/``upper_corrected`` use ``P(B_k)``, which is what
    the alarm system's survival ``[P(B_k) psibar(0, t - A_k), P(B_k)]``
    supports.
    """

    lower: float
    upper: float
    lower_corrected: float
    upper_corrected: float


def direct_bounds(surface: PsiSurface, alarms: AlarmSchedule, r: float, t: float,
                  pb_mode: str = "empirical") -> DirectBounds:
    sched = alarms.schedule
    if t <= sched.last_time:
        raise ValueError("direct bounds need t > A_k")
    p = prob_Bj(alarms, sched.k, pb_mode)
    flat = 1.0 - _psi1(surface, discounted_total(sched, r), t)
    tail = 1.0 - _psi1(surface, 0.0, t - sched.last_time)
    return DirectBounds(flat - p * p, flat - p * p * tail, flat - p, flat - p * tail)


def direct_entries(db: DirectBounds) -> Tuple[Tuple[BoundEntry, ...], Tuple[BoundEntry, ...]]:
    """``(lower, upper)`` report entries for a ``DirectBounds``."""
    return ((BoundEntry("direct_lower", "lower", db.lower_corrected),
             BoundEntry("direct_lower_printed", "lower", db.lower, "printed")),
            (BoundEntry("direct_upper", "upper", db.upper_corrected),
             BoundEntry("direct_upper_printed", "upper", db.upper, "printed")))
