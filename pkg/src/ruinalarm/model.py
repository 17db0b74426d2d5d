"""Claim-severity laws, compound-Poisson risk models and capital schedules."""

from dataclasses import dataclass, field
import math
from typing import Sequence, Tuple

import numpy as np

LOG_TAIL_CUTOFF = 1e-12


class ClaimDistribution:
    """Base class for claim-severity laws.

    Subclasses are frozen dataclasses.  ``ppf`` maps U(0,1) variates to claim
    sizes and is the only sampling primitive the simulator needs.
    """

    support = "continuous"

    @property
    def is_integer(self) -> bool:
        return self.support == "integer"

    def mean(self) -> float:
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(ClaimDistribution):
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"exponential rate must be > 0, got {self.rate}")

    def mean(self):
        return 1.0 / self.rate

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, np.exp(-self.rate * np.maximum(x, 0.0)), 1.0)

    def ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def params(self):
        return {"kind": "exponential", "rho": self.rate}


@dataclass(frozen=True)
class Pareto(ClaimDistribution):
    """Shifted (Lomax) Pareto with density ``k s^k / (s + x)^(k+1)`` on x > 0."""

    scale: float
    shape: float

    def __post_init__(self):
        if not (self.scale > 0 and self.shape > 0):
            raise ValueError(f"pareto needs scale > 0 and shape > 0, got {self.scale}, {self.shape}")

    def mean(self):
        if self.shape <= 1:
            return math.inf
        return self.scale / (self.shape - 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        dens = self.shape * self.scale**self.shape / (self.scale + xp) ** (self.shape + 1.0)
        return np.where(x >= 0, dens, 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, (self.scale / (self.scale + np.maximum(x, 0.0))) ** self.shape, 1.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return self.scale * np.expm1(-np.log1p(-u) / self.shape)

    def params(self):
        return {"kind": "pareto", "rho": self.scale, "kappa": self.shape}


class _IntegerLaw(ClaimDistribution):
    support = "integer"

    def pmf(self, i):
        raise NotImplementedError

    def tail(self, i):
        """P(X >= i)."""
        i = int(i)
        if i <= 1:
            return 1.0
        return max(0.0, 1.0 - sum(self.pmf(j) for j in range(1, i)))


@dataclass(frozen=True)
class Logarithmic(_IntegerLaw):
    """Logarithmic series law, ``P(X=i) = -p^i / (i ln(1-p))`` on i >= 1."""

    p: float
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"logarithmic parameter must lie in (0, 1), got {self.p}")
        norm = -1.0 / math.log1p(-self.p)
        pmf = []
        cum = 0.0
        i = 1
        term = self.p
        while True:
            q = norm * term / i
            pmf.append(q)
            cum += q
            if 1.0 - cum < LOG_TAIL_CUTOFF or i > 1_000_000:
                break
            i += 1
            term *= self.p
        object.__setattr__(self, "_cdf", np.cumsum(pmf))

    def mean(self):
        return -self.p / ((1.0 - self.p) * math.log1p(-self.p))

    def pmf(self, i):
        i = int(i)
        if i < 1:
            return 0.0
        return -(self.p**i) / (i * math.log1p(-self.p))

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self._cdf, u, side="left")
        return np.minimum(idx, len(self._cdf) - 1).astype(float) + 1.0

    def params(self):
        return {"kind": "logarithmic", "kappa": self.p}


@dataclass(frozen=True)
class Degenerate(ClaimDistribution):
    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"point mass must be > 0, got {self.value}")

    @property
    def support(self):
        return "integer" if float(self.value).is_integer() else "continuous"

    def mean(self):
        return float(self.value)

    def pmf(self, i):
        return 1.0 if int(i) == self.value else 0.0

    def tail(self, i):
        return 1.0 if self.value >= i else 0.0

    def ppf(self, u):
        return np.full(np.shape(u), float(self.value))

    def params(self):
        return {"kind": "degenerate", "value": self.value}


@dataclass(frozen=True)
class TabulatedDiscrete(_IntegerLaw):
    """Finite pmf over 1..n; ``probs[i-1] = P(X = i)``."""

    probs: Tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs or min(probs) < 0:
            raise ValueError("tabulated pmf must be non-empty and non-negative")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError(f"tabulated pmf sums to {math.fsum(probs)!r}, not 1")

    def mean(self):
        return math.fsum(i * p for i, p in enumerate(self.probs, start=1))

    def pmf(self, i):
        i = int(i)
        return self.probs[i - 1] if 1 <= i <= len(self.probs) else 0.0

    def tail(self, i):
        i = int(i)
        if i <= 1:
            return 1.0
        return math.fsum(self.probs[i - 1:])

    def ppf(self, u):
        cdf = np.cumsum(self.probs)
        idx = np.searchsorted(cdf, np.asarray(u, dtype=float), side="left")
        return np.minimum(idx, len(cdf) - 1).astype(float) + 1.0

    def params(self):
        return {"kind": "tabulated", "pmf": list(self.probs)}


def mean_severity(dist: ClaimDistribution) -> float:
    """Mean claim size; ``math.inf`` for Pareto with shape <= 1."""
    return dist.mean()


@dataclass(frozen=True)
class RiskModel:
    """Compound-Poisson surplus ``V_t = u_t + c t - S_t``.

    Attributes:
        claims: severity law.
        lam: Poisson claim intensity.
        premium_rate: premium income per unit time.
        initial_capital: capital at time zero.
        ruin_level: ruin occurs when the surplus drops strictly below this.
    """

    claims: ClaimDistribution
    lam: float
    premium_rate: float
    initial_capital: float = 0.0
    ruin_level: float = 0.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"claim intensity must be > 0, got {self.lam}")
        if self.premium_rate < 0:
            raise ValueError(f"premium rate must be >= 0, got {self.premium_rate}")
        if self.initial_capital < 0:
            raise ValueError(f"initial capital must be >= 0, got {self.initial_capital}")

    def with_capital(self, u0: float) -> "RiskModel":
        return RiskModel(self.claims, self.lam, self.premium_rate, u0, self.ruin_level)


def loading_factor(model: RiskModel) -> float:
    """Premium loading ``c / (lam mu) - 1``; -1 when the mean claim is infinite."""
    mu = mean_severity(model.claims)
    if math.isinf(mu):
        return -1.0
    return model.premium_rate / (model.lam * mu) - 1.0


def satisfies_npc(model: RiskModel) -> bool:
    return loading_factor(model) > 0


@dataclass(frozen=True)
class CapitalSchedule:
    """Base capital plus injections ``injections[i]`` made at ``times[i]``.

    The level is left-continuous: an injection at ``A`` counts for every
    claim strictly after ``A``.
    """

    base_capital: float
    times: Tuple[float, ...] = ()
    injections: Tuple[float, ...] = ()

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        inj = tuple(float(u) for u in self.injections)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "injections", inj)
        if len(times) != len(inj):
            raise ValueError("times and injections must have equal length")
        if any(t < 0 for t in times):
            raise ValueError("alarm times must be >= 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("alarm times must be strictly increasing")
        if self.base_capital < 0 or any(u < 0 for u in inj):
            raise ValueError("capital amounts must be >= 0")

    @property
    def k(self) -> int:
        return len(self.times)

    @property
    def capitals(self) -> Tuple[float, ...]:
        """``(u_0, u_1, ..., u_k)``."""
        return (float(self.base_capital),) + self.injections

    @property
    def total(self) -> float:
        return math.fsum(self.capitals)

    @property
    def last_time(self) -> float:
        return self.times[-1] if self.times else 0.0

    def level(self, t):
        """Capital available for a claim at time ``t`` (vectorised)."""
        t = np.asarray(t, dtype=float)
        if not self.times:
            return np.full(t.shape, float(self.base_capital))
        steps = np.concatenate(([self.base_capital], np.cumsum(self.injections) + self.base_capital))
        idx = np.searchsorted(np.asarray(self.times), t, side="left")
        return steps[idx]

    def prefix(self, i: int) -> "CapitalSchedule":
        return CapitalSchedule(self.base_capital, self.times[:i], self.injections[:i])

    def with_event(self, time: float, amount: float) -> "CapitalSchedule":
        return CapitalSchedule(self.base_capital, self.times + (time,), self.injections + (amount,))


def _discount(rate: float, dt: float) -> float:
    if math.isinf(rate):
        return 0.0 if dt > 0 else 1.0
    return math.exp(-rate * dt)


def level_before(schedule: CapitalSchedule, j: int) -> float:
    """Capital held on ``(A_{j-1}, A_j]`` in every model; zero for ``j = 0``."""
    return math.fsum(schedule.capitals[:j])


def level_after(schedule: CapitalSchedule, i: int, rate: float) -> float:
    """Constant capital of the i-th interpolating model after ``A_i``."""
    u = schedule.capitals
    a = (0.0,) + schedule.times
    kept = math.fsum(u[: i + 1])
    future = math.fsum(u[j] * _discount(rate, a[j] - a[i]) for j in range(i + 1, len(u)))
    return kept + future


def capital_level(schedule: CapitalSchedule, i: int, t: float, rate: float) -> float:
    """Level ``l^i_t`` of the i-th model bridging no-alarm (i=0) and full alarm (i=k).

    Before ``A_i`` the model follows the alarm staircase; after ``A_i`` all
    remaining injections are paid at once, discounted back to ``A_i``.
    """
    k = schedule.k
    if not 0 <= i <= k:
        raise IndexError(f"model index {i} outside 0..{k}")
    if t <= 0:
        raise ValueError("levels are defined for t > 0")
    a = (0.0,) + schedule.times
    if t > a[i]:
        return level_after(schedule, i, rate)
    m = int(np.searchsorted(np.asarray(a), t, side="left")) - 1
    return math.fsum(schedule.capitals[: m + 1])
