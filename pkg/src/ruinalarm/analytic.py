"""Closed-form and series ruin probabilities used as oracles for the simulator.

Covers exponential claims (ultimate and finite horizon) and the finite-time
survival series built on Appell polynomials, for continuous and for
integer-valued claims.  All functions assume the linear premium ``c t``, so
the first time the capital line reaches level ``y`` is
``nu(y) = max(0, (y - u) / c)``.
"""

import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .model import ClaimDistribution, RiskModel
from .quadrature import QuadratureSpec, QuadResult, adaptive_simpson

DEFAULT_MAX_TERMS = 6
DEFAULT_N_CAP = 40


class BoundedValue(NamedTuple):
    """A probability together with an absolute error budget."""

    value: float
    error: float


def psi_ultimate_exponential(rho: float, theta: float, u: float) -> float:
    """Ultimate ruin probability for exponential(rho) claims under loading ``theta > 0``."""
    if not rho > 0:
        raise ValueError("rho must be > 0")
    if not theta > 0:
        raise ValueError("the closed form needs the net profit condition theta > 0")
    if u < 0:
        raise ValueError("u must be >= 0")
    return math.exp(-rho * theta * u / (1.0 + theta)) / (1.0 + theta)


def _finite_exp_integrand(rho, theta, u, tau):
    sq = math.sqrt(1.0 + theta)
    shift = rho * (u + (2.0 + theta) / (1.0 + theta) * tau)
    amp = rho * (u + 2.0 * tau) / sq
    ru = rho * u / sq
    c2 = (2.0 + theta) / (1.0 + theta)

    def integrand(x):
        f = math.exp(amp * math.cos(x) - shift) / (1.0 + theta)
        arg = ru * math.sin(x)
        g = math.cos(arg) - math.cos(arg + 2.0 * x)
        h = c2 - 2.0 * math.cos(x) / sq
        return f * g / h

    return integrand


def psi_finite_exponential(rho: float, theta: float, u: float, t: float,
                           quad: QuadratureSpec = QuadratureSpec(), premium_rate: float = 1.0,
                           full_output: bool = False):
    """Finite-horizon ruin probability ``psi(u, t)`` for exponential claims.

    The closed form is written for unit premium rate, with claim intensity
    ``rho / (1 + theta)``.  A model with premium rate ``c`` and the same
    loading is the unit-rate model run on the clock ``c t``, so ``t`` is
    rescaled by ``premium_rate`` before evaluation.

    Args:
        rho: exponential claim rate.
        theta: loading factor, > 0.
        u: initial capital.
        t: horizon.
        quad: quadrature policy.
        premium_rate: premium rate ``c`` of the model being described.
        full_output: return ``BoundedValue(value, error)`` instead of a float.

    Raises:
        QuadratureError: the integral did not reach ``quad.abs_tol``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if not premium_rate > 0:
        raise ValueError("premium_rate must be > 0")
    ult = psi_ultimate_exponential(rho, theta, u)
    if t == 0:
        return BoundedValue(0.0, 0.0) if full_output else 0.0
    tau = premium_rate * t
    res = adaptive_simpson(_finite_exp_integrand(rho, theta, u, tau), 0.0, math.pi, quad)
    value = ult - res.value / math.pi
    err = res.error / math.pi
    if -err - quad.abs_tol <= value < 0.0:
        value = 0.0
    elif 1.0 < value <= 1.0 + err + quad.abs_tol:
        value = 1.0
    return BoundedValue(value, err) if full_output else value


def appell_sequence(roots: Sequence[float]) -> List[Polynomial]:
    """Appell polynomials ``A_0 = 1``, ``A_k' = A_{k-1}``, ``A_k(roots[k-1]) = 0``.

    Coefficients are in the monomial basis, ascending degree.
    """
    seq = [Polynomial([1.0])]
    for kappa in roots:
        seq.append(seq[-1].integ(lbnd=float(kappa)))
    return seq


def b_coefficients(z: Sequence[float]) -> List[float]:
    """All values ``b_0 .. b_j`` of the recursion for ``z = (z_1, .., z_j)``.

    ``b_j = sum_{i<j} (-1)^(j+i+1) z_j^(j-i) / (j-i)! b_i`` with ``b_0 = 1``.
    """
    b = [1.0]
    for j in range(1, len(z) + 1):
        zj = float(z[j - 1])
        b.append(math.fsum((-1) ** (j + i + 1) * zj ** (j - i) / math.factorial(j - i) * b[i]
                           for i in range(j)))
    return b


def b_coefficient(z: Sequence[float]) -> float:
    """``b_j(z_1, .., z_j)`` for ``j = len(z)``."""
    return b_coefficients(z)[-1]


def appell_from_b(b: Sequence[float], t):
    """``A_k(t) = sum_j (-1)^j b_j t^(k-j) / (k-j)!`` with ``k = len(b) - 1``."""
    k = len(b) - 1
    t = np.asarray(t, dtype=float)
    return sum((-1) ** j * b[j] * t ** (k - j) / math.factorial(k - j) for j in range(k + 1))


def poisson_tail(mean: float, k: int) -> float:
    """``P(N > k)`` for ``N ~ Poisson(mean)``."""
    if mean == 0:
        return 0.0
    from scipy.stats import poisson

    return float(poisson.sf(k, mean))


def _nu(y, u, c):
    if c == 0:
        return np.where(y <= u, 0.0, np.inf)
    return np.maximum(0.0, (y - u) / c)


def _segments(lo, hi, u):
    if lo < u < hi:
        return [(lo, u), (u, hi)]
    return [(lo, hi)]


def survival_finite_continuous_ik(model: RiskModel, u: float, t: float, max_terms: Optional[int] = None,
                                  n_nodes: int = 8, term_cap: int = DEFAULT_MAX_TERMS) -> BoundedValue:
    """Finite-time survival for continuous claims via the Appell-polynomial series.

    The ``k``-th term integrates ``A_k(t; nu(y_1), .., nu(y_k))`` against
    the density of the claim partial sums over the simplex
    ``0 <= y_1 <= .. <= y_k <= u + c t``, by nested Gauss-Legendre rules
    split where ``nu`` has its kink.  Cost grows as ``(2 n_nodes)^k``.

    Args:
        model: risk model with a claim law exposing ``pdf``.
        u: initial capital.
        t: horizon.
        max_terms: series truncation ``K``; by default the smallest ``K``
            whose Poisson tail is at most 1e-6.
        n_nodes: Gauss-Legendre nodes per segment.
        term_cap: largest ``K`` accepted.

    Returns:
        Survival probability and the truncation bound ``P(N_t > K)``.
    """
    claims = model.claims
    if not hasattr(claims, "pdf") or claims.is_integer:
        raise ValueError("continuous series needs a claim density")
    lam, c = model.lam, model.premium_rate
    if lam * t == 0:
        return BoundedValue(1.0, 0.0)
    if max_terms is None:
        max_terms = 1
        while poisson_tail(lam * t, max_terms) > 1e-6:
            max_terms += 1
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    if max_terms > term_cap:
        raise ValueError(f"series truncation K={max_terms} exceeds the cap {term_cap}; raise term_cap to allow it")
    top = u + c * t
    xg, wg = np.polynomial.legendre.leggauss(n_nodes)
    total = [1.0]
    # level state: positions y, weights w (density times quadrature weight), b-values per point
    y = np.zeros(1)
    w = np.ones(1)
    b = np.ones((1, 1))
    for k in range(1, max_terms + 1):
        ys, ws, bs = [], [], []
        for seg_lo_is_u in (False, True):
            lo = np.maximum(y, u) if seg_lo_is_u else y
            hi = np.full_like(y, top) if seg_lo_is_u else np.minimum(np.full_like(y, u), top)
            if seg_lo_is_u:
                lo = np.minimum(lo, top)
            half = 0.5 * (hi - lo)
            keep = half > 0
            if not keep.any():
                continue
            mid = 0.5 * (hi + lo)
            yn = (mid[keep, None] + half[keep, None] * xg[None, :]).ravel()
            parent = np.repeat(np.flatnonzero(keep), n_nodes)
            dens = claims.pdf(yn - y[parent])
            wn = w[parent] * np.repeat(half[keep], n_nodes) * np.tile(wg, keep.sum()) * dens
            z = _nu(yn, u, c)
            bp = b[parent]
            bk = np.zeros(len(yn))
            for i in range(k):
                bk += (-1) ** (k + i + 1) * z ** (k - i) / math.factorial(k - i) * bp[:, i]
            ys.append(yn)
            ws.append(wn)
            bs.append(np.concatenate((bp, bk[:, None]), axis=1))
        if not ys:
            break
        y, w, b = np.concatenate(ys), np.concatenate(ws), np.concatenate(bs)
        ak = sum((-1) ** j * b[:, j] * t ** (k - j) / math.factorial(k - j) for j in range(k + 1))
        total.append(lam**k * float(np.dot(w, ak)))
    value = math.exp(-lam * t) * math.fsum(total)
    return BoundedValue(value, poisson_tail(lam * t, max_terms))


def _exp_partial(x: float, m: int, start: int = 0) -> float:
    """``sum_{l=start}^{m} x^l / l!``; empty when ``m < start``."""
    return math.fsum(x**l / math.factorial(l) for l in range(start, m + 1))


def _integer_law_check(claims: ClaimDistribution):
    if not claims.is_integer:
        raise ValueError("discrete series needs integer-valued claims")


def survival_finite_discrete_ik(model: RiskModel, u: float, t: float, n_cap: int = DEFAULT_N_CAP,
                                inner_start: int = 0) -> float:
    """Finite-time survival for integer-valued claims via the ``b_j`` series.

    With ``n = floor(1 + u + c t)`` the sum runs over ``k = 1..n`` and over
    the first ``k - 1`` claim sizes ``x_i >= 1`` with ``sum x_i <= n - 1``;
    the ``k``-th claim is the one pushing the total to ``n`` or more.  Each
    composition contributes
    ``P(x_1..x_{k-1}, X_k >= n - s) * sum_j (-1)^j b_j lambda^j sum_m (lambda t)^m / m!``
    with the inner sum over ``m = inner_start .. k - j - 1``.  Only
    ``inner_start = 0`` gives a probability (it yields survival 1 at
    ``t = 0``); 1 is accepted to reproduce the alternative indexing.

    Compositions are enumerated depth first, sharing ``b_j`` values across
    common prefixes and skipping zero-probability branches.

    Raises:
        ValueError: ``n`` exceeds ``n_cap``, or the claims are not integer valued.
    """
    claims = model.claims
    _integer_law_check(claims)
    lam, c = model.lam, model.premium_rate
    if min(lam, c, u, t) < 0:
        raise ValueError("lambda, c, u and t must be >= 0")
    n = int(math.floor(1.0 + u + c * t))
    if n > n_cap:
        raise ValueError(f"n={n} exceeds the enumeration cap {n_cap}")
    lt = lam * t
    partial = [_exp_partial(lt, m, inner_start) for m in range(n + 1)]
    pmf = [0.0] + [claims.pmf(i) for i in range(1, n)]
    tail = [1.0] + [claims.tail(i) for i in range(1, n + 1)]
    terms: List[float] = []

    def visit(prefix_sum: int, prob: float, b: List[float]):
        j1 = len(b) - 1  # number of fixed claims, k = j1 + 1
        closing = prob * tail[n - prefix_sum]
        if closing > 0:
            inner = math.fsum((-1) ** j * b[j] * lam**j * partial[j1 - j] for j in range(j1 + 1))
            terms.append(closing * inner)
        for x in range(1, n - prefix_sum):
            p = pmf[x]
            if p == 0:
                continue
            s = prefix_sum + x
            z = max(0.0, (s - u) / c) if c > 0 else (0.0 if s <= u else math.inf)
            j = j1 + 1
            bj = math.fsum((-1) ** (j + i + 1) * z ** (j - i) / math.factorial(j - i) * b[i] for i in range(j))
            visit(s, prob * p, b + [bj])

    visit(0, 1.0, [1.0])
    return math.exp(-lt) * math.fsum(terms)
