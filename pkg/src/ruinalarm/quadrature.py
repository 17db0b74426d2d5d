"""Adaptive Simpson quadrature with an explicit error budget."""

from dataclasses import dataclass
import math
from typing import Callable, NamedTuple


class QuadratureError(ArithmeticError):
    """Raised when the requested tolerance is not met; carries the partial result."""

    def __init__(self, message: str, value: float, error: float):
        super().__init__(f"{message} (partial value {value!r}, error estimate {error:.3g})")
        self.value = value
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "adaptive-simpson"
    abs_tol: float = 1e-10
    max_depth: int = 40

    def __post_init__(self):
        if self.method != "adaptive-simpson":
            raise ValueError(f"unsupported quadrature method {self.method!r}")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


class QuadResult(NamedTuple):
    value: float
    error: float


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     spec: QuadratureSpec = QuadratureSpec()) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` by recursive Simpson bisection.

    Each panel is accepted when the Richardson difference ``|S2 - S1| / 15``
    is below its share of the tolerance.  Panels hitting ``max_depth`` are
    accepted anyway and their error counts toward the reported total.

    Raises:
        QuadratureError: the accumulated error estimate exceeds ``abs_tol``.
    """
    if a == b:
        return QuadResult(0.0, 0.0)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    parts, errs = [], []
    # explicit stack of (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, spec.abs_tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if abs(delta) <= 15.0 * tol or depth >= spec.max_depth:
            parts.append(left + right + delta / 15.0)
            errs.append(abs(delta) / 15.0)
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, tol / 2.0, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, tol / 2.0, depth + 1))
    value, error = math.fsum(parts), math.fsum(errs)
    if error > spec.abs_tol:
        raise QuadratureError("adaptive Simpson did not converge", value, error)
    return QuadResult(value, error)
