"""Adaptive Simpson quadrature and bracketed root finding.

Both helpers favor robustness over speed: every root here is a cheap
one-dimensional bracket, and every integrand is smooth away from interval
endpoints, which the callers keep out of the integration range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

__all__ = ["Quadrature", "IntegrationResult", "integrate", "integrate_report", "find_root"]


@dataclass(frozen=True)
class Quadrature:
    """Tolerances for the adaptive Simpson rule."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-14
    max_depth: int = 40

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol < 0 or self.max_depth < 1:
            raise ValueError(f"invalid quadrature configuration: {self}")


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    error_estimate: float
    converged: bool


DEFAULT_QUADRATURE = Quadrature()


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, m, b, fa, fm, fb, whole, cfg, depth, report):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = left + right - whole
    tol = max(cfg.abs_tol, cfg.rel_tol * abs(left + right))
    if abs(delta) <= 15.0 * tol or depth >= cfg.max_depth:
        if depth >= cfg.max_depth and abs(delta) > 15.0 * tol:
            report[0] = max(report[0], abs(delta) / 15.0)
        return left + right + delta / 15.0
    return _adaptive(f, a, lm, m, fa, flm, fm, left, cfg, depth + 1, report) + _adaptive(
        f, m, rm, b, fm, frm, fb, right, cfg, depth + 1, report
    )


def integrate_report(
    f: Callable[[float], float], a: float, b: float, cfg: Quadrature = DEFAULT_QUADRATURE
) -> IntegrationResult:
    """Adaptive Simpson estimate of the integral of f over [a, b].

    Exhausting max_depth does not raise; the achieved error estimate is
    reported instead so callers can decide.
    """
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return IntegrationResult(0.0, 0.0, True)
    report = [0.0]
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    value = _adaptive(f, a, m, b, fa, fm, fb, whole, cfg, 0, report)
    achieved = report[0]
    converged = achieved <= max(cfg.abs_tol, cfg.rel_tol * abs(value))
    return IntegrationResult(value, achieved, converged)


def integrate(
    f: Callable[[float], float], a: float, b: float, cfg: Quadrature = DEFAULT_QUADRATURE
) -> float:
    return integrate_report(f, a, b, cfg).value


def find_root(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12
) -> float:
    """Bisection root of f on [lo, hi]; f(lo) and f(hi) must bracket zero.

    Deterministic, derivative free, capped at 200 iterations (bracket
    width shrinks by 2**-200, far below any tol a double can express).
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"no sign change on bracket [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def golden_min(f: Callable[[float], float], lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    """Golden-section minimum of a unimodal f on [lo, hi]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        if b - a <= 1e-10 * max(1.0, abs(a) + abs(b)):
            break
    if fc < fd:
        return c, fc
    return d, fd
