"""Adaptive Simpson quadrature and cached cumulative integrals."""

from __future__ import annotations

import math
import threading
from typing import Callable

from .errors import BeurlingLabError, NonFiniteError, QuadratureError

__all__ = ["adaptive_simpson", "CumulativeIntegral", "offset_integral"]

_EPS = 2.220446049250313e-16


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def g(x):
        try:
            v = f(x)
        except BeurlingLabError:
            raise
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise NonFiniteError(f"integrand failed at {x!r}: {exc}") from exc
        if not math.isfinite(v):
            raise NonFiniteError(f"integrand non-finite at {x!r}")
        return v
    return g


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 50) -> float:
    """Integrate f over [a, b] to absolute tolerance ``tol``.

    Subintervals are refined left before right, so the result is a
    deterministic function of (f, a, b, tol).  The acceptance test is relaxed
    to a few ulps of the local estimate when ``tol`` is below what double
    precision can resolve.  Returns a signed integral when b < a.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise QuadratureError("infinite integration limits are not supported")
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = _checked(f)
    m = 0.5 * (a + b)
    fa, fm, fb = g(a), g(m), g(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(g, a, m, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_step(g, a, m, b, fa, fm, fb, whole, tol, depth):
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = g(lm), g(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    total = left + right
    delta = total - whole
    if abs(delta) <= 15.0 * max(tol, 64.0 * _EPS * abs(total)):
        return total + delta / 15.0
    if depth <= 0 or not (a < lm < m < rm < b):
        raise QuadratureError(
            f"tolerance {tol:.3g} not met on [{a!r}, {b!r}] (error estimate {abs(delta) / 15:.3g})")
    half = 0.5 * tol
    return (_simpson_step(g, a, lm, m, fa, flm, fm, left, half, depth - 1)
            + _simpson_step(g, m, rm, b, fm, frm, fb, right, half, depth - 1))


def offset_integral(f: Callable[[float], float], x: float, h: float,
                    tol: float = 1e-10) -> float:
    """int_x^{x+h} f, integrated in the offset u = v - x so the width is exactly h."""
    if h == 0:
        return 0.0
    return adaptive_simpson(lambda u: f(x + u), 0.0, h, tol)


class CumulativeIntegral:
    """x -> int_origin^x f(u) du with memoised dyadic segments.

    The path from ``origin`` (0 or 1) to x is split at the fixed breakpoints
    1, 2, 4, ... (or 1, 1/2, 1/4, ... below 1).  Each full segment is
    integrated once and cached, so every x gets the same value no matter in
    which order points are requested.
    """

    def __init__(self, f: Callable[[float], float], origin: float = 1.0, tol: float = 1e-10):
        if origin not in (0.0, 1.0):
            raise ValueError("origin must be 0 or 1")
        self.f = f
        self.origin = float(origin)
        self.tol = tol
        self._segments: dict[tuple[float, float], float] = {}
        self._lock = threading.Lock()

    def _segment(self, a: float, b: float) -> float:
        key = (a, b)
        with self._lock:
            hit = self._segments.get(key)
        if hit is not None:
            return hit
        value = adaptive_simpson(self.f, a, b, self.tol / 128.0)
        with self._lock:
            self._segments.setdefault(key, value)
        return value

    def breakpoints(self, x: float) -> list[float]:
        """Fixed ladder from the origin towards x (excluding x itself)."""
        pts = [self.origin]
        if x > self.origin:
            nxt = 1.0 if self.origin == 0.0 else 2.0
            while nxt < x:
                pts.append(nxt)
                nxt *= 2.0
        elif x < self.origin:
            if self.origin == 0.0:
                return pts
            nxt = 0.5
            while nxt > x and nxt > 0:
                pts.append(nxt)
                nxt *= 0.5
        return pts

    def __call__(self, x: float) -> float:
        if x == self.origin:
            return 0.0
        pts = self.breakpoints(x)
        total = 0.0
        for a, b in zip(pts, pts[1:]):
            total += self._segment(min(a, b), max(a, b))
        last = pts[-1]
        if x > self.origin:
            total += adaptive_simpson(self.f, last, x, 0.5 * self.tol)
            return total
        return -(total + adaptive_simpson(self.f, x, last, 0.5 * self.tol))

    def between(self, a: float, b: float) -> float:
        """int_a^b f; short intervals are integrated directly."""
        if a == b:
            return 0.0
        lo, hi = min(a, b), max(a, b)
        if lo > 0 and hi <= 2.0 * lo:
            return adaptive_simpson(self.f, a, b, self.tol)
        return self(b) - self(a)
