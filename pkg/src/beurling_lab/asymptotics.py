"""Divergent x-schedules, compact t-grids, deviation profiles and verdicts.

Every "as x -> infinity, locally uniformly in t" statement is measured the
same way: take the sup over a t-grid of |field(t, x) - target(t)| along a
geometric schedule of x values, then judge the tail of that profile.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BeurlingLabError, LimitError

__all__ = [
    "XSchedule", "TGrid", "ProfilePoint", "ConvergenceReport",
    "extrapolate_limit", "sup_deviation_profile", "deviation_profile",
    "parallel_map", "worker_count", "NOISE_FLOOR", "MAX_SKIP_FRACTION",
]

#: deviations at or below this are treated as zero when judging trends
NOISE_FLOOR = 1e-12
MAX_SKIP_FRACTION = 0.05
_TAIL = 5
REPORT_NOTE = ("numerical evidence on the tested compact set and schedule; "
               "uniformity is demonstrated, not proved")

_EVAL_ERRORS = (BeurlingLabError, ArithmeticError, ValueError)


@dataclass(frozen=True)
class XSchedule:
    """Geometric schedule x_j = x0 * ratio**j, j = 0..count-1."""

    x0: float = 1e2
    ratio: float = 2.0
    count: int = 20

    def __post_init__(self):
        if not (math.isfinite(self.x0) and self.x0 > 0):
            raise ValueError(f"x0 must be a positive real, got {self.x0!r}")
        if not self.ratio > 1:
            raise ValueError(f"ratio must exceed 1, got {self.ratio!r}")
        if int(self.count) != self.count or self.count < 5:
            raise ValueError(f"count must be an integer >= 5, got {self.count!r}")
        if not math.isfinite(self.points[-1]):
            raise ValueError("schedule overflows double precision")

    @property
    def points(self) -> list[float]:
        return [self.x0 * self.ratio ** j for j in range(int(self.count))]


@dataclass(frozen=True)
class TGrid:
    """Points k*step in [lo, hi] plus both endpoints; always contains 0."""

    lo: float = -2.0
    hi: float = 2.0
    step: float = 0.1

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("TGrid requires lo < hi")
        if not self.step > 0:
            raise ValueError("TGrid requires step > 0")
        if not self.lo <= 0 <= self.hi:
            raise ValueError("TGrid must contain 0")

    @property
    def points(self) -> list[float]:
        k_lo = math.ceil(self.lo / self.step - 1e-9)
        k_hi = math.floor(self.hi / self.step + 1e-9)
        pts = {self.lo, self.hi}
        for k in range(k_lo, k_hi + 1):
            t = k * self.step
            if self.lo <= t <= self.hi:
                pts.add(t)
        return sorted(pts)

    def refined(self) -> "TGrid":
        return TGrid(self.lo, self.hi, self.step / 2.0)


@dataclass(frozen=True)
class ProfilePoint:
    x: float
    sup_deviation: float  # nan when every grid point was skipped
    n_skipped: int


@dataclass(frozen=True)
class ConvergenceReport:
    per_x: tuple[ProfilePoint, ...]
    extrapolated_limit: float | None
    decay_exponent: float | None
    verdict: str  # "pass" | "fail" | "inconclusive"
    tolerance: float
    reason: str = ""
    n_evaluations: int = 0
    n_skipped: int = 0
    note: str = REPORT_NOTE

    @property
    def deviations(self) -> list[float]:
        return [p.sup_deviation for p in self.per_x]

    @property
    def xs(self) -> list[float]:
        return [p.x for p in self.per_x]

    @property
    def final_deviation(self) -> float:
        return self.per_x[-1].sup_deviation

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "extrapolated_limit": self.extrapolated_limit,
            "decay_exponent": self.decay_exponent,
            "reason": self.reason,
            "n_evaluations": self.n_evaluations,
            "n_skipped": self.n_skipped,
            "note": self.note,
            "per_x": [[p.x, p.sup_deviation, p.n_skipped] for p in self.per_x],
        }


# ---------------------------------------------------------------------------
# workers
# ---------------------------------------------------------------------------

def worker_count() -> int:
    """Workers from BEURLING_LAB_THREADS: unset -> 1, 0 -> cpu count."""
    raw = os.environ.get("BEURLING_LAB_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n <= 0:
        return os.cpu_count() or 1
    return n


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map; results never depend on the worker count."""
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------

def _power_fit(us, vs):
    """Exact fit of v = L + C * u**p (p < 0) through three points.

    Returns (L, C, p) or None when the points are constant, oscillating or not
    decaying.  Geometric abscissae reduce to Aitken's delta-squared formula.
    """
    (u1, u2, u3), (v1, v2, v3) = us, vs
    d1, d2 = v2 - v1, v3 - v2
    if d1 == 0 or d2 == 0 or not (math.isfinite(d1) and math.isfinite(d2)):
        return None
    q = d2 / d1
    if not 0 < q < 1:
        return None
    r1, r2 = u2 / u1, u3 / u2
    if abs(r1 - r2) <= 1e-12 * r1:
        p = math.log(q) / math.log(r2)
        return v3 + d2 * q / (1.0 - q), None, p
    # non-geometric spacing: solve (u3^p - u2^p) / (u2^p - u1^p) = q for p < 0
    l1, l2, l3 = math.log(u1), math.log(u2), math.log(u3)

    def g(p):
        return (math.exp(p * (l3 - l2)) - 1.0) * math.exp(p * (l2 - l1)) \
            / (math.exp(p * (l2 - l1)) - 1.0) - q

    lo, hi = -60.0 / max(l3 - l1, 1e-300), -1e-9
    try:
        if g(lo) * g(hi) > 0:
            return None
        p = brentq(g, lo, hi, xtol=1e-14)
    except (ValueError, OverflowError, ZeroDivisionError):
        return None
    c = d2 / (u3 ** p - u2 ** p)
    limit = v3 - c * u3 ** p
    return (float(limit), c, p) if math.isfinite(limit) else None


def _predict_algebraic(fit, us, vs, u0):
    limit, c, p = fit
    if c is None:
        c = (vs[2] - vs[1]) / (us[2] ** p - us[1] ** p)
    return limit + c * u0 ** p


def extrapolate_limit(samples: Iterable[tuple[float, float]]) -> float:
    """Richardson-style limit of a sampled sequence v(x) as x grows.

    The decay type is chosen between algebraic, v = L + C x^p, and
    logarithmic, v = L + C (log x)^p: each three-parameter model is fitted
    exactly through the last three samples and the one that better predicts
    the fourth-from-last sample wins.  Algebraic tails return that fit's L
    (Aitken's formula on geometric abscissae).  Logarithmic tails return the
    value at y = 0 of the cubic in y = 1/log x through the last four samples.
    Falls back to the last value when the tail is constant, oscillating or
    not decaying.
    """
    samples = list(samples)
    if len(samples) < 3:
        raise LimitError("extrapolate_limit needs at least 3 samples")
    xs = [float(s[0]) for s in samples]
    vals = [float(s[1]) for s in samples]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise LimitError("sample abscissae must be strictly increasing")
    last = vals[-1]
    if xs[-3] <= 0:
        return last
    algebraic = _power_fit(xs[-3:], vals[-3:])
    if algebraic is None:
        return last
    if len(samples) < 4 or xs[-4] <= 1.0:
        return algebraic[0]
    logs = [math.log(x) for x in xs[-3:]]
    logarithmic = _power_fit(logs, vals[-3:])
    if logarithmic is None:
        return algebraic[0]
    x0, v0 = xs[-4], vals[-4]
    try:
        err_a = abs(_predict_algebraic(algebraic, xs[-3:], vals[-3:], x0) - v0)
        err_l = abs(_predict_algebraic(logarithmic, logs, vals[-3:], math.log(x0)) - v0)
    except (OverflowError, ZeroDivisionError):
        return algebraic[0]
    if not err_l < err_a:
        return algebraic[0]
    coef = np.polyfit(1.0 / np.log(np.array(xs[-4:])), np.array(vals[-4:]), 3)
    return float(coef[-1]) if math.isfinite(coef[-1]) else logarithmic[0]


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

def _decay_exponent(xs: list[float], devs: list[float]) -> float | None:
    pts = [(math.log(x), math.log(d)) for x, d in zip(xs, devs)
           if math.isfinite(d) and d > NOISE_FLOOR]
    if len(pts) < 2:
        return None
    lx, ld = np.array(pts).T
    if np.ptp(lx) == 0:
        return None
    slope = np.polyfit(lx, ld, 1)[0]
    return float(slope)


def _judge(rows: list[ProfilePoint], tol: float, n_eval: int, n_skip: int):
    devs = [r.sup_deviation for r in rows]
    # skipped points can only raise a sup, so an excess is conclusive regardless
    if devs and math.isfinite(devs[-1]) and devs[-1] > tol:
        return "fail", f"final deviation {devs[-1]:.3g} exceeds tolerance {tol:.3g}"
    if n_eval and n_skip > MAX_SKIP_FRACTION * n_eval:
        return "inconclusive", (f"{n_skip} of {n_eval} evaluations skipped "
                                f"(more than {MAX_SKIP_FRACTION:.0%})")
    if len(devs) < _TAIL or any(not math.isfinite(d) for d in devs[-_TAIL:]):
        return "inconclusive", "fewer than 5 usable schedule points at the tail"
    tail = devs[-_TAIL:]
    for a, b in zip(tail, tail[1:]):
        if b > max(a, NOISE_FLOOR):
            return "fail", "deviations increase over the final 5 schedule points"
    return "pass", ""


def deviation_profile(deviation: Callable[[Any, float], float], params: Sequence,
                      sched: XSchedule, tol: float = 1e-2) -> ConvergenceReport:
    """Sup over ``params`` of |deviation(p, x)| at every schedule point.

    Evaluation errors at a point are counted as skips rather than raised.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    params = list(params)

    def row(x):
        best, skipped = -math.inf, 0
        for p in params:
            try:
                d = abs(float(deviation(p, x)))
            except _EVAL_ERRORS:
                skipped += 1
                continue
            if not math.isfinite(d):
                skipped += 1
                continue
            best = max(best, d)
        return ProfilePoint(x, best if best > -math.inf else math.nan, skipped)

    xs = sched.points
    rows = parallel_map(row, xs)
    n_eval = len(xs) * len(params)
    n_skip = sum(r.n_skipped for r in rows)
    verdict, reason = _judge(rows, tol, n_eval, n_skip)
    good = [(r.x, r.sup_deviation) for r in rows if math.isfinite(r.sup_deviation)]
    limit = extrapolate_limit(good) if len(good) >= 3 else None
    exponent = _decay_exponent([r.x for r in rows], [r.sup_deviation for r in rows])
    return ConvergenceReport(tuple(rows), limit, exponent, verdict, tol, reason, n_eval, n_skip)


def sup_deviation_profile(field: Callable[[float, float], float],
                          target: Callable[[float], float],
                          K: TGrid, sched: XSchedule, tol: float = 1e-2) -> ConvergenceReport:
    """Profile of sup_{t in K} |field(t, x) - target(t)| along the schedule."""
    targets = {t: target(t) for t in K.points}
    return deviation_profile(lambda t, x: field(t, x) - targets[t], K.points, sched, tol)
