"""Beurling regular variation: the ratio field, index estimation, uniformity
profiles, Cauchy-equation residuals and the asymptotic-cocycle defect.

Deviations from exp(rho*t) are measured relatively, as
|sigma(t, x) * exp(-rho*t) - 1|, so that one tolerance serves every t.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .asymptotics import (ConvergenceReport, TGrid, XSchedule, deviation_profile,
                          extrapolate_limit, sup_deviation_profile)
from .errors import BeurlingLabError, LimitError
from .flow import preaction, shift
from .funcspace import RealFunc

__all__ = [
    "RatioField", "IndexEstimate", "limit_g", "estimate_index", "uct_profile",
    "cocycle_defect", "cocycle_profile", "cfe_residual", "shift_uniformity",
    "ShiftDiagnostic", "estimate_karamata_index", "karamata_uct_profile",
    "ZERO_LIMIT_FLOOR",
]

ZERO_LIMIT_FLOOR = 1e-12


@dataclass(frozen=True)
class RatioField:
    """sigma(t, x) = f(x + t phi(x)) / f(x)."""

    f: RealFunc
    phi: RealFunc

    def log(self, t: float, x: float) -> float:
        if t == 0:
            return 0.0
        return self.f.log_increment(x, shift(self.phi, t, x))

    def __call__(self, t: float, x: float) -> float:
        if t == 0:
            return 1.0
        return math.exp(self.log(t, x))


@dataclass(frozen=True)
class IndexEstimate:
    rho: float
    fit_residual: float
    k_samples: tuple[tuple[float, float], ...]
    cfe_max_residual: float
    mode: str = "beurling"  # or "karamata": k(t) fitted against log(1 + t)

    @property
    def limits(self) -> list[tuple[float, float]]:
        return [(t, math.exp(k)) for t, k in self.k_samples]


def _limit(sigma: RatioField, t: float, sched: XSchedule) -> float:
    if t == 0:
        return 1.0
    samples = []
    for x in sched.points:
        try:
            v = sigma(t, x)
        except (BeurlingLabError, ArithmeticError, ValueError):
            continue
        if math.isfinite(v):
            samples.append((x, v))
    if not samples:
        raise LimitError(f"every schedule point was skipped at t={t!r}")
    if len(samples) < 3:
        raise LimitError(f"only {len(samples)} usable schedule points at t={t!r}")
    return extrapolate_limit(samples)


def limit_g(f: RealFunc, phi: RealFunc, t: float, sched: XSchedule = XSchedule()) -> float:
    """Extrapolated limit of f(x + t phi(x)) / f(x) along the schedule."""
    return _limit(RatioField(f, phi), t, sched)


def _grid_lookup(ts: Sequence[float], value: float) -> int | None:
    """Index of the grid point within 1e-9 spacing of value, else None."""
    i = bisect.bisect_left(ts, value)
    spacing = min(b - a for a, b in zip(ts, ts[1:]))
    for j in (i - 1, i):
        if 0 <= j < len(ts) and abs(ts[j] - value) <= 1e-9 * spacing:
            return j
    return None


def cfe_residual(k_samples: Sequence[tuple[float, float]], s: float, t: float) -> float:
    """|k(s+t) - k(s) - k(t)| with nearest-point lookup on the sample grid."""
    pts = sorted(k_samples)
    ts = [p[0] for p in pts]
    if len(ts) < 2:
        raise ValueError("need at least two samples")
    spacing = min(b - a for a, b in zip(ts, ts[1:]))

    def k(v):
        i = bisect.bisect_left(ts, v)
        best = min((j for j in (i - 1, i) if 0 <= j < len(ts)), key=lambda j: abs(ts[j] - v))
        if abs(ts[best] - v) > 0.5 * spacing:
            raise ValueError(f"{v!r} is off the sample grid (spacing {spacing!r})")
        return pts[best][1]

    return abs(k(s + t) - k(s) - k(t))


def _cfe_max(ks: list[tuple[float, float]], combine) -> float:
    ts = [t for t, _ in ks]
    worst = 0.0
    for i, (s, ks_) in enumerate(ks):
        for j in range(i, len(ks)):
            t, kt = ks[j]
            idx = _grid_lookup(ts, combine(s, t))
            if idx is None:
                continue
            worst = max(worst, abs(ks[idx][1] - ks_ - kt))
    return worst


def _log_limits(sigma: RatioField, K: TGrid, sched: XSchedule) -> list[tuple[float, float]]:
    ks = []
    for t in K.points:
        g = _limit(sigma, t, sched)
        if not (math.isfinite(g) and g > ZERO_LIMIT_FLOOR):
            raise LimitError(f"limit not non-zero: g({t!r}) = {g!r}")
        ks.append((t, 0.0 if t == 0 else math.log(g)))
    return ks


def estimate_index(f: RealFunc, phi: RealFunc, K: TGrid = TGrid(),
                   sched: XSchedule = XSchedule()) -> IndexEstimate:
    """Fit k(t) = log g(t) by rho*t, least squares through the origin."""
    if len(K.points) < 10:
        raise ValueError("estimate_index needs a t-grid with at least 10 points")
    ks = _log_limits(RatioField(f, phi), K, sched)
    rho = sum(t * k for t, k in ks) / sum(t * t for t, _ in ks)
    fit = max(abs(k - rho * t) for t, k in ks)
    cfe = _cfe_max(ks, lambda s, t: s + t)
    return IndexEstimate(rho, fit, tuple(ks), cfe)


def uct_profile(f: RealFunc, phi: RealFunc, rho: float, K: TGrid = TGrid(),
                sched: XSchedule = XSchedule(), tol: float = 1e-2) -> ConvergenceReport:
    """sup_t |sigma(t, x) exp(-rho t) - 1| along the schedule."""
    sigma = RatioField(f, phi)
    return sup_deviation_profile(lambda t, x: math.expm1(sigma.log(t, x) - rho * t),
                                 lambda t: 0.0, K, sched, tol)


def cocycle_defect(sigma: RatioField, s: float, t: float, x: float) -> float:
    """|sigma(s+t, x) - sigma(s, T_t x) * sigma(t, x)|."""
    if s == 0:
        return 0.0
    y = preaction(sigma.phi, t, x)
    return abs(sigma(s + t, x) - sigma(s, y) * sigma(t, x))


def cocycle_profile(sigma: RatioField, K: TGrid = TGrid(-1.0, 1.0, 0.1),
                    sched: XSchedule = XSchedule(), tol: float = 1e-2) -> ConvergenceReport:
    """Sup of the cocycle defect over (s, t) in K x K along the schedule."""
    pairs = [(s, t) for s in K.points for t in K.points]
    return deviation_profile(lambda p, x: cocycle_defect(sigma, p[0], p[1], x), pairs, sched, tol)


class ShiftDiagnostic(NamedTuple):
    at_zero: ConvergenceReport
    at_shift: ConvergenceReport

    @property
    def verdicts_differ(self) -> bool:
        return self.at_zero.verdict != self.at_shift.verdict


def shift_uniformity(f: RealFunc, phi: RealFunc, u: float, sched: XSchedule = XSchedule(),
                     window: float = 0.5, rho: float | None = None, step: float = 0.05,
                     tol: float = 1e-2) -> ShiftDiagnostic:
    """Uniformity profiles on [-w, w] and [u - w, u + w]."""
    if rho is None:
        rho = estimate_index(f, phi, sched=sched).rho
    sigma = RatioField(f, phi)
    near0 = [k * step for k in range(-round(window / step), round(window / step) + 1)]
    nearu = [u + t for t in near0]

    def dev(t, x):
        return math.expm1(sigma.log(t, x) - rho * t)

    return ShiftDiagnostic(deviation_profile(dev, near0, sched, tol),
                           deviation_profile(dev, nearu, sched, tol))


# ---------------------------------------------------------------------------
# Karamata case: phi(x) = x, limits (1 + t)^rho
# ---------------------------------------------------------------------------

def estimate_karamata_index(f: RealFunc, phi: RealFunc, K: TGrid = TGrid(-0.5, 2.0, 0.1),
                            sched: XSchedule = XSchedule()) -> IndexEstimate:
    """Fit log g(t) by rho*log(1 + t) through the origin (grid must have t > -1)."""
    if K.lo <= -1:
        raise ValueError("Karamata mode needs t > -1 on the grid")
    if len(K.points) < 10:
        raise ValueError("estimate needs a t-grid with at least 10 points")
    ks = _log_limits(RatioField(f, phi), K, sched)
    lam = [(math.log1p(t), k) for t, k in ks]
    rho = sum(a * k for a, k in lam) / sum(a * a for a, _ in lam)
    fit = max(abs(k - rho * a) for a, k in lam)
    cfe = _cfe_max(ks, lambda s, t: (1.0 + s) * (1.0 + t) - 1.0)
    return IndexEstimate(rho, fit, tuple(ks), cfe, mode="karamata")


def karamata_uct_profile(f: RealFunc, phi: RealFunc, rho: float,
                         K: TGrid = TGrid(-0.5, 2.0, 0.1), sched: XSchedule = XSchedule(),
                         tol: float = 1e-2) -> ConvergenceReport:
    sigma = RatioField(f, phi)
    return sup_deviation_profile(lambda t, x: math.expm1(sigma.log(t, x) - rho * math.log1p(t)),
                                 lambda t: 0.0, K, sched, tol)
