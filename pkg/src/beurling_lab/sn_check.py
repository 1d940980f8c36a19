"""Verifiers for self-neglect, phi-slow variation, additive Karamata slow
variation and the o(x) side condition."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .asymptotics import ConvergenceReport, TGrid, XSchedule, deviation_profile, sup_deviation_profile
from .errors import PositivityError
from .flow import shift
from .funcspace import RealFunc

__all__ = [
    "VariationVerdict", "check_sn", "check_phi_slow", "check_karamata_additive",
    "check_little_o", "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-2
KINDS = ("SN", "phi_slow", "karamata_additive", "little_o")


@dataclass(frozen=True)
class VariationVerdict:
    kind: str
    report: ConvergenceReport
    subject: str
    auxiliary: str | None = None
    lower_bound: float | None = None  # min of the subject over the schedule

    @property
    def verdict(self) -> str:
        return self.report.verdict

    @property
    def passed(self) -> bool:
        return self.report.passed


def _require_positive(f: RealFunc, sched: XSchedule) -> float:
    lowest = math.inf
    for x in sched.points:
        sign, logabs = f.signed_log(x)
        if sign <= 0:
            raise PositivityError(f"{f.label} is not positive at x={x!r}")
        lowest = min(lowest, logabs)
    return math.exp(lowest) if lowest < 709.0 else math.inf


def _ratio_field(psi: RealFunc, phi: RealFunc):
    """(t, x) -> psi(x + t phi(x)) / psi(x) computed through log increments."""
    def field(t, x):
        if t == 0:
            return 1.0
        return math.exp(psi.log_increment(x, shift(phi, t, x)))
    return field


def check_sn(phi: RealFunc, K: TGrid = TGrid(), sched: XSchedule = XSchedule(),
             tol: float = DEFAULT_TOL) -> VariationVerdict:
    """phi(x + t phi(x)) / phi(x) -> 1 uniformly on K."""
    low = _require_positive(phi, sched)
    report = sup_deviation_profile(_ratio_field(phi, phi), lambda t: 1.0, K, sched, tol)
    return VariationVerdict("SN", report, phi.label, phi.label, low)


def check_phi_slow(psi: RealFunc, phi: RealFunc, K: TGrid = TGrid(),
                   sched: XSchedule = XSchedule(), tol: float = DEFAULT_TOL) -> VariationVerdict:
    """psi(x + t phi(x)) / psi(x) -> 1 on K."""
    _require_positive(phi, sched)
    low = _require_positive(psi, sched)
    report = sup_deviation_profile(_ratio_field(psi, phi), lambda t: 1.0, K, sched, tol)
    return VariationVerdict("phi_slow", report, psi.label, phi.label, low)


def check_karamata_additive(phi: RealFunc, V: TGrid = TGrid(), sched: XSchedule = XSchedule(),
                            tol: float = DEFAULT_TOL) -> VariationVerdict:
    """phi(x + v) / phi(x) -> 1 on V.

    The lower bound of phi over the schedule is attached to the verdict; a
    bound near zero means the bounded-below hypothesis is not supported.
    """
    low = _require_positive(phi, sched)

    def field(v, x):
        if v == 0:
            return 1.0
        return math.exp(phi.log_increment(x, v))

    report = sup_deviation_profile(field, lambda v: 1.0, V, sched, tol)
    return VariationVerdict("karamata_additive", report, phi.label, None, low)


def check_little_o(phi: RealFunc, sched: XSchedule = XSchedule(),
                   tol: float = DEFAULT_TOL) -> VariationVerdict:
    """phi(x) / x -> 0 along the schedule."""
    low = _require_positive(phi, sched)
    report = deviation_profile(lambda _, x: phi(x) / x, [None], sched, tol)
    return VariationVerdict("little_o", report, phi.label, None, low)
