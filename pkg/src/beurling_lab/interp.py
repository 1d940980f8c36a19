"""Bloom partitions and C1 smoothstep interpolation across them.

Knots follow x_{n+1} = x_n + phi(x_n).  On [x_{n-1}, x_n] the interpolant is

    p(x) = psi(x_{n-1}) + (psi(x_n) - psi(x_{n-1})) * s(theta),
    theta = (x - x_{n-1}) / phi(x_{n-1}),  s(theta) = 3 theta^2 - 2 theta^3,

so p matches psi at every knot, stays between neighbouring knot values, has
zero slope at every knot and |p'| <= 1.5 |delta psi| / phi(x_{n-1}).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .asymptotics import ConvergenceReport, TGrid, XSchedule, deviation_profile
from .errors import DomainError, PositivityError
from .funcspace import RealFunc

__all__ = [
    "BloomPartition", "bloom_partition", "InterpolantC1", "interpolate_c1",
    "smooth_rep_check", "smoothstep",
]

STAGNATION = 1e-12


def smoothstep(theta):
    return theta * theta * (3.0 - 2.0 * theta)


def _smoothstep_slope(theta):
    return 6.0 * theta * (1.0 - theta)


@dataclass(frozen=True)
class BloomPartition:
    """Knots x_1 < x_2 < ... with the phi value used to step from each one.

    ``phi_values[n]`` is phi(knots[n]); the last entry belongs to the final
    knot and is not used as a gap.  The origin x_0 = 0 is implicit.
    """

    knots: tuple[float, ...]
    phi_values: tuple[float, ...]
    phi_label: str
    horizon: float
    diverged: bool
    stagnated: bool = False

    def __len__(self) -> int:
        return len(self.knots)

    @property
    def with_origin(self) -> tuple[float, ...]:
        return (0.0,) + self.knots

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(np.asarray(self.knots))


def bloom_partition(phi: RealFunc, x1: float, horizon: float,
                    max_knots: int = 1_000_000) -> BloomPartition:
    """Iterate x_{n+1} = x_n + phi(x_n) from x1 until ``horizon`` or ``max_knots``."""
    if not (x1 > 0 and horizon > 0):
        raise ValueError("x1 and horizon must be positive")
    if max_knots < 2:
        raise ValueError("max_knots must be at least 2")
    knots, values = [], []
    x = float(x1)
    diverged = stagnated = False
    while True:
        p = phi(x)
        if not p > 0:
            raise PositivityError(f"{phi.label} is not positive at knot {x!r}")
        knots.append(x)
        values.append(p)
        if x >= horizon:
            diverged = True
            break
        if len(knots) >= max_knots:
            break
        if p < STAGNATION * x:
            stagnated = True
            break
        x = x + p
    return BloomPartition(tuple(knots), tuple(values), phi.label, float(horizon),
                          diverged, stagnated)


@dataclass(frozen=True)
class InterpolantC1:
    partition: BloomPartition
    values: tuple[float, ...]  # psi at the knots x_1, x_2, ...
    label: str = "interp"

    def __post_init__(self):
        if len(self.values) != len(self.partition.knots):
            raise ValueError("one value per knot is required")
        if len(self.values) < 2:
            raise ValueError("need at least two knots")
        bad = [v for v in self.values if not (math.isfinite(v) and v > 0)]
        if bad:
            raise PositivityError(f"non-positive knot value {bad[0]!r}")

    @classmethod
    def from_values(cls, partition: BloomPartition, values: Sequence[float],
                    label: str = "interp") -> "InterpolantC1":
        return cls(partition, tuple(float(v) for v in values), label)

    @property
    def domain(self) -> tuple[float, float]:
        return (0.0, self.partition.knots[-1])

    def _locate(self, x: float) -> int:
        knots = self.partition.knots
        if not (0.0 < x <= knots[-1]):
            raise DomainError(f"{self.label}: x={x!r} outside (0, {knots[-1]!r}]")
        return bisect.bisect_right(knots, x) - 1

    def __call__(self, x: float) -> float:
        i = self._locate(x)
        if i < 0:
            return self.values[0]  # constant on (0, x_1]
        knots = self.partition.knots
        if x == knots[i] or i == len(knots) - 1:
            return self.values[i]
        theta = min((x - knots[i]) / self.partition.phi_values[i], 1.0)
        a, b = self.values[i], self.values[i + 1]
        return a + (b - a) * smoothstep(theta)

    def derivative(self, x: float) -> float:
        i = self._locate(x)
        knots = self.partition.knots
        if i < 0 or i == len(knots) - 1 or x == knots[i]:
            return 0.0
        width = self.partition.phi_values[i]
        theta = min((x - knots[i]) / width, 1.0)
        return (self.values[i + 1] - self.values[i]) * _smoothstep_slope(theta) / width

    def slope_bound(self, i: int) -> float:
        """The certified bound 2 |delta psi| / phi(x_i) on interval i."""
        return 2.0 * abs(self.values[i + 1] - self.values[i]) / self.partition.phi_values[i]

    def coefficients(self) -> list[tuple[float, float, float, float, float, float]]:
        """(x_left, x_right, c0, c2, c3, slope_bound): p = c0 + c2 th^2 + c3 th^3."""
        k, v = self.partition.knots, self.values
        return [(k[i], k[i + 1], v[i], 3.0 * (v[i + 1] - v[i]), -2.0 * (v[i + 1] - v[i]),
                 self.slope_bound(i)) for i in range(len(k) - 1)]

    def as_func(self) -> RealFunc:
        return RealFunc(self.__call__, label=self.label, domain=self.domain,
                        positive=True, deriv=self.derivative)


def interpolate_c1(psi: RealFunc, partition: BloomPartition) -> InterpolantC1:
    """Smoothstep interpolant of psi over the partition knots."""
    values = []
    for x in partition.knots:
        v = psi(x)
        if not v > 0:
            raise PositivityError(f"{psi.label} is not positive at knot {x!r}")
        values.append(v)
    return InterpolantC1(partition, tuple(values), f"interp({psi.label})")


def smooth_rep_check(psi: RealFunc, interpolant: InterpolantC1, phi: RealFunc,
                     sched: XSchedule = XSchedule(), tol: float = 1e-2,
                     window: TGrid = TGrid(0.0, 1.0, 0.05)
                     ) -> tuple[ConvergenceReport, ConvergenceReport]:
    """Profiles of c = psi/p against 1 and of phi * p'/p against 0.

    Each schedule point x is widened to the window x + t phi(x), t in the
    grid, so that at least one full knot interval is scanned per point.
    """
    ts = window.points
    f = interpolant.as_func()

    def at(t, x):
        return x + t * phi(x)

    def ratio_dev(t, x):
        y = at(t, x)
        return psi(y) / f(y) - 1.0

    def log_slope(t, x):
        y = at(t, x)
        return phi(y) * interpolant.derivative(y) / f(y)

    return (deviation_profile(ratio_dev, ts, sched, tol),
            deviation_profile(log_slope, ts, sched, tol))
