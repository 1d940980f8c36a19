"""The Beurling pre-action, the phi-generated flow and its time measure.

The pre-action T(t, x) = x + t*phi(x) is only near-associative; the flow
u' = phi(u) is a genuine one-parameter flow whose time-change
f_x(t) = Phi(t, x) - x satisfies the cocycle identity exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.optimize import brentq

from .errors import DomainError, IntegrationError, PositivityError
from .funcspace import RealFunc
from .quadrature import CumulativeIntegral

__all__ = [
    "preaction", "shift", "NearAssocDecomposition", "near_assoc", "FlowTrajectory",
    "integrate_flow", "flow_map", "time_measure", "reach_time", "EmbeddingMap",
    "embedding_residual", "TimeComparison", "compare_reach_times", "time_integrator",
]


def preaction(phi: RealFunc, t: float, x: float) -> float:
    """T^phi(t, x) = x + t*phi(x); (1 + t)*x exactly when phi is the identity."""
    phi.check_domain(x)
    if phi.is_identity:
        y = (1.0 + t) * x
    else:
        y = x + t * phi(x)
    if not phi.in_domain(y):
        raise DomainError(f"T({t!r}, {x!r}) = {y!r} leaves the domain of {phi.label}")
    return y


def shift(phi: RealFunc, t: float, x: float) -> float:
    """The displacement t*phi(x), after checking T(t, x) stays in the domain."""
    preaction(phi, t, x)
    return t * (x if phi.is_identity else phi(x))


@dataclass(frozen=True)
class NearAssocDecomposition:
    x: float
    s: float
    t: float
    y_s: float
    gamma: float
    lhs: float
    rhs: float
    concat_residual: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def near_assoc(phi: RealFunc, x: float, s: float, t: float,
               z: float | None = None) -> NearAssocDecomposition:
    """Split T(t+s, x) as T(gamma*t, T(s, x)) with gamma = phi(x)/phi(y_s)."""
    y = preaction(phi, s, x)
    px, py = phi(x), phi(y)
    if px <= 0 or py <= 0:
        raise PositivityError("near_assoc requires phi > 0")
    gamma = px / py
    lhs = preaction(phi, t + s, x)
    rhs = y + gamma * t * py
    if z is None:
        z = lhs
    pz = phi(z)
    concat = abs(px / pz - gamma * (py / pz))
    return NearAssocDecomposition(x, s, t, y, gamma, lhs, rhs, concat)


# ---------------------------------------------------------------------------
# ODE flow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowTrajectory:
    x0: float
    samples: tuple[tuple[float, float], ...]
    n_steps: int
    n_rejected: int
    max_error_estimate: float
    tol: float

    @property
    def t_end(self) -> float:
        return self.samples[-1][0]

    @property
    def u_end(self) -> float:
        return self.samples[-1][1]


def _rk4(phi, u, h):
    k1 = phi(u)
    k2 = phi(u + 0.5 * h * k1)
    k3 = phi(u + 0.5 * h * k2)
    k4 = phi(u + h * k3)
    return u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _advance(phi, u, h):
    """Two half steps against one full step; returns (extrapolated u, error)."""
    full = _rk4(phi, u, h)
    half = _rk4(phi, _rk4(phi, u, 0.5 * h), 0.5 * h)
    return half + (half - full) / 15.0, abs(half - full) / 15.0


def _initial_step(phi, x0, span):
    rate = phi(x0)
    guess = 0.05 * max(abs(x0), 1.0) / rate
    return math.copysign(min(abs(span), guess), span)


def _march(phi, x0, t_end, tol, stop_at=None):
    """RK4 with step halving. Yields accepted (t, u, h_used) states."""
    t, u = 0.0, float(x0)
    h = _initial_step(phi, x0, t_end)
    rejected, max_err = 0, 0.0
    samples = [(t, u)]
    while (t_end - t) * math.copysign(1.0, t_end) > 0:
        remaining = t_end - t
        if abs(remaining) <= 1e-12 * max(1.0, abs(t_end)):
            # rounding leftover: an Euler step is exact to far below tol
            u = u + remaining * phi(u)
            t = t_end
            samples.append((t, u))
            break
        if abs(h) > abs(remaining):
            h = remaining
        if abs(h) < 1e-13 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t!r}, u={u!r}")
        try:
            u_new, err = _advance(phi, u, h)
        except DomainError:
            h *= 0.5
            rejected += 1
            continue
        if not math.isfinite(u_new):
            h *= 0.5
            rejected += 1
            continue
        scale = max(1.0, abs(u))
        if err > tol * scale:
            h *= 0.5
            rejected += 1
            continue
        if stop_at is not None and u_new >= stop_at:
            return samples, (t, u, h), rejected, max_err
        t += h
        u = u_new
        max_err = max(max_err, err)
        samples.append((t, u))
        if err < tol * scale / 64.0:
            h *= 2.0
    return samples, None, rejected, max_err


def integrate_flow(phi: RealFunc, x0: float, t_end: float, tol: float = 1e-10) -> FlowTrajectory:
    """Solve u' = phi(u), u(0) = x0 up to t_end (negative t_end runs backwards)."""
    phi.check_domain(x0)
    if phi(x0) <= 0:
        raise PositivityError("flow requires phi > 0")
    if t_end == 0:
        return FlowTrajectory(x0, ((0.0, float(x0)),), 0, 0, 0.0, tol)
    samples, _, rejected, max_err = _march(phi, x0, float(t_end), tol)
    return FlowTrajectory(x0, tuple(samples), len(samples) - 1, rejected, max_err, tol)


def flow_map(phi: RealFunc, t: float, x: float, tol: float = 1e-10) -> float:
    """Phi(t, x) = u_x(t)."""
    return integrate_flow(phi, x, t, tol).u_end


@dataclass(frozen=True)
class EmbeddingMap:
    """t -> f_x(t) = Phi(t, x) - x for a fixed base point."""

    phi: RealFunc
    x: float
    tol: float = 1e-10

    def __call__(self, t: float) -> float:
        if t == 0:
            return 0.0
        return flow_map(self.phi, t, self.x, self.tol) - self.x


def embedding_residual(phi: RealFunc, x: float, s: float, t: float, tol: float = 1e-10) -> float:
    """|f_x(s+t) - f_x(s) - f_y(t)| with y = x + f_x(s)."""
    if s < 0 or t < 0:
        raise ValueError("embedding_residual requires s, t >= 0")
    fx = EmbeddingMap(phi, x, tol)
    fs = fx(s)
    y = x + fs
    return abs(fx(s + t) - fs - EmbeddingMap(phi, y, tol)(t))


# ---------------------------------------------------------------------------
# time measure
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def time_integrator(phi: RealFunc, tol: float = 1e-10) -> CumulativeIntegral:
    """Cached x -> int_1^x du/phi(u) for one phi.

    When the lower end of phi's domain is a quadrature node (x/log x at 1),
    phi is taken at the next double above it, where 1/phi has its limit.
    """
    lo = phi.domain[0]

    def inv(u):
        if u == lo:
            u = math.nextafter(u, math.inf)
        p = phi(u)
        if p <= 0:
            raise PositivityError(f"{phi.label} <= 0 at u={u!r}")
        return 1.0 / p
    return CumulativeIntegral(inv, origin=1.0, tol=tol)


def time_measure(phi: RealFunc, x: float, tol: float = 1e-10) -> float:
    """tau_x = int_1^x du/phi(u), signed for x < 1."""
    phi.check_domain(x)
    return time_integrator(phi, tol)(x)


def reach_time(phi: RealFunc, start: float, stop: float, tol: float = 1e-10) -> float:
    """Flow time from ``start`` to ``stop`` found by event detection on the orbit."""
    if not start < stop:
        raise ValueError("reach_time requires start < stop")
    phi.check_domain(start)
    phi.check_domain(stop)
    horizon = 1.0
    t0, u0 = 0.0, float(start)
    while True:
        samples, hit, _, _ = _march(phi, u0, horizon, tol, stop_at=stop)
        if hit is not None:
            t, u, h = hit
            break
        t0 += samples[-1][0]
        u0 = samples[-1][1]
        horizon *= 2.0
        if horizon > 1e300:
            raise IntegrationError("orbit never reaches the target")
    # locate the crossing inside the last step
    g = lambda hh: _advance(phi, u, hh)[0] - stop
    if u == stop:
        return t0 + t
    h_star = brentq(g, 0.0, h, xtol=1e-15 * max(1.0, abs(h)), rtol=4 * 2.220446049250313e-16)
    return t0 + t + h_star


@dataclass(frozen=True)
class TimeComparison:
    x: float
    tau: float
    preaction_time: float  # x / phi(x)

    @property
    def ratio(self) -> float:
        return self.tau / self.preaction_time


def compare_reach_times(phi: RealFunc, x: float, tol: float = 1e-10) -> TimeComparison:
    """Report tau_x next to x/phi(x); no claim is made about their relation."""
    return TimeComparison(x, time_measure(phi, x, tol), x / phi(x))
