"""Representations f(x) = d(x) * exp(rho * tau_x + int_0^x e(v) dv).

``tau_x`` is the flow time int_1^x du / phi(u).  The module builds f_rho and
full representations, splits a given f into its index part and a slowly
varying remainder, estimates (d, e) from that remainder and checks that the
e-integral over x .. x + t phi(x) vanishes.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .asymptotics import ConvergenceReport, TGrid, XSchedule, deviation_profile
from .errors import ConfigError, DomainError, PositivityError
from .flow import shift, time_integrator
from .funcspace import Const, RealFunc, from_expr, parse_expr
from .interp import BloomPartition
from .quadrature import CumulativeIntegral, offset_integral

__all__ = [
    "make_f_rho", "GammaRepresentation", "build_gamma", "Decomposition", "decompose",
    "extract_components", "verify_reduction", "PiecewiseLinear", "rep_to_json",
    "rep_from_json", "filled", "EXTRACT_WINDOW",
]

EXTRACT_WINDOW = 5
MIN_KNOTS = 10


def _one(domain=(0.0, math.inf)) -> RealFunc:
    return from_expr(Const(1.0), label="1", domain=domain, positive=True)


def make_f_rho(rho: float, phi: RealFunc, tol: float = 1e-10) -> RealFunc:
    """f_rho(x) = exp(rho * int_1^x du / phi(u)); f_rho(1) = 1."""
    rho = float(rho)
    if rho == 0.0:
        return _one(phi.domain)
    tau = time_integrator(phi, tol)

    def log_value(x):
        phi.check_domain(x)
        return 1, rho * tau(x)

    def log_increment(x, h):
        phi.check_domain(x + h)
        if abs(h) <= x:
            return rho * offset_integral(tau.f, x, h, tol)
        return rho * tau.between(x, x + h)

    def fn(x):
        return math.exp(log_value(x)[1])

    def deriv(x):
        return rho * fn(x) / phi(x)

    return RealFunc(fn, label=f"f_rho({rho!r}, {phi.label})", domain=phi.domain,
                    positive=True, deriv=deriv, log_value=log_value,
                    log_increment=log_increment)


class PiecewiseLinear:
    """Linear interpolation through (xs, ys), constant outside, exact primitive."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        if self.xs.ndim != 1 or len(self.xs) < 2 or len(self.xs) != len(self.ys):
            raise ValueError("need matching 1-d arrays of length >= 2")
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("abscissae must be strictly increasing")
        seg = 0.5 * (self.ys[1:] + self.ys[:-1]) * np.diff(self.xs)
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])

    def __call__(self, x: float) -> float:
        return float(np.interp(x, self.xs, self.ys))

    def slope(self, x: float) -> float:
        i = bisect.bisect_right(self.xs, x) - 1
        if i < 0 or i >= len(self.xs) - 1:
            return 0.0
        return float((self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]))

    def primitive(self, x: float) -> float:
        """int_{xs[0]}^x, extended constantly at both ends."""
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return float(ys[0] * (x - xs[0]))
        if x >= xs[-1]:
            return float(self._cum[-1] + ys[-1] * (x - xs[-1]))
        i = bisect.bisect_right(xs, x) - 1
        dx = x - xs[i]
        y = self(x)
        return float(self._cum[i] + 0.5 * (ys[i] + y) * dx)

    def integral(self, a: float, b: float) -> float:
        return self.primitive(b) - self.primitive(a)


@dataclass(frozen=True)
class GammaRepresentation:
    """Components (rho, phi, d, e); ``assembled`` is the function they define."""

    rho: float
    phi: RealFunc
    d_component: RealFunc | None = None  # None means d = 1
    e_component: RealFunc | None = None  # None means e = 0
    c_samples: tuple[tuple[float, float], ...] = field(default=(), compare=False)

    @property
    def assembled(self) -> RealFunc:
        return build_gamma(self)


def _e_primitive(e: RealFunc, tol: float):
    """(x -> int_0^x e, (a, b) -> int_a^b e)."""
    if isinstance(e, RealFunc) and e._integral is not None:
        return (lambda x: e.integrate(0.0, x)), (lambda a, b: e.integrate(a, b))
    if not e.domain[0] < 0.0:
        raise DomainError(f"e component {e.label} must be defined at 0 "
                          f"(domain {e.domain}); give it a domain reaching below 0")
    cum = CumulativeIntegral(e, origin=0.0, tol=tol)

    def between(a, b):
        if abs(b - a) <= abs(a):
            return offset_integral(e, a, b - a, tol)
        return cum.between(a, b)
    return cum, between


def build_gamma(rep: GammaRepresentation, tol: float = 1e-10) -> RealFunc:
    """x -> d(x) exp(rho tau_x + int_0^x e(v) dv)."""
    phi, rho = rep.phi, float(rep.rho)
    d, e = rep.d_component, rep.e_component
    domain = phi.domain
    if d is not None:
        domain = (max(domain[0], d.domain[0]), min(domain[1], d.domain[1]))
    f_rho = make_f_rho(rho, phi, tol)
    E, E_between = _e_primitive(e, tol) if e is not None else (None, None)

    def check(x):
        if not (math.isfinite(x) and domain[0] < x <= domain[1]):
            raise DomainError(f"x={x!r} outside domain {domain}")

    def log_d(x):
        if d is None:
            return 0.0
        sign, val = d.signed_log(x)
        if sign <= 0:
            raise PositivityError(f"d component {d.label} is not positive at x={x!r}")
        return val

    def log_value(x):
        check(x)
        total = log_d(x) + (f_rho.log_eval(x) if rho else 0.0)
        if E is not None:
            total += E(x)
        return 1, total

    def log_increment(x, h):
        check(x)
        check(x + h)
        if h == 0:
            return 0.0
        total = d.log_increment(x, h) if d is not None else 0.0
        if rho:
            total += f_rho.log_increment(x, h)
        if E is not None:
            total += E_between(x, x + h)
        return total

    def fn(x):
        return math.exp(log_value(x)[1])

    def deriv(x):
        rate = rho / phi(x) if rho else 0.0
        if d is not None:
            rate += d.derivative(x) / d(x)
        if e is not None:
            rate += e(x)
        return fn(x) * rate

    parts = [f"rho={rho!r}", f"phi={phi.label}"]
    if d is not None:
        parts.append(f"d={d.label}")
    if e is not None:
        parts.append(f"e={e.label}")
    return RealFunc(fn, label=f"gamma({', '.join(parts)})", domain=domain, positive=True,
                    deriv=deriv, log_value=log_value, log_increment=log_increment)


@dataclass(frozen=True)
class Decomposition:
    """log f = h_tilde + rho * tau; c_samples and e_estimate are filled by extraction."""

    f: RealFunc
    phi: RealFunc
    rho: float
    h_tilde: RealFunc
    c_samples: tuple[tuple[float, float], ...] = ()
    e_estimate: RealFunc | None = None

    def reassembly_error(self, xs: Sequence[float]) -> float:
        """max |log f - h_tilde - rho tau| over xs."""
        tau = time_integrator(self.phi)
        return max(abs(self.f.log_eval(x) - self.h_tilde(x) - self.rho * tau(x)) for x in xs)


def decompose(f: RealFunc, phi: RealFunc, rho: float, tol: float = 1e-10) -> Decomposition:
    """h_tilde(x) = log f(x) - rho int_1^x du/phi(u)."""
    rho = float(rho)
    tau = time_integrator(phi, tol)

    def h(x):
        sign, lf = f.signed_log(x)
        if sign <= 0:
            raise PositivityError(f"{f.label} is not positive at x={x!r}")
        return lf - rho * tau(x) if rho else lf

    h_tilde = RealFunc(h, label=f"h_tilde({f.label})",
                       domain=(max(f.domain[0], phi.domain[0]), min(f.domain[1], phi.domain[1])))
    return Decomposition(f, phi, rho, h_tilde)


def _window_slopes(xs: np.ndarray, hs: np.ndarray, window: int) -> np.ndarray:
    """Least-squares slope of h over ``window`` consecutive knots around each knot."""
    n = len(xs)
    half = window // 2
    out = np.empty(n)
    for i in range(n):
        lo = min(max(i - half, 0), n - window)
        sx = xs[lo:lo + window] - xs[i]
        sh = hs[lo:lo + window] - hs[i]
        # local quadratic, slope taken at the knot itself (removes curvature bias)
        scale = np.max(np.abs(sx))
        u = sx / scale
        coef = np.polyfit(u, sh, 2)
        out[i] = coef[1] / scale
    return out


def extract_components(dec: Decomposition, partition: BloomPartition,
                       window: int = EXTRACT_WINDOW) -> GammaRepresentation:
    """Estimate (d, e) with h_tilde = log d + int_0^x e over the partition knots.

    e is the windowed least-squares slope of h_tilde at each knot, joined
    linearly and held constant outside the knots; log d = h_tilde - int_0^x e
    at the knots, joined linearly.  The split is not unique: any o(1) part can
    move between d and e.
    """
    if len(partition) < MIN_KNOTS:
        raise ValueError(f"partition has {len(partition)} knots; at least {MIN_KNOTS} are needed")
    if window < 3 or window > len(partition):
        raise ValueError("window must be between 3 and the number of knots")
    xs = np.asarray(partition.knots, dtype=float)
    hs = np.array([dec.h_tilde(x) for x in xs])
    slopes = _window_slopes(xs, hs, window)
    e_pl = PiecewiseLinear(xs, slopes)
    # e is held at slopes[0] on [0, x_1], so int_0^x e has an exact primitive
    e_est = RealFunc(e_pl, label=f"e_hat({dec.f.label})", domain=(-math.inf, math.inf),
                     deriv=e_pl.slope, integral=e_pl.integral)
    E = np.array([e_pl.primitive(x) - e_pl.primitive(0.0) for x in xs])
    cs = hs - E
    c_pl = PiecewiseLinear(xs, cs)

    def d_log_increment(x, h):
        return c_pl(x + h) - c_pl(x)

    d = RealFunc(lambda x: math.exp(c_pl(x)), label=f"d_hat({dec.f.label})",
                 domain=(0.0, math.inf), positive=True,
                 deriv=lambda x: c_pl.slope(x) * math.exp(c_pl(x)),
                 log_value=lambda x: (1, c_pl(x)), log_increment=d_log_increment)
    c_samples = tuple(zip(xs.tolist(), cs.tolist()))
    return GammaRepresentation(dec.rho, dec.phi, d, e_est, c_samples)


def filled(dec: Decomposition, rep: GammaRepresentation) -> Decomposition:
    """The decomposition with its extracted c samples and e estimate attached."""
    return Decomposition(dec.f, dec.phi, dec.rho, dec.h_tilde, rep.c_samples, rep.e_component)


def verify_reduction(e: RealFunc, phi: RealFunc, K: TGrid = TGrid(),
                     sched: XSchedule = XSchedule(), tol: float = 1e-2) -> ConvergenceReport:
    """Profile of sup_t |int_x^{x + t phi(x)} e(v) dv| against 0."""
    def dev(t, x):
        if t == 0:
            return 0.0
        return e.integrate(x, x + shift(phi, t, x))
    return deviation_profile(dev, K.points, sched, tol)


# ---------------------------------------------------------------------------
# JSON export / import
# ---------------------------------------------------------------------------

def _dom_out(dom):
    # strict JSON has no infinities; null stands for an unbounded end
    return [v if math.isfinite(v) else None for v in dom]


def _dom_in(dom, default):
    if dom is None:
        return default
    lo, hi = dom
    return (-math.inf if lo is None else float(lo), math.inf if hi is None else float(hi))


def rep_to_json(rep: GammaRepresentation) -> str:
    """{rho, phi, d, e} with expression strings; components must be tree-backed."""
    def text(g, default):
        if g is None:
            return default
        if g.text is None:
            raise ConfigError(f"component {g.label} has no expression form")
        return g.text

    doc: dict[str, Any] = {
        "rho": float(rep.rho),
        "phi": text(rep.phi, None),
        "d": text(rep.d_component, "1"),
        "e": text(rep.e_component, "0"),
        "domains": {
            "phi": _dom_out(rep.phi.domain),
            "d": _dom_out(rep.d_component.domain if rep.d_component is not None
                          else (0.0, math.inf)),
            "e": _dom_out(rep.e_component.domain if rep.e_component is not None
                          else (-math.inf, math.inf)),
        },
    }
    return json.dumps(doc, sort_keys=True, allow_nan=False)


def rep_from_json(text: str) -> GammaRepresentation:
    try:
        doc = json.loads(text)
        rho = float(doc["rho"])
        doms = doc.get("domains", {})
        phi = parse_expr(doc["phi"], domain=_dom_in(doms.get("phi"), (0.0, math.inf)),
                         positive=True)
        d = parse_expr(doc.get("d", "1"), domain=_dom_in(doms.get("d"), (0.0, math.inf)),
                       positive=True)
        e = parse_expr(doc.get("e", "0"), domain=_dom_in(doms.get("e"), (-math.inf, math.inf)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid representation document: {exc}") from exc
    return GammaRepresentation(rho, phi, d, e)
