"""Evaluatable real functions on the positive half-line.

Every object the toolkit manipulates (auxiliary functions phi, regularly
varying f, slowly varying parts, interpolants, representations) is a
:class:`RealFunc`.  Functions written in the small expression language below
are compiled to closures; derived constructions supply their own closures.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := number | 'x' | ident '(' expr ')' | '(' expr ')'
    ident  := exp | log | sqrt

Besides plain evaluation a RealFunc offers a log-domain path
(:meth:`RealFunc.log_eval`, :meth:`RealFunc.log_increment`) so that ratios such
as f(x + t phi(x)) / f(x) stay finite when f itself overflows a double.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

from .errors import DomainError, NonFiniteError, ParseError, PositivityError, BeurlingLabError

__all__ = [
    "Const", "Var", "Neg", "BinOp", "Call", "Node",
    "RealFunc", "FamilySpec", "FAMILIES",
    "parse_expr", "to_text", "evaluate", "derivative", "builtin_family",
    "from_expr", "const_c", "power_alpha", "x_over_log", "identity_x",
    "gamma_rho_builtin", "product",
]

_EPS = 2.220446049250313e-16
_FUNCTIONS = ("exp", "log", "sqrt")


# ---------------------------------------------------------------------------
# Expression tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str  # one of exp log sqrt
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Call]


def _has_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Const):
        return False
    if isinstance(node, BinOp):
        return _has_var(node.left) or _has_var(node.right)
    return _has_var(node.arg)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.factor())
        node = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            node = BinOp("^", node, self.factor())
        return node

    def base(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "ident":
            if val == "x":
                return Var()
            if val not in _FUNCTIONS:
                raise ParseError(f"unknown identifier {val!r}", pos)
            self.expect("(")
            if self.peek()[1] == ")":
                raise ParseError(f"{val} takes exactly one argument, got 0", self.peek()[2])
            arg = self.expr()
            if self.peek()[1] == ",":
                raise ParseError(f"{val} takes exactly one argument", self.peek()[2])
            self.expect(")")
            return Call(val, arg)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos)


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Const) and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return 3
    return 5


def to_text(node: Node) -> str:
    """Render a tree with minimal parentheses.

    The text parses back to an equivalent tree (a negative constant comes
    back as a negated positive one), and printing that tree again gives the
    same text.
    """
    if isinstance(node, Const):
        if not math.isfinite(node.value):
            raise ValueError("non-finite constant cannot be printed")
        if node.value < 0 or math.copysign(1.0, node.value) < 0:
            return "-" + repr(-node.value)
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        return "-" + (inner if _prec(node.arg) >= 3 else f"({inner})")
    level = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= 4:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < level:
        left = f"({left})"
    if _prec(node.right) <= level:
        right = f"({right})"
    return f"{left}{node.op}{right}"


# ---------------------------------------------------------------------------
# Compilation of trees to closures
# ---------------------------------------------------------------------------

def _compile_value(node: Node) -> Callable[[float], float]:
    if isinstance(node, Const):
        c = node.value
        return lambda x: c
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Neg):
        a = _compile_value(node.arg)
        return lambda x: -a(x)
    if isinstance(node, Call):
        a = _compile_value(node.arg)
        fn = {"exp": math.exp, "log": math.log, "sqrt": math.sqrt}[node.name]
        return lambda x: fn(a(x))
    a, b = _compile_value(node.left), _compile_value(node.right)
    op = node.op
    if op == "+":
        return lambda x: a(x) + b(x)
    if op == "-":
        return lambda x: a(x) - b(x)
    if op == "*":
        return lambda x: a(x) * b(x)
    if op == "/":
        return lambda x: a(x) / b(x)
    if isinstance(node.right, Const):
        c = node.right.value
        return lambda x: math.pow(a(x), c)
    return lambda x: math.pow(a(x), b(x))


def _signed_log(v: float) -> tuple[int, float]:
    if v > 0:
        return 1, math.log(v)
    if v < 0:
        return -1, math.log(-v)
    if v == 0:
        return 0, -math.inf
    raise NonFiniteError("nan in log-domain evaluation")


def _signed_logaddexp(p: tuple[int, float], q: tuple[int, float]) -> tuple[int, float]:
    (s1, l1), (s2, l2) = p, q
    if s1 == 0:
        return q
    if s2 == 0:
        return p
    if s1 == s2:
        hi, lo = max(l1, l2), min(l1, l2)
        return s1, hi + math.log1p(math.exp(lo - hi))
    if l1 == l2:
        return 0, -math.inf
    if l1 > l2:
        return s1, l1 + math.log1p(-math.exp(l2 - l1))
    return s2, l2 + math.log1p(-math.exp(l1 - l2))


def _compile_log(node: Node) -> Callable[[float], tuple[int, float]]:
    """Compile to x -> (sign, log|value|), avoiding overflow of exp()."""
    if isinstance(node, (Const, Var)):
        v = _compile_value(node)
        return lambda x: _signed_log(v(x))
    if isinstance(node, Neg):
        a = _compile_log(node.arg)

        def neg(x):
            s, l = a(x)
            return -s, l
        return neg
    if isinstance(node, Call):
        if node.name == "exp":
            av = _compile_value(node.arg)
            return lambda x: (1, av(x))
        al = _compile_log(node.arg)
        if node.name == "sqrt":
            def sqrt_(x):
                s, l = al(x)
                if s < 0:
                    raise ValueError("sqrt of negative value")
                return (0, -math.inf) if s == 0 else (1, 0.5 * l)
            return sqrt_

        def log_(x):
            s, l = al(x)
            if s <= 0:
                raise ValueError("log of non-positive value")
            return _signed_log(l)
        return log_
    op = node.op
    if op in ("+", "-"):
        av, bv = _compile_value(node.left), _compile_value(node.right)
        al, bl = _compile_log(node.left), _compile_log(node.right)
        sign = 1 if op == "+" else -1

        def addsub(x):
            try:
                r = av(x) + sign * bv(x)
                if math.isfinite(r):
                    return _signed_log(r)
            except OverflowError:
                pass
            sb, lb = bl(x)
            return _signed_logaddexp(al(x), (sign * sb, lb))
        return addsub
    al, bl = _compile_log(node.left), _compile_log(node.right)
    if op == "*":
        def mul(x):
            (sa, la), (sb, lb) = al(x), bl(x)
            if sa == 0 or sb == 0:
                return 0, -math.inf
            return sa * sb, la + lb
        return mul
    if op == "/":
        def div(x):
            (sa, la), (sb, lb) = al(x), bl(x)
            if sb == 0:
                raise ZeroDivisionError("division by zero")
            if sa == 0:
                return 0, -math.inf
            return sa * sb, la - lb
        return div
    bv = _compile_value(node.right)

    def pow_(x):
        sa, la = al(x)
        e = bv(x)
        if sa > 0:
            return 1, e * la
        if sa == 0:
            if e > 0:
                return 0, -math.inf
            raise ZeroDivisionError("zero to a non-positive power")
        if e != math.floor(e):
            raise ValueError("negative base with non-integer exponent")
        return (1 if int(e) % 2 == 0 else -1), e * la
    return pow_


def _compile_log_increment(node: Node) -> Callable[[float, float], float]:
    """Compile to (x, h) -> log|f(x+h)| - log|f(x)| with cancellation-free leaves."""
    if isinstance(node, Const):
        return lambda x, h: 0.0
    if isinstance(node, Var):
        def var(x, h):
            if x <= 0:
                return math.log(abs(x + h)) - math.log(abs(x))
            return math.log1p(h / x)
        return var
    if isinstance(node, Neg):
        return _compile_log_increment(node.arg)
    if isinstance(node, Call) and node.name == "exp":
        av = _compile_value(node.arg)
        return lambda x, h: av(x + h) - av(x)
    if isinstance(node, Call) and node.name == "sqrt":
        a = _compile_log_increment(node.arg)
        return lambda x, h: 0.5 * a(x, h)
    if isinstance(node, BinOp) and node.op in ("*", "/"):
        a, b = _compile_log_increment(node.left), _compile_log_increment(node.right)
        if node.op == "*":
            return lambda x, h: a(x, h) + b(x, h)
        return lambda x, h: a(x, h) - b(x, h)
    if isinstance(node, BinOp) and node.op == "^" and not _has_var(node.right):
        a = _compile_log_increment(node.left)
        e = _compile_value(node.right)(1.0)
        return lambda x, h: e * a(x, h)
    lg = _compile_log(node)
    return lambda x, h: lg(x + h)[1] - lg(x)[1]


def _compile_deriv(node: Node) -> Callable[[float], tuple[float, float]]:
    """Forward-mode compile to x -> (value, derivative)."""
    if isinstance(node, Const):
        c = node.value
        return lambda x: (c, 0.0)
    if isinstance(node, Var):
        return lambda x: (x, 1.0)
    if isinstance(node, Neg):
        a = _compile_deriv(node.arg)

        def neg(x):
            v, d = a(x)
            return -v, -d
        return neg
    if isinstance(node, Call):
        a = _compile_deriv(node.arg)
        if node.name == "exp":
            def exp_(x):
                v, d = a(x)
                e = math.exp(v)
                return e, e * d
            return exp_
        if node.name == "log":
            def log_(x):
                v, d = a(x)
                return math.log(v), d / v
            return log_

        def sqrt_(x):
            v, d = a(x)
            r = math.sqrt(v)
            return r, d / (2.0 * r)
        return sqrt_
    a, b = _compile_deriv(node.left), _compile_deriv(node.right)
    op = node.op
    if op == "+":
        def add(x):
            (u, du), (v, dv) = a(x), b(x)
            return u + v, du + dv
        return add
    if op == "-":
        def sub(x):
            (u, du), (v, dv) = a(x), b(x)
            return u - v, du - dv
        return sub
    if op == "*":
        def mul(x):
            (u, du), (v, dv) = a(x), b(x)
            return u * v, du * v + u * dv
        return mul
    if op == "/":
        def div(x):
            (u, du), (v, dv) = a(x), b(x)
            return u / v, (du * v - u * dv) / (v * v)
        return div
    if not _has_var(node.right):
        def pow_const(x):
            (u, du), (c, _) = a(x), b(x)
            if c == 0:
                return 1.0, 0.0
            return math.pow(u, c), c * math.pow(u, c - 1.0) * du
        return pow_const

    def pow_(x):
        (u, du), (v, dv) = a(x), b(x)
        p = math.pow(u, v)
        return p, p * (dv * math.log(u) + v * du / u)
    return pow_


# ---------------------------------------------------------------------------
# RealFunc
# ---------------------------------------------------------------------------

_ARITH_ERRORS = (ValueError, OverflowError, ZeroDivisionError)


class RealFunc:
    """An immutable real function on an interval of the real line.

    The domain ``(lo, hi)`` is open at ``lo``; a finite ``hi`` is included.
    With ``positive=True`` every evaluation is checked to be > 0.

    Optional hooks let derived constructions provide exact or cheaper paths:
    ``deriv(x)``, ``log_value(x) -> (sign, log|f|)``,
    ``log_increment(x, h) -> log f(x+h) - log f(x)`` and
    ``integral(a, b) -> int_a^b f``.
    """

    def __init__(
        self,
        fn: Callable[[float], float],
        *,
        label: str,
        domain: tuple[float, float] = (0.0, math.inf),
        positive: bool = False,
        deriv: Callable[[float], float] | None = None,
        log_value: Callable[[float], tuple[int, float]] | None = None,
        log_increment: Callable[[float, float], float] | None = None,
        integral: Callable[[float, float], float] | None = None,
        expr: Node | None = None,
    ):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise ValueError(f"empty domain ({lo}, {hi})")
        self._fn = fn
        self.label = label
        self.domain = (lo, hi)
        self.positive = positive
        self._deriv = deriv
        self._log_value = log_value
        self._log_increment = log_increment
        self._integral = integral
        self.expr = expr

    def __repr__(self) -> str:
        return f"RealFunc({self.label!r}, domain={self.domain})"

    @property
    def text(self) -> str | None:
        """Expression text when the function is tree-backed, else None."""
        return None if self.expr is None else to_text(self.expr)

    @property
    def is_identity(self) -> bool:
        return isinstance(self.expr, Var)

    def in_domain(self, x: float) -> bool:
        lo, hi = self.domain
        return math.isfinite(x) and lo < x <= hi

    def check_domain(self, x: float) -> None:
        if not self.in_domain(x):
            raise DomainError(f"{self.label}: x={x!r} outside domain {self.domain}")

    def _guard(self, value: float, x: float) -> float:
        if not math.isfinite(value):
            raise NonFiniteError(f"{self.label}: non-finite value at x={x!r}")
        if self.positive and value <= 0:
            raise PositivityError(f"{self.label}: value {value!r} <= 0 at x={x!r}")
        return value

    def __call__(self, x: float) -> float:
        self.check_domain(x)
        try:
            value = self._fn(x)
        except BeurlingLabError:
            raise
        except _ARITH_ERRORS as exc:
            raise NonFiniteError(f"{self.label}: {exc} at x={x!r}") from exc
        return self._guard(float(value), x)

    evaluate = __call__

    def derivative(self, x: float) -> float:
        self.check_domain(x)
        if self._deriv is not None:
            try:
                d = self._deriv(x)
            except BeurlingLabError:
                raise
            except _ARITH_ERRORS as exc:
                raise NonFiniteError(f"{self.label}': {exc} at x={x!r}") from exc
            if not math.isfinite(d):
                raise NonFiniteError(f"{self.label}': non-finite derivative at x={x!r}")
            return float(d)
        return self.numeric_derivative(x)

    def numeric_derivative(self, x: float) -> float:
        """Central difference with step cbrt(eps) * max(1, |x|)."""
        self.check_domain(x)
        h = _EPS ** (1.0 / 3.0) * max(1.0, abs(x))
        if self.in_domain(x - h) and self.in_domain(x + h):
            return (self(x + h) - self(x - h)) / (2.0 * h)
        if self.in_domain(x + 2 * h):
            return (-3.0 * self(x) + 4.0 * self(x + h) - self(x + 2 * h)) / (2.0 * h)
        return (3.0 * self(x) - 4.0 * self(x - h) + self(x - 2 * h)) / (2.0 * h)

    def signed_log(self, x: float) -> tuple[int, float]:
        self.check_domain(x)
        try:
            if self._log_value is not None:
                return self._log_value(x)
            return _signed_log(self._fn(x))
        except BeurlingLabError:
            raise
        except _ARITH_ERRORS as exc:
            raise NonFiniteError(f"{self.label}: {exc} at x={x!r}") from exc

    def log_eval(self, x: float) -> float:
        """log f(x), computed without forming f(x) where possible."""
        sign, value = self.signed_log(x)
        if sign <= 0:
            raise PositivityError(f"{self.label}: log of non-positive value at x={x!r}")
        if not math.isfinite(value):
            raise NonFiniteError(f"{self.label}: non-finite log at x={x!r}")
        return value

    def log_increment(self, x: float, h: float) -> float:
        """log f(x + h) - log f(x) for positive f."""
        self.check_domain(x)
        self.check_domain(x + h)
        if h == 0:
            return 0.0
        try:
            if self._log_increment is not None:
                r = self._log_increment(x, h)
            else:
                r = self.log_eval(x + h) - self.log_eval(x)
        except BeurlingLabError:
            raise
        except _ARITH_ERRORS as exc:
            raise NonFiniteError(f"{self.label}: {exc} near x={x!r}") from exc
        if not math.isfinite(r):
            raise NonFiniteError(f"{self.label}: non-finite log increment at x={x!r}")
        return r

    def integrate(self, a: float, b: float, tol: float = 1e-10) -> float:
        """Integral of f over [a, b] (signed)."""
        if self._integral is not None:
            return float(self._integral(a, b))
        from .quadrature import adaptive_simpson

        return adaptive_simpson(self, a, b, tol)

    def __mul__(self, other: "RealFunc | float") -> "RealFunc":
        return product(self, other)

    __rmul__ = __mul__


def _intersect(d1, d2):
    lo, hi = max(d1[0], d2[0]), min(d1[1], d2[1])
    if not lo < hi:
        raise DomainError(f"domains {d1} and {d2} do not overlap")
    return lo, hi


def product(f: RealFunc, g: "RealFunc | float") -> RealFunc:
    """Pointwise product; a number multiplies as a constant function."""
    if not isinstance(g, RealFunc):
        c = float(g)
        g = from_expr(Const(c), label=repr(c), domain=f.domain, positive=c > 0)
    domain = _intersect(f.domain, g.domain)
    positive = f.positive and g.positive
    if f.expr is not None and g.expr is not None:
        return from_expr(BinOp("*", f.expr, g.expr), domain=domain, positive=positive)

    def fn(x):
        return f(x) * g(x)

    def deriv(x):
        return f.derivative(x) * g(x) + f(x) * g.derivative(x)

    def log_value(x):
        sf, lf = f.signed_log(x)
        sg, lg = g.signed_log(x)
        return sf * sg, lf + lg

    def log_increment(x, h):
        return f.log_increment(x, h) + g.log_increment(x, h)

    return RealFunc(fn, label=f"({f.label})*({g.label})", domain=domain, positive=positive,
                    deriv=deriv, log_value=log_value, log_increment=log_increment)


def from_expr(node: Node, *, label: str | None = None,
              domain: tuple[float, float] = (0.0, math.inf), positive: bool = False) -> RealFunc:
    """Wrap an expression tree as a RealFunc with all fast paths compiled."""
    value = _compile_value(node)
    logv = _compile_log(node)
    inc = _compile_log_increment(node)
    dv = _compile_deriv(node)
    if label is None:
        label = to_text(node)

    def log_increment(x, h):
        s0, _ = logv(x)
        s1, _ = logv(x + h)
        if s0 <= 0 or s1 <= 0:
            raise PositivityError(f"{label}: ratio of non-positive values near x={x!r}")
        return inc(x, h)

    return RealFunc(value, label=label, domain=domain, positive=positive,
                    deriv=lambda x: dv(x)[1], log_value=logv,
                    log_increment=log_increment, expr=node)


def parse_expr(text: str, *, domain: tuple[float, float] = (0.0, math.inf),
               positive: bool = False, label: str | None = None) -> RealFunc:
    """Parse expression text into a RealFunc.

    >>> parse_expr("sqrt(x)")(4.0)
    2.0
    """
    node = _Parser(text).parse()
    return from_expr(node, label=label or text.strip(), domain=domain, positive=positive)


def evaluate(f: RealFunc, x: float) -> float:
    return f(x)


def derivative(f: RealFunc, x: float) -> float:
    return f.derivative(x)


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilySpec:
    """A named catalog member and its parameters."""

    name: str
    params: dict = field(default_factory=dict)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items()))))


def const_c(c: float = 1.0) -> RealFunc:
    if not (math.isfinite(c) and c > 0):
        raise ValueError(f"const_c requires c > 0, got {c!r}")
    return from_expr(Const(float(c)), label=f"const_c({c!r})", positive=True)


def power_alpha(alpha: float) -> RealFunc:
    if not 0 <= alpha < 1:
        raise ValueError(f"power_alpha requires 0 <= alpha < 1, got {alpha!r}")
    return from_expr(BinOp("^", Var(), Const(float(alpha))),
                     label=f"power_alpha({alpha!r})", positive=True)


def x_over_log() -> RealFunc:
    # positive only for x > 1
    return from_expr(BinOp("/", Var(), Call("log", Var())), label="x_over_log",
                     domain=(1.0, math.inf), positive=True)


def identity_x() -> RealFunc:
    return from_expr(Var(), label="identity_x", positive=True)


def gamma_rho_builtin(rho: float, alpha: float = 0.5) -> RealFunc:
    """Closed form of exp(rho * int_1^x du / u^alpha), a member of Gamma_rho(x^alpha)."""
    if not 0 <= alpha < 1:
        raise ValueError(f"gamma_rho_builtin requires 0 <= alpha < 1, got {alpha!r}")
    beta = 1.0 - alpha
    inner = BinOp("-", BinOp("^", Var(), Const(beta)), Const(1.0))
    node = Call("exp", BinOp("*", Const(float(rho) / beta), inner))
    return from_expr(node, label=f"gamma_rho_builtin({rho!r}, {alpha!r})", positive=True)


FAMILIES: dict[str, tuple[Callable[..., RealFunc], dict[str, str]]] = {
    "const_c": (const_c, {"c": "c > 0"}),
    "power_alpha": (power_alpha, {"alpha": "0 <= alpha < 1"}),
    "x_over_log": (x_over_log, {}),
    "identity_x": (identity_x, {}),
    "gamma_rho_builtin": (gamma_rho_builtin, {"rho": "real", "alpha": "0 <= alpha < 1 (default 0.5)"}),
}


def builtin_family(spec: FamilySpec) -> RealFunc:
    try:
        ctor, allowed = FAMILIES[spec.name]
    except KeyError:
        raise ValueError(f"unknown family {spec.name!r}") from None
    unknown = set(spec.params) - set(allowed)
    if unknown:
        raise ValueError(f"{spec.name}: unknown parameter(s) {sorted(unknown)}")
    return ctor(**{k: float(v) for k, v in spec.params.items()})
