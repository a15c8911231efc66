"""Immutable expression trees over jet coordinates.

The expression language is deliberately small: exact rational constants,
jet coordinates q^i_(s), opaque named parameters, sums, products, integer
powers, and the elementary functions exp/sin/cos plus a first-class
two-argument polar-angle node.  Two extra atoms support "abstract mode",
where the conformal factor is left unspecified and its partial derivatives
appear as opaque symmetric symbols.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Numeric = Union[int, Fraction]


class ExprError(Exception):
    """Base class for expression-level failures."""


class JetOrderError(ExprError):
    """A derivative would exceed the jet space's maximum order."""


@dataclass(frozen=True)
class JetSpace:
    """Ambient jet space: r base coordinates carrying derivatives up to max_jet.

    ``order`` is the highest derivative the Lagrangian may depend on; the
    generated equations contain derivatives up to 2*order, so ``max_jet``
    defaults to 2*order + 1 (one spare order for diagnostics).
    """

    dim: int
    order: int
    max_jet: int = -1

    def __post_init__(self):
        if self.max_jet < 0:
            object.__setattr__(self, "max_jet", 2 * self.order + 1)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.max_jet < 2 * self.order:
            raise ValueError("max_jet must be >= 2*order")

    def check(self, index: int, order: int):
        if not (1 <= index <= self.dim):
            raise ExprError(f"coordinate index {index} outside 1..{self.dim}")
        if not (0 <= order <= self.max_jet):
            raise JetOrderError(
                f"jet order {order} outside 0..{self.max_jet}; enlarge max_jet"
            )

    def coordinates(self) -> list["Jet"]:
        return [Jet(i, 0) for i in range(1, self.dim + 1)]


class Expr:
    """Base of all expression nodes.  Instances are immutable and hashable."""

    __slots__ = ()

    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Num(Fraction(-1)), as_expr(other)))))

    def __rsub__(self, other):
        return Add((as_expr(other), Mul((Num(Fraction(-1)), self))))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(as_expr(other), -1)))

    def __rtruediv__(self, other):
        return Mul((as_expr(other), Pow(self, -1)))

    def __neg__(self):
        return Mul((Num(Fraction(-1)), self))

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise TypeError("only integer exponents are supported")
        return Pow(self, exponent)

    def children(self) -> tuple["Expr", ...]:
        return ()

    def __str__(self):
        from .printing import to_text

        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Jet(Expr):
    """The jet coordinate q^index with derivative order ``order`` (index 1-based)."""

    index: int
    order: int


@dataclass(frozen=True)
class Param(Expr):
    """Opaque named constant (e.g. a mass), bound at evaluation time."""

    name: str


@dataclass(frozen=True)
class SigmaSymbol(Expr):
    """The conformal factor left opaque (abstract mode)."""


@dataclass(frozen=True)
class PhiSymbol(Expr):
    """Opaque mixed partial of the abstract conformal factor.

    ``indices`` is kept sorted so that the symbol is symmetric by construction.
    """

    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    @property
    def eval_name(self) -> str:
        return "phi_" + "_".join(str(i) for i in self.indices)


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple[Expr, ...]

    def children(self):
        return self.terms


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple[Expr, ...]

    def children(self):
        return self.factors


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def children(self):
        return (self.base,)


FUNCTIONS = ("exp", "sin", "cos")


@dataclass(frozen=True)
class Func(Expr):
    """Elementary function application: exp, sin, or cos."""

    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ExprError(f"unknown function {self.name!r}")

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Angle(Expr):
    """atan2(y, x): the polar angle of (x, y), undefined at the origin."""

    y: Expr
    x: Expr

    def children(self):
        return (self.y, self.x)


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Num(Fraction(x))
    raise TypeError(f"cannot convert {x!r} to Expr")


def num(x: Numeric) -> Num:
    return Num(Fraction(x))


def add(*terms) -> Expr:
    terms = tuple(as_expr(t) for t in terms)
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(terms)


def mul(*factors) -> Expr:
    factors = tuple(as_expr(f) for f in factors)
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return Mul(factors)


def div(a, b) -> Expr:
    return Mul((as_expr(a), Pow(as_expr(b), -1)))


def exp(arg) -> Expr:
    return Func("exp", as_expr(arg))


def sin(arg) -> Expr:
    return Func("sin", as_expr(arg))


def cos(arg) -> Expr:
    return Func("cos", as_expr(arg))


def angle(y, x) -> Expr:
    return Angle(as_expr(y), as_expr(x))


_KIND_RANK = {
    Num: 0,
    Param: 1,
    Jet: 2,
    PhiSymbol: 3,
    SigmaSymbol: 4,
    Func: 5,
    Angle: 6,
    Pow: 7,
    Mul: 8,
    Add: 9,
}


def sort_key(e: Expr):
    """Total structural order on expressions, used for canonical forms."""
    k = _KIND_RANK[type(e)]
    if isinstance(e, Num):
        return (k, e.value.numerator, e.value.denominator)
    if isinstance(e, Param):
        return (k, e.name)
    if isinstance(e, Jet):
        return (k, e.index, e.order)
    if isinstance(e, PhiSymbol):
        return (k, e.indices)
    if isinstance(e, SigmaSymbol):
        return (k,)
    if isinstance(e, Func):
        return (k, e.name, sort_key(e.arg))
    if isinstance(e, Angle):
        return (k, sort_key(e.y), sort_key(e.x))
    if isinstance(e, Pow):
        return (k, sort_key(e.base), e.exponent)
    children = e.children()
    return (k, len(children)) + tuple(sort_key(c) for c in children)


def walk(e: Expr) -> Iterable[Expr]:
    """Yield every node of the tree, parents before children."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(node.children())


def jets_in(e: Expr) -> set[tuple[int, int]]:
    return {(n.index, n.order) for n in walk(e) if isinstance(n, Jet)}


def params_in(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Param)}


def phi_symbols_in(e: Expr) -> set[PhiSymbol]:
    return {n for n in walk(e) if isinstance(n, PhiSymbol)}


def contains_sigma_symbol(e: Expr) -> bool:
    return any(isinstance(n, SigmaSymbol) for n in walk(e))


def contains_exp(e: Expr) -> bool:
    return any(isinstance(n, Func) and n.name == "exp" for n in walk(e))


def max_jet_order(e: Expr) -> int:
    orders = [o for (_, o) in jets_in(e)]
    return max(orders, default=-1)
