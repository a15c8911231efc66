"""Numeric evaluation and random-sampling equivalence checking.

``evaluate`` is a straightforward recursive interpreter (exact rational
subtrees are folded with Fractions before float conversion).  ``compile_expr``
turns an expression into a plain Python lambda for the hot paths (ODE
integration, repeated equivalence trials).  ``equivalent`` decides equality
of two expressions by evaluating both at random points, in the style of
polynomial identity testing; it is the single oracle used for all symbolic
identities in this package.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .nodes import (
    Add,
    Angle,
    Expr,
    ExprError,
    Func,
    Jet,
    Mul,
    Num,
    Param,
    PhiSymbol,
    Pow,
    SigmaSymbol,
    contains_sigma_symbol,
    jets_in,
    params_in,
    phi_symbols_in,
)


class EvaluationError(ExprError):
    """Division by zero, angle at the origin, or an unbound symbol."""


SIGMA_EVAL_NAME = "sigma"


def evaluate(e: Expr, point: dict[tuple[int, int], float], params: dict[str, float] | None = None):
    """Evaluate at a point; jets are looked up as (index, order) pairs."""
    params = params or {}

    def rec(node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Jet):
            key = (node.index, node.order)
            if key not in point:
                raise EvaluationError(f"point has no value for jet {key}")
            return point[key]
        if isinstance(node, Param):
            if node.name not in params:
                raise EvaluationError(f"unbound parameter {node.name!r}")
            return params[node.name]
        if isinstance(node, PhiSymbol):
            if node.eval_name not in params:
                raise EvaluationError(f"unbound symbol {node.eval_name!r}")
            return params[node.eval_name]
        if isinstance(node, SigmaSymbol):
            if SIGMA_EVAL_NAME not in params:
                raise EvaluationError("unbound abstract conformal factor")
            return params[SIGMA_EVAL_NAME]
        if isinstance(node, Add):
            return sum(rec(t) for t in node.terms)
        if isinstance(node, Mul):
            out = Fraction(1)
            for f in node.factors:
                out = out * rec(f)
            return out
        if isinstance(node, Pow):
            base = rec(node.base)
            if node.exponent < 0 and base == 0:
                raise EvaluationError("division by zero")
            return base**node.exponent
        if isinstance(node, Func):
            return getattr(math, node.name)(rec(node.arg))
        if isinstance(node, Angle):
            y, x = rec(node.y), rec(node.x)
            if x == 0 and y == 0:
                raise EvaluationError("polar angle undefined at the origin")
            return math.atan2(y, x)
        raise ExprError(f"cannot evaluate node {node!r}")

    value = rec(e)
    return float(value)


def _codegen(e: Expr) -> str:
    if isinstance(e, Num):
        if e.value.denominator == 1:
            return repr(e.value.numerator)
        return f"({e.value.numerator}/{e.value.denominator})"
    if isinstance(e, Jet):
        return f"J[({e.index},{e.order})]"
    if isinstance(e, Param):
        return f"P[{e.name!r}]"
    if isinstance(e, PhiSymbol):
        return f"P[{e.eval_name!r}]"
    if isinstance(e, SigmaSymbol):
        return f"P[{SIGMA_EVAL_NAME!r}]"
    if isinstance(e, Add):
        return "(" + "+".join(_codegen(t) for t in e.terms) + ")"
    if isinstance(e, Mul):
        return "(" + "*".join(_codegen(f) for f in e.factors) + ")"
    if isinstance(e, Pow):
        return f"({_codegen(e.base)})**({e.exponent})"
    if isinstance(e, Func):
        return f"{e.name}({_codegen(e.arg)})"
    if isinstance(e, Angle):
        return f"atan2({_codegen(e.y)},{_codegen(e.x)})"
    raise ExprError(f"cannot compile node {e!r}")


_COMPILE_ENV = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "atan2": math.atan2,
    "__builtins__": {},
}


def compile_expr(e: Expr):
    """Compile to a callable f(jets_dict, params_dict) -> float."""
    src = "lambda J, P: " + _codegen(e)
    return eval(src, dict(_COMPILE_ENV))


def free_symbols(*exprs: Expr):
    """Union of jets, parameters, and abstract sigma symbols."""
    jets: set[tuple[int, int]] = set()
    names: set[str] = set()
    for e in exprs:
        jets |= jets_in(e)
        names |= params_in(e)
        names |= {p.eval_name for p in phi_symbols_in(e)}
        if contains_sigma_symbol(e):
            names.add(SIGMA_EVAL_NAME)
    return jets, names


DEFAULT_DOMAIN = (0.1, 2.0)


def sample_value(rng: random.Random, domain=DEFAULT_DOMAIN) -> float:
    """Uniform draw from [-hi,-lo] U [lo,hi], avoiding singular loci near 0."""
    lo, hi = domain
    magnitude = rng.uniform(lo, hi)
    return magnitude if rng.random() < 0.5 else -magnitude


@dataclass
class EquivalenceResult:
    ok: bool
    trials: int
    witness: dict | None = None
    message: str = ""

    def __bool__(self):
        return self.ok


def equivalent(
    e1: Expr,
    e2: Expr,
    trials: int = 20,
    tol: float = 1e-9,
    domain=DEFAULT_DOMAIN,
    params: dict[str, float] | None = None,
    rng: random.Random | None = None,
    max_resamples: int = 100,
) -> EquivalenceResult:
    """Probabilistic equality check at ``trials`` random points.

    Passes iff |e1 - e2| <= tol * (1 + max(|e1|, |e2|)) at every sampled
    point.  Evaluation errors (singular loci) trigger a bounded resample.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng or random.Random(0)
    params = params or {}
    jets, names = free_symbols(e1, e2)
    f1, f2 = compile_expr(e1), compile_expr(e2)
    done = 0
    resamples = 0
    last_error = None
    while done < trials:
        point = {key: sample_value(rng, domain) for key in jets}
        bound = dict(params)
        for name in names:
            if name not in bound:
                bound[name] = sample_value(rng, domain)
        try:
            v1 = f1(point, bound)
            v2 = f2(point, bound)
        except (ArithmeticError, ValueError, KeyError) as err:
            resamples += 1
            last_error = err
            if resamples > max_resamples:
                return EquivalenceResult(
                    False,
                    done,
                    message=f"exhausted resamples after evaluation errors: {last_error}",
                )
            continue
        if not (math.isfinite(v1) and math.isfinite(v2)):
            resamples += 1
            if resamples > max_resamples:
                return EquivalenceResult(False, done, message="non-finite values")
            continue
        if abs(v1 - v2) > tol * (1.0 + max(abs(v1), abs(v2))):
            witness = {
                "point": {f"q{i}_d{s}": v for (i, s), v in sorted(point.items())},
                "params": {k: bound[k] for k in sorted(bound)},
                "lhs": v1,
                "rhs": v2,
            }
            return EquivalenceResult(False, done + 1, witness=witness)
        done += 1
    return EquivalenceResult(True, done)
