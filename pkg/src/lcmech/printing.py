"""Text and LaTeX rendering of expressions.

The text form uses the same grammar the parser accepts, so printing and
reparsing round-trips (abstract-mode symbols, which have no input syntax,
are rendered for display only).
"""

from __future__ import annotations

from .nodes import (
    Add,
    Angle,
    Expr,
    Func,
    Jet,
    Mul,
    Num,
    Param,
    PhiSymbol,
    Pow,
    SigmaSymbol,
)

_ATOM, _POW, _MUL, _ADD = 4, 3, 2, 1

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "theta", "kappa",
    "lambda", "mu", "nu", "xi", "rho", "sigma", "tau", "phi", "chi",
    "psi", "omega",
}
_GREEK_ALIAS = {"lam": "lambda"}


def _coord(names, index: int) -> str:
    if names and 1 <= index <= len(names):
        return names[index - 1]
    return f"q{index}"


def _jet_text(e: Jet, names) -> str:
    base = _coord(names, e.index)
    if e.order == 0:
        return base
    if e.order <= 3:
        return base + "'" * e.order
    return f"{base}({e.order})"


def to_text(e: Expr, names: list[str] | None = None) -> str:
    text, _ = _render(e, names)
    return text


def _paren(text: str, level: int, need: int) -> str:
    return f"({text})" if level < need else text


def _render(e: Expr, names) -> tuple[str, int]:
    if isinstance(e, Num):
        if e.value.denominator == 1:
            text = str(e.value.numerator)
            return text, (_ATOM if e.value >= 0 else _ADD)
        return f"{e.value.numerator}/{e.value.denominator}", _MUL
    if isinstance(e, Jet):
        return _jet_text(e, names), _ATOM
    if isinstance(e, Param):
        return e.name, _ATOM
    if isinstance(e, SigmaSymbol):
        return "sigma", _ATOM
    if isinstance(e, PhiSymbol):
        return "phi[" + ",".join(str(i) for i in e.indices) + "]", _ATOM
    if isinstance(e, Add):
        parts = []
        for t in e.terms:
            text, level = _render(t, names)
            text = _paren(text, level, _ADD)
            if parts and text.startswith("-"):
                parts.append(" - " + text[1:])
            elif parts:
                parts.append(" + " + text)
            else:
                parts.append(text)
        return "".join(parts), _ADD
    if isinstance(e, Mul):
        sign = ""
        factors = list(e.factors)
        # A leading negative coefficient reads better as a sign.
        if factors and isinstance(factors[0], Num) and factors[0].value < 0:
            sign = "-"
            head = Num(-factors[0].value)
            factors = factors[1:] if head.value == 1 and len(factors) > 1 else [head] + factors[1:]
        parts = []
        for f in factors:
            text, level = _render(f, names)
            parts.append(_paren(text, level, _MUL))
        return sign + "*".join(parts), _MUL
    if isinstance(e, Pow):
        base, level = _render(e.base, names)
        base = _paren(base, level, _ATOM)
        if e.exponent < 0:
            return f"{base}^({e.exponent})", _POW
        return f"{base}^{e.exponent}", _POW
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg, names)})", _ATOM
    if isinstance(e, Angle):
        return f"atan2({to_text(e.y, names)}, {to_text(e.x, names)})", _ATOM
    raise TypeError(f"cannot print {e!r}")


def _latex_name(name: str) -> str:
    name = _GREEK_ALIAS.get(name, name)
    if name in _GREEK:
        return "\\" + name
    return name


def _jet_latex(e: Jet, names) -> str:
    base = _latex_name(_coord(names, e.index))
    if e.order == 0:
        return base
    if e.order == 1:
        return f"\\dot{{{base}}}"
    if e.order == 2:
        return f"\\ddot{{{base}}}"
    return f"{base}_{{({e.order})}}"


def to_latex(e: Expr, names: list[str] | None = None) -> str:
    text, _ = _render_latex(e, names)
    return text


def _render_latex(e: Expr, names) -> tuple[str, int]:
    if isinstance(e, Num):
        if e.value.denominator == 1:
            text = str(e.value.numerator)
            return text, (_ATOM if e.value >= 0 else _ADD)
        sign = "-" if e.value < 0 else ""
        text = f"{sign}\\frac{{{abs(e.value.numerator)}}}{{{e.value.denominator}}}"
        return text, (_ATOM if not sign else _ADD)
    if isinstance(e, Jet):
        return _jet_latex(e, names), _ATOM
    if isinstance(e, Param):
        return _latex_name(e.name), _ATOM
    if isinstance(e, SigmaSymbol):
        return "\\sigma", _ATOM
    if isinstance(e, PhiSymbol):
        sub = " ".join(str(i) for i in e.indices)
        return f"\\varphi_{{{sub}}}", _ATOM
    if isinstance(e, Add):
        parts = []
        for t in e.terms:
            text, level = _render_latex(t, names)
            text = f"\\left({text}\\right)" if level < _ADD else text
            if parts and text.startswith("-"):
                parts.append(" - " + text[1:])
            elif parts:
                parts.append(" + " + text)
            else:
                parts.append(text)
        return "".join(parts), _ADD
    if isinstance(e, Mul):
        sign = ""
        factors = list(e.factors)
        if factors and isinstance(factors[0], Num) and factors[0].value < 0:
            sign = "-"
            head = Num(-factors[0].value)
            factors = factors[1:] if head.value == 1 and len(factors) > 1 else [head] + factors[1:]
        parts = []
        for f in factors:
            text, level = _render_latex(f, names)
            parts.append(f"\\left({text}\\right)" if level < _MUL else text)
        return sign + " ".join(parts), _MUL
    if isinstance(e, Pow):
        base, level = _render_latex(e.base, names)
        if level < _ATOM:
            base = f"\\left({base}\\right)"
        return f"{base}^{{{e.exponent}}}", _POW
    if isinstance(e, Func):
        body = to_latex(e.arg, names)
        if e.name == "exp":
            return f"e^{{{body}}}", _ATOM
        return f"\\{e.name}\\left({body}\\right)", _ATOM
    if isinstance(e, Angle):
        return (
            f"\\operatorname{{atan2}}\\left({to_latex(e.y, names)},"
            f" {to_latex(e.x, names)}\\right)",
            _ATOM,
        )
    raise TypeError(f"cannot print {e!r}")
