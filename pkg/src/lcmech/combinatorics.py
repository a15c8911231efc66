"""Set-partition combinatorics behind the conformal correction terms.

The key object is the scalar F_s with d^s/dt^s e^{-sigma} = e^{-sigma} F_s.
It is built combinatorially from two ingredients: a signed sum over set
partitions of mixed partials of sigma (``partition_tensor``), and partial
exponential Bell polynomial monomials in the derivatives of q
(``bell_terms``).  ``exp_derivative_factor_oracle`` recomputes F_s by brute
force differentiation and serves as the independent cross-check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .calculus import ConformalFactor, total_derivative
from .nodes import Expr, Jet, JetSpace, Num, ONE, add, exp, mul
from .normalize import normalize

MAX_PARTITION_SIZE = 8
MAX_DERIVATIVE_ORDER = 6


@lru_cache(maxsize=None)
def set_partitions(m: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All partitions of {1, ..., m} into disjoint nonempty blocks.

    Enumerated via restricted growth strings, so each partition appears
    exactly once; the count is the m-th Bell number.
    """
    if not (1 <= m <= MAX_PARTITION_SIZE):
        raise ValueError(f"m must be in 1..{MAX_PARTITION_SIZE}")
    out = []

    def grow(assignment: list[int], used: int):
        if len(assignment) == m:
            blocks = [[] for _ in range(used)]
            for pos, b in enumerate(assignment, start=1):
                blocks[b].append(pos)
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(used):
            grow(assignment + [b], used)
        grow(assignment + [used], used + 1)

    grow([], 0)
    return tuple(out)


def bell_number(m: int) -> int:
    return len(set_partitions(m))


def partition_tensor(sigma: ConformalFactor, indices: tuple[int, ...]) -> Expr:
    """Signed partition sum of mixed partials of sigma over the given indices.

    For index slots (i1, ..., im) this is
    sum over partitions p of the slots of (-1)^{|p|} times the product over
    blocks S of the |S|-th mixed partial of sigma with respect to the
    coordinates occupying S.  Slots are distinguishable positions, so
    repeated index values are handled uniformly.
    """
    m = len(indices)
    if m < 1:
        raise ValueError("need at least one index")
    terms = []
    for blocks in set_partitions(m):
        sign = Num(Fraction(-1)) if len(blocks) % 2 else ONE
        factors = [sign]
        for block in blocks:
            factors.append(sigma.phi(tuple(indices[pos - 1] for pos in block)))
        terms.append(mul(*factors))
    return add(*terms)


@dataclass(frozen=True)
class BellTerm:
    """One monomial of a partial exponential Bell polynomial.

    ``counts[j-1]`` is the multiplicity of the order-j derivative factor;
    the term carries the exact multinomial coefficient
    s! / (c_1! ... c_s! (1!)^{c_1} ... (s!)^{c_s}).
    """

    coefficient: Fraction
    counts: tuple[int, ...]

    @property
    def factor_orders(self) -> tuple[int, ...]:
        orders = []
        for j, c in enumerate(self.counts, start=1):
            orders.extend([j] * c)
        return tuple(orders)


def bell_terms(s: int, m: int) -> list[BellTerm]:
    """All exponent vectors with sum j*c_j = s and sum c_j = m."""
    if not (1 <= m <= s):
        raise ValueError("need 1 <= m <= s")
    out = []

    def search(j: int, counts: list[int], weight: int, total: int):
        if j > s:
            if weight == s and total == m:
                coeff = Fraction(math.factorial(s))
                for jj, c in enumerate(counts, start=1):
                    coeff /= math.factorial(c) * math.factorial(jj) ** c
                out.append(BellTerm(coeff, tuple(counts)))
            return
        for c in range((s - weight) // j + 1):
            if total + c > m:
                break
            search(j + 1, counts + [c], weight + j * c, total + c)

    search(1, [], 0, 0)
    return out


def exp_derivative_factor(s: int, sigma: ConformalFactor, space: JetSpace) -> Expr:
    """The scalar F_s with d^s/dt^s e^{-sigma} = e^{-sigma} F_s, built
    combinatorially.

    Each Bell monomial contributes its coefficient times a full contraction:
    every derivative factor receives an independent summation index, paired
    positionally with one slot of the partition tensor (the tensor is fully
    symmetric, so the pairing order is immaterial).  F_0 = 1.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if s > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"s capped at {MAX_DERIVATIVE_ORDER}")
    if s == 0:
        return ONE
    if s > space.max_jet:
        raise ValueError("s exceeds max_jet; enlarge the jet space")
    terms = []
    for m in range(1, s + 1):
        for term in bell_terms(s, m):
            orders = term.factor_orders
            for assignment in itertools.product(range(1, space.dim + 1), repeat=m):
                tensor = partition_tensor(sigma, assignment)
                jets = [Jet(i, order) for i, order in zip(assignment, orders)]
                terms.append(mul(Num(term.coefficient), tensor, *jets))
    return add(*terms)


def exp_derivative_factor_oracle(
    s: int, sigma: ConformalFactor, space: JetSpace
) -> Expr:
    """Brute-force route to the same scalar: e^{sigma} D_t^s e^{-sigma}.

    The exponentials cancel exactly under normalization, leaving a
    polynomial in the jets and the partials of sigma.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    weight = exp(-sigma.expr())
    derived = total_derivative(weight, space, s)
    return normalize(exp(sigma.expr()) * derived)
