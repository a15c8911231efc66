"""Set partitions, Bell polynomials, partition tensors, exp-derivative factors."""

import itertools
import random
from fractions import Fraction

import pytest

from lcmech import (
    JetSpace,
    Jet,
    PhiSymbol,
    add,
    bell_number,
    bell_terms,
    equivalent,
    exp_derivative_factor,
    exp_derivative_factor_oracle,
    is_zero,
    mul,
    normalize,
    num,
    parse_expression,
    partition_tensor,
    set_partitions,
)
from lcmech.calculus import ABSTRACT, ConformalFactor, zero_factor
from lcmech.combinatorics import MAX_DERIVATIVE_ORDER, MAX_PARTITION_SIZE


def test_set_partition_counts_match_bell_numbers():
    expected = [1, 2, 5, 15, 52, 203]
    for m, count in zip(range(1, 7), expected):
        assert len(set_partitions(m)) == count
        assert bell_number(m) == count


def test_set_partitions_are_actual_partitions():
    for m in range(1, 6):
        for blocks in set_partitions(m):
            flat = sorted(itertools.chain.from_iterable(blocks))
            assert flat == list(range(1, m + 1))


def test_set_partitions_no_duplicates():
    for m in range(1, 7):
        canon = {tuple(sorted(tuple(sorted(b)) for b in p)) for p in set_partitions(m)}
        assert len(canon) == len(set_partitions(m))


def test_partition_size_cap():
    with pytest.raises(Exception):
        set_partitions(MAX_PARTITION_SIZE + 1)


# ---------------------------------------------------------------------------
# Bell polynomial exponent data


def test_bell_terms_satisfy_side_conditions():
    for s in range(1, MAX_DERIVATIVE_ORDER + 1):
        for m in range(1, s + 1):
            for term in bell_terms(s, m):
                counts = term.counts
                assert sum((j + 1) * c for j, c in enumerate(counts)) == s
                assert sum(counts) == m


def test_bell_terms_known_small_cases():
    # B_{1,1} = q', B_{2,1} = q'', B_{2,2} = q'q', B_{3,2} = 3 q''q'
    def monos(s, m):
        return sorted(
            (t.coefficient, tuple(sorted(t.factor_orders))) for t in bell_terms(s, m)
        )

    assert monos(1, 1) == [(Fraction(1), (1,))]
    assert monos(2, 1) == [(Fraction(1), (2,))]
    assert monos(2, 2) == [(Fraction(1), (1, 1))]
    assert monos(3, 1) == [(Fraction(1), (3,))]
    assert monos(3, 2) == [(Fraction(3), (1, 2))]
    assert monos(3, 3) == [(Fraction(1), (1, 1, 1))]
    # B_{4,2} = 3 q''^2 + 4 q'q'''
    assert monos(4, 2) == [(Fraction(3), (2, 2)), (Fraction(4), (1, 3))]


def test_bell_coefficients_sum_to_stirling_total():
    # Setting all derivative factors to 1 turns B_{s,m} into the Stirling
    # number S(s,m); summing over m gives the Bell number.
    for s in range(1, 7):
        total = sum(
            sum(t.coefficient for t in bell_terms(s, m)) for m in range(1, s + 1)
        )
        assert total == bell_number(s)


# ---------------------------------------------------------------------------
# partition tensors


def test_partition_tensor_m1_m2_m3_displays():
    # Phi_1 = -phi_i ; Phi_2 = phi_i phi_j - phi_ij ;
    # Phi_3 = -phi_i phi_j phi_k + phi_i phi_jk + phi_j phi_ik + phi_k phi_ij - phi_ijk
    rng = random.Random(5)
    p = lambda *ix: PhiSymbol(tuple(ix))
    t1 = partition_tensor(ABSTRACT, (1,))
    assert equivalent(t1, mul(num(-1), p(1)), rng=rng)

    t2 = partition_tensor(ABSTRACT, (1, 2))
    want2 = add(mul(p(1), p(2)), mul(num(-1), p(1, 2)))
    assert equivalent(t2, want2, rng=rng)

    t3 = partition_tensor(ABSTRACT, (1, 2, 3))
    want3 = add(
        mul(num(-1), p(1), p(2), p(3)),
        mul(p(1), p(2, 3)),
        mul(p(2), p(1, 3)),
        mul(p(3), p(1, 2)),
        mul(num(-1), p(1, 2, 3)),
    )
    assert equivalent(t3, want3, rng=rng)


def test_partition_tensor_symmetric_under_index_permutation():
    sigma = ConformalFactor(
        parse_expression("x^3 + x*y^2 + sin(y)", JetSpace(2, 2), ["x", "y"])
    )
    for perm in itertools.permutations((1, 2, 2)):
        assert is_zero(
            add(
                partition_tensor(sigma, (1, 2, 2)),
                mul(num(-1), partition_tensor(sigma, perm)),
            )
        )


def test_partition_tensor_concrete_values():
    space = JetSpace(1, 1)
    sigma = ConformalFactor(parse_expression("x^2", space, ["x"]))
    # phi_1 = 2x, phi_11 = 2: Phi_2 = 4x^2 - 2.
    t2 = partition_tensor(sigma, (1, 1))
    want = parse_expression("4*x^2 - 2", space, ["x"])
    assert is_zero(add(normalize(t2), mul(num(-1), normalize(want))))


def test_partition_tensor_trivial_sigma_vanishes():
    sigma = zero_factor()
    for m in range(1, 4):
        assert is_zero(partition_tensor(sigma, (1,) * m))


# ---------------------------------------------------------------------------
# exp-derivative factors


def test_exp_derivative_factor_zeroth_is_one():
    space = JetSpace(1, 1)
    assert exp_derivative_factor(0, ABSTRACT, space) == num(1)


def test_exp_derivative_factor_low_order_displays():
    # B_1 = -phi_i q'^i
    # B_2 = -phi_i q''^i + (phi_i phi_j - phi_ij) q'^i q'^j
    # B_3 = -phi_i q'''^i + 3 (phi_i phi_j - phi_ij) q''^i q'^j + Phi_3 q'q'q'
    rng = random.Random(9)
    space = JetSpace(dim=2, order=3, max_jet=7)
    p = lambda *ix: PhiSymbol(tuple(ix))
    q = Jet

    def sum_over(fn, reps):
        terms = [
            fn(*combo) for combo in itertools.product((1, 2), repeat=reps)
        ]
        return add(*terms)

    want1 = sum_over(lambda i: mul(num(-1), p(i), q(i, 1)), 1)
    got1 = exp_derivative_factor(1, ABSTRACT, space)
    assert equivalent(got1, want1, tol=1e-9, rng=rng)

    want2 = add(
        sum_over(lambda i: mul(num(-1), p(i), q(i, 2)), 1),
        sum_over(
            lambda i, j: mul(add(mul(p(i), p(j)), mul(num(-1), p(i, j))), q(i, 1), q(j, 1)),
            2,
        ),
    )
    got2 = exp_derivative_factor(2, ABSTRACT, space)
    assert equivalent(got2, want2, tol=1e-9, rng=rng)

    def phi3(i, j, k):
        return add(
            mul(num(-1), p(i), p(j), p(k)),
            mul(p(i), p(j, k)),
            mul(p(j), p(i, k)),
            mul(p(k), p(i, j)),
            mul(num(-1), p(i, j, k)),
        )

    want3 = add(
        sum_over(lambda i: mul(num(-1), p(i), q(i, 3)), 1),
        sum_over(
            lambda i, j: mul(
                num(3), add(mul(p(i), p(j)), mul(num(-1), p(i, j))), q(i, 2), q(j, 1)
            ),
            2,
        ),
        sum_over(lambda i, j, k: mul(phi3(i, j, k), q(i, 1), q(j, 1), q(k, 1)), 3),
    )
    got3 = exp_derivative_factor(3, ABSTRACT, space)
    assert equivalent(got3, want3, tol=1e-9, rng=rng)


def test_exp_derivative_factor_vs_oracle_concrete():
    rng = random.Random(42)
    space = JetSpace(dim=2, order=2, max_jet=8)
    sigma = ConformalFactor(parse_expression("x^2*y - y^3 + x", space, ["x", "y"]))
    params = {}
    for s in range(1, 5):
        got = exp_derivative_factor(s, sigma, space)
        want = exp_derivative_factor_oracle(s, sigma, space)
        assert equivalent(got, want, trials=20, tol=1e-9, params=params, rng=rng), s


def test_exp_derivative_factor_trivial_sigma():
    space = JetSpace(1, 2, max_jet=6)
    for s in range(1, 4):
        assert is_zero(exp_derivative_factor(s, zero_factor(), space))


def test_exp_derivative_factor_order_cap():
    with pytest.raises(Exception):
        exp_derivative_factor(MAX_DERIVATIVE_ORDER + 1, ABSTRACT, JetSpace(1, 1, max_jet=10))
