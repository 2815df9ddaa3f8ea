from __future__ import annotations

import pytest

from qident.qnum import QScalar, alternating_sum, q_binomial, q_divexact, q_factorial, q_int


def test_q_int_small():
    assert q_int(0).coeffs == {}
    assert q_int(1).coeffs == {0: 1}
    assert q_int(2).coeffs == {1: 1, -1: 1}
    assert q_int(3).coeffs == {2: 1, 0: 1, -2: 1}


def test_q_int_at_one():
    for i in range(8):
        assert q_int(i).at_one() == i


def test_q_factorial():
    assert q_factorial(0).coeffs == {0: 1}
    assert q_factorial(2) == q_int(2)
    assert q_factorial(3) == q_int(2) * q_int(3)
    assert q_factorial(5).at_one() == 120


def test_q_binomial_small():
    assert q_binomial(2, 1).coeffs == {1: 1, -1: 1}
    assert q_binomial(3, 1).coeffs == {2: 1, 0: 1, -2: 1}
    assert q_binomial(4, 2).coeffs == {4: 1, 2: 1, 0: 2, -2: 1, -4: 1}
    assert q_binomial(3, 0).coeffs == {0: 1}
    assert q_binomial(3, 3).coeffs == {0: 1}


def test_q_binomial_out_of_range():
    assert q_binomial(3, -1).coeffs == {}
    assert q_binomial(3, 4).coeffs == {}


@pytest.mark.parametrize("n", range(13))
def test_q_binomial_exact_division(n):
    # division never leaves a remainder, and multiplying back restores the
    # factorial: [n]! == [n,r] * [r]! * [n-r]!
    for r in range(n + 1):
        b = q_binomial(n, r)
        assert b * q_factorial(r) * q_factorial(n - r) == q_factorial(n)


@pytest.mark.parametrize("n", range(13))
def test_q_binomial_palindromic_and_integral(n):
    for r in range(n + 1):
        b = q_binomial(n, r)
        assert b.is_palindromic()
        assert b.mirror() == b
        from math import comb

        assert b.at_one() == comb(n, r)


def test_q_binomial_pascal_variant():
    # the twisted Pascal rule the summand recursion relies on:
    # [n,r] = q^r [n-1,r] + q^(r-n) [n-1,r-1]
    for n in range(2, 10):
        for r in range(n + 1):
            lhs = q_binomial(n, r)
            rhs = q_binomial(n - 1, r).shift(r) + q_binomial(n - 1, r - 1).shift(r - n)
            assert lhs == rhs, (n, r)


def test_q_divexact_rejects_inexact():
    with pytest.raises(ArithmeticError):
        q_divexact(q_int(3), q_int(2))


def test_alternating_sum_even():
    # sum_k (-1)^k [2,k] = 2 - q - q^-1
    assert alternating_sum(2).coeffs == {0: 2, 1: -1, -1: -1}
    assert alternating_sum(4).at_one() == 0


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9, 11])
def test_alternating_sum_vanishes_odd(n):
    assert alternating_sum(n).coeffs == {}


def test_qscalar_arithmetic():
    a = QScalar({1: 1, -1: 1})
    assert a.shift(2).coeffs == {3: 1, 1: 1}
    assert (a * a).coeffs == {2: 1, 0: 2, -2: 1}
    assert a.scale(-3).coeffs == {1: -3, -1: -3}
    assert a.truncate_below(0).coeffs == {1: 1}
    assert (a - a).coeffs == {}
    assert a.min_exp() == -1 and a.max_exp() == 1
