from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syntomo.errors import PrecisionError
from syntomo.padic import (
    PrecisionBudget,
    ScaledPAdic,
    binom_coeff,
    binom_int,
    exp_padic,
    log_series_coeff,
    log_series_rational,
    scaled_arith,
    vp,
    vp_factorial,
)

from oracles import naive_binomial

P = 3
PREC = 6


def sp(x, prec=PREC):
    return ScaledPAdic.from_rational(x, P, prec)


def test_add_carries_into_valuation():
    out = scaled_arith(sp(1), sp(2), "add")
    assert out.val == 1 and out.mantissa == 1


def test_inverse_of_two_mod_81():
    out = scaled_arith(ScaledPAdic(3, 0, 2, 4), None, "inv")
    assert out.mantissa == 41
    assert 2 * 41 % 81 == 1


def test_mul_by_zero_is_zero():
    assert scaled_arith(sp(5), ScaledPAdic.zero(P, PREC), "mul").is_zero


def test_neg_and_unknown_kind():
    assert scaled_arith(sp(1), None, "neg").equals(-1)
    with pytest.raises(ValueError):
        scaled_arith(sp(1), sp(1), "pow")


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ScaledPAdic.zero(P, 4).inv()


def test_mantissa_must_be_unit():
    with pytest.raises(ValueError):
        ScaledPAdic(3, 0, 3, 4)


def test_budget_validation():
    assert PrecisionBudget(8, 4).internal == 12
    with pytest.raises(ValueError):
        PrecisionBudget(0, 1)
    with pytest.raises(ValueError):
        PrecisionBudget(4, -1)


def test_binomial_small_orders():
    c = sp(7)
    assert binom_coeff(c, 0).equals(1)
    assert binom_coeff(c, 1).equals(7)
    out = binom_coeff(sp(1 + P), 2)
    assert out.val == 1 and out.mantissa == 2
    assert out.to_fraction() == 6


def test_binomial_precision_loss_is_reported():
    with pytest.raises(PrecisionError):
        binom_coeff(ScaledPAdic.from_abs(5, 3, 2), 9)


def test_binomial_rejects_non_integral_exponent():
    with pytest.raises(ValueError):
        binom_coeff(sp(Fraction(1, 3)), 2)


def test_log_series_first_terms():
    assert log_series_rational(0) == 1
    assert log_series_rational(1) == Fraction(-1, 2)
    assert log_series_rational(1, "x_over_log") == Fraction(1, 2)
    assert log_series_rational(2, "x_over_log") == Fraction(-1, 12)


def test_exp_of_p():
    mod = 3**6
    # exp(3) * exp(-3) = 1
    assert exp_padic(3, 3, 6) * exp_padic(-3, 3, 6) % mod == 1
    with pytest.raises(ValueError):
        exp_padic(1, 3, 4)


def test_factorial_valuation():
    assert vp_factorial(3, 3) == 1
    assert vp_factorial(9, 3) == 4
    assert vp(Fraction(2, 9), 3) == -2


units = st.integers(1, 3**PREC - 1).filter(lambda m: m % P)
vals = st.integers(-3, 3)


@st.composite
def padics(draw):
    return ScaledPAdic(P, draw(vals), draw(units), PREC)


@given(padics(), padics(), padics())
def test_ring_axioms(a, b, c):
    assert (a + b).equals(b + a)
    assert ((a + b) + c).equals(a + (b + c))
    assert ((a * b) * c).equals(a * (b * c))
    assert (a * (b + c)).equals(a * b + a * c)
    assert (a - a).is_zero or (a - a).equals(0)


@given(padics())
def test_inverse_is_inverse(a):
    assert (a * a.inv()).equals(1)


@given(padics(), padics())
def test_abs_precision_of_sum(a, b):
    s = a + b
    assert s.abs_prec >= min(a.abs_prec, b.abs_prec) or s.is_zero


@given(st.integers(-50, 50), st.integers(0, 8))
def test_binom_int_matches_naive(c, k):
    assert binom_int(c, k) == naive_binomial(c, k)


@given(st.integers(0, 30), st.integers(0, 30), st.integers(0, 5))
def test_binomial_vandermonde(a, b, k):
    # binom(a+b, k) = sum_j binom(a, j) binom(b, k-j)
    lhs = binom_coeff(sp(a + b, 10), k) if a + b else sp(0, 10)
    rhs = sum(binom_int(a, j) * binom_int(b, k - j) for j in range(k + 1))
    assert lhs.equals(rhs) if a + b else rhs == (1 if k == 0 else 0)


@settings(max_examples=30)
@given(st.integers(1, 25))
def test_log_series_are_formal_inverses(m):
    # (log(1+X)/X) * (X/log(1+X)) = 1 coefficientwise
    total = sum(log_series_rational(j) * log_series_rational(m - j, "x_over_log") for j in range(m + 1))
    assert total == 0


@given(st.integers(0, 50))
def test_log_coefficient_growth_bound(k):
    for kind in ("log_over_x", "x_over_log"):
        x = log_series_rational(k, kind)
        assert x == 0 or vp(x, 3) >= Fraction(-k, 2)
        log_series_coeff(k, kind, p=3)
