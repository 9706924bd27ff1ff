import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syntomo.errors import BandError, MembershipError
from syntomo.padic import PrecisionBudget, vp
from syntomo.rings import (
    DecoSeries,
    RingSpec,
    TorusSeries,
    check_membership,
    lb,
    pd_basis_convert,
    reduce_mod_Fr,
    ring_arith,
    split_plus_minus,
)
from syntomo.operators import TwistParams, compute_t

from oracles import naive_poly_mul

P = 3
PD = RingSpec.kummer(P, "PD")
U = RingSpec.kummer(P, "U", u=Fraction(2, 3))
UV = RingSpec.kummer(P, "UV", u=Fraction(2, 3), v=2)
PLUS = RingSpec.kummer(P, "Plus")


def test_lower_bounds():
    assert lb(PD, 3) == -1
    assert lb(PD, 9) == -4
    assert lb(UV, 3) == -2
    assert lb(UV, -1) == 2
    for spec in (PD, U, UV, PLUS):
        assert lb(spec, 0) == 0


def test_negative_degree_needs_annulus():
    with pytest.raises(BandError):
        lb(PD, -1)
    with pytest.raises(BandError):
        DecoSeries.zero(U, (-2, 4))


def test_membership_examples():
    for spec in (PD, U, UV, PLUS):
        DecoSeries.from_coeffs(spec, (0, 6), {0: 1})
    with pytest.raises(MembershipError) as err:
        DecoSeries.from_coeffs(UV, (-2, 6), {3: Fraction(1, 27)})
    assert err.value.degrees == [3]
    DecoSeries.from_coeffs(UV, (-2, 6), {3: Fraction(1, 9)})


def test_zero_v_plus_membership_of_p_over_power_of_t():
    spec = RingSpec.cyclotomic(P, 3, "ZeroVPlus", v=P - 1)
    k = (P - 1) * P ** (3 - 2)
    f = DecoSeries.from_coeffs(spec, (-k, 2), {-k: P})
    assert check_membership(f) == []
    # lb(-10) = ceil(10 v / e) = 2 exceeds v_p(p)
    with pytest.raises(MembershipError):
        DecoSeries.from_coeffs(spec, (-10, 2), {-10: P})


def test_reduce_mod_filtration():
    X2 = DecoSeries.monomial(PD, (0, 6), 2)
    rem = reduce_mod_Fr(X2, 1)
    assert rem.rep == (Fraction(9),)
    Pr = DecoSeries.from_polynomial(PD, (0, 6), [9, -6, 1])
    assert reduce_mod_Fr(Pr, 2).is_zero()


def test_t_vanishes_modulo_first_filtration_step():
    budget = PrecisionBudget(12, 4)
    spec = RingSpec.cyclotomic(P, 3, "UV", u=Fraction(2, 3), v=2)
    t, _ = compute_t(TwistParams.make(P, 1), spec, (0, 400), budget)
    assert reduce_mod_Fr(t, 1).is_zero(budget.n_work - budget.slack)


def test_split_edge_cases():
    Pr = DecoSeries.from_polynomial(PD, (0, 6), [-3, 1])
    plus, minus = split_plus_minus(Pr, 1)
    assert plus.equals(Pr) and minus.is_zero()
    low = DecoSeries.from_coeffs(PD, (0, 6), {0: 5})
    plus, minus = split_plus_minus(low, 1)
    assert plus.is_zero() and minus.equals(low)


def test_product_leaving_the_ring_raises():
    # X/p is not in PD; squaring it must be caught, not silently stored
    bad = DecoSeries.from_coeffs(PD, (0, 6), {1: Fraction(1, 3)}, check=False)
    assert check_membership(bad) == [1]
    with pytest.raises(MembershipError):
        ring_arith(bad, bad, "mul")


def test_incompatible_specs_refuse_to_mix():
    with pytest.raises(ValueError):
        DecoSeries.monomial(PD, (0, 4), 1) + DecoSeries.monomial(U, (0, 4), 1)


def test_torus_band_is_enforced():
    c = DecoSeries.monomial(PD, (0, 4), 1)
    with pytest.raises(BandError):
        TorusSeries(1, 2, {(3,): c}, PD, (0, 4))


def test_json_round_trip_example():
    f = DecoSeries.from_coeffs(UV, (-3, 8), {-3: 729, 0: 5, 3: Fraction(2, 9), 7: 1})
    g = DecoSeries.from_json(json.loads(json.dumps(f.to_json())))
    assert g == f


@st.composite
def series(draw, spec, band=(0, 12)):
    lo, hi = band
    coords = draw(st.lists(st.integers(-40, 40), min_size=hi - lo + 1, max_size=hi - lo + 1))
    return DecoSeries.from_lattice(spec, band, coords)


@given(series(PD), series(PD))
def test_pd_product_matches_naive_convolution(f, g):
    h = f.mul(g, band=(0, 24))
    a = [f.fraction(i) for i in range(13)]
    b = [g.fraction(i) for i in range(13)]
    want = naive_poly_mul(a, b)
    for i, x in enumerate(want):
        d = h.fraction(i) - x
        assert d == 0 or vp(d, P) >= lb(PD, i) + h.budget.n_work


@given(series(PD), series(PD), series(PD))
def test_ring_laws(f, g, h):
    assert ((f + g) * h).equals(f * h + g * h)
    assert (f * g).equals(g * f)
    assert (f + g - g).equals(f)


@given(series(UV, (-6, 9)), series(UV, (-6, 9)))
def test_annulus_closed_under_products(f, g):
    assert check_membership(f.mul(g)) == []


@given(series(PD))
def test_pd_basis_round_trip(f):
    g = pd_basis_convert(pd_basis_convert(f, "to_pd_monomials"), "to_plain")
    assert g.equals(f)


@given(st.integers(0, 5), st.integers(0, 5))
def test_divided_power_law(a, b):
    # X^[a] X^[b] = binom(a+b, a) X^[a+b] with X^[k] = X^k / k!
    from math import comb, factorial
    fa = DecoSeries.from_coeffs(PD, (0, 12), {a: Fraction(1, factorial(a))})
    fb = DecoSeries.from_coeffs(PD, (0, 12), {b: Fraction(1, factorial(b))})
    want = DecoSeries.from_coeffs(PD, (0, 12), {a + b: Fraction(comb(a + b, a), factorial(a + b))})
    assert (fa * fb).equals(want)


@given(series(PD))
def test_split_recombines(f):
    plus, minus = split_plus_minus(f, 2)
    assert (plus + minus).equals(f)
    assert reduce_mod_Fr(plus, 2).is_zero()


@settings(max_examples=50)
@given(series(PD), series(PD))
def test_reduction_is_multiplicative(f, g):
    lhs = reduce_mod_Fr(f.mul(g, band=(0, 24)), 2)
    rhs = reduce_mod_Fr(f, 2) * reduce_mod_Fr(g, 2)
    assert lhs.equals(rhs)


@given(series(UV, (-5, 7)))
def test_series_json_round_trip(f):
    assert DecoSeries.from_json(json.loads(json.dumps(f.to_json()))) == f
