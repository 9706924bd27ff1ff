from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syntomo.errors import ConvergenceError
from syntomo.operators import (
    TwistParams,
    basis_decompose,
    compute_t,
    frob_cycl,
    frob_floor,
    frob_kum,
    gamma_act,
    gamma_params,
    implicit_solve,
    lazard_beta,
    partial,
    psi_cycl,
    psi_kum,
    psi_target,
    solve_one_minus_frob,
    tau,
)
from syntomo.padic import PrecisionBudget, vp
from syntomo.rings import DecoSeries, RingSpec, TorusSeries, lb

P = 3
PD = RingSpec.kummer(P, "PD")
U = RingSpec.kummer(P, "U", u=Fraction(2, 3))
LAUR = RingSpec.kummer(P, "Laurent")
CPLUS = RingSpec.cyclotomic(P, 1, "Plus")
CUV = RingSpec.cyclotomic(P, 3, "UV", u=Fraction(2, 3), v=2)
CZERO = RingSpec.cyclotomic(P, 3, "ZeroVPlus", v=2)


def mono(spec, band, k, c=1):
    return DecoSeries.monomial(spec, band, k, c)


def coords(draw, n, lo=-20, hi=20):
    return draw(st.lists(st.integers(lo, hi), min_size=n, max_size=n))


@st.composite
def laurent(draw, band=(-6, 8)):
    return DecoSeries.from_lattice(LAUR, band, coords(draw, band[1] - band[0] + 1))


@st.composite
def cplus(draw, band=(0, 10)):
    return DecoSeries.from_lattice(CPLUS, band, coords(draw, band[1] - band[0] + 1))


# --- Kummer Frobenius and psi --------------------------------------------

def test_frob_of_variable():
    assert frob_kum(mono(PD, (0, 9), 1)).equals(mono(PD, (0, 9), 3))


def test_psi_kills_variable():
    assert psi_kum(mono(LAUR, (-4, 9), 1)).is_zero()


def test_frob_target_keeps_disk_membership():
    f = DecoSeries.from_coeffs(U, (0, 12), {0: 1, 3: Fraction(1, 9)})
    g = frob_kum(f)
    assert g.spec == U and g.fraction(9) == Fraction(1, 9)


def test_frob_overflow_sets_tail_flag():
    assert frob_kum(mono(LAUR, (-2, 4), 3)).tail_discarded


def test_psi_of_pd_lands_in_the_wider_disk():
    assert psi_target(PD) == PD.with_deco("U", u=Fraction(3, 2))


@given(laurent())
def test_psi_left_inverse(f):
    g = frob_kum(f, band=(-18, 24))
    assert psi_kum(g, band=f.band).equals(f)


@given(laurent(), laurent())
def test_psi_projection_formula(f, g):
    big = (-18, 24)
    lhs = psi_kum(frob_kum(f, band=big).mul(g.truncate(big), band=big), band=(-6, 8))
    rhs = f.mul(psi_kum(g, band=(-6, 8)), band=(-6, 8))
    assert lhs.truncate((-2, 2)).equals(rhs.truncate((-2, 2)))


@given(laurent(), laurent())
def test_frob_is_multiplicative(f, g):
    big = (-36, 48)
    lhs = frob_kum(f.mul(g, band=(-12, 16)), band=big)
    rhs = frob_kum(f, band=big).mul(frob_kum(g, band=big), band=big)
    assert lhs.equals(rhs)


@given(laurent())
def test_partial_frob_commutation(f):
    big = (-18, 24)
    assert partial(frob_kum(f, band=big)).equals(frob_kum(partial(f), band=big).scalar_mul(P))


@given(laurent())
def test_psi_partial_commutation(f):
    assert psi_kum(partial(f)).equals(partial(psi_kum(f)).scalar_mul(P))


def test_partial_on_monomial():
    assert partial(mono(PD, (0, 8), 5)).equals(mono(PD, (0, 8), 5, 5))


# --- basis decomposition -------------------------------------------------

def test_kummer_decomposition_of_x_to_the_fifth():
    comps = basis_decompose(mono(PD, (0, 9), 5))
    assert [a for a, c in comps.items() if not c.is_zero()] == [(2,)]
    assert comps[(2,)].equals(mono(PD, (0, 9), 5))


def test_cyclotomic_decomposition_of_one_plus_t():
    f = DecoSeries.from_coeffs(CPLUS, (0, 9), {0: 1, 1: 1})
    comps = basis_decompose(f, "cycl")
    assert comps[(1,)].equals(f)
    assert comps[(0,)].is_zero() and comps[(2,)].is_zero()


@given(laurent())
def test_kummer_decomposition_sums_back(f):
    total = sum(basis_decompose(f).values(), DecoSeries.zero(LAUR, f.band))
    assert total.equals(f)


@given(laurent())
def test_eigenvalue_on_components(f):
    for (a,), c in basis_decompose(f).items():
        assert (partial(c) - c.scalar_mul(a)).equals(DecoSeries.zero(LAUR, f.band), 1)


def test_torus_decomposition_components():
    c = mono(PD, (0, 6), 1)
    f = TorusSeries(1, 3, {(1,): c, (3,): c}, PD, (0, 6))
    comps = basis_decompose(f)
    assert set(a for a, v in comps.items() if v.coeffs) == {(1, 1), (1, 0)}


# --- cyclotomic operators ------------------------------------------------

def test_cyclotomic_frobenius_of_t():
    T = mono(CPLUS, (0, 6), 1)
    want = DecoSeries.from_coeffs(CPLUS, (0, 6), {1: 3, 2: 3, 3: 1})
    assert frob_cycl(T).equals(want)


def test_cyclotomic_derivation_of_t():
    T = mono(CPLUS, (0, 6), 1)
    assert partial(T, 0, "cycl").equals(DecoSeries.from_coeffs(CPLUS, (0, 6), {0: 1, 1: 1}))


def test_psi_cycl_kills_one_plus_t():
    f = DecoSeries.from_coeffs(CPLUS, (0, 9), {0: 1, 1: 1})
    assert psi_cycl(f).is_zero()


@settings(max_examples=40)
@given(cplus())
def test_psi_cycl_left_inverse(f):
    g = frob_cycl(f, band=(0, 30))
    assert psi_cycl(g, band=(0, 10)).equals(f)


@settings(max_examples=40)
@given(cplus())
def test_cyclotomic_decomposition_sums_back(f):
    total = sum(basis_decompose(f, "cycl").values(), DecoSeries.zero(CPLUS, f.band))
    assert total.equals(f)


# --- Galois action and t -------------------------------------------------

def test_t_at_level_one():
    spec = RingSpec.cyclotomic(P, 1, "Plus")
    t, t1 = compute_t(TwistParams.make(P, 1), spec, (0, 4))
    want = DecoSeries.from_coeffs(spec, (0, 4), {1: 3, 2: Fraction(-3, 2), 3: 1, 4: Fraction(-3, 4)})
    assert t.equals(want)
    assert t1.equals(t)


def test_twisted_powers_of_t():
    budget = PrecisionBudget(8, 4)
    t, t0 = compute_t(TwistParams.make(P, 0), CUV, (0, 200), budget)
    assert t0.equals(mono(CUV, (0, 200), 0))
    _, t2 = compute_t(TwistParams.make(P, P - 1), CUV, (0, 200), budget)
    assert t2.equals(t.mul(t).scalar_mul(Fraction(1, P)))


def test_twist_decomposition():
    tw = TwistParams.make(3, 5)
    assert (tw.a_r, tw.b_r) == (2, 1)
    with pytest.raises(ValueError):
        TwistParams.make(3, -1)


def test_gamma_parameters():
    c, a = gamma_params(CUV, 10)
    assert c % 3**6 == (1 + 27) % 3**6
    assert a % 3


def test_gamma_with_zero_exponent_is_identity():
    f = DecoSeries.from_coeffs(CZERO, (-4, 20), {-4: 3, 0: 2, 5: 7})
    assert gamma_act(f, 0, 0).equals(f)


def test_gamma_fixes_other_torus_variables():
    c = mono(CZERO, (0, 10), 2)
    f = TorusSeries(2, 2, {(0, 1): c}, CZERO, (0, 10))
    assert gamma_act(f, 1, 1).equals(f)


@settings(max_examples=20)
@given(st.lists(st.integers(-9, 9), min_size=16, max_size=16))
def test_gamma_minus_one_raises_t_valuation(cs):
    # (gamma_0 - 1) f lies in T^gain p S: each coefficient, read at degree d - gain, stays in p S
    f = DecoSeries.from_lattice(CZERO, (0, 15), cs)
    g = tau(f, 0)
    gain = P ** (3 - 1) - 1
    for d in range(16):
        x = g.fraction(d)
        if x == 0 or vp(x, P) >= lb(CZERO, d) + g.budget.n_work:
            continue
        assert vp(x, P) - 1 >= lb(CZERO, d - gain)


def test_gamma_is_a_ring_map():
    band = (0, 40)
    f = DecoSeries.from_coeffs(CZERO, band, {1: 1, 2: 3})
    g = DecoSeries.from_coeffs(CZERO, band, {0: 2, 3: 1})
    assert gamma_act(f.mul(g)).equals(gamma_act(f).mul(gamma_act(g)))


# --- Lazard operators ----------------------------------------------------

def test_lazard_on_fixed_element():
    c = mono(CZERO, (0, 10), 2)
    f = TorusSeries(1, 2, {(0,): c}, CZERO, (0, 10))
    assert lazard_beta(f, 1).equals(f)


def test_lazard_round_trip_example():
    c = DecoSeries.from_coeffs(CUV, (-4, 60), {-2: 9, 0: 1, 3: 5}, PrecisionBudget(6, 3))
    f = TorusSeries(1, 2, {(1,): c}, CUV, (-4, 60), PrecisionBudget(6, 3))
    back = lazard_beta(lazard_beta(f, 1, "nabla_over_tau"), 1, "tau_over_nabla")
    assert back.equals(f)


# --- linear solvers ------------------------------------------------------

def test_one_minus_frob_of_zero():
    z = DecoSeries.zero(PD, (0, 40))
    assert solve_one_minus_frob(z, 0, 0).is_zero()


def test_geometric_series_solution():
    f = mono(PD, (0, 40), 2)
    g = solve_one_minus_frob(f, 0, 2)
    want = DecoSeries.from_coeffs(PD, (0, 40), {2: 1, 6: 1, 18: 1})
    assert g.equals(want)
    assert g.tail_discarded


def test_bijectivity_floor():
    assert frob_floor(PD, 2) == 2
    assert frob_floor(U, 1) == 1
    with pytest.raises(ValueError):
        solve_one_minus_frob(mono(PD, (0, 20), 1), 2, 1)


@given(st.integers(1, 3), st.lists(st.integers(-9, 9), min_size=31, max_size=31))
def test_one_minus_frob_round_trip(s, cs):
    N = frob_floor(PD, s)
    cs = [0 if k < N else c for k, c in enumerate(cs)]
    f = DecoSeries.from_lattice(PD, (0, 30), cs)
    g = solve_one_minus_frob(f, s, N)
    back = g - frob_kum(g).scalar_mul(Fraction(1, P**s))
    assert back.equals(f)


def test_implicit_trivial_system():
    sol = implicit_solve(lambda z: z - 5, lambda z: 1, 5, 3, p=3, prec=6)
    assert sol.value == 5 and sol.iterations == 1


def test_implicit_integer_root():
    sol = implicit_solve(lambda z: z * z - 4, lambda z: 2 * z, 2, 3, p=3, prec=6)
    assert sol.value == 2


def test_implicit_square_root_of_eight():
    sol = implicit_solve(lambda z: z * z - 8, lambda z: 2 * z, 1, 7, p=7, prec=4)
    roots = [x for x in range(7**4) if (x * x - 8) % 7**4 == 0 and x % 7 == 1]
    assert [sol.value] == roots
    v = sol.residual_valuations
    assert all(a < b for a, b in zip(v, v[1:]))


def test_implicit_rejects_start_outside_ideal():
    with pytest.raises(ValueError):
        implicit_solve(lambda z: z * z - 8, lambda z: 2 * z, 2, 7, p=7, prec=4)


def test_implicit_detects_non_contraction():
    # H = 1 is not an inverse of the Jacobian 2 mod 7
    with pytest.raises(ConvergenceError):
        implicit_solve(lambda z: z * z - 8, lambda z: 2 * z, 1, 7, p=7, prec=4, H=1)


def test_implicit_vector_system():
    # x^2 - 2 = y, y = 2 around (3, 7) over Z_7
    Q = lambda z: [z[0] * z[0] - 2 - z[1], z[1] - 7]
    J = lambda z: [[2 * z[0], -1], [0, 1]]
    sol = implicit_solve(Q, J, [3, 7], 7, p=7, prec=5)
    x, y = sol.value
    assert y == 7 and (x * x - 9) % 7**5 == 0


@pytest.mark.parametrize("a,b", list(product(range(3), range(3))))
def test_torus_decomposition_is_total(a, b):
    c = mono(PD, (0, 6), a)
    f = TorusSeries(1, 3, {(b,): c}, PD, (0, 6))
    comps = basis_decompose(f)
    assert set(k for k, v in comps.items() if v.coeffs) == {(a, b)}
