import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syntomo.errors import CommutationError
from syntomo.homcx import (
    ChainComplex,
    ChainMap,
    CohomologyReport,
    SparseIntMat,
    cohomology,
    cone_and_total,
    direct_sum,
    identity,
    image_report,
    kernel_basis,
    koszul_build,
    matmul_mod,
    quasi_iso_certificate,
    reduce_complex,
    shift,
    snf,
    snf_exponents,
    total_complex,
)
from syntomo.suites import permuted, random_complex

from oracles import brute_force_cohomology

P, N = 3, 2
Q = P**N


def one_term(dim=1):
    return ChainComplex(P, N, {0: dim}, {})


def times_p():
    return ChainComplex(P, N, {0: 1, 1: 1}, {0: [[P]]})


def test_snf_identity_and_rank_one():
    assert snf(np.eye(2, dtype=np.int64), P, N).exponents == [0, 0]
    assert snf([[1, 1], [1, 1]], P, N).exponents == [0, N]


def test_snf_transforms_diagonalize():
    A = np.array([[3, 6, 1], [0, 3, 4], [6, 0, 3]])
    res = snf(A, P, N)
    D = matmul_mod(matmul_mod(res.U, A, Q), res.V, Q)
    want = np.zeros_like(D)
    for j, e in enumerate(res.exponents):
        want[j, j] = P**e % Q
    assert np.array_equal(D, want)
    assert np.array_equal(matmul_mod(res.V, res.Vinv, Q), identity(3, Q))


def test_kernel_of_multiplication_by_p():
    K = kernel_basis([[P]], P, N)
    assert all(int(x) % P == 0 for x in K.ravel())
    assert K.shape[1] >= 1


def test_zero_complex_is_acyclic():
    C = ChainComplex(P, N, {0: 0, 1: 0}, {})
    assert all(v == [] for v in cohomology(C).divisors.values())


def test_multiplication_by_p_complex():
    H = cohomology(times_p())
    assert H.divisors == {0: [1], 1: [1]}


def test_free_module_is_full_rank():
    H = cohomology(one_term(2))
    assert H.full_rank(0) == 2 and H.torsion_exponent(0) == 0


def test_d_squared_nonzero_is_rejected():
    with pytest.raises(CommutationError):
        ChainComplex(P, N, {0: 1, 1: 1, 2: 1}, {0: [[1]], 1: [[1]]})


def test_bad_shapes_are_rejected():
    with pytest.raises(ValueError):
        ChainComplex(P, N, {0: 1, 1: 2}, {0: [[1]]})
    with pytest.raises(ValueError):
        ChainComplex(P, N, {0: 1, 2: 1}, {})


def test_fiber_of_map_to_zero_is_source():
    C = times_p()
    Z = ChainComplex(P, N, {0: 0, 1: 0}, {})
    F = cone_and_total(ChainMap(C, Z, {}), "fiber")
    assert cohomology(F).divisors.get(0) == [1] and cohomology(F).divisors.get(1) == [1]


def test_fiber_of_identity_is_acyclic():
    C = times_p()
    for kind in ("fiber", "cone"):
        F = cone_and_total(ChainMap(C, C, {0: [[1]], 1: [[1]]}), kind)
        assert all(v == [] for v in cohomology(F).divisors.values())


def test_iterated_fiber_dimensions():
    rng = np.random.default_rng(3)
    A, B = random_complex(rng), random_complex(rng)
    fA = ChainMap(A, A, {k: identity(A.dims[k], Q) for k in A.degrees})
    fB = ChainMap(B, B, {k: np.mod(P * identity(B.dims[k], Q), Q) for k in B.degrees})
    top, bottom = cone_and_total(fA), cone_and_total(fB)
    outer = cone_and_total(ChainMap(top, bottom, {}))
    # the four corners A, A[-1], B[-1], B[-2]
    want = {k: A.dims.get(k, 0) + A.dims.get(k - 1, 0) + B.dims.get(k - 1, 0) + B.dims.get(k - 2, 0)
            for k in outer.degrees}
    assert outer.dims == want
    rows = total_complex([top, bottom], [ChainMap(top, bottom, {})])
    assert sum(rows.dims.values()) == sum(outer.dims.values())


def test_koszul_one_operator():
    A = np.array([[0, 3], [0, 0]])
    K = koszul_build("group", P, N, {(): 2}, {0: A}, 1)
    H = cohomology(K)
    # H^0 = ker A
    want = ChainComplex(P, N, {0: 2, 1: 2}, {0: A})
    assert H.divisors == cohomology(want).divisors


def test_koszul_commuting_pair_squares_to_zero():
    A = np.array([[1, 3], [0, 1]])
    B = np.array([[2, 0], [0, 2]])
    K = koszul_build("derivation", P, N, {(): 2}, {0: A, 1: B}, 2)
    assert K.dims == {0: 2, 1: 4, 2: 2}


def test_koszul_rejects_unknown_kind():
    with pytest.raises(ValueError):
        koszul_build("nope", P, N, {(): 1}, {0: [[1]]}, 1)


def test_certificates_for_identity_and_p():
    C = times_p()
    idm = ChainMap(C, C, {0: [[1]], 1: [[1]]})
    assert quasi_iso_certificate(idm).c == 0
    F = ChainComplex(P, N, {0: 2}, {})
    pm = ChainMap(F, F, {0: np.mod(P * identity(2, Q), Q)})
    assert quasi_iso_certificate(pm).per_degree == {0: (1, 1)}


def test_image_of_zero_map_is_empty():
    F = one_term(1)
    assert image_report(ChainMap(F, F, {})).divisors == {0: []}


def test_shift_and_direct_sum():
    C = times_p()
    S = shift(C, 1)
    assert S.degrees == [-1, 0]
    D = direct_sum([C, one_term(1)])
    assert cohomology(D).divisors[0] == [1, 2]


def test_json_round_trips():
    rng = np.random.default_rng(7)
    C = random_complex(rng, max_terms=3)
    C2 = ChainComplex.from_json(json.loads(json.dumps(C.to_json())))
    assert C2.dims == C.dims and all(np.array_equal(C.d(k), C2.d(k)) for k in C.degrees)
    H = cohomology(C)
    assert CohomologyReport.from_json(json.loads(json.dumps(H.to_json()))).divisors == H.divisors
    M = SparseIntMat.from_dense(np.array([[0, 10], [3, 0]]), Q)
    assert M.triplets() == [[0, 1, 1], [1, 0, 3]]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cohomology_matches_enumeration(seed):
    C = random_complex(np.random.default_rng(seed))
    assert cohomology(C).divisors == brute_force_cohomology(C)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reduction_preserves_cohomology(seed):
    rng = np.random.default_rng(seed)
    C = random_complex(rng, max_dim=5, max_terms=4)
    assert cohomology(C).divisors == cohomology(C, reduce=False).divisors
    assert cohomology(permuted(C, rng)).divisors == cohomology(C).divisors
    red = reduce_complex(C).complex
    assert all(red.dims[k] <= C.dims[k] for k in C.degrees)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(0, Q - 1), min_size=3, max_size=3), min_size=3, max_size=3))
def test_snf_exponents_are_invariant_under_row_operations(rows):
    A = np.array(rows)
    E = np.array([[1, 2, 0], [0, 1, 0], [4, 0, 1]])
    assert snf_exponents(A, P, N) == snf_exponents(matmul_mod(E, A, Q), P, N)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_p_multiple_certificate_bounded_by_one(seed):
    C = random_complex(np.random.default_rng(seed))
    pm = ChainMap(C, C, {k: np.mod(P * identity(C.dims[k], Q), Q) for k in C.degrees})
    assert all(a <= 1 and b <= 1 for a, b in quasi_iso_certificate(pm).per_degree.values())
