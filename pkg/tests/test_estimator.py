import numpy as np
import pytest

from syntomo.errors import ConfigError
from syntomo.estimator import CohomologyEstimator, NotFittedError, SyntomicEstimator
from syntomo.homcx import ChainComplex
from syntomo.suites import random_complex


def test_get_and_set_params():
    est = SyntomicEstimator(r=2)
    assert est.get_params()["r"] == 2
    est.set_params(n=6)
    assert est.n == 6
    with pytest.raises(ValueError):
        est.set_params(colour="red")
    assert "r=2" in repr(est)


def test_transform_before_fit():
    with pytest.raises(NotFittedError):
        SyntomicEstimator().transform()
    with pytest.raises(NotFittedError):
        CohomologyEstimator().transform([])


def test_syntomic_estimator_profile_a():
    est = SyntomicEstimator(profile="A", r=1, n=4).fit()
    assert est.plan_.M >= est.plan_.M_floor
    syn, hk = est.transform(["syn", ("hk", "PD")])
    assert syn.full_rank(1) == 2 and syn.full_rank(2) == 1
    assert hk.p == 3


def test_unknown_complex_is_config_error():
    est = SyntomicEstimator().fit()
    with pytest.raises(ConfigError):
        est.transform(["nope"])


def test_invalid_params_fail_at_fit():
    with pytest.raises(ConfigError):
        SyntomicEstimator(profile="Z").fit()


def test_cohomology_estimator_matches_reduce_flag():
    rng = np.random.default_rng(11)
    cs = [random_complex(rng) for _ in range(10)]
    a = CohomologyEstimator().fit_transform(cs)
    b = CohomologyEstimator(reduce=False).fit(cs).transform(cs)
    assert [h.divisors for h in a] == [h.divisors for h in b]


def test_cohomology_estimator_checks_modulus():
    est = CohomologyEstimator().fit(ChainComplex(3, 2, {0: 1}, {}))
    assert est.modulus_ == (3, 2) and est.n_complexes_ == 1
    with pytest.raises(ValueError):
        est.transform(ChainComplex(3, 3, {0: 1}, {}))
    with pytest.raises(ValueError):
        CohomologyEstimator().fit([ChainComplex(3, 2, {0: 1}, {}), ChainComplex(5, 2, {0: 1}, {})])
