import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from reliab.distributions import (
    Kind,
    from_standard_normal,
    make_distribution,
    norm_cdf,
    norm_ppf,
    random_vector,
    to_standard_normal,
    transform_vector,
)
from reliab.errors import DimensionMismatch, DomainError, NonPositiveLognormalMean, NonPositiveStd
from reliab.limit_state import builtin_problem

MARGINALS = [
    ("normal", 0.0, 1.0),
    ("normal", 1780.0, 363.0),
    ("normal", 430.0, 40.0),
    ("lognormal", 250.0, 30.0),
    ("lognormal", 1.0, 2.5),
]
# std/mean = 2.5e-6: storing x itself costs ~ulp(40)/1e-4 ~ 7e-11 in u
TIGHT = [("normal", 40.0, 1e-4), ("normal", 400.0, 1e-4)]


def test_standard_normal_marginal():
    d = make_distribution("normal", 0.0, 1.0)
    assert d.kind is Kind.NORMAL
    assert from_standard_normal(d, -2.6544) == -2.6544
    assert to_standard_normal(d, 3.0) == 3.0


def test_lognormal_parameters():
    # independent evaluation of the moment-matching formulas
    d = make_distribution("lognormal", 250.0, 30.0)
    assert d.sigma_ln == pytest.approx(0.1195713, abs=5e-8)
    assert d.mu_ln == pytest.approx(5.514312, abs=5e-7)
    median = from_standard_normal(d, 0.0)
    # median = mean / sqrt(1 + cov^2)
    assert median == pytest.approx(250.0 / math.sqrt(1.0 + 0.12**2), rel=1e-14)
    assert median == pytest.approx(248.2192, abs=5e-5)
    assert to_standard_normal(d, median) == 0.0


def test_lognormal_moments_match_scipy():
    d = make_distribution("lognormal", 250.0, 30.0)
    ref = stats.lognorm(s=d.sigma_ln, scale=math.exp(d.mu_ln))
    assert ref.mean() == pytest.approx(250.0, rel=1e-12)
    assert ref.std() == pytest.approx(30.0, rel=1e-12)


def test_normal_one_sigma():
    assert from_standard_normal(make_distribution("normal", 430.0, 40.0), 1.0) == 470.0


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_lognormal_support(x):
    with pytest.raises(DomainError):
        to_standard_normal(make_distribution("lognormal", 250.0, 30.0), x)


def test_construction_errors():
    with pytest.raises(NonPositiveStd):
        make_distribution("normal", 0.0, 0.0)
    with pytest.raises(NonPositiveStd):
        make_distribution("lognormal", 1.0, -1.0)
    with pytest.raises(NonPositiveLognormalMean):
        make_distribution("lognormal", 0.0, 1.0)


@pytest.mark.parametrize("spec", MARGINALS)
def test_round_trip_grid(spec):
    d = make_distribution(*spec)
    u = np.linspace(-8.0, 8.0, 2001)
    assert np.max(np.abs(to_standard_normal(d, from_standard_normal(d, u)) - u)) <= 1e-12


@pytest.mark.parametrize("spec", TIGHT)
def test_round_trip_tight_marginals_at_float_resolution(spec):
    d = make_distribution(*spec)
    u = np.linspace(-8.0, 8.0, 2001)
    x = from_standard_normal(d, u)
    assert np.all(np.abs(to_standard_normal(d, x) - u) <= 2 * np.spacing(x) / d.std)


@pytest.mark.parametrize("spec", MARGINALS + TIGHT)
def test_strictly_increasing(spec):
    d = make_distribution(*spec)
    x = from_standard_normal(d, np.linspace(-8.0, 8.0, 1000))
    assert np.all(np.diff(x) > 0)


@given(st.sampled_from(MARGINALS), st.floats(-8.0, 8.0))
def test_round_trip_property(spec, u):
    d = make_distribution(*spec)
    assert abs(to_standard_normal(d, from_standard_normal(d, u)) - u) <= 1e-12


def test_lognormal_moment_recovery():
    d = make_distribution("lognormal", 250.0, 30.0)
    x = from_standard_normal(d, np.random.default_rng(11).standard_normal(1_000_000))
    n = x.size
    assert abs(x.mean() - 250.0) <= 3 * x.std() / math.sqrt(n)
    # standard error of the sample std from the fourth central moment
    m4 = np.mean((x - x.mean()) ** 4)
    se_std = math.sqrt((m4 - x.var() ** 2) / n) / (2 * x.std())
    assert abs(x.std() - 30.0) <= 3 * se_std


def test_normal_cdf_accuracy_and_tails():
    u = np.linspace(-8, 8, 321)
    got = norm_cdf(u)
    ref = stats.norm.cdf(u)
    assert np.max(np.abs(got - ref) / ref) <= 1e-14
    assert norm_cdf(-37.0) > 0.0
    assert math.log(norm_cdf(-37.0)) == pytest.approx(stats.norm.logcdf(-37.0), rel=1e-12)
    assert norm_ppf(norm_cdf(-3.0)) == pytest.approx(-3.0, abs=1e-12)


def test_transform_vector():
    rv = random_vector([{"name": "a", "kind": "normal", "mean": 1.0, "std": 2.0},
                        {"name": "b", "kind": "normal", "mean": -3.0, "std": 0.5}])
    assert np.array_equal(transform_vector(rv, [0.0, 0.0]), [1.0, -3.0])
    rv2, _ = builtin_problem("speed_reducer")
    x = transform_vector(rv2, np.zeros(5))
    assert x[0] == pytest.approx(248.2192, abs=5e-5)
    assert np.array_equal(x[1:], [40.0, 400.0, 1780.0, 430.0])
    with pytest.raises(DimensionMismatch):
        transform_vector(rv2, np.zeros(4))


def test_batch_transform_matches_scalar():
    rv, _ = builtin_problem("speed_reducer")
    U = np.random.default_rng(0).standard_normal((7, 5))
    X = rv.from_standard_normal(U)
    for u, x in zip(U, X):
        assert np.array_equal(rv.from_standard_normal(u), x)
    bound = np.maximum(1e-12, 2 * np.spacing(X) / rv.stds())
    assert np.all(np.abs(rv.to_standard_normal(X) - U) <= bound)
