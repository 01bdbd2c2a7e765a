import math

import numpy as np
import pytest
from scipy.special import ndtr

from conftest import linear_gaussian_instances, standard_normal_vector
from reliab.distributions import RandomVector, make_distribution
from reliab.errors import EvalError
from reliab.ghqrm import ghqrm_pf
from reliab.gp import ZeroVariance, linear_gaussian
from reliab.limit_state import LimitState, builtin_problem, parse_expression
from reliab.mcs import CHUNK, chunk_generator, mcs_conditional_pf_samples, mcs_pf, mcs_pf_epistemic

LINEAR_1D = parse_expression("x + 2.6544", ["x"])
STD1 = standard_normal_vector(1)


def test_linear_one_dimensional_tail():
    res = mcs_pf(LINEAR_1D, RandomVector((make_distribution("normal", 0.0, 1.0),), ("x",)), 1_000_000, 42)
    exact = float(ndtr(-2.6544))
    assert exact == pytest.approx(3.9725e-3, abs=5e-8)
    assert abs(res.pf_hat - exact) <= 3 * res.standard_error
    assert res.pf_hat == res.n_failures / res.n_samples
    assert res.standard_error == math.sqrt(res.pf_hat * (1 - res.pf_hat) / res.n_samples)


def test_reproducible_and_thread_independent():
    rv, ls = builtin_problem("example1")
    n = 5 * CHUNK + 1234  # a ragged last chunk
    runs = [mcs_pf(ls, rv, n, 7, threads=t) for t in (1, 2, 5)]
    assert runs[0] == runs[1] == runs[2]
    assert mcs_pf(ls, rv, n, 8).n_failures != runs[0].n_failures


def test_prefix_stability_across_sample_sizes():
    # chunk j is keyed on (seed, j) only, so a longer run extends a shorter one
    rv = STD1
    ls = parse_expression("u1 + 1.0", ["u1"])
    short = mcs_pf(ls, rv, 2 * CHUNK, 3)
    longer = mcs_pf(ls, rv, 3 * CHUNK, 3)
    third = int(np.count_nonzero(chunk_generator(3, 2).standard_normal((CHUNK, 1))[:, 0] + 1.0 < 0))
    assert longer.n_failures == short.n_failures + third


def test_minimum_sample_count():
    with pytest.raises(ValueError):
        mcs_pf(LINEAR_1D, STD1, 9_999, 1)
    with pytest.raises(ValueError):
        mcs_pf_epistemic(linear_gaussian(1.0, [1.0], 0.1), STD1, 0.0, 100, 1)


def test_coverage_calibration():
    exact = float(ndtr(-2.6544))
    ls = parse_expression("u1 + 2.6544", ["u1"])
    hits = 0
    for seed in range(100):
        r = mcs_pf(ls, STD1, 100_000, seed)
        hits += abs(r.pf_hat - exact) <= 1.96 * r.standard_error
    assert 93 <= hits <= 99


def _first_negative(seed, shift, chunks):
    for j in range(chunks):
        bad = np.flatnonzero(chunk_generator(seed, j).standard_normal((CHUNK, 1))[:, 0] + shift < 0)
        if bad.size:
            return j * CHUNK + int(bad[0])
    return None


def test_eval_error_reports_global_sample_index():
    # pick the first seed whose first undefined sample lies past chunk 0
    seed = next(s for s in range(100) if (_first_negative(s, 4.3, 8) or 0) >= CHUNK)
    ls = parse_expression("sqrt(u1 + 4.3)", ["u1"])
    for threads in (1, 4):
        with pytest.raises(EvalError) as info:
            mcs_pf(ls, STD1, 8 * CHUNK, seed, threads=threads)
        assert info.value.index == _first_negative(seed, 4.3, 8)


def test_undefined_samples_count_as_failures_when_flagged():
    batch = parse_expression("sqrt(u1 + 3.2) - 0.1", ["u1"]).batch
    ls = LimitState(batch, ("u1",), undefined_is_failure=True)
    res = mcs_pf(ls, STD1, 200_000, 4)
    # failure is u1 < 0.01 - 3.2, and undefined u1 < -3.2 is inside it
    assert abs(res.pf_hat - float(ndtr(-3.19))) <= 3 * res.standard_error


def test_epistemic_zero_variance_matches_mean_model(case2_model):
    rv, _ = builtin_problem("example1")
    model = ZeroVariance(case2_model)
    mean_ls = LimitState(lambda X: model.predict(X)[0], rv.names)
    a = mcs_pf_epistemic(model, rv, 0.0, 1_000_000, 9)
    b = mcs_pf(mean_ls, rv, 1_000_000, 9)
    assert abs(a.pf_hat - b.pf_hat) <= 3 * math.hypot(a.standard_error, b.standard_error)


@pytest.mark.parametrize("beta0, a, s", linear_gaussian_instances(5, seed=13))
def test_epistemic_linear_gaussian_convolution(beta0, a, s):
    rv = standard_normal_vector(a.size)
    res = mcs_pf_epistemic(linear_gaussian(beta0, a, s), rv, 0.0, 1_000_000, 17)
    exact = float(ndtr(-beta0 / math.sqrt(a @ a + s * s)))
    assert abs(res.pf_hat - exact) <= 3 * res.standard_error


def test_epistemic_thread_independent(case1_model):
    rv, _ = builtin_problem("example1")
    runs = {mcs_pf_epistemic(case1_model, rv, 0.0, 300_000, 5, threads=t) for t in (1, 3)}
    assert len(runs) == 1


def test_epistemic_threshold_shift():
    # mu = 2 - u with failure below y = 1 is the same event as mu = 1 - u below 0
    a = mcs_pf_epistemic(linear_gaussian(2.0, [1.0], 0.3), STD1, 1.0, 100_000, 2)
    b = mcs_pf_epistemic(linear_gaussian(1.0, [1.0], 0.3), STD1, 0.0, 100_000, 2)
    assert a.n_failures == b.n_failures


def test_conditional_samples_zero_variance():
    model = ZeroVariance(linear_gaussian(2.0, [1.0], 0.5))
    res = mcs_conditional_pf_samples(model, STD1, 0.0, 100, 20_000, 3)
    p = float(ndtr(-2.0))
    assert res.std <= 2 * math.sqrt(p * (1 - p) / 20_000)
    assert res.w.shape == (100,) and res.u_y.shape == (100,)


def test_conditional_samples_rejects_few_draws():
    with pytest.raises(ValueError):
        mcs_conditional_pf_samples(linear_gaussian(2.0, [1.0], 0.5), STD1, 0.0, 99, 20_000, 3)


def test_conditional_samples_thread_independent():
    gp = linear_gaussian(2.0, [0.6, 0.8], 0.4)
    rv = standard_normal_vector(2)
    one = mcs_conditional_pf_samples(gp, rv, 0.0, 120, 10_000, 8, threads=1)
    many = mcs_conditional_pf_samples(gp, rv, 0.0, 120, 10_000, 8, threads=4)
    np.testing.assert_array_equal(one.w, many.w)


def test_conditional_samples_case1_cov_same_order_as_ghqrm(case1_model):
    rv, _ = builtin_problem("example1")
    sampled = mcs_conditional_pf_samples(case1_model, rv, 0.0, 300, 100_000, 12)
    gq = ghqrm_pf(case1_model, rv, 0.0, 10).cov
    assert gq / 3 <= sampled.cov <= 3 * gq
