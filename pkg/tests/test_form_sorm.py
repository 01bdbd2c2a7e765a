import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from reliab.distributions import norm_cdf
from reliab.errors import (
    CurvatureSingularity,
    DegenerateGradient,
    Dimension1,
    MaxIterations,
    NoSignChange,
    NotConverged,
)
from reliab.form_sorm import MppOptions, MppResult, find_mpp, form_pf, sorm_breitung, sorm_curvatures, sorm_tvedt
from reliab.limit_state import builtin_problem

# P[u1 > 3 + 0.1 u2^2] by adaptive quadrature of E[Phi(-(3 + 0.1 U^2))]
PARABOLOID_EXACT = integrate.quad(lambda t: stats.norm.sf(3 + 0.1 * t * t) * stats.norm.pdf(t),
                                  -np.inf, np.inf, epsabs=0, epsrel=1e-13)[0]


def paraboloid(u):
    return 3.0 + 0.1 * u[1] ** 2 - u[0]


def _unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def test_linear_limit_state():
    alpha = _unit([1.0, -2.0, 0.5])
    mpp = find_mpp(lambda u: 3.0 - alpha @ u, 3)
    assert mpp.converged and mpp.iterations <= 2
    # central differences with a 1e-6 step carry ~eps*|g|/h of rounding
    assert np.allclose(mpp.u_star, 3.0 * alpha, atol=1e-8)
    assert mpp.beta == pytest.approx(3.0, abs=1e-8)
    assert abs(np.linalg.norm(mpp.alpha) - 1.0) <= 1e-10
    exact = find_mpp(lambda u: 3.0 - alpha @ u, 3, value_and_grad=lambda u: (3.0 - alpha @ u, -alpha))
    assert exact.beta == pytest.approx(3.0, abs=1e-14) and exact.iterations <= 2


def test_example1_closed_form_mpp():
    rv, ls = builtin_problem("example1")
    mpp = find_mpp(lambda u: ls.evaluate(rv.from_standard_normal(u)), 1)
    assert mpp.converged
    # |g| <= tol_g (1 + |g(0)|) allows |du| <= that over g'(u*) = 0.25 / 1.16
    bound = 1e-6 * (1 + 0.42) / (0.25 / 1.16)
    assert mpp.u_star[0] == pytest.approx(1.16**2 - 4.0, abs=bound)
    assert mpp.beta == pytest.approx(2.6544, abs=bound)
    assert form_pf(mpp) == pytest.approx(3.9725e-3, abs=1e-6)


def test_origin_in_failure_gives_negative_beta():
    mpp = find_mpp(lambda u: u @ u - 9.0, 2)
    assert mpp.converged
    assert mpp.beta == pytest.approx(-3.0, abs=1e-6)
    assert form_pf(mpp) > 0.5


def test_origin_on_the_surface():
    mpp = find_mpp(lambda u: u[0], 2)
    assert mpp.beta == 0.0 and form_pf(mpp) == 0.5


@pytest.mark.parametrize("beta,pf", [(0.0, 0.5), (-1.0, 0.841344746068543), (2.6544, 3.9725e-3)])
def test_form_pf_values(beta, pf):
    mpp = MppResult(np.zeros(1), beta, np.ones(1), 1.0, 1, True)
    assert form_pf(mpp) == pytest.approx(pf, abs=1e-6 if beta == 2.6544 else 1e-12)


def test_form_pf_requires_convergence():
    with pytest.raises(NotConverged):
        form_pf(MppResult(np.zeros(1), 1.0, np.ones(1), 1.0, 100, False))


def test_form_pf_deep_tail_log_space():
    mpp = MppResult(np.zeros(1), 30.0, np.ones(1), 1.0, 1, True)
    assert math.log(form_pf(mpp)) == pytest.approx(stats.norm.logsf(30.0), rel=1e-12)


def test_form_pf_monotone_in_beta():
    betas = np.linspace(-8, 12, 400)
    pf = [form_pf(MppResult(np.zeros(1), b, np.ones(1), 1.0, 1, True)) for b in betas]
    assert np.all(np.diff(pf) < 0)


def test_no_sign_change():
    with pytest.raises(NoSignChange) as info:
        find_mpp(lambda u: 20.0 + 0.0 * u[0], 2)
    assert info.value.origin_safe and info.value.radius == 10.0


def test_max_iterations():
    # a strongly curved surface cannot converge in one step
    g = lambda u: 2.0 - u[0] + 2.0 * u[1] ** 2 + np.sin(3 * u[1])
    res = find_mpp(g, 2, MppOptions(max_iters=1))
    assert not res.converged
    with pytest.raises(MaxIterations) as info:
        find_mpp(g, 2, MppOptions(max_iters=1, strict=True))
    assert info.value.result is not None


def test_analytic_gradient_path_agrees():
    g = lambda u: 3.0 + 0.1 * u[1] ** 2 - u[0] + 0.05 * u[2] ** 3
    vg = lambda u: (g(u), np.array([-1.0, 0.2 * u[1], 0.15 * u[2] ** 2]))
    a = find_mpp(g, 3)
    b = find_mpp(g, 3, value_and_grad=vg)
    assert np.allclose(a.u_star, b.u_star, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 4.0), st.lists(st.floats(-1, 1), min_size=2, max_size=4).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_linear_form_and_sorm_exact(beta0, a):
    alpha = _unit(a)
    g = lambda u: beta0 - alpha @ u
    exact = find_mpp(g, alpha.size, value_and_grad=lambda u: (g(u), -alpha))
    assert form_pf(exact) == pytest.approx(norm_cdf(-beta0), rel=1e-13)
    mpp = find_mpp(g, alpha.size)
    # finite-difference gradient: beta good to ~1e-9, so pf to ~beta * 1e-9
    assert form_pf(mpp) == pytest.approx(norm_cdf(-beta0), rel=1e-8)
    kappas = sorm_curvatures(g, mpp).kappas
    assert np.max(np.abs(kappas)) <= 1e-6
    assert sorm_breitung(mpp.beta, np.zeros_like(kappas)) == form_pf(mpp)
    assert sorm_tvedt(mpp.beta, np.zeros_like(kappas)) == form_pf(mpp)


def _nonlinear(u):
    return 2.5 - u[0] + 0.15 * (u[1] - 0.3) ** 2 + 0.05 * u[2] ** 2 + 0.1 * u[1] * u[2]


def test_stationarity_angle():
    mpp = find_mpp(_nonlinear, 3)
    grad = mpp.grad
    cos = -(mpp.u_star @ grad) / (np.linalg.norm(mpp.u_star) * np.linalg.norm(grad))
    assert math.acos(min(1.0, cos)) <= 1e-4


def test_rotation_invariance():
    base = find_mpp(_nonlinear, 3)
    rng = np.random.default_rng(17)
    for _ in range(5):
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        rotated = find_mpp(lambda v: _nonlinear(Q.T @ v), 3)
        assert np.allclose(Q.T @ rotated.u_star, base.u_star, atol=1e-6)
        assert rotated.beta == pytest.approx(base.beta, abs=1e-6)


def test_cylinder_curvature():
    for c in (0.05, 0.1, 0.3):
        g = lambda u: 3.0 - u[0] + c * u[1] ** 2
        mpp = find_mpp(g, 2)
        (kappa,) = sorm_curvatures(g, mpp).kappas
        assert kappa == pytest.approx(2 * c, rel=0.02)


def test_curvature_sign_toward_origin_is_negative():
    g = lambda u: 3.0 - u[0] - 0.1 * u[1] ** 2
    (kappa,) = sorm_curvatures(g, find_mpp(g, 2)).kappas
    assert kappa == pytest.approx(-0.2, rel=0.02)


def test_curvatures_guard_rails():
    g1 = lambda u: 2.0 - u[0]
    with pytest.raises(Dimension1):
        sorm_curvatures(g1, find_mpp(g1, 1))
    flat = MppResult(np.array([1.0, 0.0]), 1.0, np.array([1.0, 0.0]), 0.0, 1, True, grad=np.zeros(2))
    with pytest.raises(DegenerateGradient):
        sorm_curvatures(lambda u: 0.0 * u[0], flat)
    with pytest.raises(NotConverged):
        sorm_curvatures(paraboloid, MppResult(np.array([3.0, 0.0]), 3.0, np.array([1.0, 0.0]), 1.0, 100, False))


def test_breitung_values():
    assert sorm_breitung(3.0, [0.0]) == norm_cdf(-3.0)
    assert sorm_breitung(3.0, [0.2]) == pytest.approx(norm_cdf(-3.0) / math.sqrt(1.6), rel=1e-14)
    assert sorm_breitung(3.0, [0.2]) == pytest.approx(1.0672e-3, abs=5e-8)
    with pytest.raises(CurvatureSingularity):
        sorm_breitung(3.0, [-0.4])


def test_tvedt_values():
    assert sorm_tvedt(3.0, [0.0, 0.0]) == norm_cdf(-3.0)
    with pytest.raises(CurvatureSingularity):
        sorm_tvedt(3.0, [-0.3])  # 1 + 3k > 0 but 1 + 4k < 0


def test_tvedt_against_quadrature_oracle():
    tv, br = sorm_tvedt(3.0, [0.2]), sorm_breitung(3.0, [0.2])
    assert abs(tv - PARABOLOID_EXACT) < abs(br - PARABOLOID_EXACT)
    assert tv == pytest.approx(PARABOLOID_EXACT, rel=2e-3)


def test_second_order_on_paraboloid_fixture():
    mpp = find_mpp(paraboloid, 2)
    kappas = sorm_curvatures(paraboloid, mpp).kappas
    assert mpp.beta == pytest.approx(3.0, abs=1e-8)
    assert kappas[0] == pytest.approx(0.2, rel=1e-4)
    assert sorm_breitung(mpp.beta, kappas) == pytest.approx(1.0672e-3, rel=1e-4)


def test_negative_beta_second_order_uses_complement():
    # the complement event of a safe-origin paraboloid
    kappas = np.array([0.2])
    assert sorm_breitung(-3.0, -kappas) == pytest.approx(1.0 - sorm_breitung(3.0, kappas), rel=1e-14)
    assert sorm_tvedt(-3.0, -kappas) == pytest.approx(1.0 - sorm_tvedt(3.0, kappas), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 6.0), st.lists(st.floats(-0.1, 0.5), min_size=1, max_size=5))
def test_second_order_in_unit_interval(beta, kappas):
    for f in (sorm_breitung, sorm_tvedt):
        p = f(beta, kappas)
        assert 0.0 < p < 1.0
