"""Surrogate responses pulled back into standard normal space."""

from __future__ import annotations

import numpy as np

from .distributions import RandomVector


def response_in_u(model, rv: RandomVector, u_x):
    """Return ``(mu, sigma, dmu/du, dsigma/du)`` at ``x = T(u_x)``."""
    u_x = np.asarray(u_x, dtype=float)
    x = rv.from_standard_normal(u_x)
    p = model.predict_with_grad(x)
    jac = rv.jacobian_diag(u_x)
    return p.mu, p.sigma, p.dmu * jac, p.dsigma * jac


def conditional_limit_state(model, rv: RandomVector, y: float, u_y: float):
    """``g(u_x) = mu + u_y*sigma - y`` and its analytic ``(value, grad)`` companion."""

    def value_and_grad(u_x):
        mu, sigma, dmu, dsigma = response_in_u(model, rv, u_x)
        return mu + u_y * sigma - y, dmu + u_y * dsigma

    def g(u_x):
        mu, sigma = model.predict(rv.from_standard_normal(np.asarray(u_x, dtype=float)))
        return mu + u_y * sigma - y

    return g, value_and_grad
