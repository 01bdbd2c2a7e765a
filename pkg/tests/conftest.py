import functools

import numpy as np
import pytest

from reliab.distributions import RandomVector, make_distribution
from reliab.fixtures import fit_fixture


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def fixture_model(name):
    return fit_fixture(name)


@pytest.fixture(scope="session")
def case1_model():
    return fixture_model("case1")


@pytest.fixture(scope="session")
def case2_model():
    return fixture_model("case2")


def standard_normal_vector(n):
    return RandomVector(tuple(make_distribution("normal", 0.0, 1.0) for _ in range(n)),
                        tuple(f"u{i + 1}" for i in range(n)))


def linear_gaussian_instances(count, seed):
    """Random ``(beta0, a, s)`` draws with convolved reliability index in [1, 4].

    ``s/|a|`` stays below 0.75: past about 0.8 a 10-node Gauss-Hermite sum of
    ``Phi(-(beta0 + s v)/|a|)`` is itself off by more than 1e-4 relative.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 5))
        a = rng.normal(size=n)
        norm_a = rng.uniform(0.5, 2.0)
        a *= norm_a / np.linalg.norm(a)
        s = float(rng.uniform(0.05, 0.75) * norm_a)
        beta = rng.uniform(1.0, 4.0)
        out.append((float(beta * np.sqrt(norm_a**2 + s * s)), a, s))
    return out
