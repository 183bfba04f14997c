import os
import sys

import numpy as np
import pytest

# Add the project root directory to sys.path
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from backend.x_canonical import canonicalize, sample_random_xstate  # noqa: E402
from backend.x_discord import ConditionalEntropyParams  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks (run by default)")


def random_canonical_states(seed, count):
    rng = np.random.default_rng(seed)
    return [canonicalize(sample_random_xstate(rng)) for _ in range(count)]


def is_nondegenerate(s, floor=0.02, max_radius=0.95):
    """Populations away from 0 and R away from 0 and 1: the closed-form curvatures apply cleanly."""
    radius = ConditionalEntropyParams.from_state(s).radius
    return min(s.a, s.b, s.c, s.d) > floor and 0.05 < radius < max_radius


def random_unitary(rng):
    z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density_matrix(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
