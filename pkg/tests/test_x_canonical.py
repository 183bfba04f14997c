import math

import numpy as np
import pytest

from backend import measurement_oracle
from backend.density_core import validate, von_neumann_entropy
from backend.errors import InvalidXState, NotX
from backend.x_canonical import (
    CanonicalXState, XState, apply_transformations, canonicalize, embed, sample_random_xstate)


def test_real_nonnegative_input_is_left_alone():
    x = XState(0.4, 0.1, 0.2, 0.3, u1=0.2, v1=0.05)
    s = canonicalize(x)
    assert (s.u, s.v) == (0.2, 0.05)
    assert s.applied_transformations == ()


def test_pure_imaginary_coherence_becomes_modulus():
    s = canonicalize(XState(0.4, 0.1, 0.2, 0.3, u2=0.2))
    assert s.u == pytest.approx(0.2)
    assert s.v == 0.0


def test_nanopore_corner_becomes_its_modulus():
    r, u = 0.03, 0.02
    x = XState(0.5, 0.2, 0.2, 0.1, u1=-r, u2=2 * u, v1=r)
    s = canonicalize(x)
    assert s.u == pytest.approx(math.sqrt(r * r + 4 * u * u), abs=1e-15)
    assert s.v == pytest.approx(r)


def test_transformations_reproduce_canonical_matrix(rng):
    for _ in range(200):
        x = sample_random_xstate(rng)
        s = canonicalize(x)
        rotated = apply_transformations(x.to_matrix(), s.applied_transformations)
        np.testing.assert_allclose(rotated.entries, s.to_matrix(), atol=1e-12)
        np.testing.assert_allclose(embed(s).eigenvalues(), embed(x).eigenvalues(), atol=1e-12)


def test_canonicalize_is_idempotent(rng):
    for _ in range(100):
        s = canonicalize(sample_random_xstate(rng))
        again = canonicalize(s)
        assert again.applied_transformations == ()
        np.testing.assert_allclose([again.a, again.b, again.c, again.d, again.u, again.v],
                                   [s.a, s.b, s.c, s.d, s.u, s.v], atol=1e-14)


def test_invalid_state_is_rejected():
    with pytest.raises(InvalidXState):
        canonicalize(XState(0.5, 0.2, 0.2, 0.2))
    with pytest.raises(InvalidXState):
        canonicalize(XState(0.25, 0.25, 0.25, 0.25, u1=0.3))
    with pytest.raises(InvalidXState):
        canonicalize(XState(1.1, 0.0, 0.0, -0.1))


def test_embed_examples():
    bell = embed(XState(0.5, 0.0, 0.0, 0.5, u1=0.5))
    assert von_neumann_entropy(bell) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(embed(CanonicalXState(0.25, 0.25, 0.25, 0.25)).entries,
                               np.eye(4) / 4)


def test_from_matrix_requires_x_pattern():
    m = np.eye(4, dtype=complex) / 4
    m[0, 1] = m[1, 0] = 0.1
    with pytest.raises(NotX):
        XState.from_matrix(m)


def test_sampler_is_deterministic():
    assert sample_random_xstate(42) == sample_random_xstate(42)
    assert sample_random_xstate(42) != sample_random_xstate(43)


@pytest.mark.slow
def test_sampled_states_are_valid():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        x = sample_random_xstate(rng)
        assert not x.violations()
        validate(x.to_matrix())


def test_saturated_coherences_are_still_valid():
    a, b, c, d = 0.4, 0.1, 0.2, 0.3
    phase_u, phase_v = 0.7, -1.9
    x = XState(a, b, c, d,
               u1=math.sqrt(a * d) * math.cos(phase_u), u2=math.sqrt(a * d) * math.sin(phase_u),
               v1=math.sqrt(b * c) * math.cos(phase_v), v2=math.sqrt(b * c) * math.sin(phase_v))
    rho = embed(x)
    assert min(rho.eigenvalues()) == pytest.approx(0.0, abs=1e-12)
    assert canonicalize(x).u == pytest.approx(math.sqrt(a * d))


def test_discord_survives_canonicalization(rng):
    for _ in range(5):
        x = sample_random_xstate(rng)
        before = measurement_oracle.discord(embed(x))
        after = measurement_oracle.discord(embed(canonicalize(x)))
        assert abs(before - after) <= 2e-6
