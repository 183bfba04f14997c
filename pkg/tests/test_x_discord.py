import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from backend import measurement_oracle
from backend.density_core import EntropyUnit, partial_trace, von_neumann_entropy
from backend.measurement_oracle import MeasurementDirection
from backend.x_canonical import CanonicalXState, embed
from backend.x_discord import (
    HALF_PI, Branch, ConditionalEntropyParams, bifurcation_report, conditional_entropy,
    curvature_at_0, curvature_at_pi2, curvature_windows, discord, entropy_AB, entropy_B,
    finite_difference_curvature, q0, q_at, q_pi2, second_derivative_at_0, second_derivative_at_pi2)
from tests.conftest import is_nondegenerate, random_canonical_states

BELL = CanonicalXState(0.5, 0.0, 0.0, 0.5, u=0.5)
MIXED = CanonicalXState(0.25, 0.25, 0.25, 0.25)


def product_x_state(p, s):
    """diag(p, 1-p) x diag(s, 1-s)."""
    return CanonicalXState(p * s, p * (1 - s), (1 - p) * s, (1 - p) * (1 - s))


def split_coherence(a, b, w):
    """State with b = c and coherences u + v = w shared in proportion to their bounds."""
    d = 1.0 - a - 2.0 * b
    cap_u, cap_v = math.sqrt(a * d), b
    return CanonicalXState(a, b, b, d, u=w * cap_u / (cap_u + cap_v), v=w * cap_v / (cap_u + cap_v))


# --- entropies ---
def test_entropy_b_examples():
    assert entropy_B(MIXED, "bits") == pytest.approx(1.0)
    assert entropy_B(CanonicalXState(1.0, 0.0, 0.0, 0.0)) == 0.0


def test_entropy_b_matches_generic_marginal():
    for s in random_canonical_states(3, 50):
        generic = von_neumann_entropy(partial_trace(embed(s), "B"))
        assert entropy_B(s) == pytest.approx(generic, abs=1e-12)


def test_entropy_ab_examples():
    assert entropy_AB(MIXED, EntropyUnit.BITS) == pytest.approx(2.0)
    assert entropy_AB(BELL) == pytest.approx(0.0, abs=1e-15)


def test_entropy_ab_matches_eigensolve():
    for s in random_canonical_states(4, 1000):
        assert abs(entropy_AB(s) - von_neumann_entropy(embed(s))) <= 1e-11


# --- conditional entropy ---
def test_weights_are_distributions():
    for s in random_canonical_states(5, 50):
        p = ConditionalEntropyParams.from_state(s)
        for theta in np.linspace(0.0, HALF_PI, 7):
            lambdas = np.array(p.spectral_weights(theta))
            assert sum(p.outcome_weights(theta)) == pytest.approx(1.0)
            assert lambdas.sum() == pytest.approx(1.0)
            assert lambdas.min() >= -1e-12


def test_conditional_entropy_of_diagonal_state_at_zero():
    s = CanonicalXState(0.1, 0.2, 0.3, 0.4)
    joint = -sum(x * math.log(x) for x in (0.1, 0.2, 0.3, 0.4))
    marginal = -sum(x * math.log(x) for x in (0.4, 0.6))
    assert conditional_entropy(s, 0.0) == pytest.approx(joint - marginal)


def test_conditional_entropy_vanishes_for_bell():
    np.testing.assert_allclose(conditional_entropy(BELL, np.linspace(0, HALF_PI, 11)), 0.0, atol=1e-12)


def test_conditional_entropy_matches_explicit_measurement():
    for s in random_canonical_states(6, 30):
        for theta in (0.0, 0.4, 1.1, HALF_PI):
            explicit = measurement_oracle.conditional_entropy_at(embed(s), MeasurementDirection(theta, 0.0))
            assert abs(conditional_entropy(s, theta) - explicit) <= 1e-12


def test_endpoint_closed_forms_match_q_at():
    for s in random_canonical_states(7, 100):
        assert q_at(s, 0.0) == pytest.approx(q0(s), abs=1e-13)
        assert q_at(s, HALF_PI) == pytest.approx(q_pi2(s), abs=1e-13)


def test_product_states_have_zero_q():
    s = product_x_state(0.3, 0.8)
    np.testing.assert_allclose(q_at(s, np.linspace(0, HALF_PI, 9)), 0.0, atol=1e-14)
    assert discord(s).q_value == pytest.approx(0.0, abs=1e-14)


def test_bell_endpoints():
    assert q0(BELL, "bits") == pytest.approx(1.0)
    assert q_pi2(BELL, "bits") == pytest.approx(1.0)


# --- curvatures ---
def test_curvatures_match_finite_differences():
    states = [s for s in random_canonical_states(8, 600) if is_nondegenerate(s)][:200]
    assert len(states) == 200
    for s in states:
        np.testing.assert_allclose(second_derivative_at_0(s), finite_difference_curvature(s, 0.0),
                                   rtol=1e-5, atol=1e-6)
        np.testing.assert_allclose(second_derivative_at_pi2(s), finite_difference_curvature(s, HALF_PI),
                                   rtol=1e-5, atol=1e-6)


def test_first_derivative_vanishes_at_endpoints():
    h = 1e-4
    for s in random_canonical_states(9, 200):
        for theta in (0.0, HALF_PI):
            slope = (conditional_entropy(s, theta + h) - conditional_entropy(s, theta - h)) / (2 * h)
            assert abs(slope) <= 1e-6


def test_equal_populations_use_the_continuous_limit():
    s = CanonicalXState(0.2, 0.3, 0.2, 0.3, u=0.1, v=0.15)
    result = curvature_at_0(s)
    assert not result.fallback
    np.testing.assert_allclose(result.value, finite_difference_curvature(s, 0.0), rtol=1e-5, atol=1e-6)


def test_degenerate_formulas_fall_back_and_say_so():
    empty_b = CanonicalXState(0.5, 0.0, 0.2, 0.3, u=0.1)
    assert curvature_at_0(empty_b).fallback
    assert curvature_at_pi2(BELL).fallback
    assert curvature_at_pi2(MIXED).fallback
    assert bifurcation_report(BELL).fallback == (True, True)


def test_singular_curvature_is_reported_as_infinite():
    s = CanonicalXState(0.0, 0.3, 0.4, 0.3, u=0.0, v=0.3)
    stencils = [finite_difference_curvature(s, 0.0, h) for h in (1e-3, 1e-4, 1e-5)]
    assert stencils[0] < stencils[1] < stencils[2]
    result = curvature_at_0(s)
    assert result.fallback
    assert result.value == math.inf
    assert not bifurcation_report(s).interior_minimum_possible


def test_flat_conditional_entropy_keeps_a_finite_fallback():
    for result in (curvature_at_0(BELL), curvature_at_pi2(BELL), curvature_at_pi2(MIXED)):
        assert result.fallback
        assert math.isfinite(result.value)
        assert result.value == pytest.approx(0.0, abs=1e-6)


def test_diagonal_state_report_matches_scan():
    s = CanonicalXState(0.1, 0.2, 0.3, 0.4)
    report = bifurcation_report(s)
    c0, cpi2 = report.endpoint_curvatures
    thetas = np.linspace(0.0, HALF_PI, 401)
    values = conditional_entropy(s, thetas)
    # a positive curvature at an endpoint makes it a local minimum of the scan
    if c0 > 0:
        assert values[1] > values[0]
    if cpi2 > 0:
        assert values[-2] > values[-1]
    assert not report.interior_minimum_possible or (values[1] < values[0] and values[-2] < values[-1])


# --- piecewise discord ---
def test_discord_of_standard_states():
    assert discord(MIXED).q_value == pytest.approx(0.0, abs=1e-14)
    bell = discord(BELL, "bits")
    assert bell.q_value == pytest.approx(1.0, abs=1e-12)
    assert bell.branch in (Branch.Q0, Branch.Q_PI2)


@seed(11)
@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_discord_is_the_minimum(state_seed):
    s = random_canonical_states(state_seed, 1)[0]
    result = discord(s)
    assert result.q_value >= 0.0
    assert result.q_value <= min(result.q0, result.q_pi2) + 1e-12
    assert np.min(q_at(s, np.linspace(0.0, HALF_PI, 1001))) >= result.q_value - 1e-9
    if result.branch is Branch.Q0:
        assert result.theta_opt == 0.0
    elif result.branch is Branch.Q_PI2:
        assert result.theta_opt == HALF_PI


def test_discord_units_convert():
    s = random_canonical_states(12, 1)[0]
    assert discord(s, "bits").q_value == pytest.approx(discord(s, "nats").q_value / math.log(2.0))


@pytest.mark.slow
def test_discord_matches_brute_force_measurement():
    for s in random_canonical_states(2024, 500):
        assert abs(discord(s).q_value - measurement_oracle.discord(embed(s))) <= 2e-6


def _interior_minimum_states():
    found = []
    for a in np.linspace(0.05, 0.11, 7):
        for b in (0.115, 0.125, 0.135):
            d = 1.0 - a - 2.0 * b
            w_max = math.sqrt(a * d) + b
            for window in curvature_windows(lambda w: split_coherence(a, b, w), (1e-3, 0.98 * w_max), 401):
                if not window.degenerate:
                    found.append(split_coherence(a, b, 0.5 * (window.lo + window.hi)))
    return found


@pytest.mark.slow
def test_interior_minimum_beats_both_endpoints():
    states = [s for s in _interior_minimum_states() if bifurcation_report(s).interior_minimum_possible]
    assert len(states) >= 5
    for s in states[:8]:
        result = discord(s)
        assert result.branch is Branch.Q_THETA
        assert 0.0 < result.theta_opt < HALF_PI
        assert result.q_value < min(result.q0, result.q_pi2) - 1e-12
        assert abs(result.q_value - measurement_oracle.discord(embed(s))) <= 2e-6


def test_curvature_window_of_a_known_family():
    windows = curvature_windows(lambda w: split_coherence(0.0783, 0.125, w), (1e-3, 0.3), 401)
    proper = [w for w in windows if not w.degenerate]
    assert len(proper) >= 1
    lo, hi = proper[0]
    assert lo == pytest.approx(0.0999, abs=5e-4)
    middle = split_coherence(0.0783, 0.125, 0.5 * (lo + hi))
    assert bifurcation_report(middle).interior_minimum_possible
