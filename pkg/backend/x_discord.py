"""
Quantum discord of canonical X states by the piecewise formula

    Q = min{Q0, Q_theta, Q_pi/2}

with closed forms at the endpoint measurement angles, a grid scan plus bounded
Brent refinement for an interior minimum, and the analytic endpoint curvatures
of the conditional entropy that decide whether an interior minimum can exist.

Everything is computed in nats and converted at the return boundary.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import entr

from backend.density_core import EntropyUnit
from backend.x_canonical import CanonicalXState
from utils.logger import log_debug

HALF_PI = 0.5 * math.pi
LN2 = math.log(2.0)

GRID_POINTS = 64
REFINE_TOL = 1e-10
# q_theta has to beat the best endpoint by more than this to win.
BRANCH_TIE = 1e-12
CLAMP_FLOOR = -1e-10

# Below these the closed-form curvatures lose their footing and the
# five-point stencil takes over.
POPULATION_EPS = 1e-12
RADIUS_EPS = 1e-8
FD_STEP = 1e-4
# Relative drift of the stencil under a tenfold smaller step that marks a
# singular curvature.
DIVERGENCE_REL = 1e-3

DEGENERATE_WIDTH = 1e-6
CURVATURE_ZERO = 1e-14


class Branch(str, Enum):
    Q0 = "Q0"
    Q_THETA = "Qtheta"
    Q_PI2 = "Qpi/2"


@dataclass(frozen=True)
class ConditionalEntropyParams:
    """
    Combinations of the canonical parameters that the conditional entropy
    depends on. With x = cos(theta):

        Lambda_1,2 = (1 +- k x) / 2
        lambda_1,2 = [1 + k x +- sqrt((m + n x)^2 + 4 w^2 (1 - x^2))] / 4
        lambda_3,4 = [1 - k x +- sqrt((m - n x)^2 + 4 w^2 (1 - x^2))] / 4
    """
    a: float
    b: float
    c: float
    d: float
    u: float
    v: float

    @classmethod
    def from_state(cls, s: CanonicalXState):
        return cls(s.a, s.b, s.c, s.d, s.u, s.v)

    @property
    def k(self) -> float:
        return self.a - self.b + self.c - self.d

    @property
    def m(self) -> float:
        return self.a + self.b - self.c - self.d

    @property
    def n(self) -> float:
        return self.a - self.b - self.c + self.d

    @property
    def w(self) -> float:
        return self.u + self.v

    @property
    def radius(self) -> float:
        """R = sqrt(m^2 + 4 w^2), the Bloch radius of A's conditional states at theta = pi/2."""
        return math.hypot(self.m, 2.0 * self.w)

    def outcome_weights(self, theta):
        x = np.cos(theta)
        return 0.5 * (1.0 + self.k * x), 0.5 * (1.0 - self.k * x)

    def spectral_weights(self, theta):
        x = np.cos(theta)
        coherence = 4.0 * self.w ** 2 * (1.0 - x * x)
        root_up = np.sqrt((self.m + self.n * x) ** 2 + coherence)
        root_down = np.sqrt((self.m - self.n * x) ** 2 + coherence)
        return (0.25 * (1.0 + self.k * x + root_up),
                0.25 * (1.0 + self.k * x - root_up),
                0.25 * (1.0 - self.k * x + root_down),
                0.25 * (1.0 - self.k * x - root_down))


@dataclass(frozen=True)
class DiscordResult:
    q_value: float
    branch: Branch
    theta_opt: float
    unit: EntropyUnit
    q0: float
    q_pi2: float
    q_theta: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "q_value": self.q_value,
            "branch": self.branch.value,
            "theta_opt": self.theta_opt,
            "unit": self.unit.value,
            "q0": self.q0,
            "q_pi2": self.q_pi2,
            "q_theta": self.q_theta,
        }


class Curvature(NamedTuple):
    value: float
    fallback: bool


@dataclass(frozen=True)
class BifurcationReport:
    interior_minimum_possible: bool
    endpoint_curvatures: tuple
    fallback: tuple = (False, False)


class CurvatureWindow(NamedTuple):
    lo: float
    hi: float

    @property
    def degenerate(self) -> bool:
        return self.hi - self.lo < DEGENERATE_WIDTH


def _entr_sum(*values) -> np.ndarray:
    return sum(entr(np.clip(v, 0.0, None)) for v in values)


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


def _params(s) -> ConditionalEntropyParams:
    if isinstance(s, ConditionalEntropyParams):
        return s
    return ConditionalEntropyParams.from_state(s)


def entropy_B(s: CanonicalXState, unit=EntropyUnit.NATS) -> float:
    nats = float(entr(s.a + s.c) + entr(s.b + s.d))
    return nats * EntropyUnit.parse(unit).factor


def joint_eigenvalues(s: CanonicalXState) -> np.ndarray:
    outer = math.hypot(0.5 * (s.a - s.d), s.u)
    inner = math.hypot(0.5 * (s.b - s.c), s.v)
    return np.array([0.5 * (s.a + s.d) + outer, 0.5 * (s.a + s.d) - outer,
                     0.5 * (s.b + s.c) + inner, 0.5 * (s.b + s.c) - inner])


def entropy_AB(s: CanonicalXState, unit=EntropyUnit.NATS) -> float:
    nats = float(np.sum(entr(np.clip(joint_eigenvalues(s), 0.0, None))))
    return nats * EntropyUnit.parse(unit).factor


def conditional_entropy(s: CanonicalXState, theta, unit=EntropyUnit.NATS):
    """
    Entropy of A after measuring B along the polar angle theta (azimuth 0).
    Accepts a scalar or an array of angles. The function is even about both
    0 and pi/2, so angles outside [0, pi/2] are valid too.
    """
    params = _params(s)
    lambdas = params.spectral_weights(theta)
    weights = params.outcome_weights(theta)
    nats = np.maximum(_entr_sum(*lambdas) - _entr_sum(*weights), 0.0)
    return _scalar(nats * EntropyUnit.parse(unit).factor)


def q_at(s: CanonicalXState, theta, unit=EntropyUnit.NATS):
    """Measurement-dependent discord for a projective measurement of B at angle theta."""
    unit = EntropyUnit.parse(unit)
    base = entropy_B(s) - entropy_AB(s)
    return _scalar((base + conditional_entropy(s, theta)) * unit.factor)


def q0(s: CanonicalXState, unit=EntropyUnit.NATS) -> float:
    nats = float(np.sum(entr(np.clip([s.a, s.b, s.c, s.d], 0.0, None)))) - entropy_AB(s)
    return nats * EntropyUnit.parse(unit).factor


def q_pi2(s: CanonicalXState, unit=EntropyUnit.NATS) -> float:
    radius = min(_params(s).radius, 1.0)
    spectral = 2.0 * (entr(0.25 * (1.0 + radius)) + entr(0.25 * (1.0 - radius)))
    nats = entropy_B(s) - entropy_AB(s) + float(spectral) - LN2
    return nats * EntropyUnit.parse(unit).factor


def _log_ratio_slope(x: float, y: float) -> float:
    """ln(x/y) / (x - y), continued to 1/x at x == y."""
    if x == y:
        return 1.0 / x
    return math.log1p((x - y) / y) / (x - y)


def finite_difference_curvature(s, theta: float, step: float = FD_STEP) -> float:
    """Five-point second derivative of the conditional entropy (nats) at theta."""
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * step
    f = conditional_entropy(_params(s), theta + offsets)
    return float((-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * step * step))


def _stencil_curvature(p, theta: float, where: str) -> Curvature:
    """Flagged stencil value, or a signed infinity when it keeps growing as the step shrinks."""
    coarse = finite_difference_curvature(p, theta, FD_STEP)
    fine = finite_difference_curvature(p, theta, 0.1 * FD_STEP)
    if abs(fine - coarse) > DIVERGENCE_REL * max(1.0, abs(coarse)):
        log_debug(f"curvature at {where}: stencil {coarse:.6e} -> {fine:.6e} with a 10x smaller step, diverges")
        return Curvature(math.copysign(math.inf, fine), True)
    log_debug(f"curvature at {where}: closed form degenerate, stencil value {coarse:.6e}")
    return Curvature(coarse, True)


def curvature_at_0(s) -> Curvature:
    p = _params(s)
    if min(p.a, p.b, p.c, p.d) <= POPULATION_EPS:
        return _stencil_curvature(p, 0.0, "0")
    a, b, c, d = p.a, p.b, p.c, p.d
    value = (0.25 * p.k * (2.0 * math.log((b + d) / (a + c)) + math.log(a * c / (b * d)))
             + 0.25 * p.n * math.log(a * d / (b * c))
             - 0.5 * p.w ** 2 * (_log_ratio_slope(a, c) + _log_ratio_slope(b, d)))
    return Curvature(value, False)


def curvature_at_pi2(s) -> Curvature:
    p = _params(s)
    radius = p.radius
    if radius < RADIUS_EPS or 1.0 - radius < RADIUS_EPS:
        return _stencil_curvature(p, HALF_PI, "pi/2")
    k, m, n, w = p.k, p.m, p.n, p.w
    skew = m * n / radius
    value = (k * k
             - (k + skew) ** 2 / (2.0 * (1.0 + radius))
             - (k - skew) ** 2 / (2.0 * (1.0 - radius))
             + (n * n * (1.0 - (m / radius) ** 2) - 4.0 * w * w)
             * math.log((1.0 - radius) / (1.0 + radius)) / (2.0 * radius))
    return Curvature(value, False)


def second_derivative_at_0(s) -> float:
    return curvature_at_0(s).value


def second_derivative_at_pi2(s) -> float:
    return curvature_at_pi2(s).value


def bifurcation_report(s) -> BifurcationReport:
    """Sign structure of the endpoint curvatures: both negative means an interior minimum must exist."""
    at_0, at_pi2 = curvature_at_0(s), curvature_at_pi2(s)
    return BifurcationReport(
        interior_minimum_possible=at_0.value < 0.0 and at_pi2.value < 0.0,
        endpoint_curvatures=(at_0.value, at_pi2.value),
        fallback=(at_0.fallback, at_pi2.fallback),
    )


def _interior_brackets(angles: np.ndarray, values: np.ndarray, s):
    brackets = []
    last = len(angles) - 1
    for i in range(1, last):
        if values[i] < values[i - 1] and values[i] <= values[i + 1]:
            brackets.append((angles[i - 1], angles[i + 1]))
    # A minimum hugging an endpoint can sit inside the first (last) grid cell.
    if values[1] >= values[0] and curvature_at_0(s).value < 0.0:
        brackets.append((angles[0], angles[1]))
    if values[last - 1] >= values[last] and curvature_at_pi2(s).value < 0.0:
        brackets.append((angles[last - 1], angles[last]))
    return brackets


def discord(s: CanonicalXState, unit=EntropyUnit.NATS,
            grid_points: int = GRID_POINTS, refine_tol: float = REFINE_TOL) -> DiscordResult:
    unit = EntropyUnit.parse(unit)
    params = _params(s)
    base = entropy_B(s) - entropy_AB(s)
    end_0, end_pi2 = q0(s), q_pi2(s)

    interior = (np.arange(grid_points) + 1.0) * HALF_PI / (grid_points + 1)
    angles = np.concatenate(([0.0], interior, [HALF_PI]))
    values = np.concatenate(([end_0], base + conditional_entropy(params, interior), [end_pi2]))

    q_theta, theta_star = None, None
    for lo, hi in _interior_brackets(angles, values, params):
        res = minimize_scalar(lambda t: base + conditional_entropy(params, t),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": refine_tol})
        if q_theta is None or res.fun < q_theta:
            q_theta, theta_star = float(res.fun), float(res.x)
    if q_theta is not None:
        log_debug(f"interior minimum {q_theta:.12e} nats at theta={theta_star:.10f}")

    if end_0 <= end_pi2:
        branch, best, theta_opt = Branch.Q0, end_0, 0.0
    else:
        branch, best, theta_opt = Branch.Q_PI2, end_pi2, HALF_PI
    if q_theta is not None and q_theta < best - BRANCH_TIE:
        branch, best, theta_opt = Branch.Q_THETA, q_theta, theta_star

    if best < CLAMP_FLOOR:
        log_debug(f"discord {best:.3e} nats below the clamp floor")
    factor = unit.factor
    return DiscordResult(
        q_value=max(best, 0.0) * factor,
        branch=branch,
        theta_opt=theta_opt,
        unit=unit,
        q0=max(end_0, 0.0) * factor,
        q_pi2=max(end_pi2, 0.0) * factor,
        q_theta=None if q_theta is None else max(q_theta, 0.0) * factor,
    )


def _curvature_roots(ts: np.ndarray, values: np.ndarray, curvature: Callable[[float], float]):
    valid = [i for i in range(len(ts)) if math.isfinite(values[i]) and abs(values[i]) > CURVATURE_ZERO]
    roots = []
    for i, j in zip(valid, valid[1:]):
        if values[i] * values[j] < 0.0:
            roots.append(brentq(curvature, ts[i], ts[j], xtol=1e-13, rtol=4 * np.finfo(float).eps))
    return roots


def curvature_windows(family: Callable[[float], CanonicalXState], bracket,
                      grid_points: int = 2001):
    """
    Parameter intervals of a one-parameter family of states on which both
    endpoint curvatures are negative, i.e. where the Q_theta branch lives.
    A root of one curvature within DEGENERATE_WIDTH of a root of the other is
    reported as a degenerate window.
    """
    lo, hi = bracket
    ts = np.linspace(lo, hi, grid_points)

    def at_0(t):
        return curvature_at_0(family(t)).value

    def at_pi2(t):
        return curvature_at_pi2(family(t)).value

    roots_0 = _curvature_roots(ts, np.array([at_0(t) for t in ts]), at_0)
    roots_pi2 = _curvature_roots(ts, np.array([at_pi2(t) for t in ts]), at_pi2)
    log_debug(f"curvature roots: at 0 {roots_0}, at pi/2 {roots_pi2}")

    windows = []
    cuts = sorted([lo, hi] + roots_0 + roots_pi2)
    for left, right in zip(cuts, cuts[1:]):
        if right - left < DEGENERATE_WIDTH:
            continue
        mid = family(0.5 * (left + right))
        if curvature_at_0(mid).value < 0.0 and curvature_at_pi2(mid).value < 0.0:
            windows.append(CurvatureWindow(left, right))
    for r0 in roots_0:
        for rp in roots_pi2:
            if abs(r0 - rp) < DEGENERATE_WIDTH:
                windows.append(CurvatureWindow(min(r0, rp), max(r0, rp)))
    return sorted(windows)
