"""
Closed-form pair dynamics of N nuclear 1/2 spins in a nanopore after a pi/2
pulse, and everything built on top of it: the CS pair state, its canonical X
form, discord branches in bits, time sweeps, branch crossings, bifurcation
windows, the thermodynamic limit and the flickering spectrum.

Inputs are dimensionless: beta (inverse temperature) and alpha_t (time).
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
from scipy.optimize import bisect, minimize_scalar
from scipy.special import entr, xlogy

from backend import x_discord
from backend.density_core import BlochCoefficients, DensityMatrix4, EntropyUnit, bloch_compose
from backend.errors import NoSignChange
from backend.x_canonical import CanonicalXState
from utils.logger import log_debug, log_info

PERIOD = math.pi
CROSSING_ZERO = 1e-15
CROSSING_XTOL = 1e-12


@dataclass(frozen=True)
class NanoporeParams:
    n_spins: int
    beta: float
    alpha_t: float

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.n_spins}")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        if not math.isfinite(self.alpha_t):
            raise ValueError(f"alpha_t must be finite, got {self.alpha_t}")

    def at(self, alpha_t: float) -> "NanoporeParams":
        return NanoporeParams(self.n_spins, self.beta, alpha_t)


@dataclass(frozen=True)
class NanoporeCorrelators:
    p: float
    q: float
    r: float
    u: float
    phi: float


@dataclass(frozen=True)
class SweepRecord:
    alpha_t: float
    q0: float
    q_pi2: float
    q_theta: Optional[float]
    q: float
    theta_opt: float
    branch: x_discord.Branch


class SpectrumLine(NamedTuple):
    harmonic: int
    amplitude: float


def _signed_power(base: float, exponent: int) -> float:
    """base**exponent through exp/log, so N in the thousands neither underflows noisily nor loses sign."""
    if exponent == 0:
        return 1.0
    if base == 0.0:
        return 0.0
    sign = -1.0 if base < 0 and exponent % 2 else 1.0
    return sign * math.exp(exponent * math.log(abs(base)))


def correlators(params: NanoporeParams) -> NanoporeCorrelators:
    n = params.n_spins
    tau = math.tanh(0.5 * params.beta)
    cos_t, sin_t = math.cos(params.alpha_t), math.sin(params.alpha_t)
    echo = _signed_power(math.cos(2.0 * params.alpha_t), n - 2)
    p = 0.5 * tau * _signed_power(cos_t, n - 1)
    q = 0.125 * tau * tau * (1.0 + echo)
    r = 0.125 * tau * tau * (1.0 - echo)
    u = 0.25 * tau * _signed_power(cos_t, n - 2) * sin_t
    return NanoporeCorrelators(p=p, q=q, r=r, u=u, phi=-0.5 * math.atan2(2.0 * u, r))


def pair_state(params: NanoporeParams) -> DensityMatrix4:
    """Centrosymmetric pair state assembled from its Bloch coefficients."""
    c = correlators(params)
    polarization = np.array([2.0 * c.p, 0.0, 0.0])
    t = np.array([[4.0 * c.q, 0.0, 0.0],
                  [0.0, 4.0 * c.r, 4.0 * c.u],
                  [0.0, 4.0 * c.u, 0.0]])
    return bloch_compose(BlochCoefficients(s0=1.0, r_a=polarization, r_b=polarization.copy(), t=t))


def printed_pair_state(params: NanoporeParams) -> np.ndarray:
    """The same state written entry by entry."""
    c = correlators(params)
    flip_down = 0.5 * c.p - 1j * c.u
    flip_up = 0.5 * c.p + 1j * c.u
    m = np.array([
        [0.25, flip_down, flip_down, c.q - c.r],
        [0.0, 0.25, c.q + c.r, flip_up],
        [0.0, 0.0, 0.25, flip_up],
        [0.0, 0.0, 0.0, 0.25],
    ], dtype=complex)
    return np.triu(m) + np.triu(m, 1).conj().T


def canonical_x_state(params: NanoporeParams) -> CanonicalXState:
    c = correlators(params)
    return CanonicalXState(a=0.25 + c.p + c.q, b=0.25 - c.q, c=0.25 - c.q, d=0.25 - c.p + c.q,
                           u=math.hypot(c.r, 2.0 * c.u), v=c.r)


def _joint_entropy_bits(c: NanoporeCorrelators) -> float:
    spread = math.sqrt(c.p ** 2 + c.r ** 2 + 4.0 * c.u ** 2)
    eigenvalues = np.array([0.25 + c.q + spread, 0.25 + c.q - spread,
                            0.25 - c.q + c.r, 0.25 - c.q - c.r])
    return float(np.sum(entr(np.clip(eigenvalues, 0.0, None)))) / math.log(2.0)


def _h_bits(*probs) -> float:
    return -float(sum(xlogy(x, x) for x in probs)) / math.log(2.0)


def q0_bits(params: NanoporeParams) -> float:
    c = correlators(params)
    diagonal = (0.25 + c.p + c.q, 0.25 - c.q, 0.25 - c.q, 0.25 - c.p + c.q)
    return max(_h_bits(*diagonal) - _joint_entropy_bits(c), 0.0)


def q_pi2_bits(params: NanoporeParams) -> float:
    c = correlators(params)
    radius = min(2.0 * math.hypot(c.p, c.r + math.hypot(c.r, 2.0 * c.u)), 1.0)
    spectral = 2.0 * _h_bits(0.25 * (1.0 + radius), 0.25 * (1.0 - radius))
    value = _h_bits(0.5 + c.p, 0.5 - c.p) - _joint_entropy_bits(c) + spectral - 1.0
    return max(value, 0.0)


def discord_at(params: NanoporeParams, unit=EntropyUnit.BITS,
               grid_points: int = x_discord.GRID_POINTS,
               refine_tol: float = x_discord.REFINE_TOL) -> x_discord.DiscordResult:
    return x_discord.discord(canonical_x_state(params), unit, grid_points, refine_tol)


def _record(params: NanoporeParams, unit) -> SweepRecord:
    result = discord_at(params, unit)
    return SweepRecord(alpha_t=params.alpha_t, q0=result.q0, q_pi2=result.q_pi2,
                       q_theta=result.q_theta, q=result.q_value,
                       theta_opt=result.theta_opt, branch=result.branch)


def sweep(n_spins: int, beta: float, t_start: float, t_end: float, steps: int,
          threads: int = 1, unit=EntropyUnit.BITS) -> List[SweepRecord]:
    """Discord on a uniform alpha_t grid; record order follows the grid for any thread count."""
    if steps < 2:
        raise ValueError(f"a sweep needs at least 2 steps, got {steps}")
    unit = EntropyUnit.parse(unit)
    points = [NanoporeParams(n_spins, beta, float(t)) for t in np.linspace(t_start, t_end, steps)]
    log_info(f"sweep N={n_spins} beta={beta} over [{t_start}, {t_end}] in {steps} steps")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda p: _record(p, unit), points))
    return [_record(p, unit) for p in points]


def optimal_observable(record: SweepRecord) -> str:
    """Which spin component of B is optimal to measure at this time."""
    if record.branch is x_discord.Branch.Q0:
        return "sigma_z"
    if record.branch is x_discord.Branch.Q_PI2:
        return "sigma_x"
    return "interior"


def find_branch_crossings(n_spins: int, beta: float, bracket=(0.0, PERIOD),
                          grid_points: int = 2001, strict: bool = False) -> List[float]:
    """
    Times where Q0 and Q_pi/2 exchange order, by sign-change bisection on
    Q0 - Q_pi/2. Touching without crossing is not a root. With strict=True
    an empty result raises NoSignChange.
    """
    lo, hi = bracket
    base = NanoporeParams(n_spins, beta, lo)

    def gap(t):
        return q0_bits(base.at(t)) - q_pi2_bits(base.at(t))

    ts = np.linspace(lo, hi, grid_points)
    values = np.array([gap(t) for t in ts])
    valid = [i for i in range(grid_points) if abs(values[i]) > CROSSING_ZERO]
    roots = []
    for i, j in zip(valid, valid[1:]):
        if values[i] * values[j] < 0.0:
            roots.append(float(bisect(gap, ts[i], ts[j], xtol=CROSSING_XTOL)))
    log_debug(f"branch crossings N={n_spins} beta={beta}: {roots}")
    if strict and not roots:
        raise NoSignChange(f"Q0 - Q_pi/2 keeps its sign on ({lo}, {hi}) for N={n_spins}, beta={beta}")
    return roots


def find_bifurcation_windows(n_spins: int, beta: float, bracket=(0.0, PERIOD),
                             grid_points: int = 2001):
    base = NanoporeParams(n_spins, beta, bracket[0])
    return x_discord.curvature_windows(lambda t: canonical_x_state(base.at(t)),
                                       bracket, grid_points)


def thermodynamic_limit_discord(beta: float, unit=EntropyUnit.BITS) -> float:
    """Plateau discord as N -> infinity; depends on beta only."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    q = 0.125 * math.tanh(0.5 * beta) ** 2
    nats = (0.25 * (xlogy(1.0 + 8.0 * q, 1.0 + 8.0 * q) + xlogy(1.0 - 8.0 * q, 1.0 - 8.0 * q))
            - 0.5 * xlogy(1.0 + 4.0 * q, 1.0 + 4.0 * q)
            - 0.5 * xlogy(1.0 - 4.0 * q, 1.0 - 4.0 * q))
    return float(nats) * EntropyUnit.parse(unit).factor


def flicker_samples(n_spins: int, beta: float, samples: int, threads: int = 1):
    """alpha_t grid over one period (endpoint excluded) and the discord in bits on it."""
    times = np.arange(samples) * PERIOD / samples
    base = NanoporeParams(n_spins, beta, 0.0)

    def value(t):
        return discord_at(base.at(float(t))).q_value

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return times, np.array(list(pool.map(value, times)))
    return times, np.array([value(t) for t in times])


def flicker_spectrum(n_spins: int, beta: float, samples: int = 1024, harmonics: int = 16,
                     threads: int = 1) -> List[SpectrumLine]:
    """
    One-sided amplitudes of Q(alpha_t) over one period:
    Q(t) = A_0 + sum_h A_h cos(2 h t + phase_h).
    """
    if samples < 4 * harmonics or samples & (samples - 1):
        raise ValueError(f"samples must be a power of two >= 4*harmonics, got {samples} for {harmonics}")
    _, values = flicker_samples(n_spins, beta, samples, threads)
    coefficients = np.fft.rfft(values) / samples
    lines = [SpectrumLine(0, float(abs(coefficients[0])))]
    lines += [SpectrumLine(h, float(2.0 * abs(coefficients[h]))) for h in range(1, harmonics + 1)]
    return lines


def conditional_entropy_curve(params: NanoporeParams, n_theta: int = 91, unit=EntropyUnit.BITS):
    thetas = np.linspace(0.0, x_discord.HALF_PI, n_theta)
    values = x_discord.conditional_entropy(canonical_x_state(params), thetas, unit)
    return list(zip(thetas.tolist(), np.atleast_1d(values).tolist()))


def peak_discord(n_spins: int, beta: float, steps: int = 2000):
    """(alpha_t*, Q*) of the largest discord over one period, in bits."""
    records = sweep(n_spins, beta, 0.0, PERIOD, steps)
    best = max(range(steps), key=lambda i: records[i].q)
    lo = records[max(best - 1, 0)].alpha_t
    hi = records[min(best + 1, steps - 1)].alpha_t
    base = NanoporeParams(n_spins, beta, 0.0)
    res = minimize_scalar(lambda t: -discord_at(base.at(t)).q_value,
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if -res.fun >= records[best].q:
        return float(res.x), float(-res.fun)
    return records[best].alpha_t, records[best].q
