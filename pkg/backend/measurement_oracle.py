"""
Brute-force ground truth.

  * Discord of any two-qubit state by explicit projective measurements of
    qubit B over the whole Bloch sphere (grid + Nelder-Mead polish).
  * Exact evolution of a small nanopore spin chain, reduced onto a pair.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize
from scipy.special import entr

from backend.density_core import (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix4,
                                  EntropyUnit, partial_trace, von_neumann_entropy)
from backend.errors import TooLarge
from utils.logger import log_debug

OUTCOME_FLOOR = 1e-14
MAX_CHAIN = 12
N_THETA = 181
N_PHI = 181
POLISH_STARTS = 4


@dataclass(frozen=True)
class MeasurementDirection:
    theta: float
    phi: float = 0.0

    @property
    def vector(self) -> np.ndarray:
        return np.array([math.sin(self.theta) * math.cos(self.phi),
                         math.sin(self.theta) * math.sin(self.phi),
                         math.cos(self.theta)])

    def projectors(self):
        """(P+, P-) = (I +- n.sigma) / 2."""
        n_sigma = sum(c * s for c, s in zip(self.vector, (SIGMA_X, SIGMA_Y, SIGMA_Z)))
        return 0.5 * (IDENTITY2 + n_sigma), 0.5 * (IDENTITY2 - n_sigma)


@dataclass(frozen=True)
class ChainParams:
    n_spins: int
    beta: float
    alpha_t: float

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError(f"a chain needs at least 2 spins, got {self.n_spins}")
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta}")


def _entries(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix4) else np.asarray(rho, dtype=complex)


def conditional_entropy_at(rho, direction: MeasurementDirection, unit=EntropyUnit.NATS) -> float:
    """sum_i p_i S(rho_A^i) for the measurement of B along `direction`."""
    entries = _entries(rho)
    total = 0.0
    for projector in direction.projectors():
        lift = np.kron(IDENTITY2, projector)
        conditioned = partial_trace(lift @ entries @ lift, "A")
        weight = float(np.real(np.trace(conditioned)))
        if weight <= OUTCOME_FLOOR:
            continue
        total += weight * von_neumann_entropy(conditioned / weight)
    return max(total, 0.0) * EntropyUnit.parse(unit).factor


def _projector_stack(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Shape (len, 2, 2, 2): for each direction, the pair (P+, P-)."""
    nx = np.sin(thetas) * np.cos(phis)
    ny = np.sin(thetas) * np.sin(phis)
    nz = np.cos(thetas)
    n_sigma = (nx[:, None, None] * SIGMA_X + ny[:, None, None] * SIGMA_Y
               + nz[:, None, None] * SIGMA_Z)
    return 0.5 * np.stack([IDENTITY2 + n_sigma, IDENTITY2 - n_sigma], axis=1)


def _conditional_entropies(tensor: np.ndarray, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    projectors = _projector_stack(thetas, phis).reshape(-1, 2, 2)
    # unnormalized A states Tr_B[(I x P) rho], then the closed-form 2x2 spectrum
    blocks = np.einsum("akbl,dlk->dab", tensor, projectors)
    weight = np.real(blocks[:, 0, 0] + blocks[:, 1, 1])
    spread = np.sqrt(0.25 * np.real(blocks[:, 0, 0] - blocks[:, 1, 1]) ** 2
                     + np.abs(blocks[:, 0, 1]) ** 2)
    upper = np.clip(0.5 * weight + spread, 0.0, None)
    lower = np.clip(0.5 * weight - spread, 0.0, None)
    per_outcome = entr(upper) + entr(lower) - entr(np.clip(weight, 0.0, None))
    per_outcome = np.where(weight > OUTCOME_FLOOR, per_outcome, 0.0)
    return np.clip(per_outcome.reshape(-1, 2).sum(axis=1), 0.0, None)


def discord(rho, unit=EntropyUnit.NATS, n_theta: int = N_THETA, n_phi: int = N_PHI,
            refine: bool = True, threads: int = 1) -> float:
    """
    S(B) - S(AB) + min over measurement directions of the conditional entropy.
    Without `refine` the value is a grid upper bound.
    """
    entries = _entries(rho)
    tensor = entries.reshape(2, 2, 2, 2)
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)

    def row(theta):
        return _conditional_entropies(tensor, np.full(n_phi, theta), phis)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            grid = np.array(list(pool.map(row, thetas)))
    else:
        grid = np.array([row(theta) for theta in thetas])

    best = float(grid.min())
    if refine:
        def objective(x):
            return float(_conditional_entropies(tensor, np.array([x[0]]), np.array([x[1]]))[0])

        for flat in np.argsort(grid, axis=None)[:POLISH_STARTS]:
            i, j = np.unravel_index(flat, grid.shape)
            res = minimize(objective, x0=[thetas[i], phis[j]], method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
            best = min(best, float(res.fun))
        log_debug(f"oracle polish: grid {grid.min():.12e} -> {best:.12e}")

    marginal_b = von_neumann_entropy(partial_trace(entries, "B"))
    value = marginal_b - von_neumann_entropy(entries) + best
    return max(value, 0.0) * EntropyUnit.parse(unit).factor


def _magnetization(n_spins: int) -> np.ndarray:
    """Diagonal of I_z in the computational basis, |0> = spin up."""
    bits = (np.arange(2 ** n_spins)[:, None] >> np.arange(n_spins)[::-1]) & 1
    return 0.5 * (n_spins - 2 * bits.sum(axis=1))


def _total_spin_operators(n_spins: int):
    def embedded(op, site):
        factors = [IDENTITY2] * n_spins
        factors[site] = op
        return reduce(np.kron, factors)

    return [sum(embedded(0.5 * s, k) for k in range(n_spins)) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]


def initial_chain_state(n_spins: int, beta: float) -> np.ndarray:
    """Product of e^{beta sigma_x / 2} / (2 cosh(beta/2)) over all spins."""
    single = 0.5 * (IDENTITY2 + math.tanh(0.5 * beta) * SIGMA_X)
    return reduce(np.kron, [single] * n_spins)


def evolve_chain(p: ChainParams, include_total_spin: bool = False) -> np.ndarray:
    """Full 2^N x 2^N state after free evolution for the dimensionless time alpha_t."""
    if p.n_spins > MAX_CHAIN:
        raise TooLarge(f"chain of {p.n_spins} spins needs 4^{p.n_spins} entries; limit is {MAX_CHAIN} spins")
    rho0 = initial_chain_state(p.n_spins, p.beta)
    if include_total_spin:
        i_x, i_y, i_z = _total_spin_operators(p.n_spins)
        i_squared = i_x @ i_x + i_y @ i_y + i_z @ i_z
        propagator = expm(-1j * (p.alpha_t * (i_z @ i_z) - (p.alpha_t / 3.0) * i_squared))
        return propagator @ rho0 @ propagator.conj().T
    phase = np.exp(-1j * p.alpha_t * _magnetization(p.n_spins) ** 2)
    return rho0 * np.outer(phase, phase.conj())


def pair_state_from_chain(rho_n, pair=(0, 1)) -> DensityMatrix4:
    """Reduces an N-spin state onto spins `pair` (zero-based; the first is qubit A)."""
    rho_n = np.asarray(rho_n, dtype=complex)
    n_spins = int(round(math.log2(rho_n.shape[0])))
    first, second = pair
    if first == second or not (0 <= first < n_spins and 0 <= second < n_spins):
        raise ValueError(f"bad spin pair {pair} for a chain of {n_spins}")
    rest = [k for k in range(n_spins) if k not in pair]
    order = [first, second] + rest
    tensor = rho_n.reshape([2] * (2 * n_spins)).transpose(order + [n_spins + k for k in order])
    env = 2 ** (n_spins - 2)
    return DensityMatrix4(np.einsum("aibi->ab", tensor.reshape(4, env, 4, env)))


def simulate_chain(p: ChainParams, include_total_spin: bool = False) -> DensityMatrix4:
    return pair_state_from_chain(evolve_chain(p, include_total_spin), (0, 1))
