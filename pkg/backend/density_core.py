"""
Two-qubit density matrices: validation, entropies, reductions, Pauli (Bloch)
decomposition and local-unitary conjugation.

Basis order is |00>, |01>, |10>, |11> with qubit A the left tensor factor.
Qubit B is the measured subsystem everywhere in this package.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import entr

from backend.errors import NotHermitian, NotPSD, NotUnitary, TraceNotOne

# Eigenvalues in [-EIGEN_CLAMP, 0) are rounding noise and count as 0.
EIGEN_CLAMP = 1e-12
DEFAULT_TOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class EntropyUnit(str, Enum):
    NATS = "nats"
    BITS = "bits"

    @property
    def factor(self) -> float:
        """Multiplier converting a value in nats into this unit."""
        return 1.0 if self is EntropyUnit.NATS else 1.0 / np.log(2.0)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True, eq=False)
class DensityMatrix4:
    """
    Joint two-qubit state. Construct through `validate` unless the entries are
    known to be valid (e.g. produced by a unitary conjugation of a valid state).
    """
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def eigenvalues(self) -> np.ndarray:
        return clamped_eigenvalues(self.entries)


@dataclass(frozen=True, eq=False)
class BlochCoefficients:
    """
    rho = (1/4)[s0*1 + sum_i r_a[i] s_i x 1 + sum_j r_b[j] 1 x s_j
                + sum_ij t[i, j] s_i x s_j]
    """
    s0: float
    r_a: np.ndarray
    r_b: np.ndarray
    t: np.ndarray


def _as_array(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix4):
        return rho.entries
    return np.asarray(rho, dtype=complex)


def diagnose(entries, tol: float = DEFAULT_TOL):
    """
    Checks the density-matrix invariants without raising.
    Returns a list of (invariant name, offending magnitude); empty means valid.
    """
    arr = np.asarray(entries, dtype=complex)
    if arr.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {arr.shape}")
    violations = []
    hermiticity = float(np.max(np.abs(arr - arr.conj().T)))
    if hermiticity > tol:
        violations.append(("NotHermitian", hermiticity))
    trace_gap = float(abs(np.trace(arr) - 1.0))
    if trace_gap > tol:
        violations.append(("TraceNotOne", trace_gap))
    # Spectrum of the Hermitian part, so a non-Hermitian input still gets a PSD verdict.
    lowest = float(np.min(np.linalg.eigvalsh((arr + arr.conj().T) / 2)))
    if lowest < -max(tol, EIGEN_CLAMP):
        violations.append(("NotPSD", -lowest))
    return violations


_ERRORS = {"NotHermitian": NotHermitian, "TraceNotOne": TraceNotOne, "NotPSD": NotPSD}


def validate(entries, tol: float = DEFAULT_TOL) -> DensityMatrix4:
    """Returns a DensityMatrix4 or raises for the first violated invariant (all are listed)."""
    violations = diagnose(entries, tol)
    if violations:
        name, magnitude = violations[0]
        summary = "; ".join(f"{n} (magnitude {m:.3e})" for n, m in violations)
        raise _ERRORS[name](f"invalid density matrix: {summary}",
                            magnitude=magnitude, violations=violations)
    return DensityMatrix4(entries)


def clamped_eigenvalues(matrix) -> np.ndarray:
    values = np.linalg.eigvalsh(_as_array(matrix))
    return np.where((values < 0) & (values >= -EIGEN_CLAMP), 0.0, values)


def shannon_entropy(probabilities, unit=EntropyUnit.NATS) -> float:
    """-sum p log p with 0 log 0 = 0."""
    probs = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    return float(np.sum(entr(probs))) * EntropyUnit.parse(unit).factor


def von_neumann_entropy(rho, unit=EntropyUnit.NATS) -> float:
    """S(rho) = -Tr rho log rho for a two-qubit state or a 2x2 marginal."""
    return max(shannon_entropy(clamped_eigenvalues(rho), unit), 0.0)


def partial_trace(rho, subsystem: str = "A") -> np.ndarray:
    """Returns the marginal of `subsystem` ("A" or "B"), tracing out the other qubit."""
    tensor = _as_array(rho).reshape(2, 2, 2, 2)
    if subsystem.upper() == "A":
        return np.einsum("ikjk->ij", tensor)
    if subsystem.upper() == "B":
        return np.einsum("kikj->ij", tensor)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def mutual_information(rho, unit=EntropyUnit.NATS) -> float:
    value = (von_neumann_entropy(partial_trace(rho, "A"), unit)
             + von_neumann_entropy(partial_trace(rho, "B"), unit)
             - von_neumann_entropy(rho, unit))
    return max(value, 0.0)


def _check_unitary(u, tol, label):
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"{label} must be 2x2, got shape {u.shape}")
    gap = float(np.max(np.abs(u @ u.conj().T - IDENTITY2)))
    if gap > tol:
        raise NotUnitary(f"{label} is not unitary (|UU^+ - I| = {gap:.3e})", magnitude=gap)
    return u


def conjugate_local(rho, u_a, u_b, tol: float = DEFAULT_TOL) -> DensityMatrix4:
    """(U_A x U_B) rho (U_A x U_B)^+."""
    u = np.kron(_check_unitary(u_a, tol, "U_A"), _check_unitary(u_b, tol, "U_B"))
    return DensityMatrix4(u @ _as_array(rho) @ u.conj().T)


def bloch_decompose(rho) -> BlochCoefficients:
    arr = _as_array(rho)

    def coefficient(op):
        return float(np.real(np.trace(arr @ op)))

    r_a = np.array([coefficient(np.kron(s, IDENTITY2)) for s in PAULIS])
    r_b = np.array([coefficient(np.kron(IDENTITY2, s)) for s in PAULIS])
    t = np.array([[coefficient(np.kron(si, sj)) for sj in PAULIS] for si in PAULIS])
    return BlochCoefficients(s0=float(np.real(np.trace(arr))), r_a=r_a, r_b=r_b, t=t)


def bloch_compose(coefficients: BlochCoefficients) -> DensityMatrix4:
    total = coefficients.s0 * np.eye(4, dtype=complex)
    for i, s in enumerate(PAULIS):
        total = total + coefficients.r_a[i] * np.kron(s, IDENTITY2)
        total = total + coefficients.r_b[i] * np.kron(IDENTITY2, s)
        for j, s2 in enumerate(PAULIS):
            total = total + coefficients.t[i, j] * np.kron(s, s2)
    return DensityMatrix4(total / 4.0)


def product_state(rho_a, rho_b) -> DensityMatrix4:
    return DensityMatrix4(np.kron(np.asarray(rho_a, dtype=complex), np.asarray(rho_b, dtype=complex)))


def bell_state() -> DensityMatrix4:
    """(|00> + |11>)/sqrt(2) as a projector."""
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0)
    return DensityMatrix4(np.outer(psi, psi.conj()))


def maximally_mixed() -> DensityMatrix4:
    return DensityMatrix4(np.eye(4, dtype=complex) / 4.0)
