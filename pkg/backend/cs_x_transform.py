"""
Centrosymmetric (CS) <-> X structure of fourth-order matrices.

Conjugation by H2 = H x H (a real, symmetric, orthogonal involution) maps every
CS matrix onto an X matrix and back. It is a local transformation, so applied to
a two-qubit state it leaves the discord unchanged.
"""
import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from backend.errors import NotCS, NotX

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
_H2_SIGNS = np.array([[1, 1, 1, 1],
                      [1, -1, 1, -1],
                      [1, 1, -1, -1],
                      [1, -1, -1, 1]])

# (row, col) of a1..a8 in the general CS matrix
#   a1 a2 a3 a4
#   a5 a6 a7 a8
#   a8 a7 a6 a5
#   a4 a3 a2 a1
CS_POSITIONS = ((0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (1, 2), (1, 3))

# (row, col) of b1..b8 in the X matrix
X_POSITIONS = ((0, 0), (0, 3), (1, 1), (1, 2), (2, 1), (2, 2), (3, 0), (3, 3))

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class CSMatrix:
    a: tuple

    def __post_init__(self):
        if len(self.a) != 8:
            raise ValueError(f"a CS matrix has 8 free entries, got {len(self.a)}")
        object.__setattr__(self, "a", tuple(complex(v) for v in self.a))

    def to_matrix(self) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        for value, (i, j) in zip(self.a, CS_POSITIONS):
            m[i, j] = value
            m[3 - i, 3 - j] = value
        return m

    @classmethod
    def from_matrix(cls, m, tol: float = DEFAULT_TOL):
        m = np.asarray(m, dtype=complex)
        if not is_cs(m, tol):
            raise NotCS(f"matrix is not centrosymmetric (deviation {cs_deviation(m):.3e})")
        return cls(tuple(m[i, j] for i, j in CS_POSITIONS))


@dataclass(frozen=True)
class XMatrix:
    b: tuple

    def __post_init__(self):
        if len(self.b) != 8:
            raise ValueError(f"an X matrix has 8 free entries, got {len(self.b)}")
        object.__setattr__(self, "b", tuple(complex(v) for v in self.b))

    def to_matrix(self) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        for value, (i, j) in zip(self.b, X_POSITIONS):
            m[i, j] = value
        return m

    @classmethod
    def from_matrix(cls, m, tol: float = DEFAULT_TOL):
        m = np.asarray(m, dtype=complex)
        if not is_x(m, tol):
            raise NotX(f"matrix has no X structure (off-pattern magnitude {x_deviation(m):.3e})")
        return cls(tuple(m[i, j] for i, j in X_POSITIONS))


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    return m


def cs_deviation(m) -> float:
    m = _as_matrix(m)
    return float(np.max(np.abs(m - m[::-1, ::-1])))


def x_deviation(m) -> float:
    m = _as_matrix(m)
    mask = np.ones((4, 4), dtype=bool)
    for i, j in X_POSITIONS:
        mask[i, j] = False
    return float(np.max(np.abs(m[mask])))


def is_cs(m, tol: float = DEFAULT_TOL) -> bool:
    return cs_deviation(m) <= tol


def is_x(m, tol: float = DEFAULT_TOL) -> bool:
    return x_deviation(m) <= tol


def hadamard2() -> np.ndarray:
    """H x H written with exact entries +-1/2 (so H2 @ H2 == I exactly)."""
    return 0.5 * _H2_SIGNS.astype(float)


def conjugate_h2(m) -> np.ndarray:
    h2 = hadamard2()
    return h2 @ _as_matrix(m) @ h2


@lru_cache(maxsize=1)
def cs_to_x_table() -> np.ndarray:
    """
    8x8 table C with b = C @ a, derived by conjugating each CS basis matrix
    with H2. Every entry is +-1/2.
    """
    table = np.zeros((8, 8))
    for k in range(8):
        unit = [0.0] * 8
        unit[k] = 1.0
        image = conjugate_h2(CSMatrix(tuple(unit)).to_matrix())
        for m, (i, j) in enumerate(X_POSITIONS):
            table[m, k] = image[i, j].real
    table.setflags(write=False)
    return table


def table_digest() -> str:
    """SHA-256 of the CS->X coefficient table in units of 1/2, for provenance output."""
    signs = np.rint(2.0 * cs_to_x_table()).astype(np.int8)
    return hashlib.sha256(signs.tobytes()).hexdigest()


def cs_to_x(a: CSMatrix) -> XMatrix:
    b = cs_to_x_table() @ np.array(a.a, dtype=complex)
    return XMatrix(tuple(b))


def x_to_cs(b: XMatrix) -> CSMatrix:
    # H2 is an involution: the reverse map is the same conjugation.
    image = conjugate_h2(b.to_matrix())
    return CSMatrix(tuple(image[i, j] for i, j in CS_POSITIONS))


def transform_matrix(m, inverse: bool = False, tol: float = DEFAULT_TOL) -> np.ndarray:
    """CS -> X on a full 4x4 matrix (X -> CS with inverse=True), with structure checks."""
    if inverse:
        return x_to_cs(XMatrix.from_matrix(m, tol)).to_matrix()
    return cs_to_x(CSMatrix.from_matrix(m, tol)).to_matrix()
