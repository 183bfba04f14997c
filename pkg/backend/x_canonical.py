"""
Seven-parameter X states and their reduction to the real five-parameter form
with nonnegative coherences by local z-rotations.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from backend.density_core import DensityMatrix4, conjugate_local, validate
from backend.cs_x_transform import is_x, x_deviation
from backend.errors import InvalidXState, NotX

STATE_TOL = 1e-12


@dataclass(frozen=True)
class XState:
    """
    X density matrix
        a   0         0         u1+iu2
        0   b         v1+iv2    0
        0   v1-iv2    c         0
        u1-iu2  0     0         d
    """
    a: float
    b: float
    c: float
    d: float
    u1: float = 0.0
    u2: float = 0.0
    v1: float = 0.0
    v2: float = 0.0

    @property
    def outer(self) -> complex:
        return complex(self.u1, self.u2)

    @property
    def inner(self) -> complex:
        return complex(self.v1, self.v2)

    def to_matrix(self) -> np.ndarray:
        return _x_matrix(self.a, self.b, self.c, self.d, self.outer, self.inner)

    def violations(self, tol: float = STATE_TOL):
        """Every violated positivity/normalization constraint as (name, magnitude)."""
        found = []
        trace_gap = abs(self.a + self.b + self.c + self.d - 1.0)
        if trace_gap > tol:
            found.append(("trace", trace_gap))
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if value < -tol:
                found.append((f"{name}<0", -value))
        outer_gap = abs(self.outer) ** 2 - self.a * self.d
        if outer_gap > tol:
            found.append(("|u|^2>ad", outer_gap))
        inner_gap = abs(self.inner) ** 2 - self.b * self.c
        if inner_gap > tol:
            found.append(("|v|^2>bc", inner_gap))
        return found

    @classmethod
    def from_matrix(cls, m, tol: float = STATE_TOL):
        m = np.asarray(m, dtype=complex)
        if not is_x(m, tol):
            raise NotX(f"matrix has no X structure (off-pattern magnitude {x_deviation(m):.3e})")
        return cls(a=m[0, 0].real, b=m[1, 1].real, c=m[2, 2].real, d=m[3, 3].real,
                   u1=m[0, 3].real, u2=m[0, 3].imag, v1=m[1, 2].real, v2=m[1, 2].imag)


@dataclass(frozen=True)
class CanonicalXState:
    """Real X state with outer coherence u >= 0 and inner coherence v >= 0."""
    a: float
    b: float
    c: float
    d: float
    u: float = 0.0
    v: float = 0.0
    # (U_A, U_B) pairs, applied in order, that took the source state here.
    applied_transformations: tuple = field(default=(), compare=False, repr=False)

    def to_matrix(self) -> np.ndarray:
        return _x_matrix(self.a, self.b, self.c, self.d, self.u, self.v)

    def as_xstate(self) -> XState:
        return XState(self.a, self.b, self.c, self.d, u1=self.u, v1=self.v)


def _x_matrix(a, b, c, d, outer, inner) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0], m[1, 1], m[2, 2], m[3, 3] = a, b, c, d
    m[0, 3], m[3, 0] = outer, np.conj(outer)
    m[1, 2], m[2, 1] = inner, np.conj(inner)
    return m


def rz(angle: float) -> np.ndarray:
    """exp(-i angle sigma_z / 2)."""
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def canonicalize(x: XState, tol: float = STATE_TOL) -> CanonicalXState:
    """
    Removes both coherence phases with independent z-rotations of the two qubits.

    Rz(alpha) x Rz(beta) multiplies the outer coherence by exp(-i(alpha+beta))
    and the inner one by exp(-i(alpha-beta)), so alpha+beta and alpha-beta are
    set to the two phases. The phase of a vanishing coherence is taken as 0.
    """
    if isinstance(x, CanonicalXState):
        x = x.as_xstate()
    problems = x.violations(tol)
    if problems:
        summary = "; ".join(f"{n} ({m:.3e})" for n, m in problems)
        raise InvalidXState(f"invalid X state: {summary}")
    phase_u = math.atan2(x.u2, x.u1) if (x.u1 or x.u2) else 0.0
    phase_v = math.atan2(x.v2, x.v1) if (x.v1 or x.v2) else 0.0
    alpha = 0.5 * (phase_u + phase_v)
    beta = 0.5 * (phase_u - phase_v)
    transformations = ()
    if alpha or beta:
        transformations = ((rz(alpha), rz(beta)),)
    return CanonicalXState(a=x.a, b=x.b, c=x.c, d=x.d,
                           u=math.hypot(x.u1, x.u2), v=math.hypot(x.v1, x.v2),
                           applied_transformations=transformations)


def apply_transformations(rho, transformations) -> DensityMatrix4:
    for u_a, u_b in transformations:
        rho = conjugate_local(rho, u_a, u_b)
    return rho if isinstance(rho, DensityMatrix4) else DensityMatrix4(rho)


def embed(x, tol: float = STATE_TOL) -> DensityMatrix4:
    """Full 4x4 matrix of an XState or CanonicalXState, validated."""
    return validate(x.to_matrix(), tol)


def sample_random_xstate(seed) -> XState:
    """
    Populations uniform on the simplex; each coherence uniform on the disk
    allowed by positivity (|u|^2 <= ad, |v|^2 <= bc).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    a, b, c, d = rng.dirichlet(np.ones(4))

    def in_disk(radius):
        r = radius * math.sqrt(rng.uniform())
        angle = rng.uniform(0.0, 2.0 * math.pi)
        return r * math.cos(angle), r * math.sin(angle)

    u1, u2 = in_disk(math.sqrt(a * d))
    v1, v2 = in_disk(math.sqrt(b * c))
    return XState(float(a), float(b), float(c), float(d), u1, u2, v1, v2)
