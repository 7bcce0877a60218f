"""Operators and states on the composite space internal levels x truncated Fock ladder.

Basis ordering is internal-major: index ``a * fock_levels + n`` labels ``|a, n>``.
Internal level 0 is the ground state ``|g>``, level 1 the excited state ``|e>``
and, for three-level schemes, level 2 the auxiliary ground state ``|r>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

G, E, R = 0, 1, 2

#: tail mass of the geometric distribution beyond which a truncation is rejected
MAX_TAIL_MASS = 1e-4


class TruncationError(ValueError):
    """Raised when the Fock truncation cannot hold the requested state."""


@dataclass(frozen=True)
class HilbertSpec:
    internal_dim: int
    fock_levels: int

    def __post_init__(self):
        if int(self.internal_dim) != self.internal_dim or self.internal_dim < 2:
            raise ValueError(f"internal_dim must be an integer >= 2, got {self.internal_dim}")
        if int(self.fock_levels) != self.fock_levels or self.fock_levels < 2:
            raise ValueError(f"fock_levels must be an integer >= 2, got {self.fock_levels}")

    @property
    def dim(self) -> int:
        return self.internal_dim * self.fock_levels

    def index(self, level: int, n: int) -> int:
        return level * self.fock_levels + n


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tagged with the space it acts on.

    Instances are immutable; arithmetic returns new operators.
    """

    spec: HilbertSpec
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = _readonly(self.data)
        if data.shape != (self.spec.dim, self.spec.dim):
            raise ValueError(f"matrix shape {data.shape} does not match {self.spec}")
        object.__setattr__(self, "data", data)

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.spec != self.spec:
            raise ValueError(f"dimension mismatch: {self.spec} vs {other.spec}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.spec, self.data + other.data)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.spec, self.data - other.data)

    def __neg__(self):
        return Operator(self.spec, -self.data)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.spec, scalar * self.data)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.spec, self.data / scalar)

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.spec, self.data @ other.data)

    def dag(self) -> "Operator":
        return Operator(self.spec, self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= tol * max(1.0, float(np.max(np.abs(self.data))))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))


@dataclass(frozen=True, eq=False)
class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive semidefinite operator.

    ``tail_mass`` records the probability a construction had to discard at
    the truncation edge (zero unless the constructor reports one).
    """

    tail_mass: float = 0.0
    herm_tol: float = 1e-12
    trace_tol: float = 1e-12
    positivity_tol: float = 1e-10

    def __post_init__(self):
        super().__post_init__()
        herm = self.hermiticity_error()
        if herm > self.herm_tol:
            raise ValueError(f"density matrix not Hermitian (error {herm:.3e})")
        tr = self.trace()
        if abs(tr - 1.0) > self.trace_tol:
            raise ValueError(f"density matrix trace {tr.real:.15f} != 1")
        lam = float(np.linalg.eigvalsh(self.data).min())
        if lam < -self.positivity_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lam:.3e}")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.data).min())


def identity(spec: HilbertSpec) -> Operator:
    return Operator(spec, np.eye(spec.dim))


def fock_annihilation(fock_levels: int) -> np.ndarray:
    """Bare ``fock_levels`` x ``fock_levels`` lowering matrix."""
    return np.diag(np.sqrt(np.arange(1, fock_levels, dtype=float)), 1)


def embed_fock(spec: HilbertSpec, m: np.ndarray) -> Operator:
    """Lift a Fock-space matrix to ``1_internal (x) m``."""
    return Operator(spec, np.kron(np.eye(spec.internal_dim), m))


def annihilation(spec: HilbertSpec) -> Operator:
    return embed_fock(spec, fock_annihilation(spec.fock_levels))


def number(spec: HilbertSpec) -> Operator:
    return embed_fock(spec, np.diag(np.arange(spec.fock_levels, dtype=float)))


def internal_transition(spec: HilbertSpec, a: int, b: int) -> Operator:
    """``|a><b| (x) 1_fock``."""
    for lvl in (a, b):
        if not 0 <= lvl < spec.internal_dim:
            raise IndexError(f"internal level {lvl} out of range for internal_dim={spec.internal_dim}")
    m = np.zeros((spec.internal_dim, spec.internal_dim))
    m[a, b] = 1.0
    return Operator(spec, np.kron(m, np.eye(spec.fock_levels)))


def tensor(spec: HilbertSpec, internal: np.ndarray, fock: np.ndarray) -> Operator:
    return Operator(spec, np.kron(internal, fock))


def quadrature_eigh(fock_levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the truncated quadrature ``a + a^dagger``."""
    a = fock_annihilation(fock_levels)
    return eigh(a + a.T)


def fock_function_of_position(fock_levels: int, f) -> np.ndarray:
    """``f(a + a^dagger)`` on the truncated ladder via Hermitian eigendecomposition."""
    lam, v = quadrature_eigh(fock_levels)
    return (v * f(lam)) @ v.conj().T


def sine_of_position(spec: HilbertSpec, eta: float) -> Operator:
    """``sin(eta (a + a^dagger))``, exact at the given truncation."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    s = fock_function_of_position(spec.fock_levels, lambda x: np.sin(eta * x)).real
    return embed_fock(spec, s)


def displacement_phase(fock_levels: int, k: float) -> np.ndarray:
    """``exp(i k (a + a^dagger))`` on the Fock ladder (unitary)."""
    return fock_function_of_position(fock_levels, lambda x: np.exp(1j * k * x))


def thermal_weights(n0: float, fock_levels: int) -> tuple[np.ndarray, float]:
    """Geometric occupation ``c_n = n0^n / (1 + n0)^(n+1)`` and the mass beyond the cut."""
    if n0 < 0:
        raise ValueError("n0 must be non-negative")
    n = np.arange(fock_levels)
    if n0 == 0:
        c = np.zeros(fock_levels)
        c[0] = 1.0
        return c, 0.0
    q = n0 / (1.0 + n0)
    c = (1.0 - q) * q**n
    return c, float(q**fock_levels)


def thermal_state(spec: HilbertSpec, n0: float, ground_internal: int = G) -> DensityMatrix:
    """``|ground><ground| (x) rho_th(n0)``, renormalised over the truncation."""
    c, tail = thermal_weights(n0, spec.fock_levels)
    if tail > MAX_TAIL_MASS:
        raise TruncationError(
            f"fock_levels={spec.fock_levels} discards tail mass {tail:.2e} of a thermal state "
            f"with n0={n0} (limit {MAX_TAIL_MASS:g})"
        )
    c = c / c.sum()
    pint = np.zeros((spec.internal_dim, spec.internal_dim))
    pint[ground_internal, ground_internal] = 1.0
    return DensityMatrix(spec, np.kron(pint, np.diag(c)), tail_mass=tail)


def expectation(rho: Operator, op: Operator) -> complex:
    """``Tr(rho O)``."""
    if rho.spec != op.spec:
        raise ValueError(f"dimension mismatch: {rho.spec} vs {op.spec}")
    return complex(np.einsum("ij,ji->", rho.data, op.data))


def internal_populations(spec: HilbertSpec, rho: np.ndarray) -> np.ndarray:
    d = np.real(np.diag(rho)).reshape(spec.internal_dim, spec.fock_levels)
    return d.sum(axis=1)


def fock_populations(spec: HilbertSpec, rho: np.ndarray) -> np.ndarray:
    d = np.real(np.diag(rho)).reshape(spec.internal_dim, spec.fock_levels)
    return d.sum(axis=0)
