"""Lindblad models for standing-wave sideband cooling and EIT cooling.

All frequencies are in units of the trap frequency (``nu = 1``), times in ``1/nu``.

Fidelity tiers
--------------
SW ``full``
    Carrier-free standing-wave drive ``(Omega/2) sigma_x sin(eta (a + a^dagger))``
    with angle-resolved recoil on every emission.
SW ``ld1``
    First order in ``eta`` for the drive, no recoil.
SW ``rsb``
    Red sideband only, in the interaction picture.
EIT ``full``
    Lambda scheme with travelling-wave phases on both arms and recoil on both decay
    channels.
EIT ``dressed_reduced``
    Two-level cascade between the dark state ``|d>`` and the bright dressed state
    ``|+>``, with parameters from :func:`ioncool.analytics.eit_dressed_params`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import (
    DensityMatrix,
    E,
    G,
    HilbertSpec,
    Operator,
    R,
    annihilation,
    displacement_phase,
    internal_transition,
    number,
    sine_of_position,
    tensor,
    thermal_weights,
    MAX_TAIL_MASS,
    TruncationError,
)
from .liouville import LindbladModel

SW_FIDELITIES = ("full", "ld1", "rsb")
EIT_FIDELITIES = ("full", "dressed_reduced")


def angular_density(u):
    """Dipole emission pattern in ``u = cos(theta)``, normalised on [-1, 1]."""
    return 0.375 * (1.0 + np.asarray(u) ** 2)


@dataclass(frozen=True)
class RecoilQuadrature:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def kernel_weights(self) -> np.ndarray:
        """``w_j N(u_j)``, the branching fraction carried by each node (sums to 1)."""
        return self.weights * angular_density(self.nodes)


def recoil_quadrature(order: int = 5) -> RecoilQuadrature:
    """Gauss--Legendre rule for the recoil angle integral.

    The weights are rescaled so that ``sum w_j N(u_j) = 1`` to machine precision.
    """
    if int(order) != order or order < 2:
        raise ValueError(f"quadrature order must be an integer >= 2, got {order}")
    u, w = np.polynomial.legendre.leggauss(int(order))
    w = w / np.sum(w * angular_density(u))
    u.flags.writeable = False
    w.flags.writeable = False
    return RecoilQuadrature(u, w)


def _check_fock(fock_levels):
    if int(fock_levels) != fock_levels or fock_levels < 2:
        raise ValueError(f"fock_levels must be an integer >= 2, got {fock_levels}")


@dataclass(frozen=True)
class SWParams:
    """Standing-wave sideband cooling scenario (ion at the node)."""

    eta: float
    omega: float
    gamma: float
    delta: float = -1.0
    n0: float = 4.0
    fock_levels: int = 61
    fidelity: str = "full"
    quadrature_order: int = 5

    def __post_init__(self):
        for name in ("eta", "omega", "gamma", "n0"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not np.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta}")
        if self.fidelity not in SW_FIDELITIES:
            raise ValueError(f"fidelity must be one of {SW_FIDELITIES}, got {self.fidelity!r}")
        _check_fock(self.fock_levels)

    @property
    def spec(self) -> HilbertSpec:
        return HilbertSpec(2, self.fock_levels)


@dataclass(frozen=True)
class EITParams:
    """EIT cooling scenario on a Lambda system ``|g>, |r> <-> |e>``."""

    eta_g: float
    eta_r: float
    omega_g: float
    omega_r: float
    gamma_g: float
    gamma_r: float
    delta: float
    n0: float = 3.0
    fock_levels: int = 42
    fidelity: str = "full"
    quadrature_order: int = 5

    def __post_init__(self):
        for name in ("omega_g", "omega_r", "gamma_g", "gamma_r", "n0"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        for name in ("eta_g", "eta_r", "delta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.fidelity not in EIT_FIDELITIES:
            raise ValueError(f"fidelity must be one of {EIT_FIDELITIES}, got {self.fidelity!r}")
        _check_fock(self.fock_levels)

    @property
    def spec(self) -> HilbertSpec:
        return HilbertSpec(3 if self.fidelity == "full" else 2, self.fock_levels)

    @property
    def gamma(self) -> float:
        return self.gamma_g + self.gamma_r


def _recoil_family(spec, out_level, rate, eta, quad):
    """Collapse operators ``sqrt(rate w N(u)) |out><e| exp(i eta u (a + a^dagger))``."""
    if rate == 0:
        return []
    ops = []
    lower = np.zeros((spec.internal_dim, spec.internal_dim))
    lower[out_level, E] = 1.0
    for u, kw in zip(quad.nodes, quad.kernel_weights):
        kick = displacement_phase(spec.fock_levels, eta * u)
        ops.append(tensor(spec, np.sqrt(rate * kw) * lower, kick))
    return ops


def sw_model(p: SWParams) -> LindbladModel:
    """Standing-wave sideband cooling model at the requested fidelity."""
    spec = p.spec
    a = annihilation(spec)
    ge = internal_transition(spec, G, E)
    sx = ge + ge.dag()
    lower = float(np.sqrt(p.gamma)) * ge
    if p.fidelity == "rsb":
        H = 0.5 * p.eta * p.omega * (ge @ a.dag() + ge.dag() @ a)
        return LindbladModel(H, (lower,), label="sw-rsb")
    ee = internal_transition(spec, E, E)
    H0 = -p.delta * ee + number(spec)
    if p.fidelity == "ld1":
        H = H0 + 0.5 * p.eta * p.omega * (sx @ (a + a.dag()))
        return LindbladModel(H, (lower,), label="sw-ld1")
    H = H0 + 0.5 * p.omega * (sx @ sine_of_position(spec, p.eta))
    quad = recoil_quadrature(p.quadrature_order)
    cs = _recoil_family(spec, G, p.gamma, p.eta, quad)
    return LindbladModel(H, tuple(cs), label="sw-full")


def eit_model(p: EITParams) -> LindbladModel:
    """EIT cooling model at the requested fidelity."""
    spec = p.spec
    if p.fidelity == "dressed_reduced":
        from .analytics import eit_dressed_params

        q = eit_dressed_params(p)
        a = annihilation(spec)
        dp = internal_transition(spec, 0, 1)  # |d><+|
        coupling = 0.5 * q.eta_d * q.rabi_plus
        H = Operator(spec, 1j * coupling * (dp @ a.dag() - dp.dag() @ a).data)
        return LindbladModel(H, (float(np.sqrt(q.gamma_eff)) * dp,), label="eit-dressed")
    N = spec.fock_levels
    H = -p.delta * internal_transition(spec, E, E) + number(spec)
    for lvl, om, eta in ((G, p.omega_g, p.eta_g), (R, p.omega_r, p.eta_r)):
        if om == 0:
            continue
        m = np.zeros((3, 3))
        m[lvl, E] = 1.0
        down = tensor(spec, m, displacement_phase(N, -eta))
        H = H + 0.5 * om * (down + down.dag())
    quad = recoil_quadrature(p.quadrature_order)
    cs = _recoil_family(spec, G, p.gamma_g, p.eta_g, quad) + _recoil_family(spec, R, p.gamma_r, p.eta_r, quad)
    return LindbladModel(H, tuple(cs), label="eit-full")


def eit_resonant_detuning(omega_g: float, omega_r: float, nu: float = 1.0) -> float:
    """Detuning that puts the bright dressed state ``|+>`` at ``omega_+ = nu``."""
    s = omega_g**2 + omega_r**2
    if not s > 4 * nu**2:
        raise ValueError(
            f"no positive-detuning resonance: Omega_g^2 + Omega_r^2 = {s:g} must exceed 4 nu^2 = {4 * nu**2:g}"
        )
    return (s - 4 * nu**2) / (4 * nu)


def _fock_weights(n0, fock_levels):
    c, tail = thermal_weights(n0, fock_levels)
    if tail > MAX_TAIL_MASS:
        raise TruncationError(
            f"fock_levels={fock_levels} discards tail mass {tail:.2e} at n0={n0} (limit {MAX_TAIL_MASS:g})"
        )
    return c / c.sum(), tail


def dressed_initial_state(spec: HilbertSpec, n0: float) -> DensityMatrix:
    """Thermal weights spread evenly over the sideband dressed pair of each rung.

    ``c_0 |g,0><g,0| + sum_n (c_n/2)(|D+,n><D+,n| + |D-,n><D-,n|)``, which is
    diagonal in the bare basis: ``c_n/2`` on ``|g,n>`` and on ``|e,n-1>``.
    """
    c, tail = _fock_weights(n0, spec.fock_levels)
    diag = np.zeros((spec.internal_dim, spec.fock_levels))
    diag[G, 0] = c[0]
    diag[G, 1:] = 0.5 * c[1:]
    diag[E, :-1] = 0.5 * c[1:]
    return DensityMatrix(spec, np.diag(diag.ravel()), tail_mass=tail)

