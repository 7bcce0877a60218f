"""Closed-form cooling predictions and the reduced rate equations behind them.

Frequencies are in units of the trap frequency ``nu`` unless ``nu`` is passed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve

from .hilbert import MAX_TAIL_MASS, TruncationError, thermal_weights
from .models import EITParams


# --------------------------------------------------------------------------
# standing wave: rates and steady state


def wsc_rate_sw(eta: float, omega: float, gamma: float) -> float:
    """Weak-coupling cooling rate ``eta^2 Omega^2 / gamma``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return eta**2 * omega**2 / gamma


def ssc_rate_sw(gamma: float, n0: float) -> float:
    """Strong-coupling cascade rate ``(gamma/2) / (1 + n0)``."""
    if gamma <= 0 or n0 < 0:
        raise ValueError("need gamma > 0 and n0 >= 0")
    return 0.5 * gamma / (1.0 + n0)


def n0_prime(n0: float) -> float:
    """Mean phonon number after the initial dressed-state mixing."""
    return n0 - n0 / (2.0 * (1.0 + n0))


def nst_ssc_sw(eta: float, omega: float, gamma: float, nu: float = 1.0) -> float:
    """Steady-state occupation ``(eta Omega/nu)^2/8 + gamma^2/(16 nu^2)``."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    return (eta * omega / nu) ** 2 / 8.0 + gamma**2 / (16.0 * nu**2)


def nst_wsc_sw(gamma: float, nu: float = 1.0) -> float:
    return gamma**2 / (16.0 * nu**2)


def nbar_closed_form(n0, gamma, eta, omega, t, nu: float = 1.0):
    """Cascade decay from ``n0'`` towards the strong-coupling steady state."""
    for name, v in (("n0", n0), ("gamma", gamma), ("eta", eta), ("omega", omega)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0")
    nst = nst_ssc_sw(eta, omega, gamma, nu)
    w = 0.5 * gamma / (1.0 + n0)
    return (n0_prime(n0) - nst) * np.exp(-w * np.asarray(t, dtype=float)) + nst


# --------------------------------------------------------------------------
# dressed-state cascade


@dataclass
class CascadeResult:
    times: np.ndarray
    p: np.ndarray  # (n_times, fock_levels) block populations
    nbar: np.ndarray
    tail_mass: float


def cascade_generator(gamma: float, fock_levels: int) -> np.ndarray:
    """Rate matrix of ``p_0' = (g/2) p_1``, ``p_n' = (g/2)(p_{n+1} - p_n)``."""
    m = np.zeros((fock_levels, fock_levels))
    idx = np.arange(fock_levels - 1)
    m[idx, idx + 1] = 0.5 * gamma
    m[idx[1:], idx[1:]] = -0.5 * gamma
    m[-1, -1] = -0.5 * gamma
    return m


def cascade_evolve(n0: float, gamma: float, t_grid, fock_levels: int = 200) -> CascadeResult:
    """Integrate the block-population cascade from thermal weights ``p_n(0) = c_n``.

    The generator is bidiagonal and defective, so it is propagated with a
    matrix exponential per sample rather than an eigendecomposition.
    """
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    c, tail = thermal_weights(n0, fock_levels)
    if tail > MAX_TAIL_MASS:
        raise TruncationError(f"fock_levels={fock_levels} leaves tail mass {tail:.2e} at n0={n0}")
    p0 = c / c.sum()
    t = np.asarray(t_grid, dtype=float)
    m = cascade_generator(gamma, fock_levels)
    p = np.array([expm(m * ti) @ p0 for ti in t])
    p = np.clip(p, 0.0, None)
    weights = np.arange(fock_levels) - 0.5
    weights[0] = 0.0
    return CascadeResult(t, p, p @ weights, tail)


def cascade_p0_closed_form(n0: float, gamma: float, t):
    return 1.0 - n0 / (1.0 + n0) * np.exp(-0.5 * gamma * np.asarray(t, dtype=float) / (1.0 + n0))


# --------------------------------------------------------------------------
# four-level Bloch equations near the ground state

_BLOCH_NAMES = ("rho_g0", "rho_e0", "rho_g1", "rho_e1", "sy_g0e1", "sx_g0e1", "sy_e0g1", "sx_e0g1")


@dataclass(frozen=True)
class BlochSteadyState:
    rho_g0: float
    rho_e0: float
    rho_g1: float
    rho_e1: float
    sy_g0e1: float
    sx_g0e1: float
    sy_e0g1: float
    sx_e0g1: float

    def vector(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in _BLOCH_NAMES])

    @property
    def nbar(self) -> float:
        return self.rho_g1 + self.rho_e1

    def ratios(self) -> tuple[float, float, float]:
        """``(rho_e0, rho_g1, rho_e1) / rho_g0``."""
        return self.rho_e0 / self.rho_g0, self.rho_g1 / self.rho_g0, self.rho_e1 / self.rho_g0


def bloch_matrix(eta: float, omega: float, gamma: float, nu: float = 1.0) -> np.ndarray:
    """Generator of the four-level subspace ``{g0, e0, g1, e1}`` at ``Delta = -nu``.

    Rows follow :data:`_BLOCH_NAMES`.  The pair ``(g0, e1)`` is the off-resonant
    blue sideband (split by ``2 nu``); the pair ``(e0, g1)`` is the resonant red
    sideband, so its ``sigma^x`` quadrature only dephases.
    """
    c = eta * omega
    g = gamma
    m = np.zeros((8, 8))
    g0, e0, g1, e1, y1, x1, y2, x2 = range(8)
    m[g0, y1], m[g0, e0] = c / 2, g
    m[e0, y2], m[e0, e0] = c / 2, -g
    m[g1, y2], m[g1, e1] = -c / 2, g
    m[e1, y1], m[e1, e1] = -c / 2, -g
    m[y1, x1], m[y1, g0], m[y1, e1], m[y1, y1] = -2 * nu, -c, c, -g / 2
    m[x1, y1], m[x1, x1] = 2 * nu, -g / 2
    m[y2, g1], m[y2, e0], m[y2, y2] = c, -c, -g / 2
    m[x2, x2] = -g / 2
    return m


def bloch_steady(eta: float, omega: float, gamma: float, nu: float = 1.0) -> BlochSteadyState:
    """Stationary solution of the four-level Bloch equations with unit total population."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    a = bloch_matrix(eta, omega, gamma, nu)
    a[0] = 0.0
    a[0, :4] = 1.0
    b = np.zeros(8)
    b[0] = 1.0
    if np.linalg.cond(a) > 1e14:
        raise np.linalg.LinAlgError("Bloch system is singular")
    x = solve(a, b)
    return BlochSteadyState(*x)


def bloch_ratio_closed_forms(eta: float, omega: float, gamma: float, nu: float = 1.0):
    """``(rho_e0, rho_g1, rho_e1) / rho_g0`` from the closed forms."""
    c2 = (eta * omega) ** 2
    den = c2 + 16 * nu**2 + gamma**2
    return c2 / den, (c2 + gamma**2) / den, c2 / den


# --------------------------------------------------------------------------
# EIT


@dataclass(frozen=True)
class EITEffectiveParams:
    phi: float
    theta: float
    energy_plus: float
    energy_minus: float
    energy_dark: float
    rabi_plus: float  # effective sideband Rabi frequency Omega_+
    eta_d: float
    gamma_eff: float

    def dressed_states(self) -> np.ndarray:
        """Rows ``|+>, |->, |d>`` as vectors on ``(g, e, r)``."""
        sp, cp = np.sin(self.phi), np.cos(self.phi)
        st, ct = np.sin(self.theta), np.cos(self.theta)
        plus = np.array([-cp * st, sp, -cp * ct])
        minus = np.array([sp * st, cp, sp * ct])
        dark = np.array([ct, 0.0, -st])
        return np.array([plus, minus, dark])


def eit_dressed_params(p: EITParams) -> EITEffectiveParams:
    """Mixing angles, dressed energies and cascade parameters of the Lambda drive.

    ``phi = atan2(-sqrt(Og^2 + Or^2), Delta) / 2``; this branch always makes
    ``|+>`` the eigenvector with energy ``omega_+`` (and lies in ``(-pi/4, 0)``
    for ``Delta > 0``).
    """
    om = np.hypot(p.omega_g, p.omega_r)
    if om == 0:
        raise ValueError("at least one of omega_g, omega_r must be nonzero")
    phi = 0.5 * np.arctan2(-om, p.delta)
    theta = np.arctan2(p.omega_g, p.omega_r)
    root = np.sqrt(om**2 + p.delta**2)
    rabi_plus = p.omega_g * p.omega_r / om * np.sin(phi)
    gamma_eff = 0.5 * np.sin(phi) ** 2 * (p.gamma_g * np.cos(theta) ** 2 + p.gamma_r * np.sin(theta) ** 2)
    return EITEffectiveParams(
        phi=float(phi),
        theta=float(theta),
        energy_plus=float(0.5 * (-p.delta + root)),
        energy_minus=float(0.5 * (-p.delta - root)),
        energy_dark=0.0,
        rabi_plus=float(rabi_plus),
        eta_d=p.eta_g - p.eta_r,
        gamma_eff=float(gamma_eff),
    )


def eit_internal_hamiltonian(p: EITParams) -> np.ndarray:
    """3x3 internal Hamiltonian on ``(g, e, r)`` with the motion switched off."""
    h = np.zeros((3, 3))
    h[1, 1] = -p.delta
    h[0, 1] = h[1, 0] = 0.5 * p.omega_g
    h[2, 1] = h[1, 2] = 0.5 * p.omega_r
    return h


@dataclass(frozen=True)
class EITRates:
    w_ssc: float
    nbar_st: float
    w_ssc_approx: float
    w_wsc: float


def eit_rates(p: EITParams, n0: float | None = None, nu: float = 1.0) -> EITRates:
    """Strong-coupling rate and occupation, the far-detuned approximation, and the weak-coupling rate."""
    n0 = p.n0 if n0 is None else n0
    q = eit_dressed_params(p)
    gamma = p.gamma_g + p.gamma_r
    w_ssc = 0.5 * q.gamma_eff / (1.0 + n0)
    nst = (q.eta_d * q.rabi_plus / nu) ** 2 / 8.0 + (gamma / (4.0 * p.delta)) ** 2
    w_app = p.gamma_g * nu / (2.0 * p.delta * (1.0 + n0))
    w_wsc = q.eta_d**2 * p.omega_g**2 / gamma if gamma > 0 else np.inf
    return EITRates(w_ssc, nst, w_app, w_wsc)
