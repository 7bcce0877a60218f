"""Glue between parameter records, models, initial states and analytic overlays."""

from __future__ import annotations

import numpy as np

from . import analytics
from .hilbert import DensityMatrix, thermal_state
from .liouville import Trajectory, evolve
from .models import EITParams, SWParams, dressed_initial_state, eit_model, sw_model

#: trajectories run for this many estimated decay times by default
DECAY_TIMES = 4.0


def build_model(p):
    if isinstance(p, SWParams):
        return sw_model(p)
    if isinstance(p, EITParams):
        return eit_model(p)
    raise TypeError(f"unsupported parameter record {type(p).__name__}")


def initial_state(p, kind: str = "thermal") -> DensityMatrix:
    """``thermal``: ground internal level times a thermal motional state.

    ``dressed``: the sideband-dressed mixture reached after the initial strong
    coupling transient (two-level models only).
    """
    if kind == "thermal":
        return thermal_state(p.spec, p.n0)
    if kind == "dressed":
        if p.spec.internal_dim != 2:
            raise ValueError("the dressed initial state is defined for two-level models only")
        return dressed_initial_state(p.spec, p.n0)
    raise ValueError(f"unknown initial state {kind!r}")


def sideband_coupling(p) -> float:
    """Sideband Rabi frequency: ``eta Omega`` or ``|eta_D Omega_+|``."""
    if isinstance(p, SWParams):
        return p.eta * p.omega
    q = analytics.eit_dressed_params(p)
    return abs(q.eta_d * q.rabi_plus)


def analytic_rates(p) -> tuple[float, float]:
    """``(W_wsc, W_ssc)`` for the scenario.

    For EIT the strong-coupling value is the far-detuned form ``gamma_g nu / (2 Delta (1 + n0))``.
    """
    if isinstance(p, SWParams):
        if p.gamma <= 0:
            return float("nan"), float("nan")
        return analytics.wsc_rate_sw(p.eta, p.omega, p.gamma), analytics.ssc_rate_sw(p.gamma, p.n0)
    r = analytics.eit_rates(p)
    return r.w_wsc, r.w_ssc_approx


def estimated_rate(p) -> float:
    """Crossover estimate ``1 / (1/W_wsc + 1/W_ssc)`` used to size default horizons."""
    w1, w2 = analytic_rates(p)
    if not (np.isfinite(w1) and np.isfinite(w2)) or w1 <= 0 or w2 <= 0:
        raise ValueError("cannot estimate a cooling rate for these parameters; give t_max explicitly")
    return 1.0 / (1.0 / w1 + 1.0 / w2)


def default_t_max(p) -> float:
    return float(DECAY_TIMES / estimated_rate(p))


def regime(p) -> str:
    """``"ssc"`` when the sideband coupling reaches the (effective) linewidth, else ``"wsc"``."""
    if isinstance(p, SWParams):
        width = p.gamma
    else:
        width = analytics.eit_dressed_params(p).gamma_eff
    return "ssc" if sideband_coupling(p) >= width else "wsc"


def analytic_nbar(p, t, which: str = "auto"):
    """Analytic overlay for ``nbar(t)``.

    ``ssc``: cascade decay from ``n0'`` to the strong-coupling steady state.
    ``wsc``: single exponential at the weak-coupling rate from ``n0`` to the
    weak-coupling steady state.  ``auto`` picks by :func:`regime`.
    """
    t = np.asarray(t, dtype=float)
    which = regime(p) if which == "auto" else which
    if which not in ("ssc", "wsc"):
        raise ValueError(f"unknown regime {which!r}")
    w_wsc, w_ssc = analytic_rates(p)
    if isinstance(p, SWParams):
        if which == "ssc":
            return analytics.nbar_closed_form(p.n0, p.gamma, p.eta, p.omega, t)
        nst = analytics.nst_wsc_sw(p.gamma)
        return (p.n0 - nst) * np.exp(-w_wsc * t) + nst
    r = analytics.eit_rates(p)
    if which == "ssc":
        return (analytics.n0_prime(p.n0) - r.nbar_st) * np.exp(-w_ssc * t) + r.nbar_st
    nst = (p.gamma / (4.0 * p.delta)) ** 2
    return (p.n0 - nst) * np.exp(-w_wsc * t) + nst


def simulate(p, t_max: float | None = None, n_samples: int = 401, rtol: float = 1e-8,
             atol: float = 1e-10, initial: str = "thermal", method: str = "auto") -> Trajectory:
    """Build the model and propagate the chosen initial state on a uniform grid."""
    if t_max is None:
        t_max = default_t_max(p)
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if int(n_samples) != n_samples or n_samples < 2:
        raise ValueError(f"n_samples must be an integer >= 2, got {n_samples}")
    model = build_model(p)
    rho0 = initial_state(p, initial)
    return evolve(model, rho0, np.linspace(0.0, t_max, int(n_samples)), rel_tol=rtol, abs_tol=atol,
                  method=method)
