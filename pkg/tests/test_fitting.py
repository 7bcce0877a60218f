import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import curve_fit

from ioncool.fitting import FitError, fit_exponential, fit_exponential_arrays, rate_sweep, transient_skip
from ioncool.liouville import Trajectory
from ioncool.models import SWParams


def _traj(t, y):
    n = len(t)
    return Trajectory(t, y, np.zeros((n, 2)), np.zeros(n), np.zeros(n), np.zeros(n))


def test_recovers_own_model():
    t = np.linspace(0, 600, 401)
    fit = fit_exponential_arrays(t, 3.6 * np.exp(-0.01 * t) + 0.0034)
    assert fit.W == pytest.approx(0.01, abs=1e-6)
    assert fit.n_inf == pytest.approx(0.0034, abs=1e-6)
    assert fit.A == pytest.approx(3.6, rel=1e-6)
    assert fit.window_ok and fit.monotone


def test_window_start_refers_amplitude_to_zero():
    t = np.linspace(0, 600, 401)
    fit = fit_exponential_arrays(t, 3.6 * np.exp(-0.01 * t) + 0.0034, t_start=100)
    assert fit.A == pytest.approx(3.6, rel=1e-6)
    assert fit.window[0] == pytest.approx(100.5, abs=1.0)


def test_matches_curve_fit_on_noisy_data(rng):
    t = np.linspace(0, 500, 300)
    y = 2.0 * np.exp(-0.008 * t) + 0.05 + rng.normal(scale=0.01, size=t.size)
    fit = fit_exponential_arrays(t, y)
    popt, _ = curve_fit(lambda x, a, w, c: a * np.exp(-w * x) + c, t, y, p0=(1.5, 0.01, 0.0))
    np.testing.assert_allclose([fit.A, fit.W, fit.n_inf], popt, rtol=1e-5)


def test_heating_reported():
    t = np.linspace(0, 100, 50)
    fit = fit_exponential_arrays(t, 1.0 + 0.5 * (1 - np.exp(-0.05 * t)))
    assert not fit.monotone and fit.A < 0


def test_growing_exponential_rejected():
    t = np.linspace(0, 10, 50)
    with pytest.raises(FitError):
        fit_exponential_arrays(t, 0.1 * np.exp(0.2 * t))


def test_short_window_and_nan_rejected():
    t = np.linspace(0, 10, 20)
    with pytest.raises(FitError, match="fewer than 4"):
        fit_exponential_arrays(t, np.exp(-t), t_start=9.9)
    y = np.exp(-t)
    y[3] = np.nan
    with pytest.raises(FitError, match="non-finite"):
        fit_exponential_arrays(t, y)


def test_transient_skip():
    assert transient_skip(0.15, 600) == pytest.approx(5 / 0.15)
    assert transient_skip(0.01, 600) == pytest.approx(150)
    assert transient_skip(None, 600) == 0.0


def test_fit_exponential_uses_transient_skip():
    t = np.linspace(0, 600, 401)
    y = np.where(t < 20, 4.0, 3.6 * np.exp(-0.01 * t) + 0.0034)
    fit = fit_exponential(_traj(t, y), coupling=0.15)
    assert fit.window[0] >= 5 / 0.15
    assert fit.W == pytest.approx(0.01, rel=1e-6)


def test_unconverged_window_flagged():
    t = np.linspace(0, 50, 200)
    fit = fit_exponential_arrays(t, 3.0 * np.exp(-0.01 * t) + 0.1)
    assert not fit.window_ok


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.5, 5.0), w=st.floats(0.002, 0.05), c=st.floats(0.0, 0.5))
def test_fit_roundtrip(a, w, c):
    t = np.linspace(0, 8 / w, 300)
    fit = fit_exponential_arrays(t, a * np.exp(-w * t) + c)
    assert fit.W == pytest.approx(w, rel=1e-6)
    assert fit.n_inf == pytest.approx(c, abs=1e-6 * a)


def test_rate_sweep_records_failures():
    p = SWParams(0.1, 1.5, 0.1, n0=0.5, fock_levels=20)
    rows = rate_sweep(p, "omega", [1.5], t_max=5.0, n_samples=11)
    assert len(rows) == 1
    with pytest.raises(ValueError, match="no parameter"):
        rate_sweep(p, "bogus", [1.0])
    # an invalid value fails the point, not the sweep
    rows = rate_sweep(p, "omega", [-1.0], t_max=5.0, n_samples=11)
    assert rows[0].fit is None and "ValueError" in rows[0].error


def test_fit_invariant_under_sampling_refinement():
    from ioncool.scenarios import simulate

    p = SWParams(0.1, 1.5, 0.1, n0=1.0, fock_levels=30)
    coarse = simulate(p, t_max=150.0, n_samples=101)
    fine = simulate(p, t_max=150.0, n_samples=201)
    w1 = fit_exponential(coarse, coupling=0.15).W
    w2 = fit_exponential(fine, coupling=0.15).W
    assert abs(w1 - w2) / w2 < 0.01


@pytest.mark.parametrize("omega,tol", [(3.0, 0.02), (6.0, 0.005)])
def test_rsb_fit_matches_cascade_slope(omega, tol):
    # the cascade is the eta Omega >> gamma limit of the red-sideband model;
    # the gap shrinks roughly as (gamma / eta Omega)^2
    from ioncool.analytics import cascade_evolve
    from ioncool.scenarios import simulate

    p = SWParams(0.1, omega, 0.1, n0=4.0, fidelity="rsb")
    traj = simulate(p, t_max=400.0, n_samples=201, initial="dressed")
    casc = cascade_evolve(4.0, 0.1, traj.times)
    w_sim = fit_exponential(traj, coupling=0.1 * omega).W
    w_casc = fit_exponential(_traj(traj.times, casc.nbar), coupling=0.1 * omega).W
    assert w_sim == pytest.approx(w_casc, rel=tol)
