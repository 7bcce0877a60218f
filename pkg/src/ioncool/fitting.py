"""Exponential fits of cooling trajectories and rate sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

log = logging.getLogger(__name__)

#: the fit window starts this many inverse sideband couplings after t = 0
TRANSIENT_COUPLING_TIMES = 5.0
#: but never later than this fraction of the trajectory
MAX_TRANSIENT_FRACTION = 0.25
#: the window is long enough once the remaining excess is below this fraction of n(0)
TAIL_FRACTION = 0.05


class FitError(RuntimeError):
    """The exponential model could not be fitted."""


@dataclass(frozen=True)
class ExpFitResult:
    W: float
    A: float  # amplitude referred to t = 0
    n_inf: float
    rms_residual: float
    window: tuple[float, float]
    iterations: int
    window_ok: bool  # trajectory decayed far enough for the asymptote to be pinned
    monotone: bool  # no net heating inside the window

    def model(self, t):
        return self.A * np.exp(-self.W * np.asarray(t, dtype=float)) + self.n_inf


def transient_skip(coupling: float | None, t_max: float) -> float:
    """Start of the fit window: ``5 / coupling``, capped at a quarter of the run."""
    cap = MAX_TRANSIENT_FRACTION * t_max
    if coupling is None or coupling <= 0:
        return 0.0
    return min(TRANSIENT_COUPLING_TIMES / coupling, cap)


def _initial_guess(t, y):
    """Log-linear regression of ``y - y_end`` on the window."""
    span = y[0] - y[-1]
    if span <= 0:
        return y[0] - y[-1] or 1e-12, 1.0 / max(t[-1] - t[0], 1e-300), y[-1]
    c = y[-1] - 0.02 * span
    excess = y - c
    keep = excess > 0.05 * span
    if keep.sum() < 2:
        keep = slice(None, 2)
    slope, icept = np.polyfit(t[keep], np.log(excess[keep]), 1)
    w = max(-slope, 1e-12)
    return float(np.exp(icept)), float(w), float(c)


def fit_exponential_arrays(
    t, y, t_start: float = 0.0, t_end: float | None = None, max_iter: int = 200, xtol: float = 1e-12
) -> ExpFitResult:
    """Damped Gauss--Newton (Levenberg--Marquardt) fit of ``A e^{-W t} + n_inf``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-D arrays of equal length")
    if not np.all(np.isfinite(y)):
        raise FitError("trajectory contains non-finite values")
    t_end = t[-1] if t_end is None else t_end
    sel = (t >= t_start) & (t <= t_end)
    if sel.sum() < 4:
        raise FitError(f"fit window [{t_start:g}, {t_end:g}] holds fewer than 4 samples")
    tw, yw = t[sel], y[sel]
    t0 = tw[0]
    s = tw - t0
    a, w, c = _initial_guess(s, yw)
    p = np.array([a, w, c])

    def resid(q):
        return q[0] * np.exp(-q[1] * s) + q[2] - yw

    r = resid(p)
    cost = r @ r
    lam = 1e-3
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        e = np.exp(-p[1] * s)
        J = np.column_stack([e, -p[0] * s * e, np.ones_like(s)])
        g = J.T @ r
        JtJ = J.T @ J
        d = np.diag(JtJ).copy()
        d[d == 0] = 1.0
        while True:
            try:
                step = np.linalg.solve(JtJ + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            trial = p + step
            rt = resid(trial)
            ct = rt @ rt
            if ct <= cost:
                lam = max(lam / 3, 1e-12)
                break
            lam *= 4
            if lam > 1e12:
                break
        if lam > 1e12:
            converged = np.max(np.abs(g)) < 1e-10 * max(1.0, cost)
            break
        small = np.all(np.abs(step) <= xtol * (np.abs(p) + xtol))
        p, r, cost_old, cost = trial, rt, cost, ct
        if small or cost_old - cost <= 1e-15 * max(cost_old, 1e-300):
            converged = True
            break
    if not converged:
        raise FitError(f"exponential fit did not converge in {max_iter} iterations")
    A, W, n_inf = p
    if not W > 0:
        raise FitError(f"fitted rate W={W:.3e} is not positive (heating or flat trajectory)")
    rms = float(np.sqrt(np.mean(r**2)))
    window_ok = (yw[-1] - n_inf) < TAIL_FRACTION * y[0]
    monotone = bool(yw[-1] <= yw[0])
    if not window_ok:
        log.warning("fit window ends with excess %.3g above n_inf (n(0)=%.3g); rate may be biased",
                    yw[-1] - n_inf, y[0])
    return ExpFitResult(float(W), float(A * np.exp(W * t0)), float(n_inf), rms,
                        (float(tw[0]), float(tw[-1])), it, bool(window_ok), monotone)


def fit_exponential(traj, coupling: float | None = None, t_start: float | None = None) -> ExpFitResult:
    """Fit a trajectory's ``nbar``.

    The window opens at ``t_start`` if given, else after the dressed-state
    transient ``5 / coupling`` (``coupling`` is the sideband Rabi frequency
    ``eta Omega``, or ``eta_D Omega_+`` for EIT).
    """
    t = np.asarray(traj.times)
    if t_start is None:
        t_start = transient_skip(coupling, t[-1])
    return fit_exponential_arrays(t, traj.nbar, t_start)


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    value: float
    fit: ExpFitResult | None
    w_wsc: float
    w_ssc: float
    error: str = ""


def _sweep_point(args):
    from . import scenarios

    params, axis, value, t_max, n_samples, rtol, atol = args
    w_wsc = w_ssc = float("nan")
    try:
        p = replace(params, **{axis: value})
        w_wsc, w_ssc = scenarios.analytic_rates(p)
        traj = scenarios.simulate(p, t_max=t_max, n_samples=n_samples, rtol=rtol, atol=atol)
        fit = fit_exponential(traj, coupling=scenarios.sideband_coupling(p))
        return SweepRow(float(value), fit, w_wsc, w_ssc)
    except Exception as exc:  # per-point failures are recorded, the sweep goes on
        log.warning("sweep point %s=%g failed: %s", axis, value, exc)
        return SweepRow(float(value), None, w_wsc, w_ssc, f"{type(exc).__name__}: {exc}")


def rate_sweep(params, axis: str, values, t_max: float | None = None, n_samples: int = 401,
               rtol: float = 1e-8, atol: float = 1e-10, workers: int = 1) -> list[SweepRow]:
    """Simulate and fit one trajectory per value of ``axis``; points are independent."""
    if not hasattr(params, axis):
        raise ValueError(f"{type(params).__name__} has no parameter {axis!r}")
    jobs = [(params, axis, float(v), t_max, n_samples, rtol, atol) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]
