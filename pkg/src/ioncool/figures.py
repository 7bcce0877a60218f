"""Figure bundles: the published parameter sets and the driver that regenerates them."""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analytics, output, scenarios
from .fitting import fit_exponential
from .liouville import steady_state
from .models import EITParams, SWParams, sw_model

log = logging.getLogger(__name__)

STEADY_FOCK_LEVELS = 16


@dataclass(frozen=True)
class Member:
    label: str
    params: SWParams | EITParams
    overlay: str = "ssc"  # analytic overlay regime: "ssc" | "wsc"
    t_max: float | None = None


@dataclass(frozen=True)
class FigureBundle:
    fig_id: str
    kind: str  # "trajectories" | "sweep" | "steady"
    title: str
    members: tuple[Member, ...] = ()
    axis: str = ""
    values: tuple[float, ...] = ()
    time_axis: str = "nu t"  # the published abscissa; our times are in 1/nu throughout
    steady_members: tuple[Member, ...] = field(default=())

    def definition(self) -> dict:
        d = {"fig_id": self.fig_id, "kind": self.kind, "axis": self.axis, "values": list(self.values),
             "time_axis": self.time_axis,
             "members": [{"label": m.label, "params": asdict(m.params), "type": type(m.params).__name__,
                          "overlay": m.overlay, "t_max": m.t_max} for m in self.members]}
        return d

    def sha256(self) -> str:
        return hashlib.sha256(json.dumps(self.definition(), sort_keys=True).encode()).hexdigest()


def _sw(**kw):
    base = dict(eta=0.1, omega=1.5, gamma=0.1, delta=-1.0, n0=4.0)
    base.update(kw)
    return SWParams(**base)


def _eit(**kw):
    base = dict(eta_g=0.1, eta_r=-0.1, omega_g=4.0, omega_r=20.0, gamma_g=5.0, gamma_r=0.0, delta=103.0, n0=3.0)
    base.update(kw)
    return EITParams(**base)


def _bundles() -> dict[str, FigureBundle]:
    b = {}
    b["fig2a"] = FigureBundle(
        "fig2a", "trajectories", "SW, eta = 0.2, 0.12, 0.04 (Omega=1.5, gamma=0.1, n0=4)",
        tuple(Member(f"eta={e}", _sw(eta=e), "ssc", 600.0) for e in (0.2, 0.12, 0.04)))
    b["fig2b"] = FigureBundle(
        "fig2b", "trajectories", "SW, Omega = 2.1, 1.25, 0.6 (eta=0.1, gamma=0.1, n0=4)",
        tuple(Member(f"Omega={o}", _sw(omega=o), "ssc", 600.0) for o in (2.1, 1.25, 0.6)))
    b["fig2c"] = FigureBundle(
        "fig2c", "trajectories", "SW, gamma = 0.1, 0.15, 0.2 with Omega = 9 gamma (eta=0.1, n0=4)",
        tuple(Member(f"gamma={g}", _sw(gamma=g, omega=round(9 * g, 12)), "ssc", 600.0) for g in (0.1, 0.15, 0.2)))
    b["fig2d"] = FigureBundle(
        "fig2d", "trajectories", "SW, n0 = 4, 3, 2, 1 (eta=0.08, Omega=1.5, gamma=0.1)",
        tuple(Member(f"n0={n}", _sw(eta=0.08, n0=float(n)), "ssc", 600.0) for n in (4, 3, 2, 1)))
    b["fig3a"] = FigureBundle(
        "fig3a", "trajectories", "SW, strong (Omega=1.5) vs weak (Omega=0.1) sideband coupling, n0=4",
        (Member("Omega=1.5", _sw(omega=1.5), "ssc", 600.0), Member("Omega=0.1", _sw(omega=0.1), "wsc", 3500.0)))
    b["fig3b"] = FigureBundle(
        "fig3b", "sweep", "SW cooling rate vs Omega (eta=0.1, gamma=0.1), n0=4 and n0=1",
        (Member("n0=4", _sw(n0=4.0)), Member("n0=1", _sw(n0=1.0))),
        axis="omega", values=(0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0))
    b["figst"] = FigureBundle(
        "figst", "steady", "SW steady-state occupation vs Omega (eta=0.1, gamma=0.1)",
        (Member("steady", _sw(fock_levels=STEADY_FOCK_LEVELS)),),
        axis="omega", values=(0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0))
    b["fig5a"] = FigureBundle(
        "fig5a", "trajectories", "EIT, strong (Omega_g=4) vs weak (Omega_g=0.3) coupling, Delta=103, n0=3",
        (Member("Omega_g=4", _eit(omega_g=4.0), "ssc", 800.0), Member("Omega_g=0.3", _eit(omega_g=0.3), "wsc")))
    b["fig5b"] = FigureBundle(
        "fig5b", "sweep", "EIT cooling rate vs Omega_g (Delta=103, n0=3)",
        (Member("n0=3", _eit()),), axis="omega_g", values=(0.3, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0))
    return b


BUNDLES = _bundles()
FIGURE_IDS = tuple(BUNDLES)


def get_bundle(fig_id: str) -> FigureBundle:
    try:
        return BUNDLES[fig_id]
    except KeyError:
        raise ValueError(f"unknown figure id {fig_id!r}; choose from {', '.join(FIGURE_IDS)}") from None


# --------------------------------------------------------------------------
# running


def _run_member(args):
    m, n_samples = args
    try:
        traj = scenarios.simulate(m.params, t_max=m.t_max, n_samples=n_samples)
    except Exception as exc:
        return m, None, None, f"{type(exc).__name__}: {exc}"
    try:
        fit = fit_exponential(traj, coupling=scenarios.sideband_coupling(m.params))
    except Exception as exc:
        return m, traj, None, f"{type(exc).__name__}: {exc}"
    return m, traj, fit, ""


def _slug(label: str) -> str:
    return label.replace("=", "_").replace(".", "p").replace(" ", "")


def reproduce(fig_id: str, outdir="figures", n_samples: int = 401, workers: int = 1) -> dict:
    """Run every member of a figure, write data, overlays, a summary table and a PNG.

    Per-member failures are recorded in the summary and do not stop the bundle.
    """
    bundle = get_bundle(fig_id)
    out = Path(outdir) / fig_id
    out.mkdir(parents=True, exist_ok=True)
    h = bundle.sha256()
    if bundle.kind == "trajectories":
        summary = _reproduce_trajectories(bundle, out, h, n_samples, workers)
    elif bundle.kind == "sweep":
        summary = _reproduce_sweep(bundle, out, h, n_samples, workers)
    else:
        summary = _reproduce_steady(bundle, out, h)
    output.write_json(out / f"{fig_id}.meta.json",
                      output.metadata({}, h, figure=bundle.definition(), summary=summary))
    return summary


def _reproduce_trajectories(bundle, out, h, n_samples, workers):
    jobs = [(m, n_samples) for m in bundle.members]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_member, jobs))
    else:
        results = [_run_member(j) for j in jobs]
    curves, overlays, rows, failures = [], [], [], {}
    for m, traj, fit, err in results:
        stem = out / f"{bundle.fig_id}_{_slug(m.label)}"
        w_wsc, w_ssc = scenarios.analytic_rates(m.params)
        if traj is not None:
            ni = traj.internal_pops.shape[1]
            output.write_csv(f"{stem}.csv", output.trajectory_columns(ni), output.trajectory_rows(traj), h)
            ana = scenarios.analytic_nbar(m.params, traj.times, m.overlay)
            output.write_csv(f"{stem}.analytic.csv", ("t", "nbar_analytic"), zip(traj.times, ana), h)
            curves.append((m.label, traj.times, traj.nbar))
            overlays.append((f"{m.label} analytic ({m.overlay})", traj.times, ana))
        if err:
            failures[m.label] = err
        rows.append((m.label, fit.W if fit else np.nan, fit.n_inf if fit else np.nan, w_wsc, w_ssc,
                     fit.rms_residual if fit else np.nan))
    output.write_csv(out / f"{bundle.fig_id}_summary.csv",
                     ("member", "W_fit", "n_inf_fit", "W_analytic_wsc", "W_analytic_ssc", "rms_residual"), rows, h)
    summary = {"members": [dict(zip(("member", "W_fit", "n_inf_fit", "W_analytic_wsc", "W_analytic_ssc",
                                     "rms_residual"), r)) for r in rows], "failures": failures}
    if bundle.fig_id == "fig3a":
        w = {r[0]: r[1] for r in rows}
        summary["rate_ratio"] = w["Omega=1.5"] / w["Omega=0.1"]
        st = steady_state(sw_model(replace(bundle.members[0].params, fock_levels=STEADY_FOCK_LEVELS)))
        summary["nbar_st_strong"] = st.nbar_st
        summary["nbar_st_ratio_to_wsc"] = st.nbar_st / analytics.nst_wsc_sw(bundle.members[0].params.gamma)
    logy = bundle.fig_id in ("fig3a", "fig5a")
    output.plot_trajectories(out / f"{bundle.fig_id}.png", curves, overlays, logy=logy, title=bundle.title)
    return summary


def _reproduce_sweep(bundle, out, h, n_samples, workers):
    from .fitting import rate_sweep

    points, lines, summary = [], [], {"series": {}}
    grid = np.linspace(min(bundle.values), max(bundle.values), 200)
    for m in bundle.members:
        rows = rate_sweep(m.params, bundle.axis, bundle.values, n_samples=n_samples, workers=workers)
        table = [(r.value, r.fit.W if r.fit else np.nan, r.fit.n_inf if r.fit else np.nan, r.w_wsc, r.w_ssc,
                  r.fit.rms_residual if r.fit else np.nan) for r in rows]
        output.write_csv(out / f"{bundle.fig_id}_{_slug(m.label)}_sweep.csv", output.SWEEP_COLUMNS, table, h)
        summary["series"][m.label] = {"rows": [dict(zip(output.SWEEP_COLUMNS, t)) for t in table],
                                      "failures": {r.value: r.error for r in rows if r.error}}
        points.append((f"fit, {m.label}", [t[0] for t in table], [t[1] for t in table]))
        lines.append((f"strong coupling, {m.label}", grid,
                      [scenarios.analytic_rates(replace(m.params, **{bundle.axis: v}))[1] for v in grid]))
    lines.append(("weak coupling", grid,
                  [scenarios.analytic_rates(replace(bundle.members[0].params, **{bundle.axis: v}))[0] for v in grid]))
    output.plot_points_and_lines(out / f"{bundle.fig_id}.png", points, lines, xlabel=bundle.axis,
                                 ylabel=r"$W/\nu$", logy=True, title=bundle.title)
    return summary


def steady_table(params: SWParams, values, axis: str = "omega"):
    rows = []
    for v in values:
        p = replace(params, **{axis: v})
        st = steady_state(sw_model(p))
        rows.append((v, st.nbar_st, analytics.nst_ssc_sw(p.eta, p.omega, p.gamma),
                     analytics.nst_wsc_sw(p.gamma), st.residual))
    return rows


def _reproduce_steady(bundle, out, h):
    rows = steady_table(bundle.members[0].params, bundle.values, bundle.axis)
    cols = (bundle.axis, "nbar_st", "nbar_st_ssc_analytic", "nbar_st_wsc_analytic", "residual")
    output.write_csv(out / f"{bundle.fig_id}_steady.csv", cols, rows, h)
    x = [r[0] for r in rows]
    output.plot_points_and_lines(
        out / f"{bundle.fig_id}.png", [("Liouvillian steady state", x, [r[1] for r in rows])],
        [("strong-coupling analytic", x, [r[2] for r in rows]), ("weak-coupling analytic", x, [r[3] for r in rows])],
        xlabel=r"$\Omega/\nu$", ylabel=r"$\bar n_{st}$", logy=True, title=bundle.title)
    return {"rows": [dict(zip(cols, r)) for r in rows]}
