"""Command-line entry point: ``ioncool <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import analytics, figures, output, scenarios
from .config import ALL_KEYS, ConfigError, RunConfig, load_config, parse_config
from .fitting import FitError, fit_exponential_arrays, rate_sweep, transient_skip
from .hilbert import TruncationError
from .integrators import IntegrationError
from .liouville import LeakageError, SingularSteadyStateError, TraceDriftError, steady_state
from .models import EITParams, SWParams

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3
NUMERICAL_ERRORS = (IntegrationError, LeakageError, TraceDriftError, FitError, SingularSteadyStateError)

log = logging.getLogger("ioncool")


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def _add_config_args(sp):
    sp.add_argument("config", nargs="?", help="JSON config file (flat keys); omitted means all defaults")
    g = sp.add_argument_group("config overrides")
    for key, (typ, _) in sorted(ALL_KEYS.items()):
        g.add_argument(_flag(key), dest=f"cfg_{key}", type=typ, metavar=key.upper())


def _config(args) -> RunConfig:
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    if args.config is None:
        return parse_config("", "<defaults>", overrides)
    return load_config(args.config, overrides)


def _base(cfg: RunConfig) -> Path:
    base = Path(cfg["output"])
    base.parent.mkdir(parents=True, exist_ok=True)
    return base


def _overlay_rows(p, times):
    wsc = scenarios.analytic_nbar(p, times, "wsc")
    ssc = scenarios.analytic_nbar(p, times, "ssc")
    return zip(times, ssc, wsc)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    p = cfg.params()
    h = cfg.sha256()
    traj = scenarios.simulate(p, cfg["t_max"], cfg["n_samples"], cfg["rtol"], cfg["atol"], cfg["initial"],
                              cfg["method"])
    base = _base(cfg)
    ni = traj.internal_pops.shape[1]
    output.write_csv(f"{base}.csv", output.trajectory_columns(ni), output.trajectory_rows(traj), h)
    output.write_csv(f"{base}.analytic.csv", ("t", "nbar_ssc", "nbar_wsc"), _overlay_rows(p, traj.times), h)
    output.write_json(f"{base}.meta.json", output.metadata(
        cfg.values, h, sideband_coupling=scenarios.sideband_coupling(p), regime=scenarios.regime(p),
        max_trace_err=float(np.max(np.abs(traj.trace_err))), max_herm_err=float(np.max(traj.herm_err)),
        max_leakage=float(np.max(traj.leakage)), min_eig=traj.min_eig, integrator=traj.stats))
    if not args.no_plot:
        output.plot_trajectories(f"{base}.png", [("exact", traj.times, traj.nbar)],
                                 [(f"analytic ({scenarios.regime(p)})", traj.times,
                                   scenarios.analytic_nbar(p, traj.times))])
    print(f"wrote {base}.csv ({len(traj.times)} samples, final nbar={traj.nbar[-1]:.6g})")
    return EXIT_OK


def cmd_steady(args) -> int:
    cfg = _config(args)
    p = cfg.params()
    h = cfg.sha256()
    res = steady_state(scenarios.build_model(p))
    row = {"nbar_st": res.nbar_st, "residual": res.residual, "rcond": res.rcond}
    if isinstance(p, SWParams):
        row.update(nbar_st_ssc_analytic=analytics.nst_ssc_sw(p.eta, p.omega, p.gamma),
                   nbar_st_wsc_analytic=analytics.nst_wsc_sw(p.gamma))
    else:
        row.update(nbar_st_ssc_analytic=analytics.eit_rates(p).nbar_st,
                   nbar_st_wsc_analytic=(p.gamma / (4.0 * p.delta)) ** 2)
    base = _base(cfg)
    output.write_csv(f"{base}_steady.csv", tuple(row), [tuple(row.values())], h)
    output.write_json(f"{base}_steady.meta.json", output.metadata(cfg.values, h, result=row))
    print(json.dumps(output._jsonable(row), sort_keys=True))
    return EXIT_OK


def analytic_summary(p) -> dict:
    w_wsc, w_ssc = scenarios.analytic_rates(p)
    out = {"sideband_coupling": scenarios.sideband_coupling(p), "regime": scenarios.regime(p),
           "W_wsc": w_wsc, "W_ssc": w_ssc}
    if isinstance(p, SWParams):
        out.update(n0_prime=analytics.n0_prime(p.n0),
                   nbar_st_ssc=analytics.nst_ssc_sw(p.eta, p.omega, p.gamma),
                   nbar_st_wsc=analytics.nst_wsc_sw(p.gamma))
        if p.omega > 0 and p.gamma > 0:
            b = analytics.bloch_steady(p.eta, p.omega, p.gamma)
            out["bloch_nbar"] = b.nbar
    else:
        q = analytics.eit_dressed_params(p)
        r = analytics.eit_rates(p)
        out.update(asdict(q), W_ssc_exact_form=r.w_ssc, nbar_st_ssc=r.nbar_st,
                   resonant_delta=_resonant(p))
    return out


def _resonant(p: EITParams):
    from .models import eit_resonant_detuning

    try:
        return eit_resonant_detuning(p.omega_g, p.omega_r)
    except ValueError:
        return None


def cmd_analytic(args) -> int:
    cfg = _config(args)
    p = cfg.params()
    h = cfg.sha256()
    summary = analytic_summary(p)
    base = _base(cfg)
    times = np.linspace(0.0, cfg["t_max"], cfg["n_samples"])
    output.write_csv(f"{base}.analytic.csv", ("t", "nbar_ssc", "nbar_wsc"), _overlay_rows(p, times), h)
    output.write_json(f"{base}.analytic.json", output.metadata(cfg.values, h, analytic=summary))
    print(json.dumps(output._jsonable(summary), sort_keys=True, indent=2))
    return EXIT_OK


def cmd_fit(args) -> int:
    path = Path(args.trajectory)
    try:
        header, data, meta = output.read_csv(path)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read trajectory: {exc.strerror}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed CSV: {exc}") from None
    if header[:2] != ["t", "nbar"]:
        raise ConfigError(f"{path}:1: expected a trajectory CSV starting with 't,nbar'")
    t, y = data[:, 0], data[:, 1]
    coupling = args.coupling
    sidecar = path.with_suffix(".meta.json")
    if coupling is None and sidecar.exists():
        coupling = json.loads(sidecar.read_text()).get("sideband_coupling")
    t_start = args.t_start if args.t_start is not None else transient_skip(coupling, t[-1])
    fit = fit_exponential_arrays(t, y, t_start, args.t_end)
    res = asdict(fit)
    res["config_sha256"] = meta.get("config_sha256")
    print(json.dumps(output._jsonable(res), sort_keys=True, indent=2))
    return EXIT_OK


def _parse_values(text: str):
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise ConfigError(f"--values: expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise ConfigError("--values: empty list")
    return vals


def cmd_sweep(args) -> int:
    cfg = _config(args)
    p = cfg.params()
    if args.axis not in {f for f in asdict(p)} or args.axis in ("fidelity",):
        raise ConfigError(f"--axis: {args.axis!r} is not a numeric parameter of scheme {cfg.scheme!r}")
    values = _parse_values(args.values)
    for v in values:  # validate every point before any work
        try:
            replace(p, **{args.axis: int(v) if args.axis in ("fock_levels", "quadrature_order") else v})
        except ValueError as exc:
            raise ConfigError(f"--values: {args.axis}={v:g}: {exc}") from None
    h = cfg.sha256()
    rows = rate_sweep(p, args.axis, values, t_max=args.t_max_sweep, n_samples=cfg["n_samples"],
                      rtol=cfg["rtol"], atol=cfg["atol"], workers=args.workers)
    table = [(r.value, r.fit.W if r.fit else np.nan, r.fit.n_inf if r.fit else np.nan, r.w_wsc, r.w_ssc,
              r.fit.rms_residual if r.fit else np.nan) for r in rows]
    base = _base(cfg)
    output.write_csv(f"{base}_sweep.csv", output.SWEEP_COLUMNS, table, h)
    failures = {r.value: r.error for r in rows if r.error}
    output.write_json(f"{base}_sweep.meta.json", output.metadata(cfg.values, h, axis=args.axis, values=values,
                                                                 failures=failures))
    if not args.no_plot:
        x = [r[0] for r in table]
        output.plot_points_and_lines(f"{base}_sweep.png", [("fit", x, [r[1] for r in table])],
                                     [("weak coupling", x, [r[3] for r in table]),
                                      ("strong coupling", x, [r[4] for r in table])],
                                     xlabel=args.axis, ylabel=r"$W/\nu$", logy=True)
    print(f"wrote {base}_sweep.csv ({len(rows)} points, {len(failures)} failed)")
    return EXIT_NUMERICAL if len(failures) == len(rows) else EXIT_OK


def cmd_reproduce(args) -> int:
    summary = figures.reproduce(args.figure, args.outdir, n_samples=args.n_samples, workers=args.workers)
    print(json.dumps(output._jsonable(summary), sort_keys=True, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ioncool", description="Trapped-ion cooling simulations (units of nu).")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="propagate one scenario and write its trajectory")
    _add_config_args(sp)
    sp.add_argument("--no-plot", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("steady", help="Liouvillian steady state")
    _add_config_args(sp)
    sp.set_defaults(func=cmd_steady)

    sp = sub.add_parser("analytic", help="closed-form rates, occupations and overlays")
    _add_config_args(sp)
    sp.set_defaults(func=cmd_analytic)

    sp = sub.add_parser("fit", help="exponential fit of a trajectory CSV")
    sp.add_argument("trajectory")
    sp.add_argument("--t-start", type=float)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--coupling", type=float, help="sideband coupling that sets the transient skip")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("sweep", help="fitted and analytic rates along one parameter axis")
    _add_config_args(sp)
    sp.add_argument("--axis", required=True)
    sp.add_argument("--values", required=True, help="comma-separated list")
    sp.add_argument("--sweep-t-max", dest="t_max_sweep", type=float,
                    help="common horizon for every point (default: per-point estimate)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--no-plot", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("reproduce", help="regenerate one published figure bundle")
    sp.add_argument("figure", choices=figures.FIGURE_IDS)
    sp.add_argument("--outdir", default="figures")
    sp.add_argument("--n-samples", type=int, default=401)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
