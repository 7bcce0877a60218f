import json

import pytest

from ioncool import figures
from ioncool.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, main
from ioncool.models import SWParams
from ioncool.output import read_csv

SMALL = {"scheme": "sw", "omega": 1.5, "n0": 1.0, "fock_levels": 30, "t_max": 40.0, "n_samples": 41}


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({**SMALL, "output": str(tmp_path / "out" / "run")}))
    return path


def test_simulate_writes_schema_and_is_deterministic(config, tmp_path):
    assert main(["simulate", str(config), "--no-plot"]) == EXIT_OK
    csv = tmp_path / "out" / "run.csv"
    first = csv.read_bytes()
    assert first.splitlines()[0] == b"t,nbar,pop_g,pop_e,trace_err"
    assert main(["simulate", str(config), "--no-plot"]) == EXIT_OK
    assert csv.read_bytes() == first
    header, data, meta = read_csv(csv)
    assert data.shape == (41, 5)
    meta_json = json.loads((tmp_path / "out" / "run.meta.json").read_text())
    assert meta["config_sha256"] == meta_json["config_sha256"]
    assert meta_json["config"]["quadrature_order"] == 5  # defaults are echoed
    assert (tmp_path / "out" / "run.analytic.csv").exists()


def test_simulate_eit_schema(tmp_path):
    out = tmp_path / "eit"
    rc = main(["simulate", "--scheme", "eit", "--n0", "0.3", "--fock-levels", "10", "--t-max", "2",
               "--n-samples", "3", "--output", str(out), "--no-plot"])
    assert rc == EXIT_OK
    assert (tmp_path / "eit.csv").read_text().splitlines()[0] == "t,nbar,pop_g,pop_e,pop_r,trace_err"


def test_plot_is_rendered(config, tmp_path):
    assert main(["simulate", str(config)]) == EXIT_OK
    assert (tmp_path / "out" / "run.png").stat().st_size > 0


def test_flag_overrides_file(config, tmp_path):
    assert main(["simulate", str(config), "--no-plot", "--t-max", "10"]) == EXIT_OK
    _, data, _ = read_csv(tmp_path / "out" / "run.csv")
    assert data[-1, 0] == 10.0


def test_fit_subcommand(config, tmp_path, capsys):
    main(["simulate", str(config), "--no-plot"])
    capsys.readouterr()
    assert main(["fit", str(tmp_path / "out" / "run.csv")]) == EXIT_OK
    res = json.loads(capsys.readouterr().out)
    assert res["W"] > 0
    assert res["window"][0] == pytest.approx(40 / 41 * 10, abs=1.0)  # 5 / (eta Omega) capped at T/4


def test_steady_and_analytic(config, capsys):
    assert main(["steady", str(config), "--fock-levels", "16"]) == EXIT_OK
    res = json.loads(capsys.readouterr().out.strip())
    assert res["nbar_st"] == pytest.approx(0.0034, rel=0.2)
    assert main(["analytic", str(config)]) == EXIT_OK
    res = json.loads(capsys.readouterr().out)
    assert res["W_ssc"] == pytest.approx(0.025)


def test_sweep(config, tmp_path):
    rc = main(["sweep", str(config), "--axis", "omega", "--values", "1.0,1.5", "--sweep-t-max", "20", "--no-plot"])
    assert rc == EXIT_OK
    text = (tmp_path / "out" / "run_sweep.csv").read_text().splitlines()
    assert text[0] == "axis_value,W_fit,n_inf_fit,W_analytic_wsc,W_analytic_ssc,rms_residual"
    assert len(text) == 4


@pytest.mark.parametrize("argv", [
    ["simulate", "--eta", "-1"],
    ["simulate", "--fidelity", "bogus"],
    ["sweep", "--axis", "nope", "--values", "1"],
    ["sweep", "--axis", "omega", "--values", "a,b"],
    ["fit", "/nonexistent.csv"],
])
def test_validation_exit_code(argv, capsys):
    assert main(argv) == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_bad_config_file_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "eta": 0.1,\n  "gama": 0.1\n}')
    assert main(["simulate", str(path)]) == EXIT_INPUT
    assert f"{path}:3:" in capsys.readouterr().err


def test_truncation_is_validation_error(capsys):
    assert main(["simulate", "--n0", "8", "--fock-levels", "20", "--t-max", "1"]) == EXIT_INPUT


def test_numerical_failure_exit_code(tmp_path, capsys):
    # a short ladder lets a strongly driven ion leak out of the truncation
    rc = main(["simulate", "--n0", "0.5", "--fock-levels", "16", "--eta", "0.4", "--omega", "3", "--t-max", "50",
               "--n-samples", "11", "--output", str(tmp_path / "x"), "--no-plot"])
    assert rc == EXIT_NUMERICAL
    assert "LeakageError" in capsys.readouterr().err


def test_reproduce_small_bundle(tmp_path, monkeypatch, capsys):
    tiny = figures.FigureBundle(
        "fig2d", "trajectories", "tiny",
        tuple(figures.Member(f"n0={n}", SWParams(0.08, 1.5, 0.1, n0=float(n), fock_levels=30), "ssc", 20.0)
              for n in (1, 0.5)))
    monkeypatch.setitem(figures.BUNDLES, "fig2d", tiny)
    assert main(["reproduce", "fig2d", "--outdir", str(tmp_path), "--n-samples", "21"]) == EXIT_OK
    out = tmp_path / "fig2d"
    names = sorted(p.name for p in out.iterdir())
    assert "fig2d.png" in names and "fig2d_summary.csv" in names and "fig2d.meta.json" in names
    assert sum(n.endswith(".analytic.csv") for n in names) == 2
    first = (out / "fig2d_n0_1.csv").read_bytes()
    main(["reproduce", "fig2d", "--outdir", str(tmp_path), "--n-samples", "21"])
    assert (out / "fig2d_n0_1.csv").read_bytes() == first
