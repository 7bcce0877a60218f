"""Deterministic CSV / JSON writers and the matplotlib renderings."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__

TRAJECTORY_COLUMNS_SW = ("t", "nbar", "pop_g", "pop_e", "trace_err")
TRAJECTORY_COLUMNS_EIT = ("t", "nbar", "pop_g", "pop_e", "pop_r", "trace_err")
SWEEP_COLUMNS = ("axis_value", "W_fit", "n_inf_fit", "W_analytic_wsc", "W_analytic_ssc", "rms_residual")


def fmt(x) -> str:
    """Fixed, platform-independent float formatting."""
    if isinstance(x, str):
        return x
    x = float(x)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.12e}"


def write_csv(path, columns, rows, config_hash: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
        lines.append(",".join(fmt(v) for v in row))
    if config_hash:
        lines.append(f"# config_sha256={config_hash}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray, dict]:
    """Read a CSV written by :func:`write_csv`; ``#key=value`` lines become metadata."""
    header = None
    rows = []
    meta = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k.strip()] = v.strip()
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: empty CSV")
    return header, np.array(rows, dtype=float).reshape(-1, len(header)), meta


def trajectory_rows(traj):
    ni = traj.internal_pops.shape[1]
    order = (0, 1, 2) if ni == 3 else (0, 1)
    for i, t in enumerate(traj.times):
        yield (t, traj.nbar[i], *(traj.internal_pops[i, k] for k in order), traj.trace_err[i])


def trajectory_columns(internal_dim: int):
    return TRAJECTORY_COLUMNS_EIT if internal_dim == 3 else TRAJECTORY_COLUMNS_SW


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def metadata(config_values: dict, config_hash: str, **extra) -> dict:
    return {"library": "ioncool", "version": __version__, "config": config_values,
            "config_sha256": config_hash, "units": {"frequency": "nu", "time": "1/nu"}, **extra}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# --------------------------------------------------------------------------
# figures


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_trajectories(path, curves, overlays=(), xlabel=r"$\nu t$", ylabel=r"$\bar n$", logy=False, title=""):
    """``curves`` / ``overlays``: iterables of ``(label, t, y)``; overlays are dashed."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    shades = np.linspace(0.0, 0.65, max(len(curves), 1))
    for (label, t, y), s in zip(curves, shades):
        ax.plot(t, y, color=str(s), lw=1.4, label=label)
    for (label, t, y), s in zip(overlays, np.linspace(0.0, 0.65, max(len(overlays), 1))):
        ax.plot(t, y, color=str(s), lw=1.1, ls="--", label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_points_and_lines(path, points, lines=(), xlabel="", ylabel="", logy=False, title=""):
    """``points``: ``(label, x, y)`` drawn as markers; ``lines``: ``(label, x, y)`` dashed."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    for label, x, y in points:
        ax.plot(x, y, "o-", color="k", ms=4, lw=1.0, label=label)
    colors = ["k", "tab:blue", "tab:red", "tab:green"]
    for (label, x, y), c in zip(lines, colors):
        ax.plot(x, y, ls="--", color=c, lw=1.1, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
