"""Run configuration: flat JSON keys, defaults, validation and hashing."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .models import EIT_FIDELITIES, SW_FIDELITIES, EITParams, SWParams


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending line when known."""


# key -> (type, default); a default of None means "derived at resolve time"
_COMMON = {
    "scheme": (str, "sw"),
    "fidelity": (str, "full"),
    "n0": (float, None),
    "fock_levels": (int, None),
    "quadrature_order": (int, 5),
    "t_max": (float, None),
    "n_samples": (int, 401),
    "rtol": (float, 1e-8),
    "atol": (float, 1e-10),
    "initial": (str, "thermal"),
    "method": (str, "auto"),
    "output": (str, "out/run"),
}
_SW = {
    "eta": (float, 0.1),
    "omega": (float, 1.5),
    "gamma": (float, 0.1),
    "delta": (float, -1.0),
}
_EIT = {
    "eta_g": (float, 0.1),
    "eta_r": (float, -0.1),
    "omega_g": (float, 4.0),
    "omega_r": (float, 20.0),
    "gamma_g": (float, 5.0),
    "gamma_r": (float, 0.0),
    "delta": (float, 103.0),
}
SCHEMES = {"sw": _SW, "eit": _EIT}
ALL_KEYS = {**_COMMON, **_SW, **_EIT}


@dataclass
class RunConfig:
    values: dict
    source: str = "<defaults>"
    lines: dict = field(default_factory=dict, repr=False)  # key -> line number in the source

    def __getitem__(self, key):
        return self.values[key]

    @property
    def scheme(self) -> str:
        return self.values["scheme"]

    def params(self):
        """Scenario parameter record; validation failures are reported against the config line."""
        v = self.values
        keys = SCHEMES[v["scheme"]]
        kwargs = {k: v[k] for k in keys}
        kwargs.update(n0=v["n0"], fock_levels=v["fock_levels"], fidelity=v["fidelity"],
                      quadrature_order=v["quadrature_order"])
        cls = SWParams if v["scheme"] == "sw" else EITParams
        try:
            return cls(**kwargs)
        except ValueError as exc:
            key = _key_in_message(str(exc), kwargs)
            raise ConfigError(self.where(key) + str(exc)) from exc

    def where(self, key: str | None) -> str:
        line = self.lines.get(key) if key else None
        return f"{self.source}:{line}: " if line else f"{self.source}: "

    def canonical_json(self) -> str:
        return json.dumps(self.values, sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _key_in_message(msg, keys):
    for k in sorted(keys, key=len, reverse=True):
        if re.search(rf"\b{re.escape(k)}\b", msg):
            return k
    return None


def _key_lines(text: str) -> dict:
    lines = {}
    for i, line in enumerate(text.splitlines(), start=1):
        for m in re.finditer(r'"([A-Za-z_][A-Za-z0-9_]*)"\s*:', line):
            lines.setdefault(m.group(1), i)
    return lines


def _coerce(key, typ, value, where):
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}{key} must be a string, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}{key} must be a number, got {value!r}")
    if typ is int:
        if int(value) != value:
            raise ConfigError(f"{where}{key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def parse_config(text: str, source: str = "<string>", overrides: dict | None = None) -> RunConfig:
    """Parse JSON text, apply overrides, fill defaults and validate."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be a JSON object of flat keys")
    lines = _key_lines(text)
    cfg = RunConfig({}, source, lines)
    merged = dict(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
            lines.pop(k, None)
    scheme = merged.get("scheme", "sw")
    if scheme not in SCHEMES:
        raise ConfigError(f"{cfg.where('scheme')}scheme must be one of {sorted(SCHEMES)}, got {scheme!r}")
    allowed = {**_COMMON, **SCHEMES[scheme]}
    for k, v in merged.items():
        if k not in allowed:
            hint = " (belongs to the other scheme)" if k in ALL_KEYS else ""
            raise ConfigError(f"{cfg.where(k)}unknown key {k!r} for scheme {scheme!r}{hint}")
        if isinstance(v, (dict, list)):
            raise ConfigError(f"{cfg.where(k)}{k} must be a scalar (keys are flat)")
    values = {}
    for k, (typ, default) in allowed.items():
        if k in merged and merged[k] is not None:
            values[k] = _coerce(k, typ, merged[k], cfg.where(k))
        else:
            values[k] = default
    fid = SW_FIDELITIES if scheme == "sw" else EIT_FIDELITIES
    if values["fidelity"] not in fid:
        raise ConfigError(f"{cfg.where('fidelity')}fidelity must be one of {fid} for scheme {scheme!r}")
    if values["n0"] is None:
        values["n0"] = 4.0 if scheme == "sw" else 3.0
    if values["fock_levels"] is None:
        values["fock_levels"] = 61 if scheme == "sw" else 42
    if values["initial"] not in ("thermal", "dressed"):
        raise ConfigError(f"{cfg.where('initial')}initial must be 'thermal' or 'dressed'")
    if values["method"] not in ("auto", "exprk", "rk45"):
        raise ConfigError(f"{cfg.where('method')}method must be one of 'auto', 'exprk', 'rk45'")
    for k in ("rtol", "atol"):
        if not values[k] > 0:
            raise ConfigError(f"{cfg.where(k)}{k} must be positive")
    if values["n_samples"] < 2:
        raise ConfigError(f"{cfg.where('n_samples')}n_samples must be >= 2")
    if values["t_max"] is not None and not values["t_max"] > 0:
        raise ConfigError(f"{cfg.where('t_max')}t_max must be positive")
    cfg.values = values
    params = cfg.params()
    if values["t_max"] is None:
        from .scenarios import default_t_max

        try:
            values["t_max"] = round(default_t_max(params), 6)
        except ValueError as exc:
            raise ConfigError(f"{cfg.where('t_max')}{exc}") from None
    return cfg


def load_config(path, overrides: dict | None = None) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path), overrides)
