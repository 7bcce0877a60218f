import json

import pytest

from ioncool.config import ConfigError, load_config, parse_config
from ioncool.models import EITParams, SWParams


def test_defaults_are_echoed():
    cfg = parse_config("{}")
    assert cfg.scheme == "sw"
    assert cfg["n0"] == 4.0 and cfg["fock_levels"] == 61
    assert cfg["t_max"] > 0
    assert isinstance(cfg.params(), SWParams)


def test_eit_defaults():
    cfg = parse_config('{"scheme": "eit"}')
    p = cfg.params()
    assert isinstance(p, EITParams)
    assert (p.omega_g, p.omega_r, p.delta, p.gamma_g, p.n0) == (4.0, 20.0, 103.0, 5.0, 3.0)


def test_overrides_win():
    cfg = parse_config('{"omega": 1.0}', overrides={"omega": 2.0, "eta": None})
    assert cfg["omega"] == 2.0 and cfg["eta"] == 0.1


def test_hash_is_stable_and_sensitive():
    a = parse_config('{"omega": 1.0}')
    b = parse_config('{\n  "omega": 1.0\n}')
    c = parse_config('{"omega": 1.1}')
    assert a.sha256() == b.sha256() != c.sha256()


def test_line_precise_errors():
    text = '{\n  "eta": 0.1,\n  "omgea": 1.0\n}'
    with pytest.raises(ConfigError, match=r"cfg.json:3: unknown key 'omgea'"):
        parse_config(text, "cfg.json")
    with pytest.raises(ConfigError, match=r"x:2:3: invalid JSON"):
        parse_config('{\n  ,}', "x")
    with pytest.raises(ConfigError, match=r"x:3: eta must be finite and >= 0"):
        parse_config('{\n  "omega": 1.0,\n  "eta": -0.2\n}', "x")
    with pytest.raises(ConfigError, match=r"x:2: fock_levels must be an integer"):
        parse_config('{\n "fock_levels": 10.5}', "x")


def test_scheme_specific_keys():
    with pytest.raises(ConfigError, match="other scheme"):
        parse_config('{"scheme": "sw", "omega_g": 1.0}')
    with pytest.raises(ConfigError, match="scheme must be"):
        parse_config('{"scheme": "raman"}')
    with pytest.raises(ConfigError, match="fidelity"):
        parse_config('{"scheme": "eit", "fidelity": "rsb"}')


def test_flat_keys_only():
    with pytest.raises(ConfigError, match="scalar"):
        parse_config('{"eta": [0.1]}')
    with pytest.raises(ConfigError, match="top level"):
        parse_config("[1, 2]")


def test_load_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"omega": 0.5}))
    assert load_config(path)["omega"] == 0.5
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
