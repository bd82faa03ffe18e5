import json
import os

import pytest

from siegel.configure import DEFAULTS, load_config, main, precision_cap, set_value
from siegel.exceptions import DomainError


@pytest.fixture
def config_file(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    monkeypatch.setenv("SIEGEL_CONFIG", str(path))
    return path


def test_packaged_config_matches_defaults():
    packaged = os.path.join(os.path.dirname(__file__), os.pardir, "siegel", "config.json")
    with open(packaged) as f:
        assert json.load(f) == DEFAULTS


def test_missing_file_gives_defaults(config_file):
    assert load_config() == DEFAULTS
    assert load_config() is not DEFAULTS


def test_stored_values_override(config_file):
    config_file.write_text(json.dumps({"quasiconformal_K": 20}))
    config = load_config()
    assert config["quasiconformal_K"] == 20
    assert config["level_min"] == DEFAULTS["level_min"]


def test_invalid_json(config_file):
    config_file.write_text("{not json")
    with pytest.raises(DomainError):
        load_config()


def test_set_parses_json_values(config_file, capsys):
    assert main(["--set", "quasiconformal_K=20", "--set", "conformal_backend=zipper"]) == 0
    stored = json.loads(config_file.read_text())
    assert stored["quasiconformal_K"] == 20
    assert stored["conformal_backend"] == "zipper"
    assert "quasiconformal_K updated to: 20" in capsys.readouterr().out


def test_set_unknown_key(config_file, capsys):
    assert main(["--set", "colour=red"]) == 2
    assert "Unknown configuration key" in capsys.readouterr().err
    assert not config_file.exists()


def test_set_value_needs_assignment(config_file):
    with pytest.raises(DomainError):
        set_value("quasiconformal_K")


def test_reset(config_file):
    config_file.write_text(json.dumps({"level_min": 9}))
    assert main(["--reset"]) == 0
    assert json.loads(config_file.read_text()) == DEFAULTS


def test_status(config_file, capsys):
    assert main(["--status"]) == 0
    out = capsys.readouterr().out
    assert f"File: {config_file}" in out
    assert "Precision cap: 4096 bits" in out


@pytest.mark.parametrize("raw,expected", [("", 4096), ("100", 100), ("53", 53)])
def test_precision_cap(monkeypatch, raw, expected):
    monkeypatch.setenv("SIEGEL_PRECISION_CAP", raw)
    assert precision_cap() == expected


@pytest.mark.parametrize("raw", ["abc", "10"])
def test_bad_precision_cap(monkeypatch, raw):
    monkeypatch.setenv("SIEGEL_PRECISION_CAP", raw)
    with pytest.raises(DomainError):
        precision_cap()
