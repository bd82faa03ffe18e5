import math

import pytest

from siegel.cf import CFNumber
from siegel.configure import load_config

GOLDEN = (math.sqrt(5) - 1) / 2


@pytest.fixture
def golden():
    return CFNumber.golden()


@pytest.fixture
def config():
    return load_config()


@pytest.fixture(scope="session")
def golden_radius():
    """r([1;1*]) at 1e-3; the orbit and partition work is cached for later tests."""
    from siegel.siegel_disk import siegel_radius
    return siegel_radius(CFNumber.golden(), 1e-3, load_config())


@pytest.fixture(autouse=True)
def _isolated_config(monkeypatch, tmp_path_factory):
    """Point SIEGEL_CONFIG at a missing file so the packaged defaults are used."""
    monkeypatch.setenv("SIEGEL_CONFIG", str(tmp_path_factory.getbasetemp() / "no-config.json"))
    monkeypatch.delenv("SIEGEL_PRECISION_CAP", raising=False)
