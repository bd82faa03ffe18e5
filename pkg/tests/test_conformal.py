import mpmath
import numpy as np
import pytest

from siegel.conformal import (
    DiskDomain,
    PolygonDomain,
    SymmBackend,
    conformal_map_radius,
    get_backend,
)
from siegel.exceptions import DomainError

SQUARE = [1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]


@pytest.fixture(scope="module")
def square_radius():
    """Half-side 1: the disk map z -> int_0^z (1 + w^4)^(-1/2) dw sends 1 to a side midpoint."""
    return float(1 / mpmath.quad(lambda t: (1 + t ** 4) ** -0.5, [0, 1]))


def _circle(n, radius=1.0):
    return radius * np.exp(2j * np.pi * np.arange(n) / n)


class TestDisks:
    @pytest.mark.parametrize("R", [1.0, 0.25, 3.5])
    def test_centered_disk(self, R):
        assert conformal_map_radius(DiskDomain(R), 1e-9).value == pytest.approx(R)

    def test_off_center_disk(self):
        assert conformal_map_radius(DiskDomain(1.0, 0.5), 1e-9).value == pytest.approx(0.75)

    def test_disk_missing_origin(self):
        with pytest.raises(DomainError):
            conformal_map_radius(DiskDomain(1.0, 2.0), 1e-9)


class TestSymm:
    def test_square(self, square_radius):
        result = conformal_map_radius(PolygonDomain(SQUARE), 1e-5)
        assert square_radius == pytest.approx(1.078705, abs=1e-5)
        assert result.value == pytest.approx(square_radius, abs=1e-3)
        assert result.panels >= 256

    def test_scaling(self, square_radius):
        result = conformal_map_radius([2 * z for z in SQUARE], 1e-5)
        assert result.value == pytest.approx(2 * square_radius, abs=2e-3)

    def test_fine_polygon_approaches_disk(self):
        result = conformal_map_radius(_circle(256), 1e-6)
        assert result.value == pytest.approx(1.0, abs=1e-3)

    def test_panel_cap_reports_non_converged(self):
        result = SymmBackend(min_panels=16, max_panels=32).radius(PolygonDomain(SQUARE), 1e-14)
        assert not result.converged
        assert result.panels <= 64


class TestZipper:
    def test_circle(self):
        result = conformal_map_radius(_circle(64), 1e-2, config={'conformal_backend': 'zipper'})
        assert result.value == pytest.approx(1.0, abs=1e-2)

    def test_agrees_with_symm_on_square(self, square_radius):
        result = conformal_map_radius(SQUARE, 1e-2, config={'conformal_backend': 'zipper'})
        assert result.value == pytest.approx(square_radius, abs=5e-2)


class TestPolygonChecks:
    def test_clockwise_is_normalized(self):
        domain = PolygonDomain(SQUARE[::-1])
        assert np.allclose(np.sort_complex(domain.vertices), np.sort_complex(np.array(SQUARE)))

    def test_too_few_vertices(self):
        with pytest.raises(DomainError):
            PolygonDomain([1, 1j])

    def test_self_intersection(self):
        with pytest.raises(DomainError):
            PolygonDomain([1 + 1j, -1 - 1j, 1 - 1j, -1 + 1j])

    def test_origin_outside(self):
        with pytest.raises(DomainError):
            PolygonDomain([2 + 0j, 3 + 0j, 3 + 1j, 2 + 1j])


def test_unknown_backend():
    with pytest.raises(DomainError):
        get_backend({'conformal_backend': 'schwarz'})
