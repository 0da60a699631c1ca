import math

import numpy as np
import pytest
from scipy.integrate import quad

from zmcss.fields import RadialGrid
from zmcss.moser import (ResolutionError, default_radial_grid, moser_grad_sq_quadrature,
                         moser_l1_exact, moser_profile, moser_sequence, tm_probe)


def test_resolution_guard():
    with pytest.raises(ResolutionError):
        moser_profile(64, RadialGrid(2.0, 256))
    with pytest.raises(ValueError):
        moser_profile(4, RadialGrid(0.9, 10000))
    with pytest.raises(ValueError):
        moser_profile(1, default_radial_grid())


@pytest.mark.parametrize("n", [2, 8, 64])
def test_l1_closed_form_against_quadrature(n):
    ln = math.log(n)
    core = math.pi / n**2 * math.sqrt(ln / (2 * math.pi))
    tail, _ = quad(lambda r: 2 * math.pi * r * math.log(1 / r), 1 / n, 1, epsabs=1e-15)
    assert moser_l1_exact(n) == pytest.approx(core + tail / math.sqrt(2 * math.pi * ln), rel=1e-12)


def test_profile_values_and_unit_dirichlet():
    grid = default_radial_grid()
    for n in (2, 16, 256):
        w = moser_profile(n, grid)
        assert w.values[0] == pytest.approx(math.sqrt(math.log(n) / (2 * math.pi)), rel=1e-15)
        assert np.all(w.values[grid.nodes() >= 1.0] == 0.0)
        assert np.all(np.diff(w.values) <= 0)
        assert moser_grad_sq_quadrature(w) == pytest.approx(1.0, abs=1e-6)


def test_probe_fields():
    pr = moser_sequence(8, 1.5)
    assert pr.unit_scale == pytest.approx(1 / math.sqrt(1 + pr.lp_norm_p ** (2 / 1.5)), rel=1e-15)
    assert pr.peak == pytest.approx(math.sqrt(math.log(8) / (2 * math.pi))
                                    / (1 + pr.lp_norm_p ** (1 / 1.5)), rel=1e-15)
    assert set(pr.to_dict()) >= {"n", "grad_sq", "l1_norm", "l1_exact", "peak"}
    with pytest.raises(ValueError):
        moser_sequence(8, 2.0)


def test_zero_alpha_gives_zero_integrals():
    tab = tm_probe(1.5, [0.0], [4, 8])
    s = tab["series"][repr(0.0)]
    assert s["integrals"] == [0.0, 0.0]
    assert s["ratios"] == [None] and s["max_over_min"] is None


def test_saturation_is_reported_not_raised():
    grid = RadialGrid(2.0, 2**14)
    tab = tm_probe(1.5, [20000 * math.pi], [4, 8], grid)
    assert [r["status"] for r in tab["rows"]] == ["saturated", "saturated"]
    assert tab["series"][repr(20000 * math.pi)]["integrals"] == [None, None]


def test_subcritical_alpha_stays_bounded():
    s = tm_probe(1.5, [2 * math.pi], [4, 8, 16, 32])["series"][repr(2 * math.pi)]
    assert all(v > 0 for v in s["integrals"])
    assert s["max_over_min"] < 3
