import math

import numpy as np
import pytest
from scipy.integrate import quad

from dualgas import eos
from dualgas.core import ConfigError


def test_coupling_validation():
    with pytest.raises(ConfigError):
        eos.solve_yang_yang(1.0, 0.0, -1.0)
    with pytest.raises(ConfigError):
        eos.solve_yang_yang(1.0, 0.0, 0.0)


def test_hard_core_route_matches_quadrature():
    # C = inf drops the dressing: P is the free-fermion pressure integral
    sol = eos.solve_yang_yang(1.0, 0.5, math.inf)
    ref, _ = quad(lambda k: np.logaddexp(0.0, 0.5 - k * k), -40.0, 40.0, limit=400)
    ref /= 2.0 * math.pi
    assert sol.pressure == pytest.approx(ref, rel=1e-12)
    assert sol.residual == 0.0


def test_large_coupling_converges_to_hard_core():
    s_inf = eos.solve_yang_yang(1.0, 0.5, math.inf)
    s_num = eos.solve_yang_yang(1.0, 0.5, 1e6)
    assert s_num.pressure == pytest.approx(s_inf.pressure, rel=1e-5)


def test_degenerate_point_needs_newton_and_converges():
    sol = eos.solve_yang_yang(1.0, 0.0, 1.0)
    assert sol.residual < 1e-10
    assert sol.pressure > 0
    f = sol.filling
    assert np.all((f >= 0) & (f <= 1))
    assert f.max() > 0.5  # genuinely degenerate, not a dilute freebie


def test_dressed_energy_even_and_increasing_outward():
    sol = eos.solve_yang_yang(0.5, 0.2, 2.0)
    e = sol.epsilon
    assert np.allclose(e, e[::-1], atol=1e-9)
    mid = e.size // 2
    assert e[-1] > e[mid]  # free quadratic growth wins at the edge


def test_solution_sheet_terminates_past_degenerate_edge():
    # the dressing kernel carries net weight 2 hbar: deep in the degenerate
    # regime the self-consistent sheet collapses and the solve must say so
    with pytest.raises(eos.EosConvergenceError):
        eos.solve_yang_yang(1.0, 3.0, 1.0)


def test_density_positive_and_monotone_in_mu():
    d = [eos.density(1.0, m, 1.0) for m in (-2.0, -1.0, 0.0)]
    assert all(x > 0 for x in d)
    assert d[0] < d[1] < d[2]


def test_first_cluster_integral_is_gaussian():
    co = eos.fugacity_coefficients(1.0, 1.0)
    assert co["b1"] == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert co["b1_tabulated"] == pytest.approx(2.0 * math.pi, rel=1e-12)
    co2 = eos.fugacity_coefficients(4.0, 1.0, hbar=0.5)
    assert co2["b1"] == pytest.approx(math.sqrt(math.pi / 4.0) / 0.5, rel=1e-12)


def test_second_cluster_integral_reaches_free_fermion_limit():
    exact = -0.5 * math.sqrt(math.pi / 2.0)
    assert eos.fugacity_coefficients(1.0, math.inf)["b2"] == pytest.approx(exact, rel=1e-12)
    assert eos.fugacity_coefficients(1.0, 1e8)["b2"] == pytest.approx(exact, rel=1e-6)
    # moderate repulsion keeps the bosonic (positive) sign
    assert eos.fugacity_coefficients(1.0, 1.0)["b2"] > 0


def test_a2_readings_disagree_but_share_scale():
    # the two published forms of the pair cluster differ in which argument
    # the Gaussian carries; both peak at k = 0 with opposite signs there
    k = np.array([0.0])
    aq = eos.a2_profile(k, 1.0, 1.0, reading="q")[0]
    ak = eos.a2_profile(k, 1.0, 1.0, reading="k")[0]
    assert ak == pytest.approx(-2.0, rel=1e-12)
    assert aq > 0
    with pytest.raises(ConfigError):
        eos.a2_profile(k, 1.0, 1.0, reading="x")


def test_virial_ratio_coherent_at_low_density():
    out = eos.virial_ratio(1.0, 1.0, 0.05)
    assert 0.9 < out["full"] < 1.0  # repulsive quantum gas below classical
    assert out["expansion"] == pytest.approx(out["full"], abs=0.02)
    # the tabulated shorthand uses the 2 pi normalization and lands elsewhere
    assert abs(out["tabulated"] - out["expansion"]) > 0.01
    assert out["pressure"] > 0 and out["z"] > 0
    with pytest.raises(ConfigError):
        eos.virial_ratio(1.0, 1.0, -0.1)


def test_default_grid_tracks_coupling_resolution():
    km1, n1 = eos.default_grid(1.0, 0.0, 1.0, 1.0)
    km2, n2 = eos.default_grid(1.0, 0.0, 0.05, 1.0)
    assert km1 == km2  # window set by temperature, not coupling
    assert n2 > n1  # narrow Lorentzian needs the finer mesh
