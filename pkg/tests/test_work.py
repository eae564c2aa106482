import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dualgas import ringspec as rs
from dualgas import work as wk
from dualgas.core import (
    Adiabatic,
    Box,
    ConfigError,
    LinearRamp,
    ModelSpec,
    Ring,
    SuddenCoupling,
    SuddenWall,
)

finite = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)
masses = st.floats(1e-6, 1.0)


def jarzynski_residual(d: wk.WorkDistribution) -> float:
    dF = d.metadata["ln_z_initial"] - d.metadata["ln_z_final"]
    return abs(d.jarzynski_average() / math.exp(-dF) - 1.0)


# ---------------------------------------------------------------------------
# atom bookkeeping
# ---------------------------------------------------------------------------


@given(st.lists(st.tuples(finite, masses), min_size=1, max_size=40))
def test_merge_atoms_conserves_mass_and_sorts(atoms):
    w = np.array([a[0] for a in atoms])
    p = np.array([a[1] for a in atoms])
    mw, mp = wk.merge_atoms(w, p, tol=1e-6)
    assert mp.sum() == pytest.approx(p.sum(), rel=1e-12)
    assert np.all(np.diff(mw) > 1e-6)  # merged atoms are separated
    # merging again changes nothing
    mw2, mp2 = wk.merge_atoms(mw, mp, tol=1e-6)
    assert np.array_equal(mw, mw2) and np.array_equal(mp, mp2)


def test_merge_atoms_carries_log_probabilities():
    w = np.array([0.0, 1e-12, 1.0])
    p = np.array([0.25, 0.25, 0.5])
    mw, mp, mlp = wk.merge_atoms(w, p, 1e-9, log_probabilities=np.log(p))
    assert mw.size == 2
    assert mlp == pytest.approx(np.log(mp), abs=1e-12)


def test_distribution_validation_and_mass():
    with pytest.raises(ConfigError):
        wk.WorkDistribution(works=[0.0, 1.0], probabilities=[1.0], beta=1.0)
    d = wk.WorkDistribution(works=[0.0, 1.0], probabilities=[0.25, 0.75], beta=1.0)
    assert d.mass == pytest.approx(1.0)
    assert d.mean() == pytest.approx(0.75)
    m1, m2 = d.moments(2)
    assert (m1, m2) == (pytest.approx(0.75), pytest.approx(0.75))
    # characteristic function: phi(0) = 1, |phi| <= 1
    phi = d.characteristic_function([0.0, 0.7, 3.1])
    assert phi[0] == pytest.approx(1.0)
    assert np.all(np.abs(phi) <= 1.0 + 1e-12)


@given(
    st.lists(st.tuples(st.integers(-20, 20), masses), min_size=1, max_size=15),
    st.floats(-0.02, 0.02),
)
def test_kolmogorov_resolution_absorbs_jitter(atoms, shift):
    # atoms on an integer lattice, the copy shifted by < resolution/2
    w = np.array([float(a[0]) for a in atoms])
    p = np.array([a[1] for a in atoms])
    p = p / p.sum()
    a = wk.WorkDistribution(works=w, probabilities=p, beta=1.0)
    b = wk.WorkDistribution(works=w + shift, probabilities=p, beta=1.0)
    assert wk.kolmogorov_distance(a, a) <= 1e-12  # cumsum cancellation noise
    assert wk.kolmogorov_distance(a, b, resolution=0.1) == pytest.approx(0.0, abs=1e-12)


def test_kolmogorov_known_value():
    a = wk.WorkDistribution(works=[0.0], probabilities=[1.0], beta=1.0)
    b = wk.WorkDistribution(works=[1.0], probabilities=[1.0], beta=1.0)
    assert wk.kolmogorov_distance(a, b) == pytest.approx(1.0)
    c = wk.WorkDistribution(works=[0.0, 1.0], probabilities=[0.5, 0.5], beta=1.0)
    assert wk.kolmogorov_distance(a, c) == pytest.approx(0.5)


def test_box_tail_bound_positive_and_decreasing():
    vals = [wk.box_tail_bound(1.0, c, 0.01) for c in (5, 10, 15)]
    assert all(v > 0 for v in vals)
    assert vals[0] > vals[1] > vals[2]


# ---------------------------------------------------------------------------
# fluctuation relations per protocol
# ---------------------------------------------------------------------------


def test_jarzynski_exact_for_adiabatic_box():
    d = wk.adiabatic_box_distribution(1.0, 2.0, 1.0, 1.0, 14)
    assert jarzynski_residual(d) < 1e-12
    assert d.tail_mass < 1e-15


def test_jarzynski_exact_for_sudden_coupling():
    d = wk.sudden_coupling_distribution(1.0, 1.0, 5.0, 0.5, 14)
    assert jarzynski_residual(d) < 1e-10
    assert d.metadata["unitarity_defect"] < 1e-10


def test_jarzynski_exact_for_ramp():
    d = wk.ramp_distribution(LinearRamp(1.0, 1.0, 0.5), 1.0, 1.0, 10)
    assert jarzynski_residual(d) < 1e-10
    assert d.metadata["norm_drift"] < 1e-6


def test_ramp_reuses_external_propagation():
    res = wk.propagate_ramp(LinearRamp(1.0, 1.0, 0.5), 1.0, 10)
    d1 = wk.ramp_distribution(LinearRamp(1.0, 1.0, 0.5), 1.0, 2.0, 10, result=res)
    d2 = wk.ramp_distribution(LinearRamp(1.0, 1.0, 0.5), 1.0, 0.5, 10, result=res)
    assert d1.beta == 2.0 and d2.beta == 0.5
    assert np.array_equal(d1.works, d2.works)
    assert jarzynski_residual(d1) < 1e-10


def test_sudden_wall_violates_jarzynski():
    # embedded states are not in the final domain: the missing UV weight
    # shows up as sum_f P(f|i) < 1 and pulls <exp(-beta W)> below exp(-b dF)
    d = wk.sudden_wall_distribution(1.0, 2.0, 1.0, 1.0, 12)
    dF = d.metadata["ln_z_initial"] - d.metadata["ln_z_final"]
    assert d.jarzynski_average() / math.exp(-dF) < 0.9
    assert d.metadata["transition_deficit"] > 0.05


def test_sudden_wall_violation_persists_in_hard_core_route():
    # same effect in the exact determinant route: not a Galerkin artifact
    d = wk.tg_sudden_wall_distribution(1.0, 2.0, 1.0, 20, 40)
    dF = d.metadata["ln_z_initial"] - d.metadata["ln_z_final"]
    assert d.jarzynski_average() / math.exp(-dF) < 0.5
    assert d.metadata["transition_deficit"] > 0.05


def test_tg_adiabatic_jarzynski_exact():
    d = wk.tg_adiabatic_box_distribution(1.0, 2.0, 0.2, 30)
    assert jarzynski_residual(d) < 1e-12
    assert np.all(d.works < 0)  # expansion lowers every level


# ---------------------------------------------------------------------------
# mean-work identities
# ---------------------------------------------------------------------------


def test_sudden_wall_mean_work_identity_is_zero():
    out = wk.sudden_wall_mean_work(1.0, 2.0, 1.0, 1.0, 12, cutoff_f=24)
    assert abs(out["identity"]) < 1e-12
    # the truncated atom sum is far from zero: slow algebraic completeness
    assert out["atom_sum"] < -0.1


def test_sudden_coupling_mean_work_matches_distribution():
    out = wk.sudden_coupling_mean_work(1.0, 1.0, 5.0, 0.5, 14)
    d = wk.sudden_coupling_distribution(1.0, 1.0, 5.0, 0.5, 14)
    assert out["identity"] == pytest.approx(d.mean(), rel=1e-12)
    assert out["thermal_contact"] > 0


def test_ndp_reference_matches_equipartition():
    # beta -> 0: ring level sums are Gaussian integrals to machine accuracy
    d = wk.ndp_reference(1.0, 2.0, 1e-3, 2)
    assert d.mean() == pytest.approx(wk.equipartition_mean_work(1.0, 2.0, 2, 1e-3), rel=1e-12)
    d3 = wk.ndp_reference(1.0, 2.0, 1e-3, 3)
    assert d3.mean() == pytest.approx(wk.equipartition_mean_work(1.0, 2.0, 3, 1e-3), rel=1e-12)


def test_ndp_exchange_variants():
    db = wk.ndp_reference(1.0, 2.0, 0.5, 2, statistics="boson")
    df = wk.ndp_reference(1.0, 2.0, 0.5, 2, statistics="fermion")
    assert db.mass == pytest.approx(1.0, abs=1e-12)
    assert df.mass == pytest.approx(1.0, abs=1e-12)
    # exchange attraction lowers |W| for bosons relative to fermions
    assert abs(db.mean()) < abs(df.mean())
    with pytest.raises(ConfigError):
        wk.ndp_reference(1.0, 2.0, 0.5, 3, statistics="boson")
    with pytest.raises(ConfigError):
        wk.ndp_reference(1.0, 2.0, 0.5, 2, statistics="anyon")


def test_free_momentum_work_scaling():
    def rel_err(base):
        I = np.array([base + 0.5, base + 20.5])
        ki = rs.solve_bethe(I, 1.0, 1.0).rapidities
        kf = rs.solve_bethe(I, 2.0, 1.0).rapidities
        exact = (kf**2).sum() - (ki**2).sum()
        return abs(wk.free_momentum_work(I, 1.0, 2.0) - exact) / abs(exact)

    e100, e300 = rel_err(100), rel_err(300)
    assert e100 < 1e-3
    assert e300 < 0.4 * e100  # error falls off with the base quantum number


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------


def test_dispatcher_routes_and_rejections():
    ring = ModelSpec(2, Ring(1.0), 1.0)
    d = wk.tpm_distribution(ring, Adiabatic(1.0, 2.0), 1.0, i_max=3.5)
    assert d.metadata["route"] == "bethe-adiabatic"
    with pytest.raises(ConfigError):
        wk.tpm_distribution(ring, LinearRamp(1.0, 1.0, 1.0), 1.0)

    box = ModelSpec(2, Box(1.0), 1.0)
    assert (
        wk.tpm_distribution(box, SuddenCoupling(1.0, 2.0), 1.0, cutoff=8).metadata["route"]
        == "galerkin-sudden-coupling"
    )
    hard = ModelSpec(2, Box(1.0), math.inf)
    assert (
        wk.tpm_distribution(hard, Adiabatic(1.0, 2.0), 1.0, cutoff=10).metadata["route"]
        == "hardcore-adiabatic"
    )
    assert (
        wk.tpm_distribution(hard, SuddenWall(1.0, 2.0), 1.0, cutoff_i=10, cutoff_f=20).metadata["route"]
        == "hardcore-sudden-wall"
    )
    with pytest.raises(ConfigError):
        wk.tpm_distribution(ModelSpec(3, Box(1.0), 1.0), Adiabatic(1.0, 2.0), 1.0, cutoff=8)


def test_log_probabilities_reach_below_underflow():
    # deep atoms keep finite log p even when exp(log p) underflows
    d = wk.adiabatic_ring_distribution(1.0, 2.0, 1.0, 2, 50.0, 6.5)
    assert d.log_probabilities is not None
    assert np.all(np.isfinite(d.log_probabilities))
    assert (d.probabilities == 0.0).any()  # linear weights underflow
    assert jarzynski_residual(d) < 1e-10
