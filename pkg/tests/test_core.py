import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualgas.core import (
    MASS,
    TG_COUPLING,
    Adiabatic,
    Box,
    ConfigError,
    ContactCoordinateError,
    DimensionlessCoupling,
    LinearRamp,
    ModelSpec,
    Ring,
    SuddenCoupling,
    SuddenWall,
    alpha_of,
    duality_sign,
    exchange_sign_grid,
)


def test_mass_convention():
    assert MASS == 0.5
    assert math.isinf(TG_COUPLING)


def test_model_validation():
    with pytest.raises(ConfigError):
        ModelSpec(0, Ring(1.0), 1.0)
    with pytest.raises(ConfigError):
        ModelSpec(2, Ring(1.0), -1.0)
    with pytest.raises(ConfigError):
        ModelSpec(2, Ring(1.0), 1.0, hbar=0.0)
    with pytest.raises(ConfigError):
        Ring(-2.0)
    m = ModelSpec(2, Box(3.0), TG_COUPLING)
    assert m.is_hard_core and m.length == 3.0


def test_alpha_round_trip():
    m = ModelSpec(2, Ring(1.0), 10.0, hbar=1.0)
    assert alpha_of(m) == pytest.approx(5.0)
    c = DimensionlessCoupling(5.0).coupling(1.0, 1.0)
    assert alpha_of(ModelSpec(2, Ring(1.0), c)) == pytest.approx(5.0)


@given(st.floats(0.1, 50.0), st.floats(0.1, 5.0), st.floats(0.05, 3.0))
def test_alpha_scaling(alpha, lam, hbar):
    # alpha is the only invariant: C scales like hbar^2 / lam.
    c = DimensionlessCoupling(alpha).coupling(lam, hbar)
    assert alpha_of(ModelSpec(3, Ring(lam), c, hbar=hbar)) == pytest.approx(alpha)


def test_protocol_validation():
    with pytest.raises(ConfigError):
        Adiabatic(1.0, -2.0)
    with pytest.raises(ConfigError):
        SuddenWall(2.0, 1.0)  # compression has no embedding
    with pytest.raises(ConfigError):
        SuddenCoupling(-1.0, 2.0)
    with pytest.raises(ConfigError):
        LinearRamp(1.0, 5.0, -1.0)
    ramp = LinearRamp(1.0, 5.0, 1.0)
    assert ramp.lambda_final == pytest.approx(6.0)
    assert ramp.width_at(0.5) == pytest.approx(3.5)


@given(st.permutations(list(range(5))))
def test_duality_sign_matches_permutation_parity(perm):
    base = np.linspace(0.1, 0.9, 5)
    x = base[list(perm)]
    inversions = sum(
        1 for i, j in itertools.combinations(range(5), 2) if perm[i] > perm[j]
    )
    assert duality_sign(x) == (-1.0) ** inversions


@given(
    st.lists(st.floats(-5, 5), min_size=2, max_size=6, unique=True),
    st.integers(0, 5),
    st.integers(0, 5),
)
def test_duality_sign_transposition_flips(xs, i, j):
    x = np.array(xs)
    i, j = i % len(x), j % len(x)
    if i == j:
        return
    y = x.copy()
    y[[i, j]] = y[[j, i]]
    assert duality_sign(x) == -duality_sign(y)


def test_duality_sign_rejects_contact():
    with pytest.raises(ContactCoordinateError):
        duality_sign(np.array([0.3, 0.3, 0.7]))


def test_exchange_sign_grid_convention():
    x = np.array([0.0, 0.5, 1.0])
    s = exchange_sign_grid(x[:, None], x[None, :])
    assert s.shape == (3, 3)
    # sign(0) = +1 keeps the diagonal bosonic so |psi_F| = |psi_B| pointwise
    assert np.all(np.diag(s) == 1.0)
    assert s[0, 2] == 1.0 and s[2, 0] == -1.0
    assert np.all((s == 1.0) | (s == -1.0))
    # off-diagonal antisymmetry
    off = ~np.eye(3, dtype=bool)
    assert np.all(s[off] == -s.T[off])
