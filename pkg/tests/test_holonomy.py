import math

import numpy as np
import pytest
from scipy.optimize import brentq

from uhlmann_thermal import (
    BCS,
    SSH,
    Creutz,
    DegeneratePhase,
    GapClosed,
    Kitaev,
    MomentumGrid,
    UnsupportedModel,
    holonomy_angle,
    holonomy_oracle,
    uhlmann_holonomy,
    uhlmann_phase,
    winding_number,
)
from uhlmann_thermal.holonomy import holonomy_unitary, operator_distance, sech
from uhlmann_thermal.spectra import bloch_path

GRID = MomentumGrid(501)


def test_sech_is_overflow_free():
    assert sech(0.0) == 1.0
    assert sech(1e4) == 0.0
    assert sech(2.0) == pytest.approx(1 / math.cosh(2.0), rel=1e-15)


def test_high_temperature_angle_vanishes():
    assert abs(holonomy_angle(Creutz(M=0.5), 1e6, GRID)) < 1e-6


def test_zero_temperature_angle_counts_winding():
    theta = holonomy_angle(Creutz(M=0.5), 0.0, GRID)
    assert abs(abs(theta) - 2 * math.pi) < 1e-9


@pytest.mark.parametrize("T", [0.0, 1e-4, 0.01, 1e5])
def test_trivial_phase_angle_vanishes_in_limits(T):
    assert abs(holonomy_angle(Creutz(M=1.5), T, GRID)) < 1e-6


@pytest.mark.parametrize("T", [0.5, 2.0])
def test_trivial_phase_angle_at_intermediate_temperature(T):
    # phi' changes sign along the zone in the trivial phase, but the thermal weight does not
    # cancel those contributions, so theta is finite between the two limits; the discrete
    # transport agrees with that value
    model = Creutz(M=1.5)
    theta = holonomy_angle(model, T, GRID)
    assert abs(theta) > 0.1
    assert operator_distance(holonomy_oracle(model, T, MomentumGrid(1601)), holonomy_unitary(theta)) < 1e-5


def test_trivial_phase_has_zero_uhlmann_phase_at_all_temperatures():
    temps = np.geomspace(1e-3, 1e2, 60)
    assert all(uhlmann_phase(Creutz(M=1.5), T, GRID) == 0.0 for T in temps)


def test_unitary_and_real_trace():
    res = uhlmann_holonomy(Creutz(M=0.5), 0.4, GRID)
    assert np.allclose(res.U @ res.U.conj().T, np.eye(2), atol=1e-12)
    assert min(abs(res.phase), abs(res.phase - math.pi)) < 1e-9


def test_phase_below_and_above_step():
    model = Creutz(M=0.5)
    assert uhlmann_phase(model, 0.1, GRID) == pytest.approx(math.pi, abs=1e-9)
    assert uhlmann_phase(model, 1.5, GRID) == pytest.approx(0.0, abs=1e-9)


def test_phase_vanishes_with_angle():
    assert uhlmann_phase(Creutz(M=1.5), 0.3, GRID) == pytest.approx(0.0, abs=1e-12)


def test_berry_phase_at_zero_temperature():
    assert uhlmann_phase(Creutz(M=0.5), 0.0, GRID) == pytest.approx(math.pi, abs=1e-12)


def test_phase_undefined_at_step():
    model = Creutz(M=0.5)
    T_U = brentq(lambda T: holonomy_angle(model, T, GRID) - math.pi, 0.3, 1.5, xtol=1e-15)
    with pytest.raises(DegeneratePhase):
        uhlmann_phase(model, T_U, GRID)


@pytest.mark.parametrize("M", [0.2, 0.5, 0.8])
def test_phase_steps_at_most_once(M):
    temps = np.linspace(0.01, 3.0, 150)
    phases = np.array([uhlmann_phase(Creutz(M=M), T, GRID) for T in temps])
    on_grid = np.minimum(np.abs(phases), np.abs(phases - math.pi))
    assert np.all(on_grid < 1e-9)
    assert np.count_nonzero(np.diff(np.round(phases / math.pi))) <= 1


def _step_bound(model, T_min):
    """max |d theta / dT| for T >= T_min from |d sech(E/2T)/dT| <= max_x(x sech x tanh x) / T."""
    x = np.linspace(0, 20, 200001)
    peak = np.max(x * sech(x) * np.tanh(x))
    path = bloch_path(model, MomentumGrid(4001))
    dphi = np.abs(np.diff(np.append(path.phi, path.phi[0] + path.total_increment)))
    return 1.01 * peak / T_min * np.sum(dphi)


@pytest.mark.parametrize("model", [Creutz(M=0.5), SSH(v=0.4), Kitaev(mu=0.6)], ids=repr)
def test_angle_is_smooth_in_temperature(model):
    dT = 0.005
    temps = np.arange(0.01, 2.0 + dT / 2, dT)
    theta = np.array([holonomy_angle(model, T, GRID) for T in temps])
    assert np.max(np.abs(np.diff(theta))) < _step_bound(model, temps[0]) * dT


@pytest.mark.parametrize(
    "model", [Creutz(M=0.3), Creutz(M=0.7), Creutz(M=1.5), SSH(v=0.5), SSH(v=2.0), Kitaev(mu=0.5), Kitaev(mu=1.5)], ids=repr
)
def test_berry_limit(model):
    nu = winding_number(model, GRID)
    assert abs(holonomy_angle(model, 1e-4, GRID) - 2 * math.pi * nu) < 1e-4


def test_oracle_identity_for_constant_bloch_vector():
    hol = holonomy_oracle(SSH(v=0.5, w=0.0), 0.3, GRID)
    assert operator_distance(hol, np.eye(2)) < 1e-12


def test_oracle_identity_at_high_temperature():
    hol = holonomy_oracle(Creutz(M=0.5), 1e4, GRID)
    assert operator_distance(hol, np.eye(2)) < 1e-6


def test_oracle_converges_to_closed_form():
    model, T = Creutz(M=0.5), 0.5
    target = holonomy_unitary(holonomy_angle(model, T, GRID))
    dist = [operator_distance(holonomy_oracle(model, T, MomentumGrid(n)), target) for n in (101, 401, 1601)]
    assert dist[0] > dist[1] > dist[2]
    assert dist[2] < 1e-3


@pytest.mark.parametrize("model", [SSH(v=0.7), Kitaev(mu=0.3)], ids=repr)
def test_oracle_matches_closed_form_other_models(model):
    target = holonomy_unitary(holonomy_angle(model, 0.4, GRID))
    assert operator_distance(holonomy_oracle(model, 0.4, MomentumGrid(1601)), target) < 1e-3


def test_oracle_is_unitary():
    hol = holonomy_oracle(Kitaev(mu=0.5), 0.2, GRID)
    assert np.allclose(hol @ hol.conj().T, np.eye(2), atol=1e-12)


def test_errors():
    with pytest.raises(UnsupportedModel):
        holonomy_angle(BCS(), 0.1, GRID)
    with pytest.raises(GapClosed):
        holonomy_angle(Creutz(M=1.0), 0.1, GRID)
    with pytest.raises(ValueError):
        holonomy_angle(Creutz(), -1.0, GRID)
    with pytest.raises(ValueError):
        holonomy_oracle(Creutz(), 0.0, GRID)
