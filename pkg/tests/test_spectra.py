import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uhlmann_thermal import BCS, SSH, Creutz, GapClosed, Kitaev, MomentumGrid, NonFiniteInput, UnsupportedModel
from uhlmann_thermal import UnwrapFailure, bloch_state, winding_number
from uhlmann_thermal.models import with_temperature
from uhlmann_thermal.spectra import (
    bloch_path,
    chiral_basis,
    chiral_operator,
    momentum_spectrum,
    periodic_chain_spectrum,
)

LATTICE = [Creutz(M=0.5), Creutz(M=1.5), SSH(v=0.5, w=1.0), SSH(v=1.3, w=0.4), Kitaev(mu=0.5), Kitaev(mu=1.5)]

finite_k = st.floats(-math.pi, math.pi)


@pytest.mark.parametrize("model", LATTICE, ids=repr)
@pytest.mark.parametrize("N", [8, 50, 100])
def test_periodic_chain_matches_momentum_eigenvalues(model, N):
    chain = periodic_chain_spectrum(model, N)
    bloch = momentum_spectrum(model, N)
    assert np.max(np.abs(chain - bloch)) < 1e-9


def test_creutz_gap_closes_at_zone_boundary():
    assert bloch_state(Creutz(M=1.0), math.pi).E == pytest.approx(0.0, abs=1e-14)


def test_ssh_gap_closes_at_zone_boundary():
    assert bloch_state(SSH(v=1.0, w=1.0), math.pi).E == pytest.approx(0.0, abs=1e-14)


def test_gap_minimum_sits_at_zone_boundary():
    k = np.linspace(-math.pi, math.pi, 2001)
    for model in (Creutz(M=1.0), SSH(v=1.0, w=1.0)):
        E = [bloch_state(model, x).E for x in k]
        assert abs(abs(k[int(np.argmin(E))]) - math.pi) < 1e-12


@given(k=finite_k, M=st.floats(0.0, 3.0), K=st.floats(0.1, 2.0))
def test_creutz_bloch_vector_is_unit_and_equatorial(k, M, K):
    state = bloch_state(Creutz(M=M, K=K), k)
    if state.E > 1e-12:
        assert abs(np.linalg.norm(state.n) - 1) < 1e-12
    assert abs(state.n[2]) < 1e-12


@given(k=finite_k, v=st.floats(-2, 2), w=st.floats(-2, 2))
def test_ssh_bloch_vector_is_unit_and_equatorial(k, v, w):
    state = bloch_state(SSH(v=v, w=w), k)
    if state.E > 1e-12:
        assert abs(np.linalg.norm(state.n) - 1) < 1e-12
    assert abs(state.n[2]) < 1e-12


@given(k=finite_k, mu=st.floats(-3, 3), t=st.floats(0.1, 2), delta=st.floats(0.1, 2))
def test_kitaev_bloch_vector_is_unit_and_equatorial(k, mu, t, delta):
    state = bloch_state(Kitaev(mu=mu, t=t, delta=delta), k)
    if state.E > 1e-12:
        assert abs(np.linalg.norm(state.n) - 1) < 1e-12
    assert abs(state.n[2]) < 1e-12


@pytest.mark.parametrize("model", LATTICE[:1] + LATTICE[2:3] + LATTICE[4:5], ids=repr)
def test_chiral_basis_diagonalizes_chiral_operator(model):
    W = chiral_basis(model)
    assert np.allclose(W.conj().T @ W, np.eye(2), atol=1e-14)
    assert np.allclose(W.conj().T @ chiral_operator(model) @ W, np.diag([1, -1]), atol=1e-14)


def test_phi_is_polar_angle():
    state = bloch_state(SSH(v=0.3, w=1.0), 0.7)
    assert state.phi == pytest.approx(math.atan2(state.n[1], state.n[0]))


def test_winding_examples():
    grid = MomentumGrid(501)
    assert abs(winding_number(Creutz(M=0.5), grid)) == 1
    assert winding_number(Creutz(M=1.5), grid) == 0
    assert winding_number(Kitaev(mu=1.5), grid) == 0
    assert abs(winding_number(Kitaev(mu=0.5), grid)) == 1
    assert abs(winding_number(SSH(v=0.5, w=1.0), grid)) == 1
    assert winding_number(SSH(v=1.5, w=1.0), grid) == 0


@pytest.mark.parametrize("model", LATTICE, ids=repr)
def test_winding_is_grid_independent(model):
    values = {winding_number(model, MomentumGrid(n)) for n in (101, 501, 1001)}
    assert len(values) == 1


def test_winding_changes_across_transition():
    grid = MomentumGrid(501)
    below = winding_number(Creutz(M=0.99), grid)
    above = winding_number(Creutz(M=1.01), grid)
    assert below != above


def test_winding_rejects_closed_gap():
    with pytest.raises(GapClosed):
        winding_number(Creutz(M=1.0), MomentumGrid(501))


def test_winding_rejects_coarse_grid():
    with pytest.raises(UnwrapFailure):
        winding_number(SSH(v=0.1, w=1.0), MomentumGrid(3))


def test_unwrapped_angle_is_continuous():
    path = bloch_path(Creutz(M=0.5), MomentumGrid(501))
    assert np.max(np.abs(np.diff(path.phi))) < math.pi / 2
    assert abs(path.total_increment) == pytest.approx(2 * math.pi, abs=1e-9)


def test_ssh_critical_chain_has_zero_mode():
    spectrum = periodic_chain_spectrum(SSH(v=1.0, w=1.0), 50)
    assert np.min(np.abs(spectrum)) < 1e-9


def test_kitaev_periodic_spectrum_is_particle_hole_symmetric():
    spectrum = periodic_chain_spectrum(Kitaev(mu=0.7), 60)
    assert np.max(np.abs(spectrum + spectrum[::-1])) < 1e-10


def test_bcs_has_no_bloch_state():
    with pytest.raises(UnsupportedModel):
        bloch_state(BCS(), 0.0)


def test_non_finite_momentum_rejected():
    with pytest.raises(NonFiniteInput):
        bloch_state(Creutz(), float("nan"))


def test_creutz_flux_without_chiral_symmetry_rejected():
    with pytest.raises(UnsupportedModel):
        bloch_state(Creutz(phi_flux=0.3), 0.4)


@pytest.mark.parametrize(
    "make",
    [lambda: Creutz(M=float("inf")), lambda: SSH(v=float("nan")), lambda: Kitaev(T=-1.0)],
)
def test_invalid_parameters_rejected(make):
    with pytest.raises(ValueError):
        make()


@pytest.mark.parametrize("kwargs", [{"omega_D": 0.0}, {"N0": -1.0}, {"V": -0.1}])
def test_invalid_bcs_parameters_rejected(kwargs):
    with pytest.raises(ValueError):
        BCS(**kwargs)


def test_momentum_grid_is_uniform_and_half_open():
    grid = MomentumGrid(11)
    assert grid.points[0] == -math.pi
    assert grid.points[-1] < math.pi
    assert np.allclose(np.diff(grid.points), grid.spacing)
    with pytest.raises(ValueError):
        MomentumGrid(2)


def test_temperature_does_not_change_bloch_data():
    model = Creutz(M=0.7)
    assert bloch_state(model, 0.3).E == bloch_state(with_temperature(model, 5.0), 0.3).E
