"""Momentum-space two-level decomposition H(k) = E(k) n(k).sigma / 2.

Conventions (checked against the periodic real-space chains by
:func:`periodic_chain_spectrum`):

* Creutz ladder, basis (a_k, b_k)::

      H(k) = -2K cos(k+phi) |a><a| - 2K cos(k-phi) |b><b| - (2K cos k + M) sigma_x

  chiral operator sigma_y (only when cos(phi_flux) = 0).
* SSH, basis (A_k, B_k): ``H_AB(k) = v + w exp(-ik)``; chiral operator sigma_z.
* Kitaev, Nambu basis (c_k, c^dag_-k)::

      H(k) = (-2t cos k - mu) sigma_z - 2 delta sin k sigma_y

  chiral operator sigma_x.

All Bloch vectors are returned in the chiral basis, where the chiral
operator is sigma_z and n(k) lies on the equator of the Bloch sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import GapClosed, NonFiniteInput, UnsupportedModel, UnwrapFailure
from .models import SSH, ChiralModel, Creutz, Kitaev, MomentumGrid, ModelParams, require_chiral

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

GAP_TOL = 1e-8
# |identity component| allowed before H(k) is declared non-chiral
_TRACE_TOL = 1e-12


@dataclass(frozen=True)
class BlochState:
    E: float
    n: np.ndarray
    phi: float


@dataclass(frozen=True)
class BlochPath:
    """Bloch data sampled along a closed momentum loop, angle unwrapped."""

    k: np.ndarray
    E: np.ndarray
    n: np.ndarray
    phi: np.ndarray
    # phi increment of the closing step from the last grid point back to -pi
    closing_step: float

    @property
    def total_increment(self) -> float:
        return float(self.phi[-1] - self.phi[0] + self.closing_step)


def bloch_hamiltonian(model: ModelParams, k) -> np.ndarray:
    """H(k) in the orbital (or Nambu) basis; shape ``k.shape + (2, 2)``."""
    require_chiral(model)
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise NonFiniteInput("momentum must be finite")
    H = np.zeros(k.shape + (2, 2), dtype=complex)
    if isinstance(model, Creutz):
        K, M, phi = model.K, model.M, model.phi_flux
        H[..., 0, 0] = -2 * K * np.cos(k + phi)
        H[..., 1, 1] = -2 * K * np.cos(k - phi)
        H[..., 0, 1] = H[..., 1, 0] = -(2 * K * np.cos(k) + M)
    elif isinstance(model, SSH):
        off = model.v + model.w * np.exp(-1j * k)
        H[..., 0, 1] = off
        H[..., 1, 0] = np.conj(off)
    elif isinstance(model, Kitaev):
        xi = -2 * model.t * np.cos(k) - model.mu
        pair = 2j * model.delta * np.sin(k)
        H[..., 0, 0] = xi
        H[..., 1, 1] = -xi
        H[..., 0, 1] = pair
        H[..., 1, 0] = np.conj(pair)
    return H


def chiral_operator(model: ModelParams) -> np.ndarray:
    require_chiral(model)
    if isinstance(model, Creutz):
        return SIGMA_Y
    if isinstance(model, SSH):
        return SIGMA_Z
    return SIGMA_X


@lru_cache(maxsize=None)
def _chiral_unitary(key: str) -> np.ndarray:
    gamma = {"creutz": SIGMA_Y, "ssh": SIGMA_Z, "kitaev": SIGMA_X}[key]
    vals, vecs = np.linalg.eigh(gamma)
    # +1 eigenvector first so that W^dag Gamma W = sigma_z
    W = vecs[:, ::-1].copy()
    W.setflags(write=False)
    return W


def chiral_basis(model: ModelParams) -> np.ndarray:
    """Unitary W with ``W^dag Gamma W = sigma_z`` for the model's chiral operator Gamma."""
    require_chiral(model)
    return _chiral_unitary(type(model).__name__.lower())


def pauli_components(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split 2x2 Hermitian matrices into (d0, d) with H = d0 + d.sigma."""
    d0 = 0.5 * (H[..., 0, 0] + H[..., 1, 1]).real
    d = np.stack(
        [H[..., 0, 1].real, -H[..., 0, 1].imag, 0.5 * (H[..., 0, 0] - H[..., 1, 1]).real],
        axis=-1,
    )
    return d0, d


def _bloch_arrays(model: ChiralModel, k) -> tuple[np.ndarray, np.ndarray]:
    H = bloch_hamiltonian(model, k)
    W = chiral_basis(model)
    Hc = W.conj().T @ H @ W
    d0, d = pauli_components(Hc)
    scale = max(model.energy_scale, 1.0)
    if np.any(np.abs(d0) > _TRACE_TOL * scale):
        raise UnsupportedModel(
            "H(k) has an identity component (Creutz flux with cos(phi_flux) != 0 breaks chiral symmetry)"
        )
    half_E = np.linalg.norm(d, axis=-1)
    E = 2 * half_E
    n = np.empty_like(d)
    gapped = half_E > 0
    n[gapped] = d[gapped] / half_E[gapped, None]
    # direction is arbitrary where the gap closes exactly; any equatorial choice works
    n[~gapped] = (1.0, 0.0, 0.0)
    # the chiral-axis component is zero analytically; drop rounding residue
    n[..., 2] = np.where(np.abs(n[..., 2]) < 1e-13, 0.0, n[..., 2])
    return E, n


def bloch_state(model: ModelParams, k: float) -> BlochState:
    if not np.isfinite(k):
        raise NonFiniteInput(f"momentum must be finite, got {k}")
    E, n = _bloch_arrays(model, np.asarray(k, dtype=float))
    return BlochState(E=float(E), n=n, phi=float(np.arctan2(n[1], n[0])))


def _unwrap(phi_raw: np.ndarray) -> tuple[np.ndarray, float]:
    steps = np.diff(np.append(phi_raw, phi_raw[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    worst = np.max(np.abs(steps))
    if worst > np.pi / 2:
        i = int(np.argmax(np.abs(steps)))
        raise UnwrapFailure(
            f"Bloch angle jumps by {worst:.3f} rad between grid points {i} and {(i + 1) % len(phi_raw)}; refine the grid"
        )
    phi = phi_raw[0] + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    return phi, float(steps[-1])


@lru_cache(maxsize=256)
def _cached_path(model: ChiralModel, Nk: int) -> BlochPath:
    grid = MomentumGrid(Nk)
    E, n = _bloch_arrays(model, grid.points)
    # a closed gap leaves the angle undefined; report that rather than an unwrap failure
    check_gap(model, E)
    phi, closing = _unwrap(np.arctan2(n[:, 1], n[:, 0]))
    for arr in (E, n, phi):
        arr.setflags(write=False)
    return BlochPath(k=grid.points, E=E, n=n, phi=phi, closing_step=closing)


def bloch_path(model: ModelParams, grid: MomentumGrid) -> BlochPath:
    """Bloch data on every grid point; cached because it does not depend on T."""
    require_chiral(model)
    return _cached_path(replace(model, T=0.0), grid.Nk)


def bloch_arrays(model: ModelParams, grid: MomentumGrid) -> tuple[np.ndarray, np.ndarray]:
    """(E, n) on the grid without angle unwrapping (usable at criticality)."""
    require_chiral(model)
    return _cached_arrays(replace(model, T=0.0), grid.Nk)


@lru_cache(maxsize=1024)
def _cached_arrays(model: ChiralModel, Nk: int):
    E, n = _bloch_arrays(model, MomentumGrid(Nk).points)
    E.setflags(write=False)
    n.setflags(write=False)
    return E, n


def check_gap(model: ModelParams, E: np.ndarray) -> None:
    gap = float(np.min(E))
    if gap < GAP_TOL * model.energy_scale:
        raise GapClosed(f"minimum gap {gap:.3e} below tolerance for {model!r}")


def winding_number(model: ModelParams, grid: MomentumGrid) -> int:
    path = bloch_path(model, grid)
    check_gap(model, path.E)
    nu = path.total_increment / (2 * np.pi)
    nearest = round(nu)
    if abs(nu - nearest) >= 0.01:
        raise UnwrapFailure(f"winding {nu:.4f} is not close to an integer")
    return int(nearest)


def periodic_chain_spectrum(model: ModelParams, N: int) -> np.ndarray:
    """Sorted single-particle (BdG for Kitaev) energies of the N-cell periodic chain."""
    from .realspace import chain_matrix, eigvalsh

    if N < 4:
        raise ValueError("need at least 4 cells")
    return eigvalsh(chain_matrix(model, N, periodic=True))


def momentum_spectrum(model: ModelParams, N: int) -> np.ndarray:
    """Sorted {+-E(k_j)/2 : k_j = 2 pi j / N}, the Bloch-side partner of the periodic chain."""
    k = 2 * np.pi * np.arange(N) / N
    E, _ = _bloch_arrays(model, k)
    return np.sort(np.concatenate([-E / 2, E / 2]))
