"""Uhlmann holonomy of the Brillouin-zone loop of single-particle thermal states.

For a chiral two-band model the holonomy in the chiral basis is
``exp(-i theta sigma_z / 2)`` with

    theta(T) = int_{-pi}^{pi} [1 - sech(E(k) / 2T)] dphi/dk dk,

which tends to 2 pi nu as T -> 0 and to 0 as T -> inf.  The Uhlmann phase is
``arg Tr(rho_pi U)``.  :func:`holonomy_oracle` rebuilds U as an ordered
product of discrete polar-decomposition factors for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePhase, SingularPolar
from .models import MomentumGrid, ModelParams, require_chiral
from .spectra import SIGMA_X, SIGMA_Y, SIGMA_Z, bloch_path, bloch_state, check_gap

IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class HolonomyResult:
    theta: float
    U: np.ndarray
    phase: float


def sech(x):
    """Overflow-free sech for x >= 0 (inf maps to 0)."""
    x = np.abs(np.asarray(x, dtype=float))
    e = np.exp(-x)
    return 2 * e / (1 + e * e)


def _weight(E: np.ndarray, T: float) -> np.ndarray:
    if T == 0:
        return np.where(E > 0, 1.0, 0.0)
    return 1 - sech(E / (2 * T))


def _theta_on_grid(model: ModelParams, T: float, Nk: int) -> float:
    path = bloch_path(model, MomentumGrid(Nk))
    check_gap(model, path.E)
    total = path.total_increment
    phi = path.phi
    ahead = np.append(phi[1:], phi[0] + total)
    behind = np.insert(phi[:-1], 0, phi[-1] - total)
    h = 2 * np.pi / Nk
    dphi = (ahead - behind) / (2 * h)
    # periodic trapezoid rule
    return float(h * np.sum(_weight(path.E, T) * dphi))


def holonomy_angle(
    model: ModelParams, T: float, grid: MomentumGrid, tol: float = 1e-6, max_nk: int = 1 << 20
) -> float:
    """theta(T), refined by grid doubling until successive values differ by < ``tol``."""
    require_chiral(model)
    if T < 0:
        raise ValueError("temperature must be >= 0")
    Nk = grid.Nk
    theta = _theta_on_grid(model, T, Nk)
    while True:
        if 2 * Nk > max_nk:
            raise RuntimeError(f"holonomy angle not converged to {tol} with {Nk} points")
        Nk *= 2
        refined = _theta_on_grid(model, T, Nk)
        if abs(refined - theta) < tol:
            return refined
        theta = refined


def holonomy_unitary(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def thermal_state(E: float, n, T: float) -> np.ndarray:
    """exp(-H/T)/Z for H = E n.sigma/2 (pure lower-band projector at T = 0)."""
    r = 1.0 if T == 0 else np.tanh(E / (2 * T))
    nsig = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return 0.5 * (IDENTITY - r * nsig)


def _phase_from_trace(tr: complex) -> float:
    if abs(tr) < 1e-12:
        raise DegeneratePhase(f"|Tr(rho_pi U)| = {abs(tr):.2e}; the Uhlmann phase is undefined here")
    phase = float(np.angle(tr))
    # arg maps onto (-pi, pi]
    if phase <= -np.pi + 1e-12:
        phase += 2 * np.pi
    return phase


def uhlmann_holonomy(model: ModelParams, T: float, grid: MomentumGrid) -> HolonomyResult:
    theta = holonomy_angle(model, T, grid)
    U = holonomy_unitary(theta)
    state = bloch_state(model, np.pi)
    rho = thermal_state(state.E, state.n, T)
    return HolonomyResult(theta=theta, U=U, phase=_phase_from_trace(np.trace(rho @ U)))


def uhlmann_phase(model: ModelParams, T: float, grid: MomentumGrid) -> float:
    return uhlmann_holonomy(model, T, grid).phase


def holonomy_oracle(model: ModelParams, T: float, grid: MomentumGrid) -> np.ndarray:
    """Ordered product of per-step Uhlmann factors around the momentum loop.

    Each factor U_i is the unitary part of the polar decomposition
    ``sqrt(rho_{k+1}) sqrt(rho_k) = |sqrt(rho_{k+1}) sqrt(rho_k)| U_i``; the
    parallel-transported amplitude picks up ``U_i`` on the left at every step.
    """
    require_chiral(model)
    if not T > 0:
        raise ValueError("the discrete holonomy needs T > 0")
    path = bloch_path(model, grid)
    check_gap(model, path.E)
    # sqrt(rho_k) up to a positive scalar, which does not change the polar factor
    r = np.tanh(path.E / (4 * T))
    nsig = np.einsum("ki,ijl->kjl", path.n, np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z]))
    roots = IDENTITY - r[:, None, None] * nsig
    nxt = np.roll(roots, -1, axis=0)
    X = nxt @ roots
    W, s, Vh = np.linalg.svd(X)
    if np.any(s[:, -1] < 1e-14 * s[:, 0]):
        raise SingularPolar("rank-deficient step product")
    factors = W @ Vh
    hol = IDENTITY.copy()
    for Ui in factors:
        hol = Ui @ hol
    return hol


def operator_distance(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.linalg.norm(A - B, 2))
