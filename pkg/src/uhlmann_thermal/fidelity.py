"""Fidelity, Tr(sqrt(rho) sqrt(rho')) and the Uhlmann indicator for quadratic fermion states.

Each momentum (or shell) mode contributes a 2x2 single-particle block
``H = E n.sigma / 2`` at temperature T.  With ``a = E/2T`` and
``b = E'/2T'`` the per-mode factors are

    F  = [2 + sqrt(2 (1 + cosh a cosh b + sinh a sinh b n.n'))] / [4 cosh(a/2) cosh(b/2)]
    TS = [2 + 2 (cosh(a/2) cosh(b/2) + sinh(a/2) sinh(b/2) n.n')] / [4 cosh(a/2) cosh(b/2)]

(``4 cosh^2(a/2) = 2 + 2 cosh a``).  They are evaluated after factoring
``exp((a+b)/2)`` out of numerator and denominator, which leaves only
``exp(-a)``, ``exp(-b)`` and sums of non-negative terms, so temperatures
down to 1e-4 and the T = 0 limit (a = inf) need no special casing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, NonFiniteInput
from .models import BCS, MomentumGrid, ModelParams, ShellGrid

# largest |exponent| the dense oracle will exponentiate
_SAFE_EXP = 700.0


@dataclass(frozen=True)
class ModePair:
    E: float
    n: np.ndarray
    T: float
    E2: float
    n2: np.ndarray
    T2: float

    def __post_init__(self):
        for name in ("E", "T", "E2", "T2"):
            if not np.isfinite(getattr(self, name)):
                raise NonFiniteInput(f"{name} = {getattr(self, name)!r}")
        for name in ("n", "n2"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (3,) or not np.all(np.isfinite(vec)):
                raise NonFiniteInput(f"{name} must be a finite 3-vector")
            if abs(np.linalg.norm(vec) - 1) > 1e-10:
                raise ValueError(f"{name} must be a unit vector")
        if self.T < 0 or self.T2 < 0 or self.E < 0 or self.E2 < 0:
            raise ValueError("energies and temperatures must be non-negative")


@dataclass(frozen=True)
class FidelityReport:
    F: float
    trace_sqrt: float
    delta: float
    F_density: float
    Nk: int
    per_mode: tuple[np.ndarray, np.ndarray] | None = None


def _beta_energy(E, T):
    """E / 2T with the T -> 0 limit (inf for E > 0; a zero-energy mode stays maximally mixed)."""
    E = np.asarray(E, dtype=float)
    T = np.asarray(T, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = E / (2 * T)
    return np.where(E == 0, 0.0, a)


def _pieces(E, n, T, E2, n2, T2, s2=None):
    a = _beta_energy(E, T)
    b = _beta_energy(E2, T2)
    n = np.asarray(n, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    c = np.clip(np.sum(n * n2, axis=-1), -1.0, 1.0)
    if s2 is None:
        # 1 - c^2 via the cross product: exactly zero for parallel or antiparallel inputs
        s2 = np.minimum(np.sum(np.cross(n, n2) ** 2, axis=-1), 1.0)
    P = np.exp(-a)
    Q = np.exp(-b)
    half = np.exp(-(a + b) / 2)
    G = 4 * (P * Q) + (1 + c) * (1 + (P * Q) ** 2) + (1 - c) * (P * P + Q * Q)
    root = np.sqrt(G / 2)
    lin = 0.5 * ((1 + c) * (1 + P * Q) + (1 - c) * (P + Q))
    denom = (1 + P) * (1 + Q)
    # F <= 1 exactly; clamp the rounding of identical states
    F = np.minimum((2 * half + root) / denom, 1.0)
    # F - TS without cancellation: G/2 - lin^2 = (1 - c^2)(1 - P)^2 (1 - Q)^2 / 4
    gap = s2 * ((1 - P) * (1 - Q)) ** 2 / (4 * (root + lin) * denom)
    # TS = (2 * half + lin) / denom analytically; this form keeps TS <= F after rounding
    TS = F - gap
    return F, TS, gap


def _check_inputs(*arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInput("non-finite energy, temperature or Bloch vector")


def mode_factors(E, n, T, E2, n2, T2):
    """Vectorized per-mode (F, TS, F - TS); broadcasting over leading axes."""
    _check_inputs(E, n, T, E2, n2, T2)
    if np.any(np.asarray(T) < 0) or np.any(np.asarray(T2) < 0):
        raise ValueError("temperatures must be >= 0")
    return _pieces(E, n, T, E2, n2, T2)


def fidelity_per_mode(pair: ModePair) -> float:
    F, _, _ = _pieces(pair.E, pair.n, pair.T, pair.E2, pair.n2, pair.T2)
    return float(F)


def trace_sqrt_per_mode(pair: ModePair) -> float:
    _, TS, _ = _pieces(pair.E, pair.n, pair.T, pair.E2, pair.n2, pair.T2)
    return float(TS)


def pure_state_fidelity(n, n2) -> float:
    """|<psi|psi'>| of the two lower-band states; the T = 0 per-mode fidelity."""
    c = float(np.clip(np.dot(n, n2), -1, 1))
    return float(np.sqrt((1 + c) / 2))


def mode_states(model: ModelParams, grid) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode (E, n) arrays for a lattice model on a momentum grid or BCS on a shell grid."""
    if isinstance(model, BCS):
        from .bcs import bcs_modes

        if not isinstance(grid, ShellGrid):
            grid = ShellGrid(omega_D=model.omega_D)
        return bcs_modes(model, grid)
    from .spectra import bloch_arrays

    if not isinstance(grid, MomentumGrid):
        raise TypeError("lattice models need a MomentumGrid")
    return bloch_arrays(model, grid)


def fidelity_total(model: ModelParams, model2: ModelParams, grid, keep_modes: bool = False) -> FidelityReport:
    """Products of the per-mode factors over the grid, reduced in log space."""
    if type(model) is not type(model2):
        raise ValueError("both states must belong to the same model family")
    if isinstance(model, BCS):
        from .bcs import bcs_mode_pair

        if not isinstance(grid, ShellGrid):
            grid = ShellGrid(omega_D=model.omega_D)
        E, n, E2, n2, s2 = bcs_mode_pair(model, model2, grid)
    else:
        E, n = mode_states(model, grid)
        E2, n2 = mode_states(model2, grid)
        s2 = None
    F_k, TS_k, gap_k = _pieces(E, n, model.T, E2, n2, model2.T, s2)
    bad = ~(np.isfinite(F_k) & np.isfinite(TS_k))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NonFiniteInput(f"non-finite mode factor at grid point {grid.points[i]!r}")
    # np.sum reduces pairwise in a fixed order
    log_F = float(np.sum(np.log(F_k)))
    log_TS = float(np.sum(np.log(TS_k)))
    log_ratio = float(np.sum(np.log1p(gap_k / TS_k)))
    F = float(np.exp(log_F))
    TS = float(np.exp(log_TS))
    delta = float(TS * np.expm1(log_ratio))
    Nk = len(F_k)
    return FidelityReport(
        F=F,
        trace_sqrt=TS,
        delta=delta,
        F_density=float(np.exp(log_F / Nk)),
        Nk=Nk,
        per_mode=(F_k, TS_k) if keep_modes else None,
    )


# --- dense oracle ---------------------------------------------------------


def _herm_exp(H: np.ndarray, s: float):
    """exp(s H) of a Hermitian matrix, with the log-determinant."""
    w, V = np.linalg.eigh(H)
    x = s * w
    if np.any(np.abs(x) > _SAFE_EXP):
        raise IllConditioned("matrix exponent outside the safe range")
    return (V * np.exp(x)) @ V.conj().T, float(np.sum(x))


def _fermion_partition(H: np.ndarray, beta: float) -> float:
    """det(I + exp(-beta H)) = Tr exp(-beta H_many) for a quadratic number-conserving H_many."""
    w = np.linalg.eigvalsh(H)
    x = -beta * w
    if np.any(np.abs(x) > _SAFE_EXP):
        raise IllConditioned("matrix exponent outside the safe range")
    return float(np.prod(1 + np.exp(x)))


def fidelity_oracle_mode(H: np.ndarray, H2: np.ndarray, T: float, T2: float) -> tuple[float, float]:
    """Brute-force (F, Tr sqrt(rho) sqrt(rho')) from dense 2x2 matrix functions.

    ``exp(-C) = exp(-beta H/2) exp(-beta' H') exp(-beta H/2)`` is built
    explicitly, ``exp(-C/2)`` follows from its eigendecomposition, and the
    many-body traces are single-particle determinants
    ``Tr exp(-beta H_many) = det(I + exp(-beta H))``.  The smaller eigenvalue
    of ``exp(-C)`` is taken from ``det exp(-C)`` (known from the exponents)
    because direct diagonalization loses it to rounding at low T.
    """
    H = np.asarray(H, dtype=complex)
    H2 = np.asarray(H2, dtype=complex)
    if H.shape != (2, 2) or H2.shape != (2, 2):
        raise ValueError("oracle works on 2x2 blocks")
    if not (T > 0 and T2 > 0):
        raise ValueError("oracle needs T, T' > 0")
    for X in (H, H2):
        if not np.all(np.isfinite(X)) or np.max(np.abs(X - X.conj().T)) > 1e-12:
            raise ValueError("inputs must be finite Hermitian matrices")
    beta, beta2 = 1 / T, 1 / T2

    A, logdet_A = _herm_exp(H, -beta / 2)
    B, logdet_B = _herm_exp(H2, -beta2)
    M = A @ B @ A
    M = 0.5 * (M + M.conj().T)
    lam = np.linalg.eigvalsh(M)
    lam_max = lam[-1]
    lam_min = np.exp(2 * logdet_A + logdet_B) / lam_max
    lam = np.array([lam_min, lam_max])
    # C = -log M, so exp(-C/2) has eigenvalues sqrt(lam)
    numerator_F = float(np.prod(1 + np.sqrt(lam)))

    B_half, logdet_Bh = _herm_exp(H2, -beta2 / 2)
    X = A @ B_half
    # det(I + X) = 1 + tr X + det X for 2x2 blocks
    numerator_TS = float((1 + np.trace(X) + np.exp(logdet_A + logdet_Bh)).real)

    norm = np.sqrt(_fermion_partition(H, beta) * _fermion_partition(H2, beta2))
    return numerator_F / norm, numerator_TS / norm


def bloch_matrix(E: float, n) -> np.ndarray:
    """E n.sigma / 2 as a dense 2x2 matrix."""
    nx, ny, nz = n
    return 0.5 * E * np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]])
