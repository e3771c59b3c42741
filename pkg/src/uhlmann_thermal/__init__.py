"""Fidelity, Uhlmann holonomy and edge occupations for thermal states of free-fermion models."""

from .bcs import GapSolution, critical_temperature, gap_curve, gap_rhs, solve_gap, zero_temperature_gap
from .errors import (
    DegeneratePhase,
    EdgeBulkUndefined,
    GapClosed,
    IllConditioned,
    InvalidSpec,
    MalformedCsv,
    NoConvergence,
    NonFiniteInput,
    QuadratureFailure,
    SingularPolar,
    UhlmannError,
    UnsupportedModel,
    UnwrapFailure,
)
from .fidelity import (
    FidelityReport,
    ModePair,
    fidelity_oracle_mode,
    fidelity_per_mode,
    fidelity_total,
    trace_sqrt_per_mode,
)
from .holonomy import HolonomyResult, holonomy_angle, holonomy_oracle, uhlmann_holonomy, uhlmann_phase
from .models import BCS, SSH, Creutz, Kitaev, MomentumGrid, ShellGrid
from .realspace import build_open_chain, edge_bulk_ratio, eigh, thermal_occupations
from .scans import ScanSpec, run_scan
from .spectra import BlochState, bloch_hamiltonian, bloch_state, winding_number
from .summary import summarize

__version__ = "0.1.0"

__all__ = [
    "BCS",
    "BlochState",
    "Creutz",
    "DegeneratePhase",
    "EdgeBulkUndefined",
    "FidelityReport",
    "GapClosed",
    "GapSolution",
    "HolonomyResult",
    "IllConditioned",
    "InvalidSpec",
    "Kitaev",
    "MalformedCsv",
    "ModePair",
    "MomentumGrid",
    "NoConvergence",
    "NonFiniteInput",
    "QuadratureFailure",
    "SSH",
    "ScanSpec",
    "ShellGrid",
    "SingularPolar",
    "UhlmannError",
    "UnsupportedModel",
    "UnwrapFailure",
    "bloch_hamiltonian",
    "bloch_state",
    "build_open_chain",
    "critical_temperature",
    "edge_bulk_ratio",
    "eigh",
    "fidelity_oracle_mode",
    "fidelity_per_mode",
    "fidelity_total",
    "gap_curve",
    "gap_rhs",
    "holonomy_angle",
    "holonomy_oracle",
    "run_scan",
    "solve_gap",
    "summarize",
    "thermal_occupations",
    "trace_sqrt_per_mode",
    "uhlmann_holonomy",
    "uhlmann_phase",
    "winding_number",
    "zero_temperature_gap",
]
