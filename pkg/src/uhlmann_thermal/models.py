"""Model parameter sets and discretization grids.

Every model carries its temperature ``T`` so that a single object fully
specifies a thermal state.  Probing a neighbouring state is done with
:func:`dataclasses.replace`, e.g. ``replace(model, M=model.M + 0.01)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from functools import cached_property, lru_cache
from typing import Union

import numpy as np
from scipy.special import roots_legendre

from .errors import NonFiniteInput, UnsupportedModel


# ``energy_scale`` on each model is its dominant hopping; tolerances such as the
# gap-closing cut and the default quasi-particle chemical potential scale with it.


def _check_finite(obj) -> None:
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, (int, float)) and not math.isfinite(value):
            raise NonFiniteInput(f"{type(obj).__name__}.{f.name} = {value!r}")
    if obj.T < 0:
        raise ValueError(f"temperature must be >= 0, got {obj.T}")


@dataclass(frozen=True)
class Creutz:
    """Creutz ladder with horizontal/diagonal hopping K, rung hopping M and flux phase."""

    M: float = 0.5
    K: float = 0.5
    phi_flux: float = math.pi / 2
    T: float = 0.0

    def __post_init__(self):
        _check_finite(self)

    @property
    def energy_scale(self) -> float:
        return max(abs(2 * self.K), abs(self.M)) or 1.0


@dataclass(frozen=True)
class SSH:
    """Su-Schrieffer-Heeger chain, intra-cell hopping v and inter-cell hopping w."""

    v: float = 0.5
    w: float = 1.0
    T: float = 0.0

    def __post_init__(self):
        _check_finite(self)

    @property
    def energy_scale(self) -> float:
        return max(abs(self.v), abs(self.w)) or 1.0


@dataclass(frozen=True)
class Kitaev:
    """Kitaev chain; ``delta`` is the (real) p-wave pairing amplitude."""

    mu: float = 0.5
    t: float = 0.5
    delta: float = 1.0
    T: float = 0.0

    def __post_init__(self):
        _check_finite(self)

    @property
    def energy_scale(self) -> float:
        return max(abs(self.t), abs(self.delta)) or 1.0


@dataclass(frozen=True)
class BCS:
    """Mean-field BCS shell model: constant density of states N0 on |xi| <= omega_D."""

    V: float = 0.25
    mu: float = 0.0
    omega_D: float = 1.0
    N0: float = 1.0
    T: float = 0.0

    def __post_init__(self):
        _check_finite(self)
        if self.omega_D <= 0:
            raise ValueError("omega_D must be positive")
        if self.N0 <= 0:
            raise ValueError("N0 must be positive")
        if self.V < 0:
            raise ValueError("pairing coupling V must be >= 0")

    @property
    def energy_scale(self) -> float:
        return self.omega_D


ModelParams = Union[Creutz, SSH, Kitaev, BCS]
ChiralModel = Union[Creutz, SSH, Kitaev]

MODELS: dict[str, type] = {"creutz": Creutz, "ssh": SSH, "kitaev": Kitaev, "bcs": BCS}

# parameter driving the transition in each family (used as the default sweep axis)
DEFAULT_SWEEP = {"creutz": "M", "ssh": "v", "kitaev": "mu", "bcs": "V"}


def model_name(model: ModelParams) -> str:
    return type(model).__name__.lower()


def parameter_names(model_cls: type) -> list[str]:
    return [f.name for f in fields(model_cls) if f.name != "T"]


def with_temperature(model: ModelParams, T: float) -> ModelParams:
    return replace(model, T=T)


def require_chiral(model: ModelParams) -> None:
    if isinstance(model, BCS):
        raise UnsupportedModel("BCS is a continuum model; use the bcs module")
    if not isinstance(model, (Creutz, SSH, Kitaev)):
        raise UnsupportedModel(f"unknown model {model!r}")


@dataclass(frozen=True)
class MomentumGrid:
    """``Nk`` uniform momenta on [-pi, pi); the loop closes from the last point back to -pi."""

    Nk: int = 501

    def __post_init__(self):
        if int(self.Nk) != self.Nk or self.Nk < 3:
            raise ValueError(f"Nk must be an integer >= 3, got {self.Nk}")

    @cached_property
    def points(self) -> np.ndarray:
        pts = -np.pi + 2 * np.pi * np.arange(self.Nk) / self.Nk
        pts.setflags(write=False)
        return pts

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.Nk

    def __len__(self) -> int:
        return self.Nk


@lru_cache(maxsize=16)
def _legendre_nodes(n: int) -> np.ndarray:
    return roots_legendre(n)[0]


@dataclass(frozen=True)
class ShellGrid:
    """Gauss-Legendre nodes on the pairing shell [-omega_D, omega_D], one mode per node."""

    n_nodes: int = 256
    omega_D: float = 1.0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("need at least two shell nodes")

    @cached_property
    def points(self) -> np.ndarray:
        pts = self.omega_D * _legendre_nodes(self.n_nodes)
        pts.setflags(write=False)
        return pts

    @property
    def Nk(self) -> int:
        return self.n_nodes

    def __len__(self) -> int:
        return self.n_nodes
