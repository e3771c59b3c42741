"""Self-consistent BCS gap in the constant-density-of-states shell model.

The gap equation reduces to

    1 = N0 V int_0^omega_D tanh(E / 2T) / E dxi,   E = sqrt(xi^2 + gap^2),

whose T = 0 solution is ``omega_D / sinh(1 / (N0 V))``.  Energies are
measured from the chemical potential, so ``mu`` only fixes the origin of xi.
The integral is done in the variable s with ``xi = c sinh s``,
``c = max(gap, T)``, which removes the 1/E peak at the Fermi level.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from .errors import NoConvergence, QuadratureFailure
from .models import BCS, ShellGrid

MAX_ITER = 200
TC_TOL = 1e-8
# temperatures below this are indistinguishable from zero in double precision
_T_FLOOR = 1e-200

# composite Gauss-Legendre rule on [0, 1] used by the vectorized solver
_PANELS = 8
_NODES = 48


@dataclass(frozen=True)
class GapSolution:
    delta: float
    converged: bool
    iterations: int
    residual: float


@dataclass(frozen=True)
class BdGMode:
    xi: float
    E: float
    n: np.ndarray


def zero_temperature_gap(V: float, params: BCS) -> float:
    if V <= 0:
        return 0.0
    return params.omega_D / math.sinh(1.0 / (params.N0 * V))


def _integrand(s, delta, T, c):
    sh = math.sinh(s)
    E = math.hypot(c * sh, delta)
    if E == 0:
        return 1.0 / (2 * T) * c * math.cosh(s) if T > 0 else math.inf
    th = 1.0 if T == 0 else math.tanh(E / (2 * T))
    return th * c * math.cosh(s) / E


def gap_integral(delta: float, T: float, omega_D: float) -> float:
    """int_0^omega_D tanh(E/2T)/E dxi by adaptive quadrature (relative error < 1e-12)."""
    if delta < 0 or T < 0:
        raise ValueError("gap and temperature must be >= 0")
    if T < _T_FLOOR:
        return math.asinh(omega_D / delta) if delta > 0 else math.inf
    c = max(delta, T)
    upper = math.asinh(omega_D / c)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(_integrand, 0.0, upper, args=(delta, T, c), epsabs=0.0, epsrel=1e-13, limit=400)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    if not err <= 1e-12 * abs(value):
        raise QuadratureFailure(f"quadrature error estimate {err:.2e} too large")
    return value


def gap_rhs(delta: float, V: float, T: float, params: BCS) -> float:
    """N0 V times the gap integral, minus one; the self-consistent gap is its root in ``delta``."""
    if V == 0:
        return -1.0
    if math.isinf(delta):
        return -1.0
    return params.N0 * V * gap_integral(delta, T, params.omega_D) - 1.0


@lru_cache(maxsize=1)
def _unit_rule() -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(_NODES)
    edges = np.linspace(0.0, 1.0, _PANELS + 1)
    nodes = np.concatenate([lo + (hi - lo) * (x + 1) / 2 for lo, hi in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([(hi - lo) / 2 * w for lo, hi in zip(edges[:-1], edges[1:])])
    return nodes, weights


def gap_integral_fixed(delta, T, omega_D: float) -> np.ndarray:
    """Vectorized fixed-rule version of :func:`gap_integral` (agrees to ~1e-13 relative)."""
    delta, T = np.broadcast_arrays(np.asarray(delta, dtype=float), np.asarray(T, dtype=float))
    out = np.empty(delta.shape)
    zero_T = T < _T_FLOOR
    with np.errstate(divide="ignore"):
        out[zero_T] = np.where(delta[zero_T] > 0, np.arcsinh(omega_D / delta[zero_T]), np.inf)
    d = delta[~zero_T][:, None]
    t = T[~zero_T][:, None]
    c = np.maximum(d, t)
    upper = np.arcsinh(omega_D / c)
    x, w = _unit_rule()
    s = upper * x
    E = np.hypot(c * np.sinh(s), d)
    f = np.tanh(E / (2 * t)) * c * np.cosh(s) / E
    # row-wise pairwise sums give bitwise the same value for any batch size
    out[~zero_T] = upper[:, 0] * np.sum(f * w, axis=-1)
    return out


def _bisect_gaps(V: float, temps: np.ndarray, params: BCS, max_iter: int = MAX_ITER):
    """Vectorized bisection of the gap equation over an array of temperatures."""
    temps = np.asarray(temps, dtype=float)
    gaps = np.zeros(temps.shape)
    iters = np.zeros(temps.shape, dtype=int)
    residual = np.zeros(temps.shape)
    converged = np.ones(temps.shape, dtype=bool)
    # delta = 0 solves the undivided equation gap = V sum <c c> identically, so its residual is 0
    if V == 0:
        return gaps, converged, iters, residual
    g = params.N0 * V

    def rhs(d, t):
        return g * gap_integral_fixed(d, t, params.omega_D) - 1.0

    # the normal state is the only solution once rhs(0+) <= 0
    r0 = rhs(np.zeros(temps.shape), temps)
    sc = r0 > 0
    if not np.any(sc):
        return gaps, converged, iters, residual
    t = temps[sc]
    lo = np.zeros(t.shape)
    hi = np.full(t.shape, 10.0 * zero_temperature_gap(V, params))
    active = np.ones(t.shape, dtype=bool)
    count = np.zeros(t.shape, dtype=int)
    for _ in range(max_iter):
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        r = rhs(mid[active], t[active])
        idx = np.flatnonzero(active)
        up = r > 0
        lo[idx[up]] = mid[idx[up]]
        hi[idx[~up]] = mid[idx[~up]]
        count[idx] += 1
        done = (hi[idx] - lo[idx] <= 4 * np.finfo(float).eps * hi[idx]) | (r == 0)
        active[idx[done]] = False
    root = 0.5 * (lo + hi)
    gaps[sc] = root
    iters[sc] = count
    residual[sc] = np.abs(rhs(root, t))
    converged[sc] = ~active
    return gaps, converged, iters, residual


def solve_gap(V: float, T: float, params: BCS, max_iter: int = MAX_ITER) -> GapSolution:
    """Self-consistent gap Delta(V, T) by bisection on [0, 10 Delta_0]."""
    if V < 0 or T < 0:
        raise ValueError("V and T must be non-negative")
    gaps, conv, iters, res = _bisect_gaps(V, np.array([T]), params, max_iter)
    if not conv[0]:
        raise NoConvergence(f"gap bisection did not converge in {max_iter} iterations (V={V}, T={T})")
    return GapSolution(delta=float(gaps[0]), converged=True, iterations=int(iters[0]), residual=float(res[0]))


def gap_curve(V: float, temps, params: BCS) -> list[GapSolution]:
    gaps, conv, iters, res = _bisect_gaps(V, np.asarray(temps, dtype=float), params)
    return [GapSolution(float(g), bool(c), int(i), float(r)) for g, c, i, r in zip(gaps, conv, iters, res)]


def critical_temperature(V: float, params: BCS, tol: float = TC_TOL) -> float:
    """Smallest T at which the gap vanishes: root of the linearized (gap -> 0) equation."""
    if V < 0:
        raise ValueError("V must be >= 0")
    if V == 0:
        return 0.0
    lo, hi = 0.0, params.omega_D
    while gap_rhs(0.0, V, hi, params) > 0:
        lo, hi = hi, 2 * hi
    for _ in range(MAX_ITER):
        if hi - lo <= tol:
            # the upper end is the smallest sampled T certified to be in the normal phase
            return hi
        mid = 0.5 * (lo + hi)
        if gap_rhs(0.0, V, mid, params) > 0:
            lo = mid
        else:
            hi = mid
    raise NoConvergence("critical temperature bisection did not converge")


_GAP_CACHE: dict = {}
_GAP_CACHE_LIMIT = 1 << 17


def _cache_key(V: float, T: float, params: BCS):
    return float(V), float(T), BCS(V=0.0, mu=params.mu, omega_D=params.omega_D, N0=params.N0)


def _store(key, value: float) -> None:
    if len(_GAP_CACHE) >= _GAP_CACHE_LIMIT:
        _GAP_CACHE.clear()
    _GAP_CACHE[key] = value


def _cached_gap(V: float, T: float, params: BCS) -> float:
    key = _cache_key(V, T, params)
    if key not in _GAP_CACHE:
        _store(key, solve_gap(V, T, params).delta)
    return _GAP_CACHE[key]


def prime_gaps(V: float, temps, params: BCS) -> None:
    """Solve the gap for many temperatures in one vectorized pass and cache the results.

    Values are bitwise identical to those of :func:`solve_gap`.
    """
    temps = [float(T) for T in temps]
    missing = [T for T in temps if _cache_key(V, T, params) not in _GAP_CACHE]
    if not missing:
        return
    gaps, conv, _, _ = _bisect_gaps(V, np.array(missing), params)
    for T, g, ok in zip(missing, gaps, conv):
        if ok:
            _store(_cache_key(V, T, params), float(g))


def gap_value(model: BCS) -> float:
    return _cached_gap(model.V, model.T, model)


def bcs_bloch(xi: float, V: float, T: float, params: BCS) -> BdGMode:
    """Quasi-particle energy and Nambu pseudo-spin (gap/E, 0, xi/E) at shell energy xi."""
    gap = _cached_gap(V, T, params)
    E = math.hypot(xi, gap)
    if E == 0:
        return BdGMode(xi=xi, E=0.0, n=np.array([0.0, 0.0, 1.0]))
    return BdGMode(xi=xi, E=E, n=np.array([gap / E, 0.0, xi / E]))


def bcs_modes(model: BCS, grid: ShellGrid) -> tuple[np.ndarray, np.ndarray]:
    """(E, n) per shell node in the two-level convention H = E n.sigma / 2.

    The Nambu block has eigenvalues +-sqrt(xi^2 + gap^2), so E here is twice
    the quasi-particle energy.
    """
    gap = gap_value(model)
    xi = np.asarray(grid.points)
    Eqp = np.hypot(xi, gap)
    return 2 * Eqp, _pseudo_spin(xi, gap, Eqp)


# --- close temperature probes -------------------------------------------
#
# Deep in the ordered phase Delta(T') - Delta(T) is of order exp(-Delta/T),
# far below the resolution of either gap.  The shift is then obtained from the
# linearized gap equation, with the temperature difference of the integrand
# written in a cancellation-free form.

# relative gap change below which the linearized shift replaces subtraction
_SHIFT_LINEAR = 1e-8


def _quad(f, upper: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=1e-12, limit=400)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    return value


def _half_beta(E, T):
    return math.inf if T == 0 else E / (2 * T)


def _temperature_difference(delta: float, T: float, T2: float, omega_D: float) -> tuple[float, float]:
    """(log scale, integral) with int tanh(E/2T2)/E - tanh(E/2T)/E dxi = exp(log scale) * integral."""
    c = max(delta, T, T2)
    x1_min = _half_beta(delta, T)
    x2_min = _half_beta(delta, T2)
    # factor out the smaller of the two leading exponentials
    ref = min(x1_min, x2_min)

    def f(s):
        xi = c * math.sinh(s)
        E = math.hypot(xi, delta)
        x1 = _half_beta(E, T)
        x2 = _half_beta(E, T2)
        # tanh(x2) - tanh(x1) = 2 (e^{-2 x1} - e^{-2 x2}) / ((1 + e^{-2 x1}) (1 + e^{-2 x2}))
        lo, hi = (x2, x1) if x2 <= x1 else (x1, x2)
        diff = math.exp(-2 * (lo - ref)) * math.expm1(-2 * (hi - lo))
        if x2 > x1:
            diff = -diff
        denom = (1 + math.exp(-2 * x1)) * (1 + math.exp(-2 * x2))
        return 2 * diff / denom * c * math.cosh(s) / E

    return -2 * ref, _quad(f, math.asinh(omega_D / c))


def _gap_slope(delta: float, T: float, omega_D: float) -> float:
    """d/d(gap) of the gap integral at fixed T (negative)."""
    c = max(delta, T)

    def f(s):
        xi = c * math.sinh(s)
        E = math.hypot(xi, delta)
        x = _half_beta(E, T)
        e = math.exp(-2 * x)
        th = (1 - e) / (1 + e)
        sech2 = 4 * e / (1 + e) ** 2
        curv = 0.0 if T == 0 else sech2 / (2 * T * E)
        return delta / E * (curv - th / (E * E)) * c * math.cosh(s)

    return _quad(f, math.asinh(omega_D / c))


def gap_shift(model: BCS, model2: BCS) -> tuple[float, float]:
    """(gap of ``model``, gap of ``model2`` minus it), the difference resolved below rounding.

    The linearized route is taken only for pure temperature probes where
    both states are superconducting and plain subtraction would keep fewer
    than eight significant digits.
    """
    g1 = gap_value(model)
    g2 = gap_value(model2)
    same_coupling = replace(model, T=0.0) == replace(model2, T=0.0)
    if not (same_coupling and g1 > 0 and g2 > 0 and model.T != model2.T):
        return g1, g2 - g1
    if abs(g2 - g1) > _SHIFT_LINEAR * g1:
        return g1, g2 - g1
    log_scale, diff = _temperature_difference(g1, model.T, model2.T, model.omega_D)
    slope = _gap_slope(g1, model2.T, model.omega_D)
    return g1, -math.exp(log_scale) * diff / slope


def bcs_mode_pair(model: BCS, model2: BCS, grid: ShellGrid):
    """Mode arrays of two BCS states plus |n x n'|^2 computed from the resolved gap shift.

    For pseudo-spins (gap, 0, xi)/E the cross product has the single component
    xi (gap' - gap) / (E E'), so 1 - (n.n')^2 keeps its accuracy when the
    two gaps agree to all printed digits.
    """
    if replace(model, V=0.0, T=0.0) != replace(model2, V=0.0, T=0.0):
        raise ValueError("both BCS states must share mu, omega_D and N0")
    g1, shift = gap_shift(model, model2)
    g2 = g1 + shift
    xi = np.asarray(grid.points)
    E1 = np.hypot(xi, g1)
    E2 = np.hypot(xi, g2)
    n1 = _pseudo_spin(xi, g1, E1)
    n2 = _pseudo_spin(xi, g2, E2)
    with np.errstate(invalid="ignore", divide="ignore"):
        cross = xi * shift / (E1 * E2)
    cross = np.where((E1 > 0) & (E2 > 0), cross, np.sqrt(np.sum(np.cross(n1, n2) ** 2, axis=-1)))
    return 2 * E1, n1, 2 * E2, n2, np.minimum(cross**2, 1.0)


def _pseudo_spin(xi: np.ndarray, gap: float, E: np.ndarray) -> np.ndarray:
    n = np.zeros((len(xi), 3))
    pos = E > 0
    n[pos, 0] = gap / E[pos]
    n[pos, 2] = xi[pos] / E[pos]
    n[~pos, 2] = 1.0
    return n
