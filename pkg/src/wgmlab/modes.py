"""Whispering-gallery modes and their exponential concentration at the interface."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .agmon import agmon_distance
from .geometry import DomainSpec
from .potential import EffectivePotential, effective_potential
from .radial_solver import (EigenPair, RadialGrid, assemble_operator, build_grid,
                            lowest_eigenpair, required_nodes)

MASS_FLOOR = 1e-12
N_FLOOR = 20
R2_MIN = 0.98
SLOPE_RATIO_MAX = 1.5


class ResolutionError(ValueError):
    pass


class FitError(ValueError):
    """Too few usable masses, or no exponential regime to fit."""


@dataclass(frozen=True)
class WGMode:
    pair: EigenPair
    E_semi: float
    u_norm: float
    admissible: bool
    in_window: bool

    @property
    def n(self):
        return self.pair.n

    @property
    def lam(self):
        return self.pair.lam

    @property
    def grid(self) -> RadialGrid:
        return self.pair.grid


def segment_integral(s: np.ndarray, y: np.ndarray, a: float, b: float) -> float:
    """Integral over ``[a, b]`` of the piecewise-linear interpolant of ``y``."""
    a, b = max(a, s[0]), min(b, s[-1])
    if b <= a:
        return 0.0
    i = int(np.searchsorted(s, a, side="right"))
    j = int(np.searchsorted(s, b, side="left"))
    ya, yb = np.interp(a, s, y), np.interp(b, s, y)
    xs = np.concatenate([[a], s[i:j], [b]])
    ys = np.concatenate([[ya], y[i:j], [yb]])
    return float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))


def wgm_mode(spec: DomainSpec, n: int, grid: Optional[RadialGrid] = None,
             pot: Optional[EffectivePotential] = None, n_floor: int = N_FLOOR) -> WGMode:
    """Lowest eigenpair of the radial operator for angular momentum ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pot = effective_potential(spec) if pot is None else pot
    if grid is None:
        grid = build_grid(spec, required_nodes(spec, n))
    need = required_nodes(spec, n)
    if grid.nominal_size < need:
        raise ResolutionError(f"grid with {grid.nominal_size} nodes under-resolves n={n}: need N >= {need}")
    pair = lowest_eigenpair(assemble_operator(spec, grid, n))
    E_semi = pair.lam / n ** 2
    u_norm = 2.0 * np.pi * float(np.sum(grid.R * grid.dual * pair.psi ** 2))
    in_window = True
    if pot.admissible and n >= n_floor:
        in_window = bool(pot.E0 < E_semi < pot.E0 + pot.eta0)
    return WGMode(pair, float(E_semi), u_norm, pot.admissible, in_window)


def omega_mass(mode: WGMode, omega) -> float:
    """``||u_n||_{L^2(omega)}`` for the radial band ``omega = [a, b]``."""
    a, b = omega
    g = mode.grid
    return float(np.sqrt(2.0 * np.pi * segment_integral(g.nodes, mode.pair.psi ** 2 * g.R, a, b)))


def localization(mode: WGMode, eps: float) -> float:
    """``L^2`` mass of ``u_n`` outside the band ``|s - s0| <= eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    g = mode.grid
    s0 = g.nodes[g.i0]
    y = mode.pair.psi ** 2 * g.R
    m = segment_integral(g.nodes, y, g.nodes[0], s0 - eps) + segment_integral(g.nodes, y, s0 + eps, g.nodes[-1])
    return float(np.sqrt(2.0 * np.pi * m))


def omega_distance(spec: DomainSpec, omega) -> float:
    a, b = omega
    s0 = spec.s0
    if a <= s0 <= b:
        return 0.0
    return float(min(abs(a - s0), abs(b - s0)))


def predicted_rate(pot: EffectivePotential, omega) -> float:
    """``min over omega`` of ``d_{A,E0}``: the endpoint nearest the interface."""
    a, b = omega
    s0 = pot.domain.s0
    nearest = a if a > s0 else b
    return agmon_distance(pot, pot.E0, nearest)


@dataclass
class DecayFit:
    omega: tuple
    n_values: list
    masses: list
    lambdas: list
    d_fit: float
    intercept: float
    d_pred: float
    r_squared: float
    floor_mask: list
    admissible: bool = True
    E_semi: list = field(default_factory=list)

    @property
    def C(self) -> float:
        return float(np.exp(self.intercept))

    def agmon_upper_bound(self, delta_prime: Optional[float] = None) -> list:
        """``mass_n <= C exp(-(d_pred - delta') n)`` on the last half of the sweep."""
        dp = 0.5 * self.d_pred if delta_prime is None else delta_prime
        n = np.asarray(self.n_values, dtype=float)
        m = np.asarray(self.masses)
        tail = slice(len(n) // 2, None)
        bound = self.C * np.exp(-(self.d_pred - dp) * n[tail])
        return (m[tail] <= bound).tolist()


def fit_masses(n_values, masses, d_pred: float, omega=(np.nan, np.nan),
               floor: float = MASS_FLOOR, lambdas=(), admissible: bool = True) -> DecayFit:
    """Least-squares fit ``log mass = intercept - d_fit * n`` above ``floor``."""
    if d_pred <= 1e-14:
        raise FitError("no exponential regime: Agmon distance vanishes on omega")
    n = np.asarray(n_values, dtype=float)
    m = np.asarray(masses, dtype=float)
    keep = m > floor
    if np.count_nonzero(keep) < 3:
        raise FitError("fewer than 3 masses above the numerical floor")
    x, y = n[keep], np.log(m[keep])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (icpt + slope * x)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = float(1.0 - np.sum(resid ** 2) / ss) if ss > 0 else 0.0
    return DecayFit(tuple(float(v) for v in omega), [int(v) for v in n_values], m.tolist(),
                    [float(v) for v in lambdas], float(-slope), float(icpt), float(d_pred), r2,
                    (~keep).tolist(), admissible)


def mode_sweep(spec: DomainSpec, n_values: Sequence[int], nodes_per_n: Optional[int] = None,
               pole_cut: Optional[float] = None, threads: int = 1) -> list:
    """Lowest WGM for each ``n`` (parallel over ``n`` when ``threads > 1``)."""
    pot = effective_potential(spec)

    def one(n):
        N = required_nodes(spec, n, pole_cut)
        if nodes_per_n is not None:
            N = max(N, nodes_per_n * n)
        return wgm_mode(spec, n, build_grid(spec, N, pole_cut), pot)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, n_values))
    return [one(n) for n in n_values]


def decay_fit(spec: DomainSpec, n_values, omega, modes: Optional[list] = None,
              threads: int = 1, floor: float = MASS_FLOOR, pole_cut: Optional[float] = None) -> DecayFit:
    """Fit the exponential concentration rate of ``||u_n||_{L^2(omega)}`` over ``n``."""
    n_values = [int(n) for n in n_values]
    if len(n_values) < 5 or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must have at least 5 increasing entries")
    a, b = map(float, omega)
    if not a < b:
        raise ValueError("omega must satisfy a < b")
    if omega_distance(spec, (a, b)) <= 0:
        raise ValueError("dist(omega, s_0) must be positive")
    pot = effective_potential(spec)
    if not pot.admissible:
        raise FitError("domain is not admissible: no concentration guarantee")
    d_pred = predicted_rate(pot, (a, b))
    if modes is None:
        modes = mode_sweep(spec, n_values, threads=threads, pole_cut=pole_cut)
    masses = [omega_mass(m, (a, b)) for m in modes]
    fit = fit_masses(n_values, masses, d_pred, (a, b), floor, [m.lam for m in modes], pot.admissible)
    fit.E_semi = [m.E_semi for m in modes]
    return fit


@dataclass
class SaturationReport:
    applicable: bool
    linear: bool
    positive: bool
    super_exponential: bool
    sub_exponential: bool
    r_squared: float
    slope_ratio: float

    @property
    def passed(self) -> bool:
        return (self.applicable and self.linear and self.positive
                and not self.super_exponential and not self.sub_exponential)


def spectral_saturation(fit: DecayFit, r2_min: float = R2_MIN,
                        ratio_max: float = SLOPE_RATIO_MAX) -> SaturationReport:
    """Check that ``log mass`` is linear in ``n``: decay exactly exponential.

    The slope over the last half of the sweep is compared with the slope
    over the first half; a ratio above ``ratio_max`` flags super-exponential
    decay, below ``1/ratio_max`` polynomial-like decay.
    """
    if not fit.admissible:
        return SaturationReport(False, False, False, False, False, float("nan"), float("nan"))
    keep = ~np.asarray(fit.floor_mask)
    n = np.asarray(fit.n_values, dtype=float)[keep]
    y = np.log(np.asarray(fit.masses)[keep])
    half = (len(n) + 1) // 2
    head = np.polyfit(n[:half], y[:half], 1)[0]
    tail = np.polyfit(n[-half:], y[-half:], 1)[0]
    ratio = float(tail / head) if head != 0 else float("inf")
    return SaturationReport(True, fit.r_squared >= r2_min, fit.d_fit > 0,
                            ratio > ratio_max, ratio < 1.0 / ratio_max, fit.r_squared, ratio)
