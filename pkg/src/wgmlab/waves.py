"""Separated whispering-gallery waves ``w_n(t, x) = cos(sqrt(lam_n) t) u_n(x)``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import DomainSpec
from .modes import (MASS_FLOOR, R2_MIN, FitError, WGMode, decay_fit, mode_sweep,
                    omega_distance, omega_mass)
from .radial_solver import RadialSystem, assemble_operator


def _lam(mode) -> float:
    return float(mode.lam if isinstance(mode, WGMode) else mode)


def frequency_ratio(mode) -> float:
    """``Lambda = sqrt(1 + lam)`` for a normalised eigenmode (or a bare eigenvalue).

    ``||u||_{H^1}^2 = ||u||^2 + int c |grad u|^2 = 1 + lam`` and
    ``||u||_{H^-1}^2 = 1 / (1 + lam)`` with the same convention.
    """
    return float(np.sqrt(1.0 + _lam(mode)))


def frequency_ratio_alt(mode) -> float:
    """The asymptotically equivalent figure ``sqrt(lam) + 1``."""
    return float(np.sqrt(_lam(mode)) + 1.0)


def time_factor(lam: float, T: float) -> float:
    """``int_0^T cos^2(sqrt(lam) t) dt`` in closed form."""
    k = np.sqrt(lam)
    if k == 0:
        return float(T)
    return float(T / 2.0 + np.sin(2.0 * k * T) / (4.0 * k))


@dataclass(frozen=True)
class WaveObservation:
    mode: WGMode
    T: float
    omega: tuple
    time_factor: float
    omega_norm: float
    spacetime_norm: float
    Lambda: float
    Lambda_alt: float


def wave_norm(mode: WGMode, omega, T: float, spec: Optional[DomainSpec] = None) -> WaveObservation:
    """``||w_n||_{L^2((0,T) x omega)} = sqrt(time factor) * ||u_n||_{L^2(omega)}``."""
    if not T > 0:
        raise ValueError("T must be positive")
    a, b = map(float, omega)
    if spec is not None and omega_distance(spec, (a, b)) <= 0:
        raise ValueError("dist(omega, s_0) must be positive")
    tf = time_factor(mode.lam, T)
    m = omega_mass(mode, (a, b))
    return WaveObservation(mode, float(T), (a, b), tf, m, float(np.sqrt(tf) * m),
                           frequency_ratio(mode), frequency_ratio_alt(mode))


def wave_state(mode: WGMode, t: float):
    """Radial samples of ``(w_n(t), d_t w_n(t))``."""
    k = np.sqrt(mode.lam)
    return np.cos(k * t) * mode.pair.psi, -k * np.sin(k * t) * mode.pair.psi


def wave_energy(mode: WGMode, system: RadialSystem, t: float) -> float:
    """``||d_t w||^2 + (form of w)`` at time ``t`` from the discrete operator."""
    w, wt = wave_state(mode, t)
    weight = mode.grid.R * mode.grid.dual
    kinetic = 2.0 * np.pi * np.sum(weight * wt ** 2)
    k = system.stiffness
    form = 2.0 * np.pi * (np.sum(k * np.diff(w) ** 2) + np.sum(system.potential * w[1:-1] ** 2))
    return float(kinetic + form)


@dataclass
class TunnelingFit:
    omega: tuple
    T: float
    n_values: list
    Lambda: list
    spacetime_norms: list
    time_factors: list
    slope: float
    intercept: float
    r_squared: float
    floor_mask: list
    d_fit: float
    d_pred: float
    E0: float

    @property
    def passed(self) -> bool:
        return self.slope < 0 and self.r_squared >= R2_MIN

    @property
    def consistency(self) -> float:
        """Relative gap between ``|slope| sqrt(E0)`` and the mass decay rate in ``n``."""
        return float(abs(abs(self.slope) * np.sqrt(self.E0) - self.d_fit) / self.d_fit)


def tunneling_fit(spec: DomainSpec, n_values, omega, T: float, modes=None, threads: int = 1,
                  floor: float = MASS_FLOOR) -> TunnelingFit:
    """Slope of ``log ||w_n||_{L^2((0,T) x omega)}`` against ``Lambda(w_n)``."""
    from .potential import effective_potential

    if modes is None:
        modes = mode_sweep(spec, [int(n) for n in n_values], threads=threads)
    fit = decay_fit(spec, n_values, omega, modes=modes, floor=floor)
    obs = [wave_norm(m, omega, T) for m in modes]
    lam_ = np.array([o.Lambda for o in obs])
    norms = np.array([o.spacetime_norm for o in obs])
    keep = norms > floor
    if np.count_nonzero(keep) < 3:
        raise FitError("fewer than 3 space-time norms above the numerical floor")
    x, y = lam_[keep], np.log(norms[keep])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (icpt + slope * x)
    r2 = float(1.0 - np.sum(resid ** 2) / np.sum((y - y.mean()) ** 2))
    E0 = effective_potential(spec).E0
    return TunnelingFit(fit.omega, float(T), fit.n_values, lam_.tolist(), norms.tolist(),
                        [o.time_factor for o in obs], float(slope), float(icpt), r2,
                        (~keep).tolist(), fit.d_fit, fit.d_pred, E0)
