"""Rough quasimodes ``f_h(r) = h^{-1/3} chi(h^{-2/3}(r - rho_E))``.

``chi`` is a smooth plateau bump supported in ``[-7/8, -1/8]`` and equal
to one on ``[-5/8, -3/8]``. The residual ``||(P_h - E) f_h|| / ||f_h||``
decays like ``h^{2/3}``; self-adjointness turns it into a bound on the
distance from ``E`` to the spectrum of ``P_h``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import DomainSpec
from .potential import EffectivePotential, effective_potential, turning_point
from .quadrature import gauss_nodes
from .radial_solver import RadialGrid, assemble_operator, build_grid, eigen_window, required_nodes

SUPPORT = (-7.0 / 8.0, -1.0 / 8.0)
PLATEAU = (-5.0 / 8.0, -3.0 / 8.0)
RAMP = 0.25


class SupportError(ValueError):
    """Quasimode support would leave ``(s_min, s0)``."""


def _g(t):
    """``exp(-1/t)`` for ``t > 0`` and its first two derivatives."""
    t = np.asarray(t, dtype=float)
    pos = t > 1.0 / 700.0           # exp(-1/t) underflows to 0 below this
    tt = np.where(pos, t, 1.0)
    g = np.where(pos, np.exp(-1.0 / tt), 0.0)
    g1 = np.where(pos, g / tt ** 2, 0.0)
    g2 = np.where(pos, g * (1.0 / tt ** 4 - 2.0 / tt ** 3), 0.0)
    return g, g1, g2


def smoothstep(t, derivative: int = 0):
    """``sigma(t) = g(t) / (g(t) + g(1 - t))`` (or its 1st/2nd derivative)."""
    A, A1, A2 = _g(t)
    B, B1, B2 = _g(1.0 - np.asarray(t, dtype=float))
    B1 = -B1
    S, S1, S2 = A + B, A1 + B1, A2 + B2
    if derivative == 0:
        return A / S
    num1 = A1 * S - A * S1
    if derivative == 1:
        return num1 / S ** 2
    if derivative == 2:
        return (A2 * S - A * S2) / S ** 2 - 2.0 * S1 * num1 / S ** 3
    raise ValueError("derivative must be 0, 1 or 2")


def bump(x, derivative: int = 0):
    """Plateau bump ``chi`` (or ``chi'``/``chi''``), values in ``[0, 1]``."""
    x = np.asarray(x, dtype=float)
    k = 1.0 / RAMP
    u = k * (x - SUPPORT[0])          # rising ramp on [-7/8, -5/8]
    v = k * (SUPPORT[1] - x)          # falling ramp on [-3/8, -1/8]
    su, sv = smoothstep(u), smoothstep(v)
    if derivative == 0:
        return su * sv
    su1, sv1 = k * smoothstep(u, 1), -k * smoothstep(v, 1)
    if derivative == 1:
        return su1 * sv + su * sv1
    su2, sv2 = k * k * smoothstep(u, 2), k * k * smoothstep(v, 2)
    if derivative == 2:
        return su2 * sv + 2.0 * su1 * sv1 + su * sv2
    raise ValueError("derivative must be 0, 1 or 2")


def max_h(pot: EffectivePotential, E: float) -> float:
    """Largest ``h`` with ``[rho_E - h^{2/3}, rho_E]`` inside ``(s_min, s0)``."""
    rho = turning_point(pot, E)
    return float((rho - pot.domain.s_min) ** 1.5)


def _check_support(pot, E, h):
    rho = turning_point(pot, E)
    width = h ** (2.0 / 3.0)
    h0 = max_h(pot, E)
    if not rho - width > pot.domain.s_min or h <= 0:
        raise SupportError(f"h={h!r} too large: support leaves (s_min, s0); need h < h_0={h0!r}")
    return rho, width


def build_quasimode(pot: EffectivePotential, E: float, h: float, grid: RadialGrid,
                    min_nodes_per_scale: int = 32):
    """Samples of ``f_h`` on ``grid`` plus a support flag.

    Returns ``(values, support_ok)``.
    """
    rho, width = _check_support(pot, E, h)
    s = grid.nodes
    inside = (s >= rho - width) & (s <= rho)
    if np.count_nonzero(inside) < min_nodes_per_scale:
        raise ValueError(f"grid does not resolve h^(2/3)={width:g} with {min_nodes_per_scale} nodes")
    x = (s - rho) / width
    vals = h ** (-1.0 / 3.0) * bump(x)
    support = s[vals != 0.0]
    support_ok = bool(support.size == 0 or (support.min() > pot.domain.s_min and support.max() < pot.domain.s0))
    return vals, support_ok


@dataclass(frozen=True)
class ResidualParts:
    h: float
    residual: float
    residual_dr: float
    norm_dr: float
    norm_R: float
    kinetic: float
    potential: float


def _residual_parts(pot: EffectivePotential, E: float, h: float, panels: int = 96) -> ResidualParts:
    spec = pot.domain
    rho, width = _check_support(pot, E, h)
    x, w = gauss_nodes(SUPPORT[0], SUPPORT[1], panels, order=8)
    r = rho + width * x
    dr_w = width * w
    chi, chi1, chi2 = bump(x), bump(x, 1), bump(x, 2)
    f = h ** (-1.0 / 3.0) * chi
    f1 = h ** (-1.0) * chi1
    f2 = h ** (-5.0 / 3.0) * chi2
    R, dR = spec.profile(r)
    c = spec.coeff.inner(r)
    # (1/R)(c R f')' for a possibly varying inner coefficient
    dc = _dcoeff(spec, r)
    kin = -h * h * (c * f2 + (c * dR / R + dc) * f1)
    potv = (pot.inner(r) - E) * f
    res = kin + potv
    num_R = np.sqrt(np.sum(dr_w * R * res ** 2))
    den_R = np.sqrt(np.sum(dr_w * R * f ** 2))
    num = np.sqrt(np.sum(dr_w * res ** 2))
    den = np.sqrt(np.sum(dr_w * f ** 2))
    return ResidualParts(h, float(num_R / den_R), float(num / den), float(den), float(den_R),
                         float(np.sqrt(np.sum(dr_w * R * kin ** 2)) / den_R),
                         float(np.sqrt(np.sum(dr_w * R * potv ** 2)) / den_R))


def _dcoeff(spec, r, step=1e-6):
    if spec.coeff.c_minus_fn is None:
        return np.zeros_like(r)
    return (spec.coeff.inner(r + step) - spec.coeff.inner(r - step)) / (2 * step)


def quasimode_residual(spec: DomainSpec, E: float, h: float) -> float:
    """``||(P_h - E) f_h|| / ||f_h||`` in ``L^2(R ds)``, derivatives of ``chi`` exact."""
    return _residual_parts(effective_potential(spec), E, h).residual


@dataclass
class QuasimodeReport:
    E: float
    h_values: list
    residuals: list
    residuals_dr: list
    norms_dr: list
    fitted_slope: float
    support_ok: bool
    eigen_distance: list = field(default_factory=list)
    spectral_check: list = field(default_factory=list)

    def ratios(self):
        r = np.asarray(self.residuals)
        return list(r[:-1] / r[1:])


def residual_scaling(spec: DomainSpec, E: float, h_list, check_spectrum: bool = True,
                     nodes: Optional[int] = None) -> QuasimodeReport:
    """Residual sweep over ``h_list`` with a log-log slope fit.

    With ``check_spectrum`` each ``h = 1/n`` is matched against the discrete
    spectrum of the radial operator: some eigenvalue must satisfy
    ``|lam/n^2 - E| <= residual(h)``.
    """
    h_list = [float(h) for h in h_list]
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("h_list must be strictly decreasing")
    pot = effective_potential(spec)
    parts = [_residual_parts(pot, E, h) for h in h_list]
    res = np.array([p.residual for p in parts])
    slope = float(np.polyfit(np.log(h_list), np.log(res), 1)[0])
    rho = turning_point(pot, E)
    support_ok = all(rho + SUPPORT[0] * h ** (2.0 / 3.0) > spec.s_min
                     and rho + SUPPORT[1] * h ** (2.0 / 3.0) < spec.s0 for h in h_list)
    report = QuasimodeReport(E, h_list, res.tolist(), [p.residual_dr for p in parts],
                             [p.norm_dr for p in parts], slope, support_ok)
    if check_spectrum:
        for h, r in zip(h_list, res):
            n = int(round(1.0 / h))
            N = nodes or required_nodes(spec, n)
            system = assemble_operator(spec, build_grid(spec, N), n)
            lo, hi = n * n * (E - r), n * n * (E + r)
            pairs = eigen_window(system, (lo, hi))
            dist = min((abs(p.lam / n ** 2 - E) for p in pairs), default=float("inf"))
            report.eigen_distance.append(dist)
            report.spectral_check.append(bool(dist <= r))
    return report
