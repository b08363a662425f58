"""Agmon distance to the classically allowed region.

For ``E`` in the admissible window the allowed region is ``[rho_E, s0]``
and the distance is a one-dimensional action integral of
``sqrt((V_c - E)_+ / c)`` measured from ``rho_E`` (inner side) or from
``s0`` (outer side).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potential import EffectivePotential, turning_point
from .quadrature import adaptive_gauss

QUAD_TOL = 1e-11


class AgmonDomainError(ValueError):
    """Integrand of the closed-form distance is not real on the interval."""


@dataclass(frozen=True)
class AgmonProfile:
    E: float
    rho_E: float
    s0: float
    grid: np.ndarray
    d: np.ndarray
    lipschitz_bound: float
    kink_slope: float


def _require(pot: EffectivePotential, E: float):
    if not pot.admissible:
        raise ValueError("Agmon distance requires an admissible potential")
    return turning_point(pot, E)


def _inner_density(pot, E):
    coeff = pot.domain.coeff
    return lambda s: np.sqrt(np.maximum(pot.inner(s) - E, 0.0) / coeff.inner(s))


def _outer_density(pot, E):
    coeff = pot.domain.coeff
    return lambda s: np.sqrt(np.maximum(pot.outer(s) - E, 0.0) / coeff.outer(s))


def _inner_action(pot, E, rho, a, b, tol=QUAD_TOL):
    """``int_a^b`` of the inner density for ``a <= b <= rho``.

    With ``s = rho - t^2`` the square-root zero at the turning point turns
    into a smooth integrand ``2 t g(rho - t^2)``.
    """
    if a >= b:
        return 0.0
    g = _inner_density(pot, E)
    ta, tb = np.sqrt(rho - a), np.sqrt(max(rho - b, 0.0))
    return adaptive_gauss(lambda t: 2.0 * t * g(rho - t * t), tb, ta, tol=tol)


def _outer_action(pot, E, a, b, tol=QUAD_TOL):
    if a >= b:
        return 0.0
    return adaptive_gauss(_outer_density(pot, E), a, b, tol=tol)


def agmon_distance(pot: EffectivePotential, E: float, s: float) -> float:
    """Agmon distance ``d_{A,E}(s)`` for ``E`` in ``[E0, E0 + eta0)``."""
    rho = _require(pot, E)
    spec = pot.domain
    if not spec.s_min <= s <= spec.s_max:
        raise ValueError(f"s={s!r} outside [{spec.s_min}, {spec.s_max}]")
    if s <= rho:
        return _inner_action(pot, E, rho, s, rho)
    if s <= spec.s0:
        return 0.0
    return _outer_action(pot, E, spec.s0, s)


def agmon_profile(pot: EffectivePotential, E: float, grid) -> AgmonProfile:
    """Agmon distance sampled on a sorted grid by cumulative quadrature.

    The inner branch is accumulated outward from ``rho_E`` toward the inner
    end, the outer branch from ``s0`` toward the outer end.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) < 0):
        raise ValueError("grid must be a sorted 1D array")
    rho = _require(pot, E)
    spec = pot.domain
    s0 = spec.s0
    if grid.size and (grid[0] < spec.s_min or grid[-1] > spec.s_max):
        raise ValueError("grid must lie inside [s_min, s_max]")
    d = np.zeros_like(grid)

    inner = np.nonzero(grid < rho)[0]
    acc, prev = 0.0, rho
    for i in inner[::-1]:
        acc += _inner_action(pot, E, rho, grid[i], prev)
        prev = grid[i]
        d[i] = acc

    outer = np.nonzero(grid > s0)[0]
    acc, prev = 0.0, s0
    for i in outer:
        acc += _outer_action(pot, E, prev, grid[i])
        prev = grid[i]
        d[i] = acc

    # (V - E)_+ / c_min over the domain
    lo = spec.s_min if not spec.has_pole else grid[0] if grid.size else s0
    s_in = np.linspace(max(lo, spec.s_min), s0, 1025)
    s_out = np.linspace(s0, spec.s_max, 1025)
    v_in = np.maximum(pot.inner(s_in) - E, 0.0) / spec.coeff.inner(s_in)
    v_out = np.maximum(pot.outer(s_out) - E, 0.0) / spec.coeff.outer(s_out)
    v_max = max(np.max(pot.inner(s_in) - E), np.max(pot.outer(s_out) - E), 0.0)
    c_min = min(np.min(spec.coeff.inner(s_in)), np.min(spec.coeff.outer(s_out)))
    lipschitz = float(np.sqrt(max(v_max / c_min, np.max(v_in), np.max(v_out))))
    kink = float(_outer_density(pot, E)(np.array(s0)))
    return AgmonProfile(E, rho, s0, grid, d, lipschitz, kink)


def eikonal_pointwise(profile: AgmonProfile, pot: EffectivePotential, collar: int = 2) -> np.ndarray:
    """Per-sample ``|c d'^2 - (V - E)_+|`` with central differences.

    Samples within ``collar`` indices of ``rho_E`` and of ``s0`` are NaN
    (the density has a square-root zero at ``rho_E`` and ``d'`` jumps at
    ``s0``), as are the grid end points.
    """
    s, d = profile.grid, profile.d
    out = np.full(s.size, np.nan)
    if s.size < 3:
        return out
    dd = (d[2:] - d[:-2]) / (s[2:] - s[:-2])
    mid = s[1:-1]
    c = pot.domain.coeff(mid)
    target = np.maximum(pot(mid) - profile.E, 0.0)
    res = np.abs(c * dd ** 2 - target)
    idx = np.arange(1, s.size - 1)
    mask = np.ones(mid.size, dtype=bool)
    for point in (profile.rho_E, profile.s0):
        k = int(np.searchsorted(s, point))
        mask &= ~((idx >= k - collar - 1) & (idx <= k + collar))
    out[1:-1][mask] = res[mask]
    return out


def eikonal_residual(profile: AgmonProfile, pot: EffectivePotential, collar: int = 2) -> float:
    """Max of :func:`eikonal_pointwise` away from the collars."""
    r = eikonal_pointwise(profile, pot, collar)
    return float(np.nanmax(r)) if np.any(np.isfinite(r)) else 0.0


def closed_form_annulus_distance(c_side: float, E: float, a_from: float, a_to: float) -> float:
    """``int_{a_from}^{a_to} sqrt(1/s^2 - E/c)`` via its antiderivative.

    ``F(s) = sqrt(1 - a^2 s^2) - artanh(sqrt(1 - a^2 s^2))`` with
    ``a = sqrt(E / c)``; only valid while ``a s < 1`` on the interval.
    """
    if a_from == a_to:
        return 0.0
    a = np.sqrt(E / c_side)
    if a * max(a_from, a_to) >= 1.0:
        raise AgmonDomainError(
            f"a*s >= 1 on [{a_from}, {a_to}] (a={a:g}): integrand not real up to the edge")

    def F(s):
        u = np.sqrt(1.0 - (a * s) ** 2)
        return u - np.arctanh(u)

    return float(F(a_to) - F(a_from))


def closed_form_turning_distance(c_side: float, E: float, s: float) -> float:
    """``int_s^{1/a} sqrt(1/x^2 - a^2)`` from ``s`` up to the turning point ``1/a``.

    Equals ``artanh(u) - u`` with ``u = sqrt(1 - a^2 s^2)``.
    """
    a = np.sqrt(E / c_side)
    if a * s > 1.0:
        raise AgmonDomainError(f"s={s!r} lies beyond the turning point 1/a={1.0 / a!r}")
    u = np.sqrt(1.0 - (a * s) ** 2)
    return float(np.arctanh(u) - u)
