"""Effective potential ``V_c(s) = c(s) / R(s)^2`` and its sublevel sets."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .geometry import DomainSpec

SCAN_POINTS = 2048
GOLDEN_RTOL = 1e-10


class EnergyRangeError(ValueError):
    """Energy outside the window where the turning point is defined."""


@dataclass(frozen=True)
class EffectivePotential:
    domain: DomainSpec = field(repr=False)
    E0: float
    eta0: float
    admissible: bool
    V_outer_min: float
    s_outer_min: float

    def inner(self, s):
        """Continuous extension from the left, valid on ``[s_min, s0]``."""
        s = np.asarray(s, dtype=float)
        return self.domain.coeff.inner(s) / self.domain.profile.R(s) ** 2

    def outer(self, s):
        s = np.asarray(s, dtype=float)
        return self.domain.coeff.outer(s) / self.domain.profile.R(s) ** 2

    def __call__(self, s):
        """``V_c`` with the interface value taken from the inner side (``V_bar``)."""
        s = np.asarray(s, dtype=float)
        s0 = self.domain.s0
        inner = self.inner(np.minimum(s, s0))
        outer = self.outer(np.maximum(s, s0))
        return np.where(s <= s0, inner, outer)

    V_bar = inner

    @property
    def s0(self):
        return self.domain.s0


@dataclass(frozen=True)
class AllowedRegion:
    E: float
    intervals: tuple


def _golden_min(f, a, b, rtol=GOLDEN_RTOL):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > rtol * max(abs(a), abs(b), 1.0):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, float(f(x))


def _scan_min(f, a, b, n=SCAN_POINTS):
    """Bounded minimisation: dense scan then golden-section refinement."""
    s = np.linspace(a, b, n)
    v = f(s)
    k = int(np.argmin(v))
    lo, hi = s[max(k - 1, 0)], s[min(k + 1, n - 1)]
    x, fx = _golden_min(lambda t: float(f(np.array(t))), lo, hi)
    cands = [(fx, x), (float(v[k]), s[k]), (float(v[0]), s[0]), (float(v[-1]), s[-1])]
    fbest, xbest = min(cands)
    return xbest, fbest


def effective_potential(spec: DomainSpec) -> EffectivePotential:
    """Ground level ``E0``, admissibility flag and the maximal margin ``eta0``.

    The domain is admissible when the extended potential has its unique
    minimum at the interface: ``V`` stays strictly above ``E0`` on the inner
    side and ``min V`` over the outer side exceeds ``E0``.
    """
    s0 = spec.s0
    pot = EffectivePotential(spec, np.nan, np.nan, False, np.nan, np.nan)
    E0 = float(pot.inner(s0))
    s_out, V_out = _scan_min(pot.outer, s0, spec.s_max)

    lo = spec.s_min
    if spec.has_pole:
        lo = spec.s_min + 1e-6 * (s0 - spec.s_min)
    s_in = np.linspace(lo, s0, SCAN_POINTS)[:-1]
    inner_ok = bool(np.all(pot.inner(s_in) > E0))
    admissible = inner_ok and V_out > E0
    eta0 = V_out - E0 if admissible else 0.0
    return EffectivePotential(spec, E0, float(eta0), bool(admissible), float(V_out), float(s_out))


def turning_point(pot: EffectivePotential, E: float) -> float:
    """Inner turning point ``rho_E`` with ``V_bar(rho_E) = E``.

    Returns the largest root ``<= s0`` so that ``[rho_E, s0]`` is the allowed
    component touching the interface.
    """
    if not pot.admissible:
        raise EnergyRangeError("turning point requires an admissible potential")
    if not pot.E0 <= E < pot.E0 + pot.eta0:
        raise EnergyRangeError(
            f"E={E!r} outside [E0, E0 + eta0) = [{pot.E0!r}, {pot.E0 + pot.eta0!r}) with eta0={pot.eta0!r}")
    spec = pot.domain
    s0 = spec.s0
    if E == pot.E0:
        return s0
    g = lambda s: float(pot.inner(s)) - E
    # walk inward from s0 until V_bar exceeds E
    lo = spec.s_min if not spec.has_pole else spec.s_min + 1e-12 * s0
    grid = np.linspace(s0, lo, SCAN_POINTS + 1)
    vals = pot.inner(grid) - E
    above = np.nonzero(vals > 0)[0]
    if above.size == 0:
        raise EnergyRangeError(f"E={E!r} exceeds V_bar on the whole inner side")
    k = int(above[0])
    a, b = grid[k], grid[k - 1]
    if vals[k - 1] == 0.0:
        return float(b)
    root = brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(root)


def allowed_region(pot: EffectivePotential, E: float, n_scan: int = 4097) -> AllowedRegion:
    """Sublevel set ``{s : V_c(s) <= E}`` as a sorted tuple of closed intervals."""
    spec = pot.domain
    if E < pot.E0:
        return AllowedRegion(E, ())
    if pot.admissible and E < pot.E0 + pot.eta0:
        return AllowedRegion(E, ((turning_point(pot, E), spec.s0),))

    # general case: sign-change scan on each side of the interface
    intervals = []
    for side, a, b in (("-", spec.s_min, spec.s0), ("+", spec.s0, spec.s_max)):
        if side == "-" and spec.has_pole:
            a = a + 1e-9 * (b - a)
        s = np.linspace(a, b, n_scan)
        f = (pot.inner if side == "-" else pot.outer)
        g = f(s) - E
        inside = g <= 0
        k = 0
        while k < n_scan:
            if not inside[k]:
                k += 1
                continue
            j = k
            while j + 1 < n_scan and inside[j + 1]:
                j += 1
            lo = s[k] if k == 0 else brentq(lambda t: float(f(t)) - E, s[k - 1], s[k])
            hi = s[j] if j == n_scan - 1 else brentq(lambda t: float(f(t)) - E, s[j], s[j + 1])
            intervals.append([float(lo), float(hi)])
            k = j + 1
    merged = []
    for iv in sorted(intervals):
        if merged and iv[0] <= merged[-1][1] + 1e-14:
            merged[-1][1] = max(merged[-1][1], iv[1])
        else:
            merged.append(iv)
    return AllowedRegion(E, tuple(tuple(iv) for iv in merged))
