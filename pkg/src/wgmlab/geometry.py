"""Rotationally symmetric domains with a single coefficient interface.

A domain is described by its radial profile ``R(s)`` (distance to the
symmetry axis as a function of the radial/arclength coordinate ``s``),
an interface location ``s0`` and a piecewise coefficient ``c`` that takes
the value ``c_minus`` on ``s < s0`` and ``c_plus`` on ``s > s0``.

The annulus uses ``R(s) = s`` on ``[R0, R2]``; the disk is the pole
geometry ``R(s) = s`` on ``(0, L]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator


class DomainError(ValueError):
    """Raised when a domain violates one of the standing assumptions."""


ANNULUS = "annulus"
DISK = "disk"
TABULATED = "tabulated"
CLOSED_FORM = "closed-form"
PROFILE_KINDS = (ANNULUS, DISK, TABULATED, CLOSED_FORM)


@dataclass(frozen=True)
class RadialProfile:
    """Profile ``s -> (R(s), R'(s))`` on ``(s_min, s_max]``.

    ``has_pole`` marks geometries where ``R -> 0`` at ``s_min`` (disk,
    surfaces of revolution with one fixed point).
    """

    kind: str
    s_min: float
    s_max: float
    evaluator: Callable[[np.ndarray], tuple] = field(repr=False, compare=False)
    has_pole: bool = False
    samples: Optional[tuple] = field(default=None, repr=False)

    def __call__(self, s):
        R, dR = self.evaluator(np.asarray(s, dtype=float))
        return R, dR

    def R(self, s):
        return self(s)[0]

    def dR(self, s):
        return self(s)[1]


def _identity_profile(s):
    s = np.asarray(s, dtype=float)
    return s.copy(), np.ones_like(s)


def annulus_profile(R0: float, R2: float) -> RadialProfile:
    return RadialProfile(ANNULUS, float(R0), float(R2), _identity_profile)


def disk_profile(L: float) -> RadialProfile:
    return RadialProfile(DISK, 0.0, float(L), _identity_profile, has_pole=True)


def tabulated_profile(samples: Sequence[Sequence[float]], has_pole: Optional[bool] = None) -> RadialProfile:
    """Profile interpolated from ``[[s, R], ...]`` samples.

    Uses shape-preserving (PCHIP) cubic interpolation so that sampled
    positivity and monotonicity carry over to the interpolant; ``R'`` is
    the derivative of the same interpolant.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise DomainError("profile.samples must be a list of at least 3 [s, R] pairs")
    s, R = arr[:, 0], arr[:, 1]
    if np.any(np.diff(s) <= 0):
        raise DomainError("profile.samples must be strictly increasing in s")
    if has_pole is None:
        has_pole = bool(R[0] == 0.0)
    interp = PchipInterpolator(s, R, extrapolate=False)
    dinterp = interp.derivative()

    def evaluator(x):
        x = np.clip(np.asarray(x, dtype=float), s[0], s[-1])
        return interp(x), dinterp(x)

    return RadialProfile(TABULATED, float(s[0]), float(s[-1]), evaluator,
                         has_pole=has_pole, samples=tuple(map(tuple, arr.tolist())))


def closed_form_profile(func: Callable, dfunc: Callable, s_min: float, s_max: float,
                        has_pole: bool = False) -> RadialProfile:
    """Profile from user supplied callables ``R(s)`` and ``R'(s)``."""

    def evaluator(x):
        return np.asarray(func(x), dtype=float), np.asarray(dfunc(x), dtype=float)

    return RadialProfile(CLOSED_FORM, float(s_min), float(s_max), evaluator, has_pole=has_pole)


@dataclass(frozen=True)
class CoefficientSpec:
    """Piecewise coefficient (squared wave speed) with one interface at ``s0``.

    ``c_minus_fn``/``c_plus_fn`` optionally make each side smooth but
    non-constant; by default both sides are constant.
    """

    s0: float
    c_minus: float
    c_plus: float
    c_minus_fn: Optional[Callable] = field(default=None, repr=False, compare=False)
    c_plus_fn: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def piecewise_constant(self) -> bool:
        return self.c_minus_fn is None and self.c_plus_fn is None

    def inner(self, s):
        s = np.asarray(s, dtype=float)
        if self.c_minus_fn is None:
            return np.full_like(s, self.c_minus)
        return np.asarray(self.c_minus_fn(s), dtype=float)

    def outer(self, s):
        s = np.asarray(s, dtype=float)
        if self.c_plus_fn is None:
            return np.full_like(s, self.c_plus)
        return np.asarray(self.c_plus_fn(s), dtype=float)

    def __call__(self, s, side: Optional[str] = None):
        """Coefficient at ``s``; the value at ``s0`` itself is one-sided.

        Without ``side`` the inner value is used at ``s0`` (matching the
        continuous extension of the potential from the left).
        """
        s = np.asarray(s, dtype=float)
        if side == "-":
            return self.inner(s)
        if side == "+":
            return self.outer(s)
        return np.where(s <= self.s0, self.inner(s), self.outer(s))


@dataclass(frozen=True)
class DomainSpec:
    profile: RadialProfile
    coeff: CoefficientSpec
    name: str = ""

    @property
    def s0(self) -> float:
        return self.coeff.s0

    @property
    def s_min(self) -> float:
        return self.profile.s_min

    @property
    def s_max(self) -> float:
        return self.profile.s_max

    @property
    def has_pole(self) -> bool:
        return self.profile.has_pole

    @property
    def inner_boundary(self) -> str:
        return "pole" if self.has_pole else "dirichlet"


def build_annulus(R0: float, R1: float, R2: float, c_minus: float, c_plus: float) -> DomainSpec:
    """Annulus ``R0 < r < R2`` with interface circle ``r = R1``."""
    if not R0 > 0:
        raise DomainError("0 < R0 violated")
    if not R0 < R1:
        raise DomainError("R0 < R1 violated")
    if not R1 < R2:
        raise DomainError("R1 < R2 violated")
    _check_coefficients(c_minus, c_plus)
    coeff = CoefficientSpec(float(R1), float(c_minus), float(c_plus))
    return DomainSpec(annulus_profile(R0, R2), coeff, name=ANNULUS)


def build_surface(profile: RadialProfile, s0: float, c_minus: float, c_plus: float,
                  c_minus_fn: Optional[Callable] = None,
                  c_plus_fn: Optional[Callable] = None) -> DomainSpec:
    """Surface of revolution (or disk) with interface circle ``s = s0``."""
    if not profile.s_min < s0 < profile.s_max:
        raise DomainError(
            f"interface must be interior: need {profile.s_min} < s0={s0} < {profile.s_max}")
    _check_coefficients(c_minus, c_plus)
    problems = _profile_violations(profile)
    if problems:
        raise DomainError("; ".join(problems))
    coeff = CoefficientSpec(float(s0), float(c_minus), float(c_plus), c_minus_fn, c_plus_fn)
    return DomainSpec(profile, coeff, name=profile.kind)


def build_disk(L: float, s0: float, c_minus: float, c_plus: float) -> DomainSpec:
    return build_surface(disk_profile(L), s0, c_minus, c_plus)


def _check_coefficients(c_minus, c_plus):
    if not (c_minus > 0 and c_plus > 0):
        raise DomainError("coefficient positivity violated: need c_minus > 0 and c_plus > 0")


def _profile_violations(profile: RadialProfile, n_check: int = 2049) -> list:
    out = []
    if not profile.s_max > profile.s_min:
        out.append("s_min < s_max violated")
        return out
    if profile.samples is not None:
        for s, R in profile.samples:
            if R <= 0 and not (profile.has_pole and s == profile.s_min):
                out.append(f"R(s)>0 violated at s={s:g}")
    s = np.linspace(profile.s_min, profile.s_max, n_check)[1:]
    R, dR = profile(s)
    if not np.all(np.isfinite(R)) or not np.all(np.isfinite(dR)):
        out.append("profile evaluator is not finite on (s_min, s_max]")
    elif np.any(R <= 0) and profile.samples is None:
        bad = s[np.argmax(R <= 0)]
        out.append(f"R(s)>0 violated at s={bad:g}")
    return out


def validate_domain(spec: DomainSpec) -> list:
    """List the violated standing assumptions (empty when the domain is valid)."""
    out = _profile_violations(spec.profile)
    c = spec.coeff
    if not (c.c_minus > 0 and c.c_plus > 0):
        out.append("coefficient positivity violated")
    if not spec.s_min < c.s0 < spec.s_max:
        out.append("interface must be interior: s_min < s0 < s_max violated")
    if not c.piecewise_constant:
        s_in = np.linspace(spec.s_min, c.s0, 513)[1:]
        s_out = np.linspace(c.s0, spec.s_max, 513)
        vals = np.concatenate([c.inner(s_in), c.outer(s_out)])
        if not np.all(vals > 0):
            out.append("coefficient positivity violated")
    return out
