"""Radial transmission eigenproblem for one angular momentum ``n``.

Solves ``-(1/R)(c R f')' + n^2 (c/R^2) f = lam f`` with Dirichlet ends
(the pole of a disk-like surface is truncated at ``pole_cut``) and flux
continuity ``c_- f'(s0-) = c_+ f'(s0+)`` across the interface. The
discretisation is a vertex-centred finite-volume scheme with ``s0`` as a
node; lumping the mass ``R_i h_i`` gives a standard symmetric tridiagonal
matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import DomainSpec
from .tridiag import bisect_eigenvalues, inverse_iteration

MIN_NODES = 64
NODES_PER_N = 40
DEFAULT_POLE_CUT = 1e-3


class GridError(ValueError):
    pass


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray
    i0: int
    pole_cut: float
    R: np.ndarray = field(repr=False)
    requested: Optional[int] = None

    @property
    def nominal_size(self) -> int:
        """Node count before truncation at the pole (``size`` otherwise)."""
        return self.requested if self.requested is not None else self.nodes.size

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def dual(self) -> np.ndarray:
        """Dual cell widths ``h_i`` (half cells at the two ends)."""
        dx = self.spacing
        h = np.empty(self.nodes.size)
        h[0], h[-1] = 0.5 * dx[0], 0.5 * dx[-1]
        h[1:-1] = 0.5 * (dx[:-1] + dx[1:])
        return h

    @property
    def size(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class RadialSystem:
    """Symmetric tridiagonal form ``T = W^{-1/2} A W^{-1/2}`` on interior nodes.

    ``stiffness`` holds the edge conductances ``c R / dx`` for every cell
    and ``potential`` the lumped ``n^2 int (c/R^2) R ds`` per interior node.
    """

    n: int
    grid: RadialGrid = field(repr=False)
    diag: np.ndarray = field(repr=False)
    offdiag: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    stiffness: np.ndarray = field(repr=False)
    potential: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class EigenPair:
    n: int
    lam: float
    psi: np.ndarray = field(repr=False)
    grid: RadialGrid = field(repr=False, compare=False)

    @property
    def E_h(self) -> float:
        return self.lam / self.n ** 2 if self.n >= 1 else float("nan")


def required_nodes(spec: DomainSpec, n: int, pole_cut: Optional[float] = None) -> int:
    """Resolution rule: ``40 n`` nodes per length ``R(s0)`` over ``[s_min, s_max]``.

    Nodes are counted over the geometric interval, before truncation at the
    pole, so the rule (like the grid away from the pole) does not depend on
    ``pole_cut``; the argument is accepted for call-site symmetry.
    """
    R0 = float(spec.profile.R(spec.s0))
    return max(MIN_NODES, int(np.ceil(NODES_PER_N * max(n, 1) * (spec.s_max - spec.s_min) / R0 - 1e-9)))


def _start(spec, pole_cut):
    if spec.has_pole:
        return default_pole_cut(spec) if pole_cut is None else float(pole_cut)
    return spec.s_min


def default_pole_cut(spec: DomainSpec) -> float:
    return DEFAULT_POLE_CUT * spec.s_max


def build_grid(spec: DomainSpec, N: int, pole_cut: Optional[float] = None,
               min_nodes: int = MIN_NODES) -> RadialGrid:
    """Grid with ``s0`` as an exact node and uniform cells on each side.

    Cells are split between the two sides in proportion to their lengths
    (measured from the geometric inner end). For pole geometries the inner
    side is laid out from ``s0`` downward and the last node is replaced by
    ``pole_cut``, so changing the cut only touches the cell next to the pole.
    """
    if N < min_nodes:
        raise GridError(f"N={N} too small: need N >= {min_nodes}")
    s0, s_lo, s_hi = spec.s0, spec.s_min, spec.s_max
    cut = 0.0
    if spec.has_pole:
        cut = default_pole_cut(spec) if pole_cut is None else float(pole_cut)
        if not 0.0 < cut < s0:
            raise GridError(f"pole_cut={cut!r} must satisfy 0 < pole_cut < s0={s0!r}")
    cells = N - 1
    n_in = int(round(cells * (s0 - s_lo) / (s_hi - s_lo)))
    n_in = min(max(n_in, 1), cells - 1)
    n_out = cells - n_in
    dx_in = (s0 - s_lo) / n_in
    inner = s0 - dx_in * np.arange(n_in, 0, -1)
    inner[0] = s_lo
    if spec.has_pole:
        inner = inner[inner > cut + 0.5 * dx_in]
        inner = np.concatenate([[cut], inner])
    outer = s0 + (s_hi - s0) / n_out * np.arange(1, n_out + 1)
    outer[-1] = s_hi
    nodes = np.concatenate([inner, [s0], outer])
    i0 = inner.size
    return RadialGrid(nodes, i0, cut, spec.profile.R(nodes), requested=int(N))


def assemble_operator(spec: DomainSpec, grid: RadialGrid, n: int) -> RadialSystem:
    s = grid.nodes
    coeff = spec.coeff
    dx = np.diff(s)
    mid = 0.5 * (s[1:] + s[:-1])
    inner_cell = np.arange(dx.size) < grid.i0
    c_edge = np.where(inner_cell, coeff.inner(mid), coeff.outer(mid))
    k = c_edge * spec.profile.R(mid) / dx

    # one-sided coefficient at each node from its left and right cells
    idx = np.arange(s.size)
    c_left = np.where(idx <= grid.i0, coeff.inner(s), coeff.outer(s))
    c_right = np.where(idx < grid.i0, coeff.inner(s), coeff.outer(s))
    R = grid.R
    interior = slice(1, -1)
    pot = (n * n) * (0.5 * dx[:-1] * c_left[interior] + 0.5 * dx[1:] * c_right[interior]) / R[interior]
    w = R[interior] * grid.dual[interior]

    A_diag = k[:-1] + k[1:] + pot
    sq = np.sqrt(w)
    diag = A_diag / w
    off = -k[1:-1] / (sq[:-1] * sq[1:])
    return RadialSystem(n, grid, diag, off, w, k, pot)


def _make_pair(system: RadialSystem, lam: float, vec: np.ndarray) -> EigenPair:
    psi = np.zeros(system.grid.size)
    psi[1:-1] = vec / np.sqrt(system.weight)
    norm2 = np.sum(system.weight * psi[1:-1] ** 2)
    psi *= 1.0 / np.sqrt(2.0 * np.pi * norm2)
    k = int(np.argmax(np.abs(psi)))
    if psi[k] < 0:
        psi = -psi
    return EigenPair(system.n, float(lam), psi, system.grid)


def eigen_window(system: RadialSystem, window, max_count: Optional[int] = None,
                 rtol: float = 1e-12) -> list:
    """Eigenpairs with eigenvalue in ``[lo, hi)``, ascending.

    ``psi`` is normalised so that ``int psi^2 R ds = 1/(2 pi)``.
    """
    lo, hi = map(float, window)
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    lams = bisect_eigenvalues(system.diag, system.offdiag, lo, hi, max_count, rtol=rtol)
    pairs, vecs = [], []
    for j, lam in enumerate(lams):
        close = [v for v, l in zip(vecs, lams[:j]) if abs(l - lam) <= 1e-8 * abs(lam)]
        vec = inverse_iteration(system.diag, system.offdiag, lam, close)
        vecs.append(vec)
        pairs.append(_make_pair(system, lam, vec))
    return pairs


def lowest_eigenpair(system: RadialSystem, lower: float = 0.0) -> EigenPair:
    """Lowest eigenpair above ``lower`` (default: whole spectrum)."""
    hi = float(np.max(system.diag) + 2 * np.max(np.abs(system.offdiag), initial=0.0)) * 1.0001 + 1.0
    pairs = eigen_window(system, (lower, hi), max_count=1)
    if not pairs:
        raise ValueError("no eigenvalue above the requested lower bound")
    return pairs[0]


def transmission_residual(pair: EigenPair, spec: DomainSpec, grid: Optional[RadialGrid] = None) -> float:
    """Flux jump at ``s0`` from one-sided 2nd-order differences.

    The jump is measured relative to the largest flux ``|c f'|`` of the
    mode on the grid, so a mode whose flux vanishes at ``s0`` is not
    divided by round-off.
    """
    grid = pair.grid if grid is None else grid
    s, f, i = grid.nodes, pair.psi, grid.i0
    hl, hr = s[i] - s[i - 1], s[i + 1] - s[i]
    dm = (3 * f[i] - 4 * f[i - 1] + f[i - 2]) / (2 * hl)
    dp = (-3 * f[i] + 4 * f[i + 1] - f[i + 2]) / (2 * hr)
    fm = spec.coeff.inner(s[i]) * dm
    fp = spec.coeff.outer(s[i]) * dp
    mid = 0.5 * (s[1:] + s[:-1])
    c_mid = np.where(mid < s[i], spec.coeff.inner(mid), spec.coeff.outer(mid))
    scale = max(abs(fm), abs(fp), float(np.max(np.abs(c_mid * np.diff(f) / np.diff(s)))))
    if scale == 0.0:
        return 0.0
    return float(abs(fm - fp) / scale)


def weighted_form_identity(system: RadialSystem, f: np.ndarray, phi: np.ndarray, h: float):
    """Discrete analogue of the weighted integration-by-parts identity.

    For grid functions ``f`` (zero at both ends) and a weight ``phi`` the
    exact discrete identity reads

        Q(e^{phi/h} f) - X = <e^{2 phi/h} f, A f>,

    with ``Q`` the edge form ``sum k (g_{i+1} - g_i)^2`` and
    ``X = sum k f_i f_{i+1} (e^{phi_{i+1}/h} - e^{phi_i/h})^2``. ``X`` is the
    discrete version of ``int c |phi'|^2 e^{2phi/h} f^2 R ds / h^2``; its
    continuum counterpart is returned for comparison. All quantities are
    multiplied by ``h^2``.
    """
    k = system.stiffness
    ew = np.exp(phi / h)
    g = ew * f
    q = np.sum(k * np.diff(g) ** 2)
    x = np.sum(k * f[:-1] * f[1:] * np.diff(ew) ** 2)
    Af = np.zeros_like(f)
    df = np.diff(f)
    Af[1:-1] = -(k[1:] * df[1:] - k[:-1] * df[:-1])
    rhs = np.sum(ew ** 2 * f * Af)
    s = system.grid.nodes
    mid = 0.5 * (s[1:] + s[:-1])
    dx = np.diff(s)
    dphi = np.diff(phi) / dx
    fm = 0.5 * (f[1:] + f[:-1])
    em = np.exp((phi[1:] + phi[:-1]) / h)
    cont = np.sum(k * dx * dx * dphi ** 2 * em * fm ** 2) / (h * h)
    return {"lhs": h * h * (q - x), "rhs": h * h * rhs, "weight_term": h * h * x,
            "weight_term_continuum": h * h * cont}


def shoot_eigenvalue(spec: DomainSpec, n: int, bracket, steps_per_side: int = 10000,
                     pole_cut: Optional[float] = None, rtol: float = 1e-10) -> float:
    """Eigenvalue by shooting with fixed-step RK4 and bisection on ``f(s_max)``.

    Integrates ``f'' = -(R'/R) f' + (n^2/R^2 - lam/c) f`` from the inner end
    (``f = 0``, ``f' = 1``) to ``s0``, applies ``f'(s0+) = (c_-/c_+) f'(s0-)``
    and continues to ``s_max``. Several trial values are integrated per
    sweep and the bracket shrinks to the leftmost sign change.
    """
    if not spec.coeff.piecewise_constant:
        raise ValueError("shooting oracle requires a piecewise-constant coefficient")
    lo, hi = map(float, bracket)
    start = _start(spec, pole_cut)
    f_lo, f_hi = _shoot(spec, n, np.array([lo, hi]), start, steps_per_side)
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f"no sign change of the shooting mismatch on [{lo!r}, {hi!r}]")
    sign_lo = np.sign(f_lo)
    probes = 15
    while hi - lo > rtol * max(abs(lo), abs(hi)):
        x = lo + (hi - lo) * np.arange(1, probes + 1) / (probes + 1)
        fx = _shoot(spec, n, x, start, steps_per_side)
        flips = np.nonzero(np.sign(fx) != sign_lo)[0]
        j = int(flips[0]) if flips.size else probes
        lo, hi = (x[j - 1] if j > 0 else lo), (x[j] if j < probes else hi)
    return 0.5 * (lo + hi)


def shoot_lowest(spec: DomainSpec, n: int, window, probes: int = 64, **kw) -> float:
    """Lowest shooting eigenvalue in ``window``, bracketed by a mismatch scan."""
    lo, hi = map(float, window)
    start = _start(spec, kw.get("pole_cut"))
    x = np.linspace(lo, hi, probes + 1)
    fx = _shoot(spec, n, x, start, kw.get("steps_per_side", 10000))
    flips = np.nonzero(np.sign(fx[1:]) != np.sign(fx[0]))[0]
    if flips.size == 0:
        raise BracketError(f"no eigenvalue found in [{lo!r}, {hi!r}]")
    j = int(flips[0]) + 1
    return shoot_eigenvalue(spec, n, (x[j - 1], x[j]), **kw)


def _shoot(spec, n, lam, start, steps):
    """Boundary mismatch ``f(s_max)`` (up to a positive factor) for each trial ``lam``."""
    lam = np.asarray(lam, dtype=float)
    cm, cp = spec.coeff.c_minus, spec.coeff.c_plus
    M_in = _transfer(spec.profile, n, lam, cm, start, spec.s0, steps)
    M_out = _transfer(spec.profile, n, lam, cp, spec.s0, spec.s_max, steps)
    y = M_in[:, :, 1]                       # from (f, f') = (0, 1)
    y = y * np.array([1.0, cm / cp])        # flux continuity at s0
    y = np.einsum("lij,lj->li", M_out, y)
    return y[:, 0] / np.abs(y).max(axis=1)


def _transfer(prof, n, lam, c, a, b, steps):
    """Product of the RK4 step matrices for ``y' = A(s) y`` on ``[a, b]``.

    The system is linear, so each classical RK4 step is a 2x2 matrix; the
    product is formed by pairwise reduction with positive rescaling (signs
    are all the bisection needs).
    """
    hstep = (b - a) / steps
    t = a + 0.5 * hstep * np.arange(2 * steps + 1)
    R, dR = prof(t)
    p = -dR / R
    q = float(n * n) / (R * R)
    L = lam.size

    def A(j):
        out = np.zeros((steps, L, 2, 2))
        out[:, :, 0, 1] = 1.0
        out[:, :, 1, 1] = p[j][:, None]
        out[:, :, 1, 0] = q[j][:, None] - lam[None, :] / c
        return out

    eye = np.eye(2)
    k = np.arange(steps)
    A0, Am, A1 = A(2 * k), A(2 * k + 1), A(2 * k + 2)
    K1 = A0
    K2 = Am @ (eye + 0.5 * hstep * K1)
    K3 = Am @ (eye + 0.5 * hstep * K2)
    K4 = A1 @ (eye + hstep * K3)
    M = eye + hstep / 6.0 * (K1 + 2.0 * (K2 + K3) + K4)
    while M.shape[0] > 1:
        if M.shape[0] % 2:
            M = np.concatenate([M, np.broadcast_to(eye, (1, L, 2, 2))])
        M = M[1::2] @ M[0::2]
        M = M / np.abs(M).max(axis=(2, 3), keepdims=True)
    return M[0]
