"""Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

Eigenvalues are located with a vectorised multisection on the Sturm
count; eigenvectors come from inverse iteration on the shifted matrix.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

_PROBES = 31
_TINY = np.finfo(float).tiny ** 0.5


def sturm_count(d: np.ndarray, e: np.ndarray, x) -> np.ndarray:
    """Number of eigenvalues strictly below each shift in ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e2 = e * e
    count = np.zeros(x.shape, dtype=np.int64)
    q = d[0] - x
    count += q < 0
    for i in range(1, d.size):
        q = np.where(q == 0.0, -_TINY, q)
        q = (d[i] - x) - e2[i - 1] / q
        count += q < 0
    return count


def gershgorin(d: np.ndarray, e: np.ndarray):
    r = np.zeros_like(d)
    r[:-1] += np.abs(e)
    r[1:] += np.abs(e)
    return float(np.min(d - r)), float(np.max(d + r))


def bisect_eigenvalues(d, e, lo: float, hi: float, max_count=None, rtol: float = 1e-12):
    """All eigenvalues in ``[lo, hi)`` (ascending, at most ``max_count``)."""
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    glo, ghi = gershgorin(d, e)
    lo, hi = max(lo, glo - 1e-12 * abs(glo)), min(hi, ghi + 1e-12 * abs(ghi))
    if not lo < hi:
        return np.empty(0)
    k_lo, k_hi = sturm_count(d, e, [lo, hi])
    targets = np.arange(k_lo, k_hi)
    if max_count is not None:
        targets = targets[:max_count]
    if targets.size == 0:
        return np.empty(0)
    a = np.full(targets.size, lo)
    b = np.full(targets.size, hi)
    frac = np.arange(1, _PROBES + 1) / (_PROBES + 1)
    atol = 4 * np.finfo(float).eps * max(abs(lo), abs(hi))
    while True:
        width = b - a
        active = width > np.maximum(rtol * np.maximum(np.abs(a), np.abs(b)), atol)
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        probes = a[idx, None] + width[idx, None] * frac[None, :]
        counts = sturm_count(d, e, probes.ravel()).reshape(probes.shape)
        tj = targets[idx, None]
        # bracket [a, b] keeps count(a) <= j < count(b)
        below = counts <= tj
        n_below = below.sum(axis=1)
        new_a = np.where(n_below > 0, probes[np.arange(idx.size), np.maximum(n_below - 1, 0)], a[idx])
        new_b = np.where(n_below < _PROBES, probes[np.arange(idx.size), np.minimum(n_below, _PROBES - 1)], b[idx])
        a[idx], b[idx] = new_a, new_b
    return 0.5 * (a + b)


def inverse_iteration(d, e, lam: float, previous=(), iterations: int = 3) -> np.ndarray:
    """Unit eigenvector of the tridiagonal matrix for the eigenvalue ``lam``.

    ``previous`` holds vectors to orthogonalise against (close eigenvalues).
    """
    n = d.size
    shift = lam
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[2, :-1] = e
    # deterministic, non-degenerate start vector
    x = 1.0 + 0.1 * np.cos(np.arange(n) * 0.7071)
    for _ in range(iterations):
        ab[1] = d - shift
        try:
            y = solve_banded((1, 1), ab, x, check_finite=False)
        except np.linalg.LinAlgError:
            shift = lam + 8 * np.finfo(float).eps * max(abs(lam), 1.0)
            continue
        for v in previous:
            y -= np.dot(v, y) * v
        x = y / np.linalg.norm(y)
    return x
