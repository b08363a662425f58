import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgmlab.potential import turning_point
from wgmlab.quasimode import (PLATEAU, SUPPORT, SupportError, build_quasimode, bump, max_h,
                              quasimode_residual, residual_scaling, smoothstep)
from wgmlab.radial_solver import build_grid

H_LIST = [1 / 20, 1 / 40, 1 / 80, 1 / 160]


def test_bump_shape():
    x = np.linspace(-1.2, 0.2, 2801)
    b = bump(x)
    assert np.all((b >= 0) & (b <= 1))
    assert np.all(b[(x <= SUPPORT[0]) | (x >= SUPPORT[1])] == 0)
    np.testing.assert_allclose(b[(x >= PLATEAU[0]) & (x <= PLATEAU[1])], 1.0)
    assert bump(-0.5) == 1.0


@pytest.mark.parametrize("k", [1, 2])
def test_bump_derivatives(k):
    x = np.linspace(-0.9, -0.1, 801)
    step = 1e-5
    fd = (bump(x + step, k - 1) - bump(x - step, k - 1)) / (2 * step)
    np.testing.assert_allclose(bump(x, k), fd, atol=2e-4 * np.max(np.abs(fd)))


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 1.5))
def test_smoothstep_symmetry(t):
    assert smoothstep(t) + smoothstep(1 - t) == pytest.approx(1.0)
    assert 0.0 <= smoothstep(t) <= 1.0


def independent_residual(pot, E, h, m=200_001):
    """Finite differences of sampled ``f_h`` and trapezoid sums in ``R ds``."""
    rho = turning_point(pot, E)
    w = h ** (2 / 3)
    r = np.linspace(rho + SUPPORT[0] * w, rho + SUPPORT[1] * w, m)
    f = h ** (-1 / 3) * bump((r - rho) / w)
    flux = r * np.gradient(f, r, edge_order=2)
    res = -h * h * np.gradient(flux, r, edge_order=2) / r + (pot.inner(r) - E) * f
    num = np.trapezoid(r * res ** 2, r)
    den = np.trapezoid(r * f ** 2, r)
    return np.sqrt(num / den)


@pytest.mark.parametrize("h", H_LIST)
def test_residual_two_routes(pot, annulus, h):
    for E in (pot.E0, pot.E0 + 0.3 * pot.eta0):
        assert quasimode_residual(annulus, E, h) == pytest.approx(independent_residual(pot, E, h), rel=1e-4)


def test_scaling(annulus, pot):
    rep = residual_scaling(annulus, pot.E0, H_LIST)
    assert rep.support_ok
    assert np.all(np.diff(rep.residuals) < 0)
    assert 0.6 <= rep.fitted_slope <= 0.85
    target = 2 ** (2 / 3)
    assert all(abs(r - target) <= 0.15 * target for r in rep.ratios())
    assert all(rep.spectral_check)
    # the dr-normalised L2 norm of f_h is h-independent
    np.testing.assert_allclose(rep.norms_dr, rep.norms_dr[0], rtol=1e-10)


def test_too_large_h(annulus, pot):
    h0 = max_h(pot, pot.E0)
    with pytest.raises(SupportError, match="h_0"):
        residual_scaling(annulus, pot.E0, [1.2 * h0, 1 / 40])


def test_build_quasimode(annulus, pot):
    h = 1 / 40
    grid = build_grid(annulus, 4001)
    vals, ok = build_quasimode(pot, pot.E0, h, grid)
    assert ok
    assert np.max(vals) == pytest.approx(h ** (-1 / 3))
    assert np.all(vals[grid.nodes >= 1.0] == 0)
