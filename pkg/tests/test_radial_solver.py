import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgmlab.radial_solver import (BracketError, GridError, assemble_operator, build_grid,
                                  eigen_window, lowest_eigenpair, required_nodes,
                                  shoot_eigenvalue, shoot_lowest, transmission_residual,
                                  weighted_form_identity)


def test_grid_contains_interface(annulus):
    g = build_grid(annulus, 101)
    assert g.size == 101
    assert g.nodes[g.i0] == 1.0
    assert g.nodes[0] == 0.5 and g.nodes[-1] == 1.5
    assert np.all(np.diff(g.nodes) > 0)
    assert g.dual.sum() == pytest.approx(1.0)


def test_small_grid_rejected(annulus):
    with pytest.raises(GridError):
        build_grid(annulus, 10)


def test_pole_cut(disk):
    g = build_grid(disk, 400, 0.0015)
    assert g.nodes[0] == 0.0015 and g.pole_cut == 0.0015
    h = build_grid(disk, 400, 0.00075)
    # only the pole cell moves when the cut is halved
    np.testing.assert_array_equal(g.nodes[1:], h.nodes[1:])


def test_flat_stencil(flat):
    g = build_grid(flat, 101)
    sys_ = assemble_operator(flat, g, 0)
    dx = g.spacing[0]
    np.testing.assert_allclose(sys_.diag * dx ** 2, 2.0)
    np.testing.assert_allclose(sys_.offdiag * dx ** 2, -1.0)


def test_flat_eigenpair(flat):
    g = build_grid(flat, 201)
    pairs = eigen_window(assemble_operator(flat, g, 0), (9.0, 10.5))
    assert len(pairs) == 1
    p = pairs[0]
    assert p.lam == pytest.approx(np.pi ** 2, rel=1e-4)
    ref = np.sin(np.pi * g.nodes) / np.sqrt(np.pi)
    assert np.max(np.abs(p.psi - ref)) <= 1e-3
    assert transmission_residual(p, flat) <= 1e-4


def test_flat_shooting(flat):
    assert shoot_eigenvalue(flat, 0, (9.0, 10.5)) == pytest.approx(np.pi ** 2, rel=1e-8)


def test_shooting_bracket_error(annulus, pot):
    with pytest.raises(BracketError):
        shoot_eigenvalue(annulus, 20, (1.0, 400.0 * pot.E0))


def test_window_below_lower_bound_empty(annulus, pot):
    g = build_grid(annulus, required_nodes(annulus, 20))
    assert eigen_window(assemble_operator(annulus, g, 20), (0.0, 400 * pot.E0)) == []


def test_window_contains_wgm(annulus, pot):
    for n, frac in ((20, 1.0), (40, 0.5)):
        g = build_grid(annulus, required_nodes(annulus, n))
        sys_ = assemble_operator(annulus, g, n)
        pairs = eigen_window(sys_, (n * n * pot.E0, n * n * (pot.E0 + frac * pot.eta0)))
        assert pairs
        assert 0 < pairs[0].E_h - pot.E0 < frac * pot.eta0


def test_eigenpair_normalisation_and_equation(annulus):
    g = build_grid(annulus, 800)
    sys_ = assemble_operator(annulus, g, 20)
    p = lowest_eigenpair(sys_)
    w = g.R * g.dual
    assert 2 * np.pi * np.sum(w * p.psi ** 2) == pytest.approx(1.0, rel=1e-12)
    assert p.psi[0] == 0.0 and p.psi[-1] == 0.0
    assert p.psi[np.argmax(np.abs(p.psi))] > 0
    # A psi = lam W psi with A the stiffness + potential form
    k, f = sys_.stiffness, p.psi
    Af = -(k[1:] * np.diff(f)[1:] - k[:-1] * np.diff(f)[:-1]) + sys_.potential * f[1:-1]
    np.testing.assert_allclose(Af, p.lam * sys_.weight * f[1:-1], atol=1e-8 * p.lam * np.abs(f).max())


def test_transmission_fine_grid(annulus):
    res = []
    for N in (2001, 4001, 8001):
        p = lowest_eigenpair(assemble_operator(annulus, build_grid(annulus, N), 20))
        res.append(transmission_residual(p, annulus))
    assert res[-1] <= 1e-3
    assert res[0] > res[1] > res[2]


def test_shooting_vs_richardson(annulus):
    n, N = 10, 400
    lam_h = lowest_eigenpair(assemble_operator(annulus, build_grid(annulus, N), n)).lam
    lam_h2 = lowest_eigenpair(assemble_operator(annulus, build_grid(annulus, 2 * N - 1), n)).lam
    rich = (4 * lam_h2 - lam_h) / 3
    shot = shoot_lowest(annulus, n, (0.99 * lam_h, 1.01 * lam_h))
    assert abs(shot - rich) / shot <= 1e-6


def test_weighted_identity(annulus):
    g = build_grid(annulus, 600)
    sys_ = assemble_operator(annulus, g, 20)
    f = lowest_eigenpair(sys_).psi
    phi = 0.2 * np.abs(g.nodes - 1.0)
    out = weighted_form_identity(sys_, f, phi, 1 / 20)
    assert out["lhs"] == pytest.approx(out["rhs"], rel=1e-9)
    assert out["weight_term"] == pytest.approx(out["weight_term_continuum"], rel=1e-2)


def test_pole_halving(disk):
    for n in (5, 20):
        N = required_nodes(disk, n)
        a = lowest_eigenpair(assemble_operator(disk, build_grid(disk, N, 1.5e-3), n)).lam
        b = lowest_eigenpair(assemble_operator(disk, build_grid(disk, N, 0.75e-3), n)).lam
        assert abs(a - b) / a < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 60), st.integers(0, 3))
def test_operator_lower_bound(annulus, pot, n, extra):
    N = required_nodes(annulus, n) + 97 * extra
    lam = lowest_eigenpair(assemble_operator(annulus, build_grid(annulus, N), n)).lam
    assert lam > n * n * pot.E0
