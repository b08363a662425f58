import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgmlab import geometry as G
from wgmlab.geometry import DomainError


def test_annulus_fields(annulus):
    assert annulus.s0 == 1.0
    assert (annulus.s_min, annulus.s_max) == (0.5, 1.5)
    assert not annulus.has_pole
    assert annulus.inner_boundary == "dirichlet"
    R, dR = annulus.profile(np.array([0.5, 1.0, 1.5]))
    np.testing.assert_array_equal(R, [0.5, 1.0, 1.5])
    np.testing.assert_array_equal(dR, [1.0, 1.0, 1.0])
    assert G.validate_domain(annulus) == []


@pytest.mark.parametrize("args, message", [
    ((1.0, 0.5, 1.5, 1.0, 4.0), "R0 < R1 violated"),
    ((0.5, 1.5, 1.0, 1.0, 4.0), "R1 < R2 violated"),
    ((0.0, 1.0, 1.5, 1.0, 4.0), "0 < R0 violated"),
    ((0.5, 1.0, 1.5, 0.0, 4.0), "coefficient positivity violated"),
    ((0.5, 1.0, 1.5, 1.0, -1.0), "coefficient positivity violated"),
])
def test_annulus_errors(args, message):
    with pytest.raises(DomainError, match=message):
        G.build_annulus(*args)


def test_inadmissible_annulus_still_builds():
    spec = G.build_annulus(0.5, 1.0, 1.5, 1.0, 2.0)
    assert G.validate_domain(spec) == []


def test_disk_matches_annulus_away_from_pole(disk, annulus):
    assert disk.has_pole and disk.s_min == 0.0
    assert disk.inner_boundary == "pole"
    s = np.linspace(0.5, 1.5, 11)
    np.testing.assert_allclose(disk.profile.R(s), annulus.profile.R(s))
    assert disk.coeff == annulus.coeff


def test_interface_must_be_interior():
    with pytest.raises(DomainError, match="interface must be interior"):
        G.build_disk(1.5, 1.5, 1.0, 4.0)


def test_bulb_profile_accepted():
    s = np.linspace(0.0, np.pi, 201)
    R = np.sin(s) * (1.0 + 0.3 * np.sin(s))
    prof = G.tabulated_profile(np.c_[s, R].tolist())
    assert prof.has_pole and prof.kind == G.TABULATED
    spec = G.build_surface(prof, 1.2, 1.0, 4.0)
    assert G.validate_domain(spec) == []
    # PCHIP reproduces the samples exactly
    np.testing.assert_allclose(prof.R(s[1:-1]), R[1:-1], rtol=0, atol=1e-15)


def test_zero_sample_reported():
    samples = [[0.5, 0.5], [0.8, 0.0], [1.0, 1.0], [1.5, 1.5]]
    prof = G.tabulated_profile(samples, has_pole=False)
    spec = G.DomainSpec(prof, G.CoefficientSpec(1.0, 1.0, 4.0))
    problems = G.validate_domain(spec)
    assert any(p.startswith("R(s)>0 violated at s=0.8") for p in problems)


def test_zero_coefficient_reported(annulus):
    spec = G.DomainSpec(annulus.profile, G.CoefficientSpec(1.0, 0.0, 4.0))
    assert "coefficient positivity violated" in G.validate_domain(spec)


def test_coefficient_sides():
    c = G.CoefficientSpec(1.0, 1.0, 4.0)
    assert float(c(1.0)) == 1.0
    assert float(c(1.0, "+")) == 4.0
    np.testing.assert_array_equal(c(np.array([0.9, 1.1])), [1.0, 4.0])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(0.05, 1.0),
       st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_random_annuli_valid(R0, d1, d2, cm, cp):
    spec = G.build_annulus(R0, R0 + d1, R0 + d1 + d2, cm, cp)
    assert G.validate_domain(spec) == []
    assert spec.s_min < spec.s0 < spec.s_max


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.01, 0.99))
def test_disk_normalisation(L, frac):
    spec = G.build_disk(L, frac * L, 1.0, 2.0)
    s = np.array([1e-6, 1e-4]) * L
    np.testing.assert_allclose(spec.profile.R(s) / s, 1.0)
