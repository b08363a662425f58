import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgmlab import geometry as G
from wgmlab.potential import EnergyRangeError, allowed_region, effective_potential, turning_point


def test_annulus_constants(pot):
    assert pot.admissible
    assert pot.E0 == pytest.approx(1.0, abs=1e-14)
    assert pot.eta0 == pytest.approx(7.0 / 9.0, rel=1e-10)
    assert pot.s_outer_min == pytest.approx(1.5, abs=1e-9)


def test_inadmissible():
    pot = effective_potential(G.build_annulus(0.5, 1.0, 1.5, 1.0, 2.0))
    assert not pot.admissible
    assert pot.eta0 == 0.0
    with pytest.raises(EnergyRangeError):
        turning_point(pot, 1.0)


def test_disk_same_constants(disk, pot):
    dpot = effective_potential(disk)
    assert dpot.admissible
    assert dpot.E0 == pytest.approx(pot.E0, rel=1e-12)
    assert dpot.eta0 == pytest.approx(pot.eta0, rel=1e-10)


def test_turning_points(pot):
    assert turning_point(pot, 1.0) == 1.0
    assert turning_point(pot, 1.21) == pytest.approx(1.0 / 1.1, rel=1e-13)
    with pytest.raises(EnergyRangeError, match="eta0"):
        turning_point(pot, pot.E0 + pot.eta0)


def test_allowed_regions(pot):
    assert allowed_region(pot, 1.0).intervals == ((1.0, 1.0),)
    (lo, hi), = allowed_region(pot, 1.21).intervals
    assert lo == pytest.approx(1 / 1.1, rel=1e-12) and hi == 1.0
    assert allowed_region(pot, 0.5).intervals == ()


def test_allowed_region_above_window(pot):
    # E above the outer minimum: outer allowed band [2/sqrt(E), 1.5] appears
    E = 2.0
    ivs = allowed_region(pot, E).intervals
    assert len(ivs) == 2
    assert ivs[0][0] == pytest.approx(1 / np.sqrt(2.0), rel=1e-9)
    assert ivs[1][0] == pytest.approx(2.0 / np.sqrt(2.0), rel=1e-9)
    assert ivs[1][1] == 1.5


def test_extension_continuous_from_left(pot):
    assert float(pot(1.0)) == pytest.approx(pot.E0)
    assert float(pot.inner(1.0 - 1e-9)) == pytest.approx(pot.E0, rel=1e-8)
    assert float(pot(1.0 + 1e-9)) == pytest.approx(4.0, rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 0.999))
def test_turning_point_inverts_potential(pot, u):
    E = pot.E0 + u * pot.eta0
    rho = turning_point(pot, E)
    assert 0.5 < rho <= 1.0
    assert float(pot.inner(rho)) == pytest.approx(E, rel=1e-12)
    s = np.linspace(rho, 1.0, 64)
    assert np.all(pot.inner(s) <= E * (1 + 1e-12))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.6, 1.2), st.floats(0.2, 0.6), st.floats(0.5, 2.0), st.floats(0.5, 8.0))
def test_admissibility_criterion(R1, gap, cm, cp):
    R2 = R1 + gap
    pot = effective_potential(G.build_annulus(0.5 * R1, R1, R2, cm, cp))
    margin = cp / R2 ** 2 - cm / R1 ** 2
    if abs(margin) > 1e-6:
        assert pot.admissible == (margin > 0)
    if pot.admissible:
        assert pot.eta0 == pytest.approx(margin, rel=1e-8)
