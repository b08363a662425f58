import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from wgmlab.modes import omega_mass
from wgmlab.radial_solver import assemble_operator
from wgmlab.waves import (frequency_ratio, frequency_ratio_alt, time_factor, tunneling_fit,
                          wave_energy, wave_norm)

from conftest import OMEGA, SWEEP


def test_constant_datum():
    assert frequency_ratio(0.0) == 1.0
    assert frequency_ratio_alt(0.0) == 1.0


def test_lambda_drift(sweep, pot):
    drift = [(frequency_ratio(m) - m.n * np.sqrt(pot.E0)) / m.n ** (1 / 3) for m in sweep]
    assert all(0 < d < 3 for d in drift)
    assert drift[-1] < drift[0]


def test_one_period():
    lam = 37.0
    T = 2 * np.pi / np.sqrt(lam)
    assert time_factor(lam, T) == pytest.approx(T / 2, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 1e4), st.floats(0.01, 5.0))
def test_time_factor(lam, T):
    tf = time_factor(lam, T)
    k = np.sqrt(lam)
    ref = quad(lambda t: np.cos(k * t) ** 2, 0, T, limit=400)[0]
    assert tf == pytest.approx(ref, rel=1e-8, abs=1e-12)
    assert abs(tf - T / 2) <= 1 / (2 * k)


def test_wave_norm(sweep, annulus, fit):
    m = {x.n: x for x in sweep}[60]
    obs = wave_norm(m, OMEGA, 1.0, annulus)
    assert obs.spacetime_norm == pytest.approx(np.sqrt(obs.time_factor) * omega_mass(m, OMEGA))
    assert obs.spacetime_norm <= np.exp(-0.8 * fit.d_pred * 60)
    with pytest.raises(ValueError):
        wave_norm(m, OMEGA, 0.0)
    with pytest.raises(ValueError, match="dist"):
        wave_norm(m, (0.9, 1.1), 1.0, annulus)


def test_energy_conserved(sweep, annulus):
    m = sweep[0]
    system = assemble_operator(annulus, m.grid, m.n)
    e = [wave_energy(m, system, t) for t in (0.0, 0.1, 0.77)]
    np.testing.assert_allclose(e, e[0], rtol=1e-12)
    assert e[0] == pytest.approx(m.lam, rel=1e-9)


def test_tunneling(annulus, sweep, pot):
    tf = tunneling_fit(annulus, SWEEP, OMEGA, 1.0, modes=sweep)
    assert tf.passed
    rate = -tf.slope * np.sqrt(pot.E0)
    assert 0.8 * tf.d_pred <= rate <= 1.3 * tf.d_pred
    assert tf.consistency <= 0.15


def test_tunneling_inside_allowed_region(annulus, sweep):
    with pytest.raises(ValueError, match="dist"):
        tunneling_fit(annulus, SWEEP, (0.95, 1.05), 1.0, modes=sweep)
