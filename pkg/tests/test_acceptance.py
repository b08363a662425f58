"""Acceptance criteria on the canonical annulus (R0=0.5, R1=1, R2=1.5, c-=1, c+=4).

Each test prints one ``criterion k: PASS|FAIL`` line; the lines are also
collected into the pytest terminal summary.
"""
import time

import numpy as np
import pytest

import conftest
from wgmlab import geometry as G
from wgmlab.agmon import (agmon_distance, agmon_profile, closed_form_annulus_distance,
                          closed_form_turning_distance, eikonal_residual)
from wgmlab.config import default_config_text, parse_config
from wgmlab.modes import decay_fit, mode_sweep
from wgmlab.potential import effective_potential
from wgmlab.quasimode import residual_scaling
from wgmlab.radial_solver import (assemble_operator, build_grid, lowest_eigenpair,
                                  required_nodes, shoot_lowest, transmission_residual)
from wgmlab.report import export
from wgmlab.runner import run_experiment
from wgmlab.waves import tunneling_fit

SWEEP = conftest.SWEEP
OMEGA = conftest.OMEGA
D_PRED = 0.2695


def report(k: int, ok: bool, detail: str):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def timed_sweep(annulus):
    t = time.perf_counter()
    modes = mode_sweep(annulus, SWEEP)
    return modes, time.perf_counter() - t


def test_c01_eigenvalue_asymptotics(timed_sweep, pot):
    modes, elapsed = timed_sweep
    assert all(m.grid.size == 40 * m.n for m in modes)
    gap = np.array([m.lam / m.n ** 2 - pot.E0 for m in modes])
    slope = np.polyfit(np.log(SWEEP), np.log(gap), 1)[0]
    ok = bool(np.all(gap > 0) and np.all(np.diff(gap) < 0) and -1.0 <= slope <= -0.5 and elapsed < 30)
    report(1, ok, f"slope={slope:.4f} in [-1,-0.5], gaps {gap[0]:.4f}..{gap[-1]:.4f}, {elapsed:.1f}s")


def test_c02_operator_lower_bound(annulus, pot):
    violations, count = 0, 0
    for n in list(range(1, 20, 3)) + SWEEP:
        base = required_nodes(annulus, n)
        for N in (base, (3 * base) // 2, 2 * base + 1):
            lam = lowest_eigenpair(assemble_operator(annulus, build_grid(annulus, N), n)).lam
            violations += not lam > n * n * pot.E0
            count += 1
    report(2, violations == 0, f"{violations} violations of lambda > n^2 E_0 over {count} (n, N) solves")


def test_c03_quasimode_law(annulus, pot):
    t = time.perf_counter()
    rep = residual_scaling(annulus, pot.E0, [1 / 20, 1 / 40, 1 / 80, 1 / 160])
    elapsed = time.perf_counter() - t
    ok = 0.6 <= rep.fitted_slope <= 0.85 and all(rep.spectral_check) and elapsed < 10
    report(3, ok, f"slope={rep.fitted_slope:.4f} in [0.6,0.85], spectral check "
                  f"{sum(rep.spectral_check)}/{len(rep.spectral_check)}, {elapsed:.1f}s")


def test_c04_oracle_equivalence(annulus):
    t = time.perf_counter()
    worst = 0.0
    for n in (10, 20, 40):
        N = 40 * n
        lam_h = lowest_eigenpair(assemble_operator(annulus, build_grid(annulus, N), n)).lam
        lam_h2 = lowest_eigenpair(assemble_operator(annulus, build_grid(annulus, 2 * N - 1), n)).lam
        rich = (4 * lam_h2 - lam_h) / 3
        shot = shoot_lowest(annulus, n, (0.99 * lam_h, 1.01 * lam_h))
        worst = max(worst, abs(shot - rich) / abs(shot))
    elapsed = time.perf_counter() - t
    report(4, worst <= 1e-6 and elapsed < 20, f"max rel |shoot - Richardson| = {worst:.2e}, {elapsed:.1f}s")


def test_c05_agmon_oracle(pot):
    rng = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(100):
        E = pot.E0 + 0.999 * pot.eta0 * rng.random()
        s = 0.5 + rng.random()
        rho = np.sqrt(1.0 / E)
        if s <= rho:
            ref = closed_form_turning_distance(1.0, E, s)
        elif s <= 1.0:
            ref = 0.0
        else:
            ref = closed_form_annulus_distance(4.0, E, 1.0, s)
        worst = max(worst, abs(agmon_distance(pot, E, s) - ref))
    grid = np.linspace(0.5, 1.5, 4001)
    eik = max(eikonal_residual(agmon_profile(pot, E, grid), pot)
              for E in (pot.E0, pot.E0 + 0.25 * pot.eta0))
    report(5, worst <= 1e-8 and eik <= 1e-4, f"max |quad - closed| = {worst:.2e}, eikonal = {eik:.2e}")


def test_c06_exponential_concentration(annulus, timed_sweep):
    modes, elapsed = timed_sweep
    t = time.perf_counter()
    fit = decay_fit(annulus, SWEEP, OMEGA, modes=modes)
    elapsed += time.perf_counter() - t
    bound = fit.agmon_upper_bound(fit.d_pred / 2)
    ratio = fit.d_fit / D_PRED
    ok = (fit.r_squared >= 0.98 and 0.8 <= ratio <= 1.3 and all(bound)
          and abs(fit.d_pred - D_PRED) < 5e-5 and elapsed < 60)
    report(6, ok, f"d_fit={fit.d_fit:.5f} ({ratio:.3f} d_pred), r2={fit.r_squared:.5f}, "
                  f"Agmon bound {sum(bound)}/{len(bound)}, {elapsed:.1f}s")


def test_c07_transmission(annulus, timed_sweep):
    modes, _ = timed_sweep
    worst, monotone = 0.0, True
    for m in modes:
        levels = [m.grid.size, (m.grid.size + 8001) // 2, 8001]
        res = [transmission_residual(m.pair, annulus)]
        for N in levels[1:]:
            res.append(transmission_residual(
                lowest_eigenpair(assemble_operator(annulus, build_grid(annulus, N), m.n)), annulus))
        worst = max(worst, res[-1])
        monotone &= all(b < a for a, b in zip(res, res[1:]))
    report(7, worst <= 1e-3 and monotone, f"max flux residual at N=8001: {worst:.2e}, decreasing={monotone}")


def test_c08_wave_saturation(annulus, timed_sweep, pot):
    modes, _ = timed_sweep
    T = 1.0
    tf = tunneling_fit(annulus, SWEEP, OMEGA, T, modes=modes)
    tf_ok = all(abs(f - T / 2) <= 1 / (2 * np.sqrt(m.lam)) for f, m in zip(tf.time_factors, modes))
    ok = tf.slope < 0 and tf.r_squared >= 0.98 and tf.consistency <= 0.15 and tf_ok
    report(8, ok, f"slope={tf.slope:.4f}, r2={tf.r_squared:.5f}, |slope|sqrt(E0) vs d_fit "
                  f"off by {100 * tf.consistency:.1f}%, time factor bounds={tf_ok}")


def test_c09_pole_robustness(annulus, disk, timed_sweep):
    L = disk.s_max
    cut = 1e-3 * L
    worst = 0.0
    for n in (5, 10, 20, 40):
        N = required_nodes(disk, n, cut)
        a = lowest_eigenpair(assemble_operator(disk, build_grid(disk, N, cut), n)).lam
        b = lowest_eigenpair(assemble_operator(disk, build_grid(disk, N, cut / 2), n)).lam
        worst = max(worst, abs(a - b) / a)
    modes, _ = timed_sweep
    fa = decay_fit(annulus, SWEEP, OMEGA, modes=modes)
    fd = decay_fit(disk, SWEEP, OMEGA, modes=mode_sweep(disk, SWEEP))
    gap = abs(fd.d_fit - fa.d_fit) / fa.d_fit
    report(9, worst < 1e-8 and gap <= 0.05,
           f"pole_cut halving rel change {worst:.2e}, disk vs annulus d_fit gap {100 * gap:.2f}%")


def test_c10_determinism(tmp_path):
    paths = []
    for k in range(2):
        cfg = parse_config(default_config_text())
        bundle = run_experiment(cfg, sections=["potential", "agmon", "decay", "waves"])
        paths.append(sorted(export(bundle, tmp_path / f"run{k}", "csv")))
    same = [a.read_bytes() == b.read_bytes() for a, b in zip(*paths)]
    ok = len(paths[0]) == len(paths[1]) and all(same)
    report(10, ok, f"{sum(same)}/{len(same)} CSV files byte-identical across two runs")
