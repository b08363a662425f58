"""Configuration-driven experiment runner producing :class:`ResultBundle` objects."""
from __future__ import annotations

import json
import math
import os
import platform
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .agmon import (agmon_distance, agmon_profile, closed_form_annulus_distance,
                    closed_form_turning_distance, eikonal_pointwise)
from .config import ExperimentConfig
from .geometry import ANNULUS, DISK, DomainSpec
from .modes import (N_FLOOR, decay_fit, localization, mode_sweep, spectral_saturation)
from .potential import effective_potential, turning_point
from .quasimode import residual_scaling
from .radial_solver import (assemble_operator, build_grid, default_pole_cut, eigen_window,
                            lowest_eigenpair, required_nodes, shoot_lowest, transmission_residual)
from .waves import tunneling_fit, wave_energy

REPORT_SECTIONS = ("potential", "agmon", "solve", "quasimode", "decay", "waves")
TRANSMISSION_NODES = 8001


class ExperimentError(ValueError):
    """A module error raised while running one section, tagged with its name."""

    def __init__(self, section: str, cause: Exception):
        super().__init__(f"{section}: {type(cause).__name__}: {cause}")
        self.section = section
        self.cause = cause


def _clean(x):
    """JSON-safe scalars: numpy to Python, non-finite floats to ``None``."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


@dataclass
class Table:
    name: str
    columns: list          # [[name, unit], ...]
    rows: list

    def to_dict(self):
        return {"name": self.name, "columns": self.columns, "rows": self.rows}


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    threshold: object = None
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "value": self.value,
                "threshold": self.threshold, "detail": self.detail}


@dataclass
class Section:
    name: str
    records: dict = field(default_factory=dict)
    tables: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def table(self, name: str, columns, rows, config_id: str):
        cols = [list(c) for c in columns] + [["config_id", "-"]]
        self.tables.append(Table(name, cols, [_clean(list(r)) + [config_id] for r in rows]))

    def check(self, name, passed, value=None, threshold=None, detail=""):
        self.checks.append(Check(name, bool(passed), _clean(value), _clean(threshold), detail))

    def to_dict(self):
        return {"name": self.name, "records": self.records,
                "tables": [t.to_dict() for t in self.tables],
                "checks": [c.to_dict() for c in self.checks]}


@dataclass
class ResultBundle:
    config_echo: str
    config_id: str
    sections: list
    provenance: dict

    @property
    def checks(self):
        return [(s.name, c) for s in self.sections for c in s.checks]

    @property
    def passed(self) -> bool:
        return all(c.passed for _, c in self.checks)

    @property
    def summary(self) -> dict:
        failed = [f"{s}.{c.name}" for s, c in self.checks if not c.passed]
        return {"total": len(self.checks), "passed": len(self.checks) - len(failed),
                "failed": failed, "all_passed": not failed}

    def section(self, name: str) -> Section:
        for s in self.sections:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self):
        return {"config_echo": self.config_echo, "config_id": self.config_id,
                "provenance": self.provenance, "summary": self.summary,
                "sections": [s.to_dict() for s in self.sections]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False)

    @classmethod
    def from_dict(cls, data: dict) -> "ResultBundle":
        sections = []
        for s in data["sections"]:
            sections.append(Section(
                s["name"], s["records"],
                [Table(t["name"], t["columns"], t["rows"]) for t in s["tables"]],
                [Check(**c) for c in s["checks"]]))
        return cls(data["config_echo"], data["config_id"], sections, data["provenance"])

    @classmethod
    def from_json(cls, text: str) -> "ResultBundle":
        return cls.from_dict(json.loads(text))


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else time.time()
    return datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _is_flat(spec: DomainSpec) -> bool:
    """``R(s) = s`` with constant coefficients: the closed-form oracles apply."""
    return spec.profile.kind in (ANNULUS, DISK) and spec.coeff.piecewise_constant


class _Context:
    """Per-run cache shared between sections (mode sweeps are reused)."""

    def __init__(self, cfg: ExperimentConfig, threads: int):
        self.cfg = cfg
        self.spec = cfg.domain_spec()
        self.pot = effective_potential(self.spec)
        self.threads = threads
        self.cid = cfg.config_id
        self._modes = None

    @property
    def start(self):
        p = self.cfg.parameters
        if not self.spec.has_pole:
            return self.spec.s_min
        return p.pole_cut if p.pole_cut is not None else default_pole_cut(self.spec)

    def modes(self):
        if self._modes is None:
            p = self.cfg.parameters
            self._modes = mode_sweep(self.spec, p.n_values, p.nodes_per_n, p.pole_cut, self.threads)
        return self._modes

    @property
    def E(self):
        p = self.cfg.parameters
        return self.pot.E0 if p.E is None else float(p.E)


def _potential(ctx: _Context) -> Section:
    sec = Section("potential")
    spec, pot, p = ctx.spec, ctx.pot, ctx.cfg.parameters
    s = np.linspace(ctx.start, spec.s_max, p.potential_samples)
    s = np.union1d(s, [spec.s0])
    R = spec.profile.R(s)
    inner = s <= spec.s0
    c = np.where(inner, spec.coeff.inner(s), spec.coeff.outer(s))
    V = pot(s)
    sec.table("potential", [("s", "length"), ("R", "length"), ("c", "speed^2"), ("V_c", "energy")],
              zip(s, R, c, V), ctx.cid)
    E_mark = pot.E0 + 0.5 * pot.eta0
    rho = turning_point(pot, E_mark) if pot.admissible else None
    sec.records = _clean({"E_0": pot.E0, "eta_0": pot.eta0, "admissible": pot.admissible,
                          "V_outer_min": pot.V_outer_min, "s_outer_min": pot.s_outer_min,
                          "s_0": spec.s0, "E_marker": E_mark, "rho_marker": rho})
    sec.check("admissible", pot.admissible, pot.eta0, 0.0, "eta_0 > 0 and inner minimum only at s_0")
    if pot.admissible:
        gap = float(np.min(V - pot.E0))
        sec.check("V_c >= E_0", gap >= -1e-12 * pot.E0, gap, 0.0)
    if _is_flat(spec):
        E0 = spec.coeff.c_minus / spec.s0 ** 2
        eta = spec.coeff.c_plus / spec.s_max ** 2 - E0
        err = max(abs(pot.E0 - E0), abs(pot.eta0 - eta) if eta > 0 else 0.0)
        sec.check("closed-form E_0 and eta_0", err <= 1e-9, err, 1e-9)
    return sec


def _agmon(ctx: _Context) -> Section:
    sec = Section("agmon")
    spec, pot, p, tol = ctx.spec, ctx.pot, ctx.cfg.parameters, ctx.cfg.tolerances
    if not pot.admissible:
        sec.check("admissible", False, detail="Agmon distance needs an admissible potential")
        return sec
    E = ctx.E
    grid = np.linspace(ctx.start, spec.s_max, p.agmon_nodes)
    prof = agmon_profile(pot, E, grid)
    res = eikonal_pointwise(prof, pot)
    sec.table("agmon", [("s", "length"), ("d", "-"), ("eikonal_residual", "energy"), ("E", "energy")],
              [(a, b, r, E) for a, b, r in zip(grid, prof.d, res)], ctx.cid)
    eik = float(np.nanmax(res)) if np.any(np.isfinite(res)) else 0.0
    sec.records = _clean({"E": E, "rho_E": prof.rho_E, "kink_slope": prof.kink_slope,
                          "lipschitz_bound": prof.lipschitz_bound, "eikonal_max": eik,
                          "nodes": p.agmon_nodes})
    sec.check("eikonal residual", eik <= tol.eikonal_max, eik, tol.eikonal_max)
    sec.check("d >= 0", bool(np.all(prof.d >= 0)), float(np.min(prof.d)), 0.0)
    slopes = np.abs(np.diff(prof.d) / np.diff(grid))
    sec.check("Lipschitz bound", float(np.max(slopes)) <= prof.lipschitz_bound * (1 + 1e-9),
              float(np.max(slopes)), prof.lipschitz_bound)
    if _is_flat(spec) and p.random_checks > 0:
        rng = np.random.default_rng(p.seed)
        Es = pot.E0 + pot.eta0 * 0.999 * rng.random(p.random_checks)
        ss = ctx.start + (spec.s_max - ctx.start) * rng.random(p.random_checks)
        worst, rows = 0.0, []
        for e, x in zip(Es, ss):
            dq = agmon_distance(pot, e, x)
            dc = _closed_form_distance(spec, e, x)
            worst = max(worst, abs(dq - dc))
            rows.append((e, x, dq, dc, abs(dq - dc)))
        sec.table("oracle", [("E", "energy"), ("s", "length"), ("d_quadrature", "-"),
                             ("d_closed_form", "-"), ("abs_diff", "-")], rows, ctx.cid)
        sec.records["oracle_max_diff"] = worst
        sec.records["oracle_seed"] = p.seed
        sec.check("quadrature vs closed form", worst <= tol.agmon_oracle, worst, tol.agmon_oracle)
    return sec


def _closed_form_distance(spec: DomainSpec, E: float, s: float) -> float:
    cm, cp, s0 = spec.coeff.c_minus, spec.coeff.c_plus, spec.s0
    rho = math.sqrt(cm / E)
    if s <= rho:
        return closed_form_turning_distance(cm, E, s)
    if s <= s0:
        return 0.0
    return closed_form_annulus_distance(cp, E, s0, s)


def _solve(ctx: _Context) -> Section:
    sec = Section("solve")
    spec, pot, p, tol = ctx.spec, ctx.pot, ctx.cfg.parameters, ctx.cfg.tolerances
    n = p.n
    N = p.nodes or max(required_nodes(spec, n, p.pole_cut), p.nodes_per_n * n)
    grid = build_grid(spec, N, p.pole_cut)
    system = assemble_operator(spec, grid, n)
    if p.window is not None:
        window = tuple(map(float, p.window))
    else:
        window = (n * n * pot.E0, n * n * (pot.E0 + pot.eta0))
    pairs = eigen_window(system, window, rtol=tol.eigen_rtol)
    lowest = lowest_eigenpair(system)
    shown = pairs or [lowest]
    rows = []
    for k, pair in enumerate(shown):
        rows.extend((n, N, k, pair.lam, x, v) for x, v in zip(grid.nodes, pair.psi))
    sec.table("eigenvectors", [("n", "-"), ("N", "-"), ("k", "-"), ("lambda", "energy"),
                               ("s", "length"), ("psi", "length^-1")], rows, ctx.cid)
    sec.records = _clean({
        "n": n, "N": N, "window": list(window), "pole_cut": grid.pole_cut,
        "eigenvalues": [q.lam for q in pairs], "E_h": [q.E_h for q in pairs],
        "lowest": lowest.lam, "lowest_E_h": lowest.E_h})
    lams = [q.lam for q in pairs] + [lowest.lam]
    if pot.admissible:
        margin = min(l - n * n * pot.E0 for l in lams)
        sec.check("lambda > n^2 E_0", margin > 0, margin, 0.0)

    # flux continuity under refinement, last level at TRANSMISSION_NODES
    levels = sorted({N, (N + TRANSMISSION_NODES) // 2, TRANSMISSION_NODES})
    conv = []
    for M in levels:
        g = build_grid(spec, M, p.pole_cut)
        pair = lowest_eigenpair(assemble_operator(spec, g, n))
        conv.append((n, M, pair.lam, transmission_residual(pair, spec)))
    sec.table("transmission", [("n", "-"), ("N", "-"), ("lambda", "energy"),
                               ("flux_residual", "-")], conv, ctx.cid)
    resid = [r[3] for r in conv]
    sec.check("flux residual", resid[-1] <= tol.transmission_max, resid[-1], tol.transmission_max)
    sec.check("flux residual decreasing", all(b < a for a, b in zip(resid, resid[1:])), resid)

    if p.oracle and spec.coeff.piecewise_constant:
        lam_h = lowest.lam
        lam_h2 = lowest_eigenpair(assemble_operator(spec, build_grid(spec, 2 * N - 1, p.pole_cut), n)).lam
        rich = (4.0 * lam_h2 - lam_h) / 3.0
        shot = shoot_lowest(spec, n, (0.99 * lam_h, 1.01 * lam_h), pole_cut=p.pole_cut,
                            steps_per_side=tol.shoot_steps, rtol=tol.shoot_rtol)
        rel = abs(shot - rich) / abs(shot)
        sec.records.update(_clean({"richardson": rich, "shooting": shot, "oracle_rel": rel}))
        sec.check("shooting vs Richardson", rel <= tol.oracle_rtol, rel, tol.oracle_rtol)

    if spec.has_pole and n >= 5:
        cut = grid.pole_cut
        a = lowest_eigenpair(assemble_operator(spec, build_grid(spec, N, cut), n)).lam
        b = lowest_eigenpair(assemble_operator(spec, build_grid(spec, N, 0.5 * cut), n)).lam
        rel = abs(a - b) / abs(a)
        sec.records.update(_clean({"pole_cut_halved_rel": rel}))
        sec.check("pole_cut halving", rel < tol.pole_rtol, rel, tol.pole_rtol)
    return sec


def _quasimode(ctx: _Context) -> Section:
    sec = Section("quasimode")
    p, tol = ctx.cfg.parameters, ctx.cfg.tolerances
    E = ctx.E
    rep = residual_scaling(ctx.spec, E, p.h_list)
    ratios = rep.ratios()
    sec.table("quasimode", [("h", "-"), ("E", "energy"), ("residual", "energy"),
                            ("residual_dr", "energy"), ("norm_dr", "-"), ("eigen_distance", "energy")],
              zip(rep.h_values, [E] * len(rep.h_values), rep.residuals, rep.residuals_dr,
                  rep.norms_dr, rep.eigen_distance), ctx.cid)
    sec.records = _clean({"E": E, "slope": rep.fitted_slope, "ratios": ratios,
                          "support_ok": rep.support_ok, "spectral_check": rep.spectral_check})
    lo, hi = tol.quasimode_slope
    sec.check("residual slope", lo <= rep.fitted_slope <= hi, rep.fitted_slope, [lo, hi])
    target = 2.0 ** (2.0 / 3.0)
    worst = max(abs(r - target) / target for r in ratios)
    sec.check("halving ratio near 2^(2/3)", worst <= tol.quasimode_ratio, worst, tol.quasimode_ratio)
    sec.check("support inside (s_min, s_0)", rep.support_ok)
    sec.check("eigenvalue within residual", all(rep.spectral_check), rep.eigen_distance)
    return sec


def _decay(ctx: _Context) -> Section:
    sec = Section("decay")
    spec, pot, p, tol = ctx.spec, ctx.pot, ctx.cfg.parameters, ctx.cfg.tolerances
    modes = ctx.modes()
    fit = decay_fit(spec, p.n_values, p.omega, modes=modes, floor=tol.mass_floor)
    loc = [localization(m, p.eps) for m in modes]
    rows = [(m.n, m.grid.size, m.lam, m.E_semi, m.E_semi - pot.E0, mass, l, excl, m.u_norm)
            for m, mass, l, excl in zip(modes, fit.masses, loc, fit.floor_mask)]
    sec.table("decay", [("n", "-"), ("N", "-"), ("lambda", "energy"), ("E_semi", "energy"),
                        ("E_semi_minus_E0", "energy"), ("mass_omega", "-"),
                        ("mass_outside_eps", "-"), ("below_floor", "-"), ("u_norm", "-")],
              rows, ctx.cid)
    delta = 0.5 * fit.d_pred
    bound = fit.agmon_upper_bound(delta)
    gaps = np.array([m.E_semi - pot.E0 for m in modes])
    n = np.array(p.n_values, dtype=float)
    asym = float(np.polyfit(np.log(n), np.log(gaps), 1)[0]) if np.all(gaps > 0) else float("nan")
    sat = spectral_saturation(fit, tol.r2_min)
    sec.records = _clean({"omega": list(fit.omega), "d_fit": fit.d_fit, "d_pred": fit.d_pred,
                          "intercept": fit.intercept, "C": fit.C, "r_squared": fit.r_squared,
                          "delta_prime": delta, "asymptotic_slope": asym, "eps": p.eps,
                          "saturation_slope_ratio": sat.slope_ratio})

    sec.check("lambda > n^2 E_0", bool(np.all(gaps > 0)), float(np.min(gaps)), 0.0)
    sec.check("E_semi - E_0 decreasing", bool(np.all(np.diff(gaps) < 0)))
    lo, hi = tol.asymptotic_slope
    sec.check("asymptotic slope", lo <= asym <= hi, asym, [lo, hi])
    sec.check("log-mass linear", fit.r_squared >= tol.r2_min, fit.r_squared, tol.r2_min)
    b_lo, b_hi = tol.d_fit_bracket
    ratio = fit.d_fit / fit.d_pred
    sec.check("d_fit / d_pred", b_lo <= ratio <= b_hi, ratio, [b_lo, b_hi])
    sec.check("Agmon upper bound on tail", all(bound), bound)
    sec.check("exponential saturation", sat.passed, sat.slope_ratio)
    worst_norm = max(abs(m.u_norm - 1.0) for m in modes)
    sec.check("unit norm", worst_norm <= tol.u_norm, worst_norm, tol.u_norm)
    in_win = [m.in_window for m in modes if m.n >= N_FLOOR]
    sec.check("E_semi in (E_0, E_0 + eta_0)", all(in_win))
    sec.check("localization improves with n", loc[-1] < loc[0], [loc[0], loc[-1]])

    trans = []
    for m in modes:
        r_n = transmission_residual(m.pair, spec)
        g = build_grid(spec, TRANSMISSION_NODES, p.pole_cut)
        pair = lowest_eigenpair(assemble_operator(spec, g, m.n))
        trans.append((m.n, m.grid.size, r_n, TRANSMISSION_NODES, transmission_residual(pair, spec)))
    sec.table("transmission", [("n", "-"), ("N", "-"), ("flux_residual", "-"),
                               ("N_fine", "-"), ("flux_residual_fine", "-")], trans, ctx.cid)
    fine = max(t[4] for t in trans)
    sec.check("flux residual at fine grid", fine <= tol.transmission_max, fine, tol.transmission_max)
    sec.check("flux residual decreasing", all(t[4] < t[2] for t in trans))
    return sec


def _waves(ctx: _Context) -> Section:
    sec = Section("waves")
    spec, pot, p, tol = ctx.spec, ctx.pot, ctx.cfg.parameters, ctx.cfg.tolerances
    modes = ctx.modes()
    fit = tunneling_fit(spec, p.n_values, p.omega, p.T, modes=modes, floor=tol.mass_floor)
    rows = [(m.n, m.lam, L, np.sqrt(m.lam) + 1.0, p.T, tf, w)
            for m, L, tf, w in zip(modes, fit.Lambda, fit.time_factors, fit.spacetime_norms)]
    sec.table("waves", [("n", "-"), ("lambda", "energy"), ("Lambda", "-"), ("Lambda_alt", "-"),
                        ("T", "time"), ("time_factor", "time"), ("spacetime_norm", "time^1/2")],
              rows, ctx.cid)
    sec.records = _clean({"omega": list(fit.omega), "T": p.T, "slope": fit.slope,
                          "intercept": fit.intercept, "r_squared": fit.r_squared,
                          "consistency": fit.consistency, "d_fit": fit.d_fit, "E_0": fit.E0})
    sec.check("negative slope", fit.slope < 0, fit.slope, 0.0)
    sec.check("log-norm linear", fit.r_squared >= tol.r2_min, fit.r_squared, tol.r2_min)
    sec.check("slope consistent with mass decay", fit.consistency <= tol.tunneling_consistency,
              fit.consistency, tol.tunneling_consistency)
    dev = [abs(tf - p.T / 2) - 1.0 / (2.0 * np.sqrt(m.lam)) for m, tf in zip(modes, fit.time_factors)]
    sec.check("time factor near T/2", max(dev) <= 1e-15, max(dev), 0.0)
    m = modes[0]
    system = assemble_operator(spec, m.grid, m.n)
    e0, e1 = wave_energy(m, system, 0.0), wave_energy(m, system, 0.37 * p.T)
    rel = abs(e1 - e0) / e0
    sec.check("energy conservation", rel <= tol.energy_rtol, rel, tol.energy_rtol)
    return sec


RUNNERS = {"potential": _potential, "agmon": _agmon, "solve": _solve,
           "quasimode": _quasimode, "decay": _decay, "waves": _waves}


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   sections: Optional[list] = None) -> ResultBundle:
    """Run the configured experiment (or explicit ``sections``) and collect checks."""
    if sections is None:
        sections = REPORT_SECTIONS if config.experiment == "full-report" else (config.experiment,)
    ctx = _Context(config, max(1, int(threads)))
    out = []
    for name in sections:
        try:
            out.append(RUNNERS[name](ctx))
        except (ValueError, ArithmeticError) as exc:
            raise ExperimentError(name, exc) from exc
    tol = config.to_dict()["tolerances"]
    provenance = {"version": __version__, "timestamp": _timestamp(),
                  "python": platform.python_version(), "numpy": np.__version__,
                  "scipy": scipy.__version__, "threads": ctx.threads,
                  "grid": {"nodes_per_n": config.parameters.nodes_per_n,
                           "pole_cut": ctx.start if ctx.spec.has_pole else None,
                           "transmission_nodes": TRANSMISSION_NODES},
                  "tolerances": tol, "overrides": config.overrides}
    return ResultBundle(config.echo, config.config_id, out, _clean(provenance))
