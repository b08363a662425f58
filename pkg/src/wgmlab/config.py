"""Experiment configuration: JSON parsing, defaults and validation."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import geometry
from .geometry import DomainError, DomainSpec

EXPERIMENTS = ("potential", "agmon", "solve", "quasimode", "decay", "waves", "full-report")
FORMATS = ("csv", "json", "gnuplot")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class Tolerances:
    eigen_rtol: float = 1e-12
    shoot_rtol: float = 1e-10
    shoot_steps: int = 10000
    quad_tol: float = 1e-9
    mass_floor: float = 1e-12
    r2_min: float = 0.98
    d_fit_bracket: tuple = (0.8, 1.3)
    asymptotic_slope: tuple = (-1.0, -0.5)
    quasimode_slope: tuple = (0.6, 0.85)
    quasimode_ratio: float = 0.15
    transmission_max: float = 1e-3
    eikonal_max: float = 1e-4
    agmon_oracle: float = 1e-8
    oracle_rtol: float = 1e-6
    pole_rtol: float = 1e-8
    tunneling_consistency: float = 0.15
    u_norm: float = 1e-8
    energy_rtol: float = 1e-10


@dataclass
class Parameters:
    n: int = 40
    n_values: list = field(default_factory=lambda: list(range(20, 101, 10)))
    window: Optional[list] = None
    nodes: Optional[int] = None
    nodes_per_n: int = 40
    pole_cut: Optional[float] = None
    oracle: bool = False
    omega: list = field(default_factory=lambda: [1.4, 1.5])
    eps: float = 0.25
    T: float = 1.0
    h_list: list = field(default_factory=lambda: [1 / 20, 1 / 40, 1 / 80, 1 / 160])
    E: Optional[float] = None
    agmon_nodes: int = 4001
    potential_samples: int = 1001
    seed: int = 0
    random_checks: int = 100


@dataclass
class ExperimentConfig:
    domain: dict
    experiment: str = "full-report"
    parameters: Parameters = field(default_factory=Parameters)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: dict = field(default_factory=lambda: {"dir": "results", "format": "csv"})
    echo: str = ""
    overrides: dict = field(default_factory=dict)

    @property
    def config_id(self) -> str:
        key = self.echo
        if self.overrides:
            key += "\n" + json.dumps(self.overrides, sort_keys=True)
        return hashlib.sha256(key.encode("utf-8")).hexdigest()[:12]

    def domain_spec(self) -> DomainSpec:
        return build_domain(self.domain)

    def to_dict(self) -> dict:
        return {"domain": copy.deepcopy(self.domain), "experiment": self.experiment,
                "parameters": _jsonable(asdict(self.parameters)),
                "tolerances": _jsonable(asdict(self.tolerances)),
                "output": dict(self.output)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


DOMAIN_KEYS = {"profile", "R0", "R1", "R2", "L", "s0", "c_minus", "c_plus"}
PROFILE_KEYS = {"kind", "samples", "expr", "s_min", "s_max", "has_pole"}
TOP_KEYS = {"domain", "experiment", "parameters", "tolerances", "output"}


def _normalize_domain(raw: dict) -> dict:
    """Fold dotted ``profile.kind``-style keys into a nested ``profile`` dict."""
    if not isinstance(raw, dict):
        raise ConfigError("domain", "must be an object")
    out, prof = {}, dict(raw.get("profile", {}) or {})
    for key, val in raw.items():
        if key.startswith("profile."):
            sub = key.split(".", 1)[1]
            if sub not in PROFILE_KEYS:
                raise ConfigError(f"domain.{key}", "unknown key")
            prof[sub] = val
        elif key == "profile":
            if not isinstance(val, dict):
                raise ConfigError("domain.profile", "must be an object")
            for sub in val:
                if sub not in PROFILE_KEYS:
                    raise ConfigError(f"domain.profile.{sub}", "unknown key")
        elif key in DOMAIN_KEYS:
            out[key] = val
        else:
            raise ConfigError(f"domain.{key}", "unknown key")
    if "kind" not in prof:
        prof["kind"] = "annulus" if "R0" in out else "disk"
    out["profile"] = prof
    return out


def build_domain(domain: dict) -> DomainSpec:
    prof = domain["profile"]
    kind = prof["kind"]

    def need(key):
        if key not in domain:
            raise ConfigError(f"domain.{key}", f"required for profile kind {kind!r}")
        try:
            return float(domain[key])
        except (TypeError, ValueError):
            raise ConfigError(f"domain.{key}", "must be a number") from None

    cm, cp = need("c_minus"), need("c_plus")
    try:
        if kind == geometry.ANNULUS:
            return geometry.build_annulus(need("R0"), need("R1"), need("R2"), cm, cp)
        if kind == geometry.DISK:
            return geometry.build_disk(need("L"), need("s0"), cm, cp)
        if kind == geometry.TABULATED:
            if "samples" not in prof:
                raise ConfigError("domain.profile.samples", "required for tabulated profiles")
            profile = geometry.tabulated_profile(prof["samples"], prof.get("has_pole"))
            return geometry.build_surface(profile, need("s0"), cm, cp)
        if kind == geometry.CLOSED_FORM:
            profile = _expr_profile(prof)
            return geometry.build_surface(profile, need("s0"), cm, cp)
    except DomainError as exc:
        raise ConfigError("domain", str(exc)) from None
    raise ConfigError("domain.profile.kind", f"must be one of {geometry.PROFILE_KINDS}")


def _expr_profile(prof: dict):
    import sympy

    for key in ("expr", "s_min", "s_max"):
        if key not in prof:
            raise ConfigError(f"domain.profile.{key}", "required for closed-form profiles")
    s = sympy.Symbol("s")
    try:
        expr = sympy.sympify(prof["expr"], locals={"s": s})
    except (sympy.SympifyError, TypeError) as exc:
        raise ConfigError("domain.profile.expr", f"cannot parse: {exc}") from None
    if expr.free_symbols - {s}:
        raise ConfigError("domain.profile.expr", "may only depend on s")
    f = sympy.lambdify(s, expr, "numpy")
    df = sympy.lambdify(s, sympy.diff(expr, s), "numpy")
    return geometry.closed_form_profile(
        lambda x: np.broadcast_to(f(x), np.shape(x)).astype(float),
        lambda x: np.broadcast_to(df(x), np.shape(x)).astype(float),
        float(prof["s_min"]), float(prof["s_max"]), bool(prof.get("has_pole", False)))


def _fill(cls, raw: dict, path: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(path, "must be an object")
    names = {f.name: f for f in fields(cls)}
    obj = cls()
    for key, val in raw.items():
        if key not in names:
            raise ConfigError(f"{path}.{key}", "unknown key")
        default = getattr(obj, key)
        if isinstance(default, tuple):
            if not isinstance(val, list) or len(val) != len(default):
                raise ConfigError(f"{path}.{key}", f"must be a list of {len(default)} numbers")
            val = tuple(val)
        setattr(obj, key, val)
    return obj


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be an object")
    for key in raw:
        if key not in TOP_KEYS:
            raise ConfigError(key, "unknown key")
    if "domain" not in raw:
        raise ConfigError("domain", "missing")
    domain = _normalize_domain(raw["domain"])
    experiment = raw.get("experiment", "full-report")
    output = {"dir": "results", "format": "csv"}
    for key, val in (raw.get("output") or {}).items():
        if key not in output:
            raise ConfigError(f"output.{key}", "unknown key")
        output[key] = val
    cfg = ExperimentConfig(domain, experiment,
                           _fill(Parameters, raw.get("parameters"), "parameters"),
                           _fill(Tolerances, raw.get("tolerances"), "tolerances"),
                           output, echo=text)
    validate_config(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from None
    return parse_config(text)


def default_config_text() -> str:
    return resources.files("wgmlab").joinpath("data/default_annulus.json").read_text("utf-8")


def default_config() -> ExperimentConfig:
    return parse_config(default_config_text())


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {EXPERIMENTS}")
    if cfg.output.get("format") not in FORMATS:
        raise ConfigError("output.format", f"must be one of {FORMATS}")
    spec = cfg.domain_spec()
    p = cfg.parameters

    def positive_int(name, val, minimum=1):
        if not isinstance(val, int) or isinstance(val, bool) or val < minimum:
            raise ConfigError(f"parameters.{name}", f"must be an integer >= {minimum}")

    positive_int("n", p.n)
    if not isinstance(p.n_values, list) or len(p.n_values) < 5:
        raise ConfigError("parameters.n_values", "need at least 5 angular momenta")
    for v in p.n_values:
        positive_int("n_values", v)
    if any(b <= a for a, b in zip(p.n_values, p.n_values[1:])):
        raise ConfigError("parameters.n_values", "must be strictly increasing")
    positive_int("nodes_per_n", p.nodes_per_n)
    if p.nodes is not None:
        positive_int("nodes", p.nodes, 64)
    positive_int("agmon_nodes", p.agmon_nodes, 3)
    positive_int("potential_samples", p.potential_samples, 3)
    positive_int("random_checks", p.random_checks, 0)
    if p.window is not None and (len(p.window) != 2 or not p.window[0] < p.window[1]):
        raise ConfigError("parameters.window", "must be [lo, hi] with lo < hi")
    if p.pole_cut is not None and not 0 < p.pole_cut < spec.s0:
        raise ConfigError("parameters.pole_cut", "must satisfy 0 < pole_cut < s0")
    if len(p.omega) != 2 or not p.omega[0] < p.omega[1]:
        raise ConfigError("parameters.omega", "must be [a, b] with a < b")
    if not (spec.s_min <= p.omega[0] and p.omega[1] <= spec.s_max):
        raise ConfigError("parameters.omega", "must lie inside the domain")
    if p.omega[0] <= spec.s0 <= p.omega[1]:
        raise ConfigError("parameters.omega", "dist(omega, s_0) must be positive")
    if not p.eps > 0:
        raise ConfigError("parameters.eps", "must be positive")
    if not p.T > 0:
        raise ConfigError("parameters.T", "must be positive")
    if len(p.h_list) < 2 or any(b >= a for a, b in zip(p.h_list, p.h_list[1:])) or min(p.h_list) <= 0:
        raise ConfigError("parameters.h_list", "must be positive and strictly decreasing")
