"""Command line interface.

Commands::

    cartansplit split --config run.json
    cartansplit sweep --config run.json
    cartansplit verify [--suite NAME] [--config run.json]
    cartansplit constants --config run.json
    cartansplit table --trace trace.csv

Configs are JSON documents; every key is optional and unknown keys are
rejected.  Artifacts go to ``output_dir`` unless the environment variable
``CARTANSPLIT_OUTPUT_DIR`` is set.  Errors are printed as one JSON record and
give a nonzero exit status.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .cutoff import build_cutoff
from .errors import ConfigParseError, ConfigValidationError, SplittingError
from .geometry import JordanDomain, make_cartan_pair
from .iteration import (
    TRACE_COLUMNS,
    ParamFamily,
    calibrate_M2,
    constants,
    derive_rho,
    epsilon_threshold,
    run_family,
    run_split,
)

OUTPUT_ENV = "CARTANSPLIT_OUTPUT_DIR"
EXIT_CONFIG = 2
EXIT_RUN = 3

_DEFAULT_MAP = [[0.0, 0.0], [0.0, 0.0], [1e-4, 0.0], [-3e-5, 0.0]]


@dataclass
class DomainSpec:
    kind: str = "ellipse"
    a: float = 2.0
    b: float = 1.0
    radius: float = 1.0
    coeffs: dict = field(default_factory=dict)
    center: List[float] = field(default_factory=lambda: [0.0, 0.0])
    drift: List[float] = field(default_factory=lambda: [0.0, 0.0])

    def build(self, zeta=0.0, n_boundary=2048):
        c = complex(*self.center) + zeta * complex(*self.drift)
        if self.kind == "ellipse":
            return JordanDomain.ellipse(self.a, self.b, c, n_boundary)
        if self.kind == "disc":
            return JordanDomain.disc(self.radius, c, n_boundary)
        co = {int(k): complex(*v) for k, v in self.coeffs.items()}
        return JordanDomain.fourier(co, c, n_boundary)


@dataclass
class MapSpec:
    zeta0: List[List[float]] = field(default_factory=lambda: [list(p) for p in _DEFAULT_MAP])
    zeta1: Optional[List[List[float]]] = None

    def coeffs(self, which):
        rows = self.zeta0 if which == 0 or self.zeta1 is None else self.zeta1
        return [complex(re, im) for re, im in rows]


@dataclass
class ExperimentConfig:
    """Validated experiment configuration.

    ``map`` holds displacement coefficients ``[re, im]`` of ``z^k`` at
    ``zeta = 0`` and ``zeta = 1``; the map at ``zeta`` interpolates linearly.
    ``tau`` defaults to ``tau0 / 5`` and ``tau0`` to ``mu / 1024``.
    """

    domain: DomainSpec = field(default_factory=DomainSpec)
    strip: List[float] = field(default_factory=lambda: [-0.3, 0.3])
    map: MapSpec = field(default_factory=MapSpec)
    tau: Optional[float] = None
    eta: float = 1.0
    tau0: Optional[float] = None
    mu: Optional[float] = None
    mode: str = "practical"
    h: float = 1.0 / 128
    n_boundary: int = 2048
    zeta_count: int = 11
    zeta: float = 0.0
    max_m: int = 12
    work_radius: float = 0.05
    cap: float = 1e-2
    tau_tilde: Optional[float] = None
    profile: str = "quintic"
    seed: int = 42
    m2: Optional[float] = None
    calibrate_m2: bool = False
    workers: int = 1
    output_dir: str = "cartansplit-out"

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    def resolved_mu(self, omega):
        if self.tau0 is not None:
            return self.tau0 * 1024
        if self.mu is not None:
            return self.mu
        return omega.min_curvature_radius() / 8.0

    def out_dir(self):
        return os.environ.get(OUTPUT_ENV) or self.output_dir


def _check_keys(obj, cls, where):
    if not isinstance(obj, dict):
        raise ConfigValidationError(f"{where} must be an object", field=where)
    names = {f.name for f in dataclasses.fields(cls)}
    extra = sorted(set(obj) - names)
    if extra:
        raise ConfigValidationError(f"unknown key(s) {extra} in {where}", field=f"{where}.{extra[0]}")


def _pair_list(v, name):
    if not (isinstance(v, list) and v and all(isinstance(p, list) and len(p) == 2 for p in v)):
        raise ConfigValidationError(f"{name} must be a list of [re, im] pairs", field=name)
    return [[float(a), float(b)] for a, b in v]


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON config, filling defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    _check_keys(raw, ExperimentConfig, "config")
    raw = dict(raw)
    dom = raw.pop("domain", {})
    _check_keys(dom, DomainSpec, "domain")
    mp = raw.pop("map", {})
    _check_keys(mp, MapSpec, "map")
    try:
        cfg = ExperimentConfig(domain=DomainSpec(**dom), map=MapSpec(**mp), **raw)
    except TypeError as exc:
        raise ConfigValidationError(str(exc), field="config") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    def bad(name, msg):
        raise ConfigValidationError(f"{name}: {msg}", field=name)

    d = cfg.domain
    if d.kind not in ("ellipse", "disc", "fourier"):
        bad("domain.kind", "must be ellipse, disc or fourier")
    if d.kind == "ellipse" and not (d.a > 0 and d.b > 0):
        bad("domain.a", "semi-axes must be positive")
    if d.kind == "disc" and not d.radius > 0:
        bad("domain.radius", "must be positive")
    if d.kind == "fourier" and not d.coeffs:
        bad("domain.coeffs", "need at least one coefficient")
    for name in ("center", "drift"):
        v = getattr(d, name)
        if not (isinstance(v, list) and len(v) == 2):
            bad(f"domain.{name}", "must be [x, y]")
        setattr(d, name, [float(v[0]), float(v[1])])
    if not (isinstance(cfg.strip, list) and len(cfg.strip) == 2):
        bad("strip", "must be [s1, s2]")
    cfg.strip = [float(cfg.strip[0]), float(cfg.strip[1])]
    if not cfg.strip[0] < cfg.strip[1]:
        bad("strip", "strip bounds need s1 < s2")
    cfg.map.zeta0 = _pair_list(cfg.map.zeta0, "map.zeta0")
    if cfg.map.zeta1 is not None:
        cfg.map.zeta1 = _pair_list(cfg.map.zeta1, "map.zeta1")
    if cfg.mode not in ("practical", "certified"):
        bad("mode", "must be practical or certified")
    for name in ("h", "eta", "work_radius", "cap"):
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
            bad(name, "must be a positive number")
    if cfg.h > 0.05:
        bad("h", "must be at most 0.05")
    for name in ("tau", "tau0", "mu", "tau_tilde", "m2"):
        v = getattr(cfg, name)
        if v is not None and not (isinstance(v, (int, float)) and v > 0):
            bad(name, "must be positive")
    if cfg.m2 is not None and cfg.m2 < 1:
        bad("m2", "must be at least 1")
    for name, lo in (("n_boundary", 64), ("zeta_count", 2), ("max_m", 1), ("workers", 1)):
        v = getattr(cfg, name)
        if not (isinstance(v, int) and not isinstance(v, bool) and v >= lo):
            bad(name, f"must be an integer >= {lo}")
    if not isinstance(cfg.seed, int):
        bad("seed", "must be an integer")
    if cfg.profile not in ("quintic", "septic"):
        bad("profile", "must be quintic or septic")
    if not 0.0 <= cfg.zeta <= 1.0:
        bad("zeta", "must lie in [0, 1]")
    if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
        bad("output_dir", "must be a non-empty path")


# ---------------------------------------------------------------------------
# building blocks from a config


@dataclass
class Setup:
    cfg: ExperimentConfig
    pair: object
    cut: object
    consts: object
    tau: float


def build_pair(cfg: ExperimentConfig, zeta=0.0):
    omega = cfg.domain.build(zeta, cfg.n_boundary)
    return make_cartan_pair(omega, cfg.strip[0], cfg.strip[1])


def _calib(cfg):
    if cfg.m2 is not None:
        return cfg.m2
    if cfg.calibrate_m2:
        return calibrate_M2(seed=cfg.seed)
    return None


def build_setup(cfg: ExperimentConfig, zeta=None) -> Setup:
    pair = build_pair(cfg, cfg.zeta if zeta is None else zeta)
    cut = build_cutoff(pair, cfg.tau_tilde, cfg.profile)
    mu = cfg.resolved_mu(pair.omega)
    tau = cfg.tau if cfg.tau is not None else mu / 1024 / 5
    consts = constants(pair, cut, tau, _calib(cfg), cfg.mode, mu=mu,
                       work_radius=cfg.work_radius, cap=cfg.cap)
    return Setup(cfg, pair, cut, consts, tau)


def build_family(cfg: ExperimentConfig) -> ParamFamily:
    zetas = np.linspace(0.0, 1.0, cfg.zeta_count)
    return ParamFamily(zetas, lambda z: build_pair(cfg, z), cfg.map.coeffs(0), cfg.map.coeffs(1),
                       cfg.tau_tilde, cfg.profile)


# ---------------------------------------------------------------------------
# commands


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for row in trace.rows():
            w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in TRACE_COLUMNS])


def _trace_summary(trace):
    return {
        "mode": trace.mode,
        "steps": len(trace.steps),
        "eps0": trace.eps0,
        "residual": trace.residual,
        "alpha_norm": trace.alpha_norm,
        "beta_norm": trace.beta_norm,
        "tail_bound": trace.tail_bound,
        "lipschitz": trace.lipschitz,
        "degree_ok": trace.degree_ok,
        "alpha_injective": trace.alpha_injective,
        "beta_injective": trace.beta_injective,
        "de_all": trace.de_all,
        "stop_reason": trace.stop_reason,
    }


def _constants_record(consts, eta):
    d = consts.as_dict()
    d["eps_eta"] = epsilon_threshold(eta, consts)
    d["rho_R0"] = derive_rho(consts.R0, consts.M4, consts.M5)
    d["eta"] = eta
    d["R_schedule"] = [consts.R(m) for m in range(5)]
    return d


def cmd_split(cfg: ExperimentConfig):
    s = build_setup(cfg)
    fam = build_family(cfg)
    gamma = fam.gamma(cfg.zeta)
    out = cfg.out_dir()
    os.makedirs(out, exist_ok=True)
    _, _, trace = run_split(gamma, s.pair, s.tau, cfg.eta, s.consts, cfg.max_m, s.cut, cfg.h,
                            seed=cfg.seed)
    write_trace_csv(os.path.join(out, "trace.csv"), trace)
    summary = _trace_summary(trace)
    summary["constants"] = _constants_record(s.consts, cfg.eta)
    summary["zeta"] = cfg.zeta
    _write_json(os.path.join(out, "split.json"), summary)
    print(json.dumps({k: summary[k] for k in ("steps", "residual", "alpha_norm", "beta_norm", "stop_reason")},
                     sort_keys=True))
    return 0


def cmd_sweep(cfg: ExperimentConfig):
    fam = build_family(cfg)
    s = build_setup(cfg, zeta=0.0)
    out = cfg.out_dir()
    os.makedirs(out, exist_ok=True)
    res = run_family(fam, s.tau, cfg.eta, cfg.max_m, cfg.mode, _calib(cfg), cfg.h, cfg.workers,
                     work_radius=cfg.work_radius, cap=cfg.cap, seed=cfg.seed)
    entries = []
    for m in res.members:
        e = {"zeta": m.zeta, "error": m.error}
        if m.trace is not None:
            e.update(_trace_summary(m.trace))
        entries.append(e)
    report = {
        "mode": cfg.mode,
        "constants": _constants_record(res.consts, cfg.eta),
        "members": entries,
        "moduli": {k: [list(t) for t in v] for k, v in res.moduli.items()},
        "input_moduli": [list(t) for t in res.input_moduli],
        "kappa": res.kappa,
        "failed": res.failed,
        "M2_source": res.consts.M2_source,
    }
    _write_json(os.path.join(out, "family.json"), report)
    print(json.dumps({"members": len(entries), "failed": res.failed, "kappa": res.kappa}, sort_keys=True))
    return 0 if res.ok else EXIT_RUN


def cmd_constants(cfg: ExperimentConfig):
    s = build_setup(cfg)
    print(json.dumps(_constants_record(s.consts, cfg.eta), indent=2, sort_keys=True))
    return 0


def cmd_verify(cfg: ExperimentConfig, suite=None):
    from . import verify

    names = [suite] if suite else list(verify.SUITES)
    ok = True
    for name in names:
        for chk in verify.run_suite(name, cfg):
            ok &= chk.ok
            detail = f" ({chk.detail})" if chk.detail else ""
            print(f"[{'PASS' if chk.ok else 'FAIL'}] {name}: {chk.name}{detail}")
    print("all suites passed" if ok else "some checks failed")
    return 0 if ok else 1


def render_table(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    missing = [c for c in TRACE_COLUMNS if rows and c not in rows[0]]
    if missing:
        raise ConfigValidationError(f"trace lacks columns {missing}", field="trace")
    lines = ["{:>3} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>3}".format(*TRACE_COLUMNS[:8], "DE")]
    for r in rows:
        vals = [int(r["m"])] + [float(r[c]) for c in TRACE_COLUMNS[1:8]] + [int(r["de_ok"])]
        lines.append("{:>3d} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>3d}".format(*vals))
    return "\n".join(lines)


def _error(exc, cfg=None):
    rec = exc.to_record() if isinstance(exc, SplittingError) else {"error": "io-error", "message": str(exc)}
    print(json.dumps(rec, sort_keys=True, default=str))
    if cfg is not None:
        try:
            out = cfg.out_dir()
            os.makedirs(out, exist_ok=True)
            _write_json(os.path.join(out, "error.json"), rec)
        except OSError:
            pass
    return EXIT_CONFIG if isinstance(exc, (ConfigParseError, ConfigValidationError)) else EXIT_RUN


def _load(path):
    if path is None:
        return ExperimentConfig()
    with open(path) as fh:
        return parse_config(fh.read())


def main(argv=None):
    p = argparse.ArgumentParser(prog="cartansplit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("split", "sweep", "constants"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
    sv = sub.add_parser("verify")
    sv.add_argument("--suite")
    sv.add_argument("--config")
    st = sub.add_parser("table")
    st.add_argument("--trace", required=True)
    args = p.parse_args(argv)
    cfg = None
    try:
        if args.command == "table":
            print(render_table(args.trace))
            return 0
        cfg = _load(args.config)
        if args.command == "split":
            return cmd_split(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "constants":
            return cmd_constants(cfg)
        from . import verify
        if args.suite and args.suite not in verify.SUITES:
            raise ConfigValidationError(f"unknown suite {args.suite!r}", field="suite")
        return cmd_verify(cfg, args.suite)
    except (SplittingError, OSError) as exc:
        return _error(exc, cfg)


if __name__ == "__main__":
    sys.exit(main())
