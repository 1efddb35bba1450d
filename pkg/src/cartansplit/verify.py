"""Invariant suites behind ``cartansplit verify``.

Each suite is a small, seeded sweep over one module's invariants and returns
a list of :class:`Check` records.  The suites are sized to run in seconds;
the test suite covers the same ground more exhaustively.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoff import build_cutoff
from .dbar import Form01Sample, operator_constant, solve_dbar
from .geometry import (
    Grid,
    JordanDomain,
    build_defining_function,
    dilate,
    hausdorff_distance,
    make_cartan_pair,
    point_region,
)
from .holo import (
    CompositeMap,
    PolynomialMap,
    dbar_residual,
    injectivity_margin,
    invert_near_identity,
    preimage_counts,
    region_samples,
    sup_norm,
)
from .iteration import check_sequence_lemma, derive_rho, run_split
from .splitting import split_additive


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


def _rng(cfg):
    return np.random.default_rng(cfg.seed)


def random_near_identity(rng, eps, degree=3, radius=1.5):
    """Polynomial ``z + c(z)`` with ``sup |c| = eps`` on ``|z| = radius``."""
    co = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    ring = radius * np.exp(2j * np.pi * np.arange(512) / 512)
    s = sup_norm(np.polynomial.polynomial.polyval(ring, co))
    return PolynomialMap.near_identity(co * eps / s)


def bump_form(grid, center=0j, radius=0.8, k=1):
    """Smooth compactly supported coefficient ``(1 - r^2)^4 z^k`` (scaled)."""
    Z = grid.points()
    u = (Z - center) / radius
    r2 = np.abs(u) ** 2
    vals = np.where(r2 < 1, (1 - r2) ** 4, 0.0) * u ** k
    return Form01Sample(grid, vals.astype(complex))


def suite_geometry(cfg):
    rng = _rng(cfg)
    om = JordanDomain.ellipse(2.0, 1.0)
    out = []
    z = rng.uniform(-2.5, 2.5, 2000) + 1j * rng.uniform(-1.5, 1.5, 2000)
    reg = om.region()
    mono = all(np.all(~dilate(reg, r1).contains(z) | dilate(reg, r2).contains(z))
               for r1, r2 in ((0.01, 0.02), (0.1, 0.3), (0.2, 0.2001)))
    out.append(Check("dilate monotonicity", mono))
    w = z + 0.05 * (rng.normal(size=z.size) + 1j * rng.normal(size=z.size))
    lip = np.max(np.abs(om.signed_distance(w) - om.signed_distance(z)) / np.abs(w - z))
    out.append(Check("signed distance 1-Lipschitz", bool(lip <= 1 + 1e-9), f"max ratio {lip:.6f}"))
    sets = [point_region(rng.normal(size=30) + 1j * rng.normal(size=30)) for _ in range(3)]
    d = [[hausdorff_distance(a, b) for b in sets] for a in sets]
    tri = all(d[i][k] <= d[i][j] + d[j][k] + 1e-12 for i in range(3) for j in range(3) for k in range(3))
    out.append(Check("Hausdorff triangle inequality", tri))
    pair = make_cartan_pair(om, -0.3, 0.3)
    out.append(Check("ellipse strip pair admissible", bool(pair.admissible), f"sep {pair.sep:.4f}"))
    f = build_defining_function(om, 0.0)
    g = Grid.covering(om.bbox, 0.05, pad=0.1)
    sd = om.signed_distance(g.points())
    near = np.abs(sd) <= 4 * f.mu
    agree = np.all(np.sign(f(g.points()[near])) == np.sign(sd[near]))
    out.append(Check("defining function sign near the boundary", bool(agree)))
    return out


def suite_holo(cfg):
    rng = _rng(cfg)
    disc = JordanDomain.disc(1.0).region()
    out = []
    worst_rt, ok_deg, ok_inj = 0.0, True, True
    for _ in range(10):
        eps = 10 ** rng.uniform(-5, -2)
        phi = random_near_identity(rng, eps, radius=1.5)
        inv = invert_near_identity(phi, disc, 0.4, 0.1, h=1 / 32)
        w = region_samples(inv.domain, 1 / 32)
        worst_rt = max(worst_rt, sup_norm(phi(inv(w)) - w))
        contour = dilate(disc, 0.4).boundary_polyline()
        ok_deg &= bool(np.all(preimage_counts(phi, contour, w[::7]) == 1))
        ok_inj &= injectivity_margin(phi, disc, 0.2, 1 / 32)[0]
    out.append(Check("inverse round trip", worst_rt <= 1e-11, f"max {worst_rt:.2e}"))
    out.append(Check("range inclusion degree", ok_deg))
    out.append(Check("small maps certified injective", ok_inj))
    f, g, k = (random_near_identity(rng, 1e-3) for _ in range(3))
    z = 0.8 * (rng.uniform(-1, 1, 500) + 1j * rng.uniform(-1, 1, 500))
    assoc = sup_norm(CompositeMap(CompositeMap(f, g), k)(z) - CompositeMap(f, CompositeMap(g, k))(z))
    out.append(Check("composition associative", assoc <= 1e-13, f"{assoc:.1e}"))
    grid = Grid.covering((-1, 1, -1, 1), 1 / 128)
    quad = random_near_identity(rng, 1e-1, degree=2)
    res = dbar_residual(quad(grid.points()), grid.h)
    out.append(Check("quadratic maps d-bar closed", res <= 1e-10, f"{res:.1e}"))
    # for a cubic the central stencil leaves exactly h^2 |a_3|
    res = dbar_residual(f(grid.points()), grid.h)
    a3 = abs(f.coeffs[3])
    out.append(Check("cubic residual is h^2 |a3|", abs(res - grid.h ** 2 * a3) <= 1e-3 * grid.h ** 2 * a3 + 1e-15,
                     f"{res:.3e} vs {grid.h ** 2 * a3:.3e}"))
    return out


def suite_dbar(cfg):
    rng = _rng(cfg)
    om = JordanDomain.disc(1.0)
    out = []
    res = []
    for h in (1 / 32, 1 / 64, 1 / 128):
        grid = Grid.covering(om.bbox, h, pad=0.05)
        form = bump_form(grid, 0.1j, 0.8, 1)
        sol = solve_dbar(form, om, 0.01, 0.01)
        res.append(sol.residual)
    slope = np.polyfit(np.log([1 / 32, 1 / 64, 1 / 128]), np.log(res), 1)[0]
    out.append(Check("d-bar residual order", 1.6 <= slope <= 2.4, f"slope {slope:.2f}"))
    grid = Grid.covering(om.bbox, 1 / 64, pad=0.05)
    f1 = bump_form(grid, 0.1, 0.7, 0)
    f2 = bump_form(grid, -0.2j, 0.6, 2)
    a, b = rng.normal(size=2)
    s1 = solve_dbar(f1, om, 0.01, 0.01).values
    s2 = solve_dbar(f2, om, 0.01, 0.01).values
    s12 = solve_dbar(Form01Sample(grid, a * f1.values + b * f2.values), om, 0.01, 0.01).values
    lin = np.max(np.abs(s12 - a * s1 - b * s2))
    out.append(Check("linearity", lin <= 1e-12, f"{lin:.1e}"))
    sol = solve_dbar(f1, om, 0.01, 0.01)
    C = operator_constant(om, 0.01)
    out.append(Check("sup bound", sol.sup() <= C * f1.sup(), f"{sol.sup():.3f} <= {C * f1.sup():.3f}"))
    return out


def suite_cutoff(cfg):
    from .cli import build_pair

    pair = build_pair(cfg, cfg.zeta)
    cut = build_cutoff(pair, cfg.tau_tilde, cfg.profile)
    out = []
    x = np.linspace(pair.s1 - 0.1, pair.s2 + 0.1, 2001)
    chi = cut.chi(x)
    out.append(Check("partition of unity", bool(np.all(chi + (1 - chi) == 1))))
    out.append(Check("chi is 1 left and 0 right",
                     bool(np.all(chi[x <= cut.left] == 1) and np.all(chi[x >= cut.right] == 0))))
    errs = []
    hs = (cut.width / 32, cut.width / 64, cut.width / 128)
    for h in hs:
        fd = (cut.chi(x + h) - cut.chi(x - h)) / (4 * h)
        errs.append(np.max(np.abs(fd - cut.dbar_chi(x))))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    out.append(Check("d-bar chi matches differences", 1.6 <= slope <= 2.4, f"slope {slope:.2f}"))
    return out


def suite_splitting(cfg):
    from .cli import build_setup

    rng = _rng(cfg)
    s = build_setup(cfg)
    tau1, tau2 = 4 * s.tau + s.consts.R0 / 2, 4 * s.tau + s.consts.R0
    out = []
    worst_id, ok_norm, ok_holo = 0.0, True, True
    for _ in range(3):
        c = random_near_identity(rng, 1e-3 * rng.uniform(0.1, 1), radius=2.5)
        sp = split_additive(c, s.pair, tau1, tau2, s.cut, s.consts.tau0_work, h=cfg.h)
        worst_id = max(worst_id, sp.identity_residual / (10 * sp.tolerance))
        ok_norm &= sp.norms_ok
        ok_holo &= sp.holo_a <= sp.tolerance and sp.holo_b <= sp.tolerance
    out.append(Check("additive identity", worst_id <= 1, f"residual/(10 tol) {worst_id:.1e}"))
    out.append(Check("norm bound M3", ok_norm))
    out.append(Check("pieces holomorphic", ok_holo))
    return out


def suite_iteration(cfg):
    from .cli import build_family, build_setup

    rng = _rng(cfg)
    out = []
    ok = True
    for _ in range(200):
        a, B, C = 10 ** rng.uniform(-3, 1), 10 ** rng.uniform(0, 4), 10 ** rng.uniform(0, 4)
        ok &= check_sequence_lemma(a, B, C, 0.999 * derive_rho(a, B, C))
        ok &= not check_sequence_lemma(a, B, C, a / (16 * B))
    out.append(Check("sequence lemma threshold", ok))
    s = build_setup(cfg)
    gamma = build_family(cfg).gamma(cfg.zeta)
    _, _, tr = run_split(gamma, s.pair, s.tau, cfg.eta, s.consts, cfg.max_m, s.cut, cfg.h, seed=cfg.seed)
    sched = all(st.R_m == s.consts.R0 / 8.0 ** st.m for st in tr.steps)
    out.append(Check("schedule R_m = R0/8^m", sched))
    out.append(Check("splitting identity", tr.identity_ok(),
                     f"residual {tr.residual:.2e} in {len(tr.steps)} steps"))
    out.append(Check("final maps injective", tr.alpha_injective and tr.beta_injective))
    out.append(Check("degree of the limit inverses", tr.degree_ok))
    tails = [sum(s.consts.M3 * st.eps_out for st in tr.steps[m:]) + tr.tail_bound
             for m in range(len(tr.steps))]
    conv = all(d <= t for d, t in zip(tr.composite_diffs[1:], tails))
    out.append(Check("product increments below tail bound", conv))
    if cfg.mode == "certified":
        out.append(Check("distance estimates", tr.de_all))
    return out


SUITES = {
    "geometry": suite_geometry,
    "holo": suite_holo,
    "dbar": suite_dbar,
    "cutoff": suite_cutoff,
    "splitting": suite_splitting,
    "iteration": suite_iteration,
}


def run_suite(name, cfg):
    try:
        return SUITES[name](cfg)
    except Exception as exc:  # a crash is reported as a failed check
        return [Check("suite ran", False, f"{type(exc).__name__}: {exc}")]
