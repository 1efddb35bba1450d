"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (shown in the terminal summary under
"acceptance") and then asserts the criterion and its runtime budget.
"""
import time

import numpy as np
import pytest

from cartansplit.dbar import operator_constant, solve_dbar
from cartansplit.geometry import Grid, JordanDomain, dilate, make_cartan_pair
from cartansplit.holo import PolynomialMap, injectivity_margin, preimage_counts, region_samples
from cartansplit.iteration import (
    ParamFamily,
    check_sequence_lemma,
    derive_rho,
    epsilon_threshold,
    max_modulus,
    run_family,
    run_split,
)
from cartansplit.splitting import split_additive, split_step
from cartansplit.verify import bump_form, random_near_identity


def test_c1_dbar_contract(acceptance):
    t0 = time.perf_counter()
    domains = [JordanDomain.disc(1.0), JordanDomain.ellipse(2.0, 1.0),
               JordanDomain.fourier({1: 1.0, -2: 0.1}, 0.2 + 0.1j)]
    hs = (1 / 32, 1 / 64, 1 / 128)
    rng = np.random.default_rng(2024)
    slopes, bound_ok = [], True
    for k in range(50):
        dom = domains[k % 3]
        c = dom.centroid + complex(*rng.uniform(-0.15, 0.15, 2))
        r = 0.6 * dom.min_curvature_radius() * rng.uniform(0.6, 1.0)
        deg = int(rng.integers(0, 4))
        res = []
        for h in hs:
            grid = Grid.covering(dom.bbox, h, pad=0.05)
            form = bump_form(grid, c, r, deg)
            sol = solve_dbar(form, dom, 0.01, 0.01)
            res.append(sol.residual)
            bound_ok &= sol.sup() <= operator_constant(dom, 0.01) * form.sup()
        slopes.append(np.polyfit(np.log(hs), np.log(res), 1)[0])
    el = time.perf_counter() - t0
    ok = bound_ok and 1.6 <= min(slopes) and max(slopes) <= 2.4
    assert acceptance(1, "d-bar contract", ok,
                      f"slopes in [{min(slopes):.3f}, {max(slopes):.3f}], sup bound {bound_ok}", el, 60)


def test_c2_additive_splitting(acceptance, ellipse_pair, ellipse_cut, tau, practical):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    tau1, tau2 = 4 * tau + practical.R0 / 2, 4 * tau + practical.R0
    worst_id, worst_norm = 0.0, 0.0
    for _ in range(20):
        c = random_near_identity(rng, 1e-3 * rng.uniform(0.01, 1), radius=2.5)
        sp = split_additive(c, ellipse_pair, tau1, tau2, ellipse_cut, practical.tau0_work)
        assert sp.norm_c <= 1e-3
        worst_id = max(worst_id, sp.identity_residual / (10 * sp.tolerance))
        worst_norm = max(worst_norm, max(sp.norm_a, sp.norm_b) / (sp.M3 * sp.norm_c))
    el = time.perf_counter() - t0
    ok = worst_id <= 1 and worst_norm <= 1
    assert acceptance(2, "additive splitting", ok,
                      f"max residual/(10 tol) {worst_id:.2e}, max norm/(M3 |c|) {worst_norm:.3f}", el, 60)


def test_c3_quadratic_contraction(acceptance, ellipse_pair, ellipse_cut, tau, practical):
    t0 = time.perf_counter()
    shape = np.array([0, 0, 1.0, -0.3])
    ein, eout = [], []
    for eps in (1e-3, 1e-4, 1e-5):
        st = split_step(PolynomialMap.near_identity(shape * eps), ellipse_pair, 4 * tau, practical.R0,
                        practical, ellipse_cut)
        ein.append(st.eps_in)
        eout.append(st.eps_out)
    slope = np.polyfit(np.log(ein), np.log(eout), 1)[0]
    el = time.perf_counter() - t0
    assert acceptance(3, "quadratic contraction", 1.8 <= slope <= 2.2,
                      f"slope {slope:.4f}, eps_out {', '.join(f'{e:.2e}' for e in eout)}", el, 120)


def test_c4_full_splitting(acceptance, ellipse_pair, ellipse_cut, tau, practical):
    t0 = time.perf_counter()
    gamma = PolynomialMap.near_identity([0, 0, 1e-4, -3e-5])
    _, _, tr = run_split(gamma, ellipse_pair, tau, 1.0, practical, max_m=5, cut=ellipse_cut, h=1 / 128)
    el = time.perf_counter() - t0
    bound = 2 * practical.M3 * tr.eps0
    ok = (tr.residual <= 1e-8 and len(tr.steps) <= 5 and tr.alpha_injective and tr.beta_injective
          and max(tr.alpha_norm, tr.beta_norm) <= bound)
    assert acceptance(4, "full splitting", ok,
                      f"residual {tr.residual:.2e} in {len(tr.steps)} steps, norms "
                      f"{tr.alpha_norm:.2e}/{tr.beta_norm:.2e} <= {bound:.2e}, injective "
                      f"{tr.alpha_injective and tr.beta_injective}", el, 300)


def test_c5_sequence_lemma(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    good = bad = 0
    for _ in range(1000):
        a, B, C = 10 ** rng.uniform(-4, 2), 10 ** rng.uniform(0, 5), 10 ** rng.uniform(0, 5)
        good += check_sequence_lemma(a, B, C, 0.999 * derive_rho(a, B, C))
        bad += check_sequence_lemma(a, B, C, a / (16 * B))
    el = time.perf_counter() - t0
    assert acceptance(5, "sequence lemma", good == 1000 and bad == 0,
                      f"{good}/1000 true below threshold, {bad}/1000 true at a/(16B)", el, 10)


def test_c6_range_inclusion(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    doms = [JordanDomain.disc(1.0).region(), JordanDomain.ellipse(2.0, 1.0).region()]
    tested, bad, k = 0, 0, 0
    while k < 25:
        D = doms[k % 2]
        delta = rng.uniform(0.2, 0.5)
        phi = random_near_identity(rng, 10 ** rng.uniform(-4, -1.7), radius=2.8)
        ok, _ = injectivity_margin(phi, D, delta, 1 / 32)
        if not ok:
            continue
        eps = float(np.max(np.abs(phi.displacement(region_samples(dilate(D, delta), 1 / 32)))))
        w = region_samples(dilate(D, delta - eps), 1 / 32)
        w = w[rng.choice(w.size, min(w.size, 400), replace=False)]
        counts = preimage_counts(phi, dilate(D, delta).boundary_polyline(), w)
        tested += w.size
        bad += int(np.sum(counts != 1))
        k += 1
    el = time.perf_counter() - t0
    assert acceptance(6, "range inclusion", bad == 0, f"{tested} targets over 25 maps, {bad} with count != 1",
                      el, 60)


def _family(n):
    return ParamFamily(np.linspace(0, 1, n),
                       lambda z: make_cartan_pair(JordanDomain.disc(1.0, 0.05j * z), -0.3, 0.3),
                       [0, 0, 1e-4], [0, 0, 2e-4])


def test_c7_parameter_continuity(acceptance):
    t0 = time.perf_counter()
    tau = 1 / 8 / 1024 / 5
    coarse = run_family(_family(11), tau, 1.0, mode="practical", workers=4)
    fine = run_family(_family(21), tau, 1.0, mode="practical", workers=4)
    el = time.perf_counter() - t0
    ok = coarse.ok and fine.ok
    ratio = max_modulus(coarse) / max_modulus(fine) if ok else float("nan")
    assert acceptance(7, "parameter continuity", ok and ratio >= 1.8,
                      f"modulus {max_modulus(coarse):.3e} -> {max_modulus(fine):.3e}, ratio {ratio:.3f}",
                      el, 600)


def test_c8_certified_bookkeeping(acceptance, ellipse_pair, ellipse_cut, tau, certified):
    t0 = time.perf_counter()
    c = certified
    formulas = (c.M4 == 2 * max(2 ** 11 * c.M3, c.M3 / (4 * c.K)) and c.M5 == 32 * c.M2 * c.M3 ** 2
                and c.R0 == 0.25 * min(1, tau / 2, c.K * tau / 4))
    thr = epsilon_threshold(1.0, c)
    gamma = PolynomialMap.near_identity(np.array([0, 0, 1.0, -0.3]) * thr / 2)
    _, _, tr = run_split(gamma, ellipse_pair, tau, 1.0, c, max_m=6, cut=ellipse_cut)
    el = time.perf_counter() - t0
    ok = formulas and tr.eps0 < thr and len(tr.steps) >= 1 and tr.de_all
    assert acceptance(8, "certified bookkeeping", ok,
                      f"eps0 {tr.eps0:.2e} < eps_eta {thr:.2e}, {len(tr.steps)} steps, DE at every step {tr.de_all}",
                      el, 120)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
