import numpy as np
import pytest

from cartansplit.cutoff import build_cutoff
from cartansplit.errors import NotHolomorphic, ThresholdError
from cartansplit.geometry import Grid
from cartansplit.holo import FunctionMap, Identity, PolynomialMap, region_samples
from cartansplit.iteration import calibrate_M2
from cartansplit.splitting import split_additive, split_constant, split_step
from cartansplit.verify import random_near_identity


@pytest.fixture(scope="module")
def margins(tau, practical):
    return 4 * tau + practical.R0 / 2, 4 * tau + practical.R0


def test_zero_splits_to_zero(ellipse_pair, ellipse_cut, practical, margins):
    sp = split_additive(PolynomialMap.near_identity([0.0]), ellipse_pair, *margins, ellipse_cut,
                        practical.tau0_work)
    z = region_samples(ellipse_pair.region("C", margins[0]), 1 / 128)
    assert np.all(sp.a.displacement(z) == 0) and np.all(sp.b.displacement(z) == 0)


def test_constant_identity_is_exact(ellipse_pair, ellipse_cut, practical, margins):
    v = 3e-4 - 1e-4j
    sp = split_additive(PolynomialMap.near_identity([v]), ellipse_pair, *margins, ellipse_cut,
                        practical.tau0_work)
    z = region_samples(ellipse_pair.region("C", margins[0]), 1 / 128)
    assert np.max(np.abs(sp.b.displacement(z) - sp.a.displacement(z) - v)) <= 1e-19


def test_linear_on_disc_pair(disc_pair):
    cut = build_cutoff(disc_pair)
    c = PolynomialMap.near_identity([0, 0.01])
    sp = split_additive(c, disc_pair, 0.01, 0.02, cut, 0.02)
    assert sp.identity_residual <= 1e-4
    M3 = split_constant(disc_pair, cut, 0.02)
    assert sp.M3 == pytest.approx(M3)
    assert sp.norm_a <= M3 * 0.01 * 1.5 and sp.norm_b <= M3 * sp.norm_c


def test_random_splits(ellipse_pair, ellipse_cut, practical, margins, rng):
    for _ in range(5):
        c = random_near_identity(rng, 1e-3 * rng.uniform(0.05, 1), radius=2.5)
        sp = split_additive(c, ellipse_pair, *margins, ellipse_cut, practical.tau0_work)
        assert sp.identity_residual <= 10 * sp.tolerance
        assert sp.norm_a <= sp.M3 * sp.norm_c and sp.norm_b <= sp.M3 * sp.norm_c
        assert sp.holo_a <= sp.tolerance and sp.holo_b <= sp.tolerance


def test_rejects_non_holomorphic(ellipse_pair, ellipse_cut, practical, margins):
    c = FunctionMap(lambda z: 1e-4 * np.conj(z))
    with pytest.raises(NotHolomorphic):
        split_additive(c, ellipse_pair, *margins, ellipse_cut, practical.tau0_work)


def test_step_on_identity(ellipse_pair, ellipse_cut, practical, tau):
    st = split_step(Identity(), ellipse_pair, 4 * tau, practical.R0, practical, ellipse_cut)
    z = np.array([0.1 + 0.2j, -0.2])
    for m in (st.alpha, st.beta, st.gamma_tilde):
        assert np.all(m(z) == z)
    assert st.eps_out == 0


def test_step_is_quadratic_and_consistent(ellipse_pair, ellipse_cut, practical, tau):
    gamma = PolynomialMap.near_identity([0, 0, 1e-4])
    ratios = []
    for h in (1 / 64, 1 / 128):
        st = split_step(gamma, ellipse_pair, 4 * tau, practical.R0, practical, ellipse_cut, h=h)
        assert st.checks["bound_ok"] and st.checks["norms_ok"]
        ratios.append(st.eps_out / st.eps_in ** 2)
    assert np.isfinite(ratios).all()
    assert 0.5 <= ratios[0] / ratios[1] <= 2


def test_step_against_calibrated_composition_estimate(ellipse_pair, ellipse_cut, practical, tau):
    calib = calibrate_M2()
    gamma = PolynomialMap.near_identity([0, 0, 1e-4, -3e-5])
    r = practical.R0
    st = split_step(gamma, ellipse_pair, 4 * tau, r, practical, ellipse_cut)
    eps = max(st.eps_in, st.alpha_norm, st.beta_norm)
    # the pieces live on sets at distance r/8 beyond the set where gamma~ is measured
    assert st.eps_out <= calib.M2 * eps ** 2 / (r / 8)


def test_step_factors_injective(ellipse_pair, ellipse_cut, practical, tau):
    gamma = PolynomialMap.near_identity([0, 0, 1e-4])
    r = practical.R0
    st = split_step(gamma, ellipse_pair, 4 * tau, r, practical, ellipse_cut)
    assert st.alpha_injective and st.beta_injective
    for m, piece in ((st.alpha, "A"), (st.beta, "B")):
        z = region_samples(ellipse_pair.region(piece, 4 * tau + r / 4), 1 / 64, boundary=False)
        w = m(z)
        keys = np.round(np.column_stack([w.real, w.imag]) * 1e12)
        assert len(np.unique(keys, axis=0)) == z.size


def test_step_thresholds(ellipse_pair, ellipse_cut, practical, certified, tau):
    big = PolynomialMap.near_identity([0, 0, 0.1])
    with pytest.raises(ThresholdError):
        split_step(big, ellipse_pair, 4 * tau, practical.R0, practical, ellipse_cut)
    with pytest.raises(ThresholdError):
        split_step(PolynomialMap.near_identity([0, 0, 1e-6]), ellipse_pair, 4 * tau, certified.R0,
                   certified, ellipse_cut)


def test_calibration_is_seeded():
    a = calibrate_M2(trials=10, seed=3)
    b = calibrate_M2(trials=10, seed=3)
    assert a == b
    assert a.M2 >= 1


def test_lattice_alignment_of_tabulated_map(ellipse_pair, ellipse_cut, practical, tau):
    gamma = PolynomialMap.near_identity([0, 0, 1e-4])
    st = split_step(gamma, ellipse_pair, 4 * tau, practical.R0, practical, ellipse_cut)
    g = st.gamma_tilde.grid
    assert isinstance(g, Grid)
    assert np.allclose(g.xs * 128, np.rint(g.xs * 128))
