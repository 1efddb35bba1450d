import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cartansplit.errors import DomainViolation, InvalidGrid, PreconditionViolation
from cartansplit.geometry import Grid, JordanDomain, dilate
from cartansplit.holo import (
    CompositeMap,
    FunctionMap,
    Identity,
    PolynomialMap,
    compose,
    dbar_residual,
    injectivity_margin,
    invert_near_identity,
    lipschitz_bound,
    preimage_count,
    preimage_counts,
    region_samples,
    sup_norm,
)
from cartansplit.verify import random_near_identity

DISC = JordanDomain.disc(1.0)


def unit_disc_grid(h=1 / 64):
    g = Grid.covering((-1, 1, -1, 1), h)
    Z = g.points()
    return Z[np.abs(Z) <= 1]


def test_sup_norm_examples():
    assert sup_norm(np.full(5, 3 + 4j)) == 5.0
    Z = unit_disc_grid()
    assert sup_norm(Z) == pytest.approx(np.abs(Z).max())
    assert sup_norm(Z) == pytest.approx(1.0, abs=1e-12)


def test_sup_norm_square_on_annulus():
    # dense polar sampling is the oracle: sup of |z^2| on the closed annulus is 1
    g = Grid.covering((-1, 1, -1, 1), 1 / 256)
    Z = g.points()
    Z = Z[(np.abs(Z) > 0.5) & (np.abs(Z) < 1)]
    assert sup_norm(Z ** 2) == pytest.approx(1.0, abs=1e-2)


def test_compose_examples():
    z = np.linspace(-1, 1, 11) + 0.3j
    f = PolynomialMap([0.2, 1.0])
    g = PolynomialMap([0.1, 1.0])
    dom = DISC.region()
    assert np.allclose(compose(Identity(), f, dom)(z), f(z), atol=0)
    assert np.allclose(compose(g, Identity(), dom)(z), g(z), atol=0)
    assert np.max(np.abs(compose(g, f, dom)(z) - (z + 0.3))) <= 1e-15


def test_compose_checks_range():
    g = PolynomialMap([0, 1.0], domain=DISC.region())
    f = PolynomialMap([0.5, 1.0])
    with pytest.raises(DomainViolation):
        compose(g, f, DISC.region(), h=1 / 32)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_compose_associative(seed):
    rng = np.random.default_rng(seed)
    f, g, k = (random_near_identity(rng, 1e-3) for _ in range(3))
    z = rng.uniform(-0.8, 0.8, 200) + 1j * rng.uniform(-0.8, 0.8, 200)
    lhs = CompositeMap(CompositeMap(f, g), k)(z)
    rhs = CompositeMap(f, CompositeMap(g, k))(z)
    assert np.max(np.abs(lhs - rhs)) <= 1e-13


def test_lipschitz_examples():
    V = JordanDomain.disc(2.0).region()
    F = PolynomialMap([0, 0, 1.0])
    bound, ok = lipschitz_bound(F, V, 1.4, 0, 0.5, h=1 / 64)
    # ||z^2|| on D(0,2) is 4, so the bound is 4 / 1.4 * 0.5
    assert bound == pytest.approx(4 / 1.4 * 0.5, rel=1e-9)
    assert ok
    c = FunctionMap(lambda z: np.full(np.shape(z), 2.0 + 0j) - z)
    assert lipschitz_bound(c, V, 1.0, 0, 0.5, h=1 / 64)[1]
    with pytest.raises(PreconditionViolation):
        lipschitz_bound(F, V, 1.8, 0, 0.5, h=1 / 64)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_lipschitz_sweep(seed):
    rng = np.random.default_rng(seed)
    co = rng.normal(size=rng.integers(1, 7)) + 1j * rng.normal(size=1)
    F = PolynomialMap(co)
    V = JordanDomain.disc(2.0).region()
    d = rng.uniform(0.1, 0.9)
    x = complex(*rng.uniform(-0.7, 0.7, 2))
    y = complex(*rng.uniform(-0.7, 0.7, 2))
    if abs(x) + d >= 1.95 or abs(y) + d >= 1.95:
        return
    assert lipschitz_bound(F, V, d, x, y, h=1 / 32)[1]


def test_injectivity_examples():
    D = DISC.region()
    assert injectivity_margin(Identity(), D, 1.0, 1 / 32) == (True, 0.25)
    for eps, expected in ((0.124, True), (0.126, False)):
        c = PolynomialMap.near_identity([0, eps])
        assert injectivity_margin(c, D, 1.0, 1 / 32)[0] is expected
    assert not injectivity_margin(PolynomialMap([0.0]), D, 1.0, 1 / 32)[0]


def test_injectivity_soundness(rng):
    D = DISC.region()
    g = Grid.covering((-1, 1, -1, 1), 2 / 99)
    Z = g.points().ravel()
    for _ in range(10):
        phi = random_near_identity(rng, 10 ** rng.uniform(-3, -0.8), radius=1.5)
        if injectivity_margin(phi, D, 0.5, 1 / 32)[0]:
            W = phi(Z)
            keys = np.round(np.column_stack([W.real, W.imag]) * 1e12)
            assert len(np.unique(keys, axis=0)) == Z.size


def test_invert_examples():
    D = DISC.region()
    inv = invert_near_identity(Identity(), D, 0.5, 0.05, h=1 / 32)
    w = region_samples(inv.domain, 1 / 32)
    assert np.max(np.abs(inv(w) - w)) == 0
    a = 0.01 + 0.02j
    inv = invert_near_identity(PolynomialMap([a, 1.0]), D, 0.5, 0.05, h=1 / 32)
    assert np.max(np.abs(inv(w) - (w - a))) <= 1e-16
    phi = PolynomialMap([0, 1.0, 0.01])
    inv = invert_near_identity(phi, D, 0.5, 0.05, h=1 / 32)
    assert np.max(np.abs(phi(inv(w)) - w)) <= 1e-12


def test_invert_requires_small_map():
    with pytest.raises(PreconditionViolation):
        invert_near_identity(PolynomialMap([0.2, 1.0]), DISC.region(), 0.5, 0.05, h=1 / 32)


def test_invert_round_trips(rng):
    D = DISC.region()
    worst = 0.0
    for _ in range(50):
        phi = random_near_identity(rng, 10 ** rng.uniform(-5, -1.5), radius=1.5)
        inv = invert_near_identity(phi, D, 0.4, 0.1, h=1 / 32)
        w = region_samples(inv.domain, 1 / 32)
        worst = max(worst, np.max(np.abs(phi(inv(w)) - w)))
        z = region_samples(dilate(D, 0.2), 1 / 32)
        worst = max(worst, np.max(np.abs(inv(phi(z)) - z)))
    assert worst <= 1e-11


def test_preimage_count_examples():
    contour = np.exp(2j * np.pi * np.arange(400) / 400)
    assert preimage_count(Identity(), contour, 0.2) == 1
    assert preimage_count(Identity(), contour, 2.0) == 0
    assert preimage_count(PolynomialMap([0, 0, 1.0]), contour, 0.25) == 2


def test_range_inclusion_degree(rng):
    D = DISC.region()
    for _ in range(5):
        phi = random_near_identity(rng, 10 ** rng.uniform(-3, -1.5), radius=1.5)
        contour = dilate(D, 0.4).boundary_polyline()
        w = region_samples(dilate(D, 0.3), 1 / 32)
        assert np.all(preimage_counts(phi, contour, w) == 1)


def test_dbar_residual_examples():
    g = Grid.covering((-1, 1, -1, 1), 1 / 64)
    Z = g.points()
    assert dbar_residual(Z, g.h) <= 1e-12
    assert dbar_residual(np.conj(Z), g.h) == pytest.approx(1.0, abs=1e-12)
    # d-bar of |z|^2 is z; the max over interior nodes is the interior corner
    inner = Z[1:-1, 1:-1]
    assert dbar_residual(Z * np.conj(Z), g.h) == pytest.approx(np.abs(inner).max(), rel=1e-12)
    with pytest.raises(InvalidGrid):
        dbar_residual(np.zeros((2, 5)), g.h)


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_low_degree_polynomials_closed(rng, degree):
    g = Grid.covering((-1, 1, -1, 1), 1e-2)
    phi = random_near_identity(rng, 0.5, degree=degree)
    assert dbar_residual(phi(g.points()), g.h) <= 1e-10


@pytest.mark.parametrize("h", [1e-2, 1 / 128])
def test_cubic_residual_is_exact_truncation(rng, h):
    # the central stencil applied to a3 z^3 leaves exactly h^2 a3
    g = Grid.covering((-1, 1, -1, 1), h)
    for _ in range(5):
        phi = random_near_identity(rng, 1e-3, degree=3)
        res = dbar_residual(phi(g.points()), g.h)
        assert res == pytest.approx(h * h * abs(phi.coeffs[3]), rel=1e-6)


def test_polynomial_serialisation_round_trip():
    phi = PolynomialMap.near_identity([0.1, 0.2j, 1e-3])
    again = PolynomialMap(phi.coeffs)
    z = np.array([0.3 + 0.1j, -0.5j])
    assert np.array_equal(phi(z), again(z))


def test_identity_composites_stay_identity():
    z = np.linspace(-1, 1, 7) + 0.5j
    for a, b in itertools.product([Identity()], repeat=2):
        assert np.array_equal(CompositeMap(a, b)(z), z)
