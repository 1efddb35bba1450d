"""Additive splitting ``c = b - a`` and one compositional step.

With a cutoff ``chi`` and the solution ``g`` of ``d-bar g = (d-bar chi) c``,

    a = -g + (chi - 1) c     (holomorphic near A)
    b = -g + chi c           (holomorphic near B)

so ``b - a = c`` holds pointwise, whatever the accuracy of ``g``.  One step
turns ``gamma = Id + c`` into ``gamma~ = beta^-1 o gamma o alpha`` with
``alpha = Id + a`` and ``beta = Id + b``; the new displacement is quadratic
in ``c``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cutoff import Cutoff
from .dbar import DbarSolution, Form01Sample, operator_constant, solve_dbar, truncation_weights
from .errors import (
    DomainViolation,
    GeometryError,
    InvalidParameter,
    InvalidSupport,
    NotHolomorphic,
    ThresholdError,
)
from .geometry import CartanPair, Grid
from .holo import (
    HoloMap,
    Identity,
    InverseMap,
    SampledMap,
    check_range,
    dbar_residual,
    injectivity_margin,
    invert_near_identity,
    region_samples,
    sup_norm,
)

HOLO_FACTOR = 50.0
DEFAULT_GUARD = 0.15


def quadrature_tolerance(h, scale):
    """Residual tolerance ``50 h^2 * scale``."""
    return HOLO_FACTOR * h * h * scale


def split_constant(pair: CartanPair, cut: Cutoff, tau0: float) -> float:
    """``M3 = 1 + C sup |d-bar chi|`` with ``C`` the operator constant."""
    return 1.0 + operator_constant(pair.omega, tau0) * cut.sup_dbar


def _disp(c):
    if isinstance(c, HoloMap):
        return c.displacement
    return lambda z: np.asarray(c(np.asarray(z, dtype=complex)), dtype=complex)


class SplitPiece(HoloMap):
    """``z + (-g(z) + (chi(z) + shift) c(z))``; ``shift`` is -1 for the A side
    and 0 for the B side."""

    tag = "function"

    def __init__(self, g: SampledMap, cut: Cutoff, c, shift, domain=None):
        super().__init__(domain)
        self.g = g
        self.cut = cut
        self.c = _disp(c)
        self.shift = shift

    def displacement(self, z):
        z = np.asarray(z, dtype=complex)
        return -self.g.displacement(z) + (self.cut.chi(z) + self.shift) * self.c(z)


@dataclass
class AdditiveSplit:
    """Result of :func:`split_additive`; ``a = E(c)`` and ``b = Z(c)``."""

    a: SplitPiece
    b: SplitPiece
    g: SampledMap
    solution: DbarSolution
    norm_a: float
    norm_b: float
    norm_c: float
    M3: float
    identity_residual: float
    holo_a: float
    holo_b: float
    holo_c: float
    tolerance: float
    h: float

    @property
    def bound(self):
        return self.M3 * self.norm_c

    @property
    def norms_ok(self):
        return self.norm_a <= self.bound and self.norm_b <= self.bound


def split_additive(c, pair: CartanPair, tau1: float, tau2: float, cut: Cutoff, tau0: float,
                   h: float = 1.0 / 128, guard: float = DEFAULT_GUARD,
                   check_input: bool = True) -> AdditiveSplit:
    """Write ``c = b - a`` on ``C(tau1)`` with ``a`` holomorphic on
    ``A(tau1)`` and ``b`` on ``B(tau1)``.

    Parameters
    ----------
    c : HoloMap or callable
        Displacement, holomorphic on ``C(tau2)``.
    tau1, tau2 : float
        ``0 < tau1 < tau2 <= tau0``.
    cut : Cutoff
    tau0 : float
        Cap on the margins; fixes the operator constant and hence ``M3``.
    h : float
        Lattice spacing.
    guard : float
        Band around the truncation of the form left out of holomorphy checks.
    check_input : bool
        Check the d-bar residual of ``c`` on ``C(tau2)``.
    """
    if not (0 < tau1 < tau2 <= tau0):
        raise InvalidParameter(
            f"need 0 < tau1 < tau2 <= tau0, got {tau1:g}, {tau2:g}, {tau0:g}")
    cf = _disp(c)
    omega = pair.omega
    if tau2 + 6 * h <= omega._lattice.reach:
        grid, Z, sd = omega._lattice.entry(h)
        _, _, sdC = pair.C._lattice.entry(h)
    else:
        grid = Grid.covering(omega.bbox, h, pad=tau2 + 6 * h)
        Z = grid.points()
        sd = omega.signed_distance(Z)
        sdC = pair.C.signed_distance(Z)
    cz = cf(Z)
    C2 = pair.region("C", tau2)
    inC2 = sdC < tau2
    holo_c = dbar_residual(cz, h, mask=inC2)
    norm_c = sup_norm(cf(region_samples(C2, h)))
    tol_c = quadrature_tolerance(h, norm_c)
    if check_input and norm_c > 0 and holo_c > tol_c:
        raise NotHolomorphic(
            f"d-bar residual {holo_c:.3e} of the input exceeds {tol_c:.3e} on C(tau2)")
    dchi = cut.dbar_chi(Z)
    weights = truncation_weights(sd, tau2, h)
    form = Form01Sample(grid, dchi * cz, weights)
    if np.any(form.support & ~inC2):
        raise InvalidSupport("the form leaves C(tau2); the cutoff margins are too small")
    sol = solve_dbar(form, omega, tau2, tau0, guard=guard, sd=sd)
    g = SampledMap(grid, sol.values)
    chi = cut.chi(Z)
    a_grid = -sol.values + (chi - 1.0) * cz
    b_grid = -sol.values + chi * cz
    A1 = pair.region("A", tau1)
    B1 = pair.region("B", tau1)
    C1 = pair.region("C", tau1)
    a = SplitPiece(g, cut, cf, -1.0, A1)
    b = SplitPiece(g, cut, cf, 0.0, B1)
    ok = sol.residual_mask
    mA = _on_lattice(pair.A, grid, Z, h, tau1) & ok
    mB = _on_lattice(pair.B, grid, Z, h, tau1) & ok
    f_sup = form.sup()
    holo_a = dbar_residual(a_grid, h, mask=mA) if mA.any() else 0.0
    holo_b = dbar_residual(b_grid, h, mask=mB) if mB.any() else 0.0
    pc = region_samples(C1, h)
    ident = sup_norm(cf(pc) - (b.displacement(pc) - a.displacement(pc)))
    norm_a = sup_norm(a.displacement(region_samples(A1, h)))
    norm_b = sup_norm(b.displacement(region_samples(B1, h)))
    M3 = split_constant(pair, cut, tau0)
    return AdditiveSplit(a, b, g, sol, norm_a, norm_b, norm_c, M3, ident,
                         holo_a, holo_b, holo_c, quadrature_tolerance(h, f_sup), h)


def _on_lattice(piece, grid, Z, h, t):
    g, _, lev = piece._lattice.entry(h)
    if g == grid:
        return lev < t
    return piece.signed_distance(Z) < t


# ---------------------------------------------------------------------------
# one step


@dataclass
class StepResult:
    """Outcome of one compositional step."""

    alpha: HoloMap
    beta: HoloMap
    gamma_tilde: HoloMap
    eps_in: float
    eps_out: float
    bound: float
    alpha_norm: float
    beta_norm: float
    r: float
    split: Optional[AdditiveSplit] = None
    alpha_injective: bool = True
    beta_injective: bool = True
    checks: dict = field(default_factory=dict)

    @property
    def ratio(self):
        return self.eps_out / self.eps_in ** 2 if self.eps_in > 0 else 0.0


def _range(points, region, inclusion):
    try:
        check_range(points, region, what=inclusion)
    except DomainViolation as exc:
        raise GeometryError(f"range check failed: {inclusion}: {exc}", inclusion=inclusion) from exc


class StepComposite(HoloMap):
    """Exact ``beta^-1 o gamma o alpha`` in displacement form."""

    tag = "composite"

    def __init__(self, a, c, beta_inv: InverseMap, domain=None):
        super().__init__(domain)
        self.a = a
        self.c = c
        self.beta_inv = beta_inv

    def displacement(self, z):
        z = np.asarray(z, dtype=complex)
        d = self.a.displacement(z)
        d = d + self.c.displacement(z + d)
        return d + self.beta_inv.displacement(z + d)


def split_step(gamma: HoloMap, pair: CartanPair, tau: float, r: float, consts, cut: Cutoff,
               h: float = 1.0 / 128, guard: float = DEFAULT_GUARD, check_input: bool = True,
               tabulate: bool = True) -> StepResult:
    """One step ``gamma -> (alpha, beta, beta^-1 o gamma o alpha)``.

    ``consts`` supplies ``mode`` (``'certified'`` or ``'practical'``),
    ``M3``, ``M4``, ``M5``, ``tau0`` and, for practical mode, ``cap``.

    The additive split is taken at ``(tau + r/2, tau + r)``; ``alpha`` and
    ``beta`` live on ``A(tau + r/2)`` and ``B(tau + r/2)`` and are certified
    injective on ``(tau + r/4)``; the new map lives on ``C(tau + r/8)``.
    """
    C_r = pair.region("C", tau + r)
    pts_in = region_samples(C_r, h)
    eps_in = sup_norm(gamma.displacement(pts_in))
    if consts.mode == "certified":
        limit = r / (16.0 * consts.M4)
        if not eps_in < limit:
            raise ThresholdError(f"||gamma - Id|| = {eps_in:.3e} is not below r/(16 M4) = {limit:.3e}")
    else:
        if not eps_in < consts.cap:
            raise ThresholdError(f"||gamma - Id|| = {eps_in:.3e} exceeds the practical cap {consts.cap:.3e}")
    bound = consts.M5 / r * eps_in ** 2
    A2 = pair.region("A", tau + r / 2)
    B2 = pair.region("B", tau + r / 2)
    C8 = pair.region("C", tau + r / 8)
    if eps_in == 0:
        ident = Identity(C8)
        return StepResult(Identity(A2), Identity(B2), ident, 0.0, 0.0, 0.0, 0.0, 0.0, r,
                          checks={"bound_ok": True, "norms_ok": True})
    cap0 = max(consts.tau0, getattr(consts, "tau0_work", 0.0))
    sp = split_additive(gamma, pair, tau + r / 2, tau + r, cut, cap0, h=h, guard=guard,
                        check_input=check_input)
    alpha = SplitPiece(sp.g, cut, gamma, -1.0, A2)
    beta = SplitPiece(sp.g, cut, gamma, 0.0, B2)
    alpha_inj, _ = injectivity_margin(alpha, pair.region("A", tau + r / 4), r / 4, h)
    beta_inj, _ = injectivity_margin(beta, pair.region("B", tau + r / 4), r / 4, h)
    # welldefinedness of beta^-1 o gamma o alpha on C(tau + r/8)
    C4 = pair.region("C", tau + r / 4)
    C38 = pair.region("C", tau + 3 * r / 8)
    p8 = region_samples(C8, h)
    pa = alpha(p8)
    _range(pa, C4, "alpha(C(tau+r/8)) in C(tau+r/4)")
    _range(pa, gamma.domain or C_r, "alpha(C(tau+r/8)) in dom(gamma)")
    pg = gamma(pa)
    _range(pg, C38, "gamma(alpha(C(tau+r/8))) in C(tau+3r/8)")
    try:
        beta_inv = invert_near_identity(beta, pair.region("C", tau), r / 2, r / 8, h)
    except Exception as exc:
        if isinstance(exc, GeometryError):
            raise
        raise GeometryError(f"beta is not invertible on C(tau+3r/8): {exc}",
                            inclusion="C(tau+3r/8) in beta(C(tau+r/2))") from exc
    exact = StepComposite(alpha, gamma, beta_inv, C8)
    eps_out = sup_norm(exact.displacement(p8))
    if tabulate:
        tg = Grid.covering(C8.bbox, h, pad=4 * h)
        gt = SampledMap(tg, exact.displacement(tg.points()), C8)
    else:
        gt = exact
    checks = {
        "bound_ok": bool(eps_out <= bound),
        "norms_ok": bool(sp.norm_a <= sp.bound and sp.norm_b <= sp.bound),
        "identity_residual": sp.identity_residual,
        "holo_a": sp.holo_a,
        "holo_b": sp.holo_b,
        "holo_tol": sp.tolerance,
    }
    if consts.mode == "certified" and not checks["bound_ok"]:
        raise ThresholdError(f"eps_out = {eps_out:.3e} exceeds (M5/r) eps_in^2 = {bound:.3e}")
    return StepResult(alpha, beta, gt, eps_in, eps_out, bound, sp.norm_a, sp.norm_b, r, sp,
                      alpha_inj, beta_inj, checks)
