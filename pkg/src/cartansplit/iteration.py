"""Constants, the quadratic iteration and parameter families.

The iteration works on the shrinking overlaps ``C(4 tau + R_m)`` with
``R_m = R_0 / 8**m``.  Each step splits the current map additively and
composes; the products of the ``alpha`` and ``beta`` factors converge, and
the final maps satisfy ``gamma = beta o alpha^-1`` on ``C(tau)``.

Two modes are offered.  *Certified* mode uses the worst-case radius
``R_0 = min{1, tau/2, K tau/4} / 4`` and refuses to start unless the input is
below the threshold ``eps_eta``.  With a domain-derived ``tau`` this forces
inputs of size around 1e-13.  *Practical* mode replaces ``R_0`` by a working
radius (default 0.05) and checks the step inequalities a posteriori.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import mpmath
import numpy as np

from .cutoff import Cutoff, build_cutoff
from .errors import (
    InvalidOverlap,
    InvalidParameter,
    IterationAborted,
    SplittingError,
)
from .geometry import CartanPair, Region
from .holo import (
    CONST_1,
    K_INJECTIVITY,
    CompositeMap,
    HoloMap,
    Identity,
    InverseMap,
    PolynomialMap,
    preimage_counts,
    region_samples,
    sup_norm,
)
from .splitting import DEFAULT_GUARD, split_step

DEFAULT_M2 = 4.0


# ---------------------------------------------------------------------------
# sequence lemma


def derive_rho(a: float, B: float, C: float) -> float:
    """Threshold for the recursion ``eps_{m+1} <= C 2^{3m} eps_m^2 / a``.

    With ``u_m = (8C/a) 2^{3m} eps_m`` the recursion gives
    ``u_{m+1} <= u_m^2``.  If ``eps_0 < rho = (a / (8C)) min(1, C / (2B))``
    then ``u_m <= u_0 < C/(2B)`` for all ``m``, which is the same as
    ``16 B eps_m < a / 2^{3m}``.
    """
    if not a > 0:
        raise InvalidParameter("a must be positive")
    if not (B >= 1 and C >= 1):
        raise InvalidParameter("B and C must be at least 1")
    return a / (8.0 * C) * min(1.0, C / (2.0 * B))


def check_sequence_lemma(a, B, C, eps0, m_max: int = 60, dps: int = 50) -> bool:
    """Run the worst case ``eps_{m+1} = C 2^{3m} eps_m^2 / a`` in extended
    precision and test ``16 B eps_m < a / 2^{3m}`` for ``m <= m_max``.

    The inputs are doubles, so the two sides count as equal (and the strict
    inequality fails) when they agree to within a few units of double
    rounding.
    """
    with mpmath.workdps(dps):
        a, B, C = mpmath.mpf(a), mpmath.mpf(B), mpmath.mpf(C)
        eps = mpmath.mpf(eps0)
        tie = 1 - mpmath.mpf(2) ** -50
        for m in range(m_max + 1):
            if not 16 * B * eps < tie * a / mpmath.mpf(2) ** (3 * m):
                return False
            eps = C * mpmath.mpf(2) ** (3 * m) * eps * eps / a
    return True


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class Constants:
    """Constants of the iteration.

    ``R0`` is the radius actually used by the schedule: the worst-case value
    in certified mode, the working radius in practical mode.  ``R0_formula``
    always holds ``min{1, tau/2, K tau/4} / 4``.  ``tau0_work`` caps the
    support margins handed to the d-bar solver and fixes ``C``.
    """

    K: float
    M2: float
    M3: float
    M4: float
    M5: float
    const1: float
    tau: float
    tau0: float
    mu: float
    R0: float
    R0_formula: float
    C: float
    mode: str = "certified"
    cap: float = 1e-2
    tau0_work: float = 0.0
    M2_source: str = "default"

    def R(self, m):
        return self.R0 / 8.0 ** m

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def formula_constants(M3, M2=DEFAULT_M2, K=K_INJECTIVITY, tau=None):
    """``M4 = 2 max{2^11 M3, M3/(4K)}``, ``M5 = 32 M2 M3^2`` and, given
    ``tau``, ``R0 = min{1, tau/2, K tau/4} / 4``."""
    M4 = 2.0 * max(2 ** 11 * M3, M3 / (4.0 * K))
    M5 = 32.0 * M2 * M3 ** 2
    R0 = None if tau is None else 0.25 * min(1.0, tau / 2.0, K * tau / 4.0)
    return M4, M5, R0


def constants(pair: CartanPair, cut: Cutoff, tau: float, calib=None, mode: str = "certified",
              mu: Optional[float] = None, work_radius: float = 0.05, cap: float = 1e-2,
              sup_dbar: Optional[float] = None, diameter: Optional[float] = None) -> Constants:
    """Constants for a pair, a cutoff and a margin ``tau``.

    Parameters
    ----------
    calib : float, Calibration or None
        Source of ``M2``; a number is used as is, ``None`` means the
        default ``M2 = 4``.
    mode : {'certified', 'practical'}
    mu : float, optional
        Tube parameter; defaults to an eighth of the smallest boundary
        curvature radius.  ``tau0 = mu / 2**10``.
    work_radius : float
        ``R0`` used in practical mode.
    sup_dbar, diameter : float, optional
        Overrides used for families (worst case over the family).
    """
    if mode not in ("certified", "practical"):
        raise InvalidParameter(f"unknown mode {mode!r}")
    if mu is None:
        mu = pair.omega.min_curvature_radius() / 8.0
    tau0 = mu / 2 ** 10
    if not tau > 0:
        raise InvalidParameter("tau must be positive")
    if 5 * tau > mu * (1 + 1e-12) or 5 * tau > tau0 * (1 + 1e-12):
        raise InvalidParameter(f"need 5 tau <= mu and 5 tau <= tau0 (tau={tau:g}, tau0={tau0:g})")
    if calib is None:
        M2, src = DEFAULT_M2, "default"
    elif isinstance(calib, Calibration):
        M2, src = calib.M2, "calibrated"
    else:
        M2, src = float(calib), "given"
    K = K_INJECTIVITY
    R0_formula = 0.25 * min(1.0, tau / 2.0, K * tau / 4.0)
    R0 = R0_formula if mode == "certified" else float(work_radius)
    tau0_work = max(tau0, 4 * tau + R0)
    diam = pair.omega.diameter if diameter is None else diameter
    C = 2.0 * (diam + 2.0 * tau0_work)
    sd = cut.sup_dbar if sup_dbar is None else sup_dbar
    M3 = 1.0 + C * sd
    M4, M5, _ = formula_constants(M3, M2, K)
    return Constants(K, M2, M3, M4, M5, CONST_1, float(tau), tau0, mu, R0, R0_formula, C,
                     mode, cap, tau0_work, src)


def epsilon_threshold(eta: float, consts: Constants) -> float:
    """``eps_eta = min{1, rho(R0, M4, M5), rho(eta, M4, M5)} / 2``."""
    if not eta > 0:
        raise InvalidParameter("eta must be positive")
    vals = [1.0, derive_rho(consts.R0, consts.M4, consts.M5)]
    if math.isfinite(eta):
        vals.append(derive_rho(eta, consts.M4, consts.M5))
    return 0.5 * min(vals)


# ---------------------------------------------------------------------------
# M2 calibration


@dataclass(frozen=True)
class Calibration:
    """Empirical ``M2``: twice the worst observed
    ``||c~ - (c + a - b)|| delta / eps^2`` (at least 1)."""

    M2: float
    ratios: tuple
    seed: int
    trials: int


def calibrate_M2(trials: int = 100, seed: int = 42, delta: float = 0.5, n_points: int = 400) -> Calibration:
    """Calibrate ``M2`` on random near-identity polynomial triples.

    For each trial, ``alpha = Id + a``, ``beta = Id + b`` and
    ``gamma = Id + c`` are cubic polynomials with sup norm at most ``eps``
    on ``D(0, 1 + delta)``; ``c~`` is the displacement of
    ``beta^-1 o gamma o alpha`` on the unit disc.
    """
    rng = np.random.default_rng(seed)
    th = 2 * np.pi * rng.random(n_points)
    rad = np.sqrt(rng.random(n_points))
    V = rad * np.exp(1j * th)
    V = np.concatenate([V, np.exp(2j * np.pi * np.arange(128) / 128)])
    big = (1 + delta) * np.exp(2j * np.pi * np.arange(512) / 512)
    ratios = []
    for _ in range(trials):
        eps = 10.0 ** rng.uniform(-6, -3)
        maps = []
        for _k in range(3):
            co = rng.normal(size=4) + 1j * rng.normal(size=4)
            m = PolynomialMap.near_identity(co)
            s = sup_norm(m.displacement(big))
            maps.append(PolynomialMap.near_identity(co * eps / s))
        a, b, c = maps
        binv = InverseMap(b)
        ct = CompositeMap(binv, CompositeMap(c, a)).displacement(V)
        lin = c.displacement(V) + a.displacement(V) - b.displacement(V)
        ratios.append(sup_norm(ct - lin) * delta / eps ** 2)
    M2 = max(1.0, 2.0 * max(ratios))
    return Calibration(float(M2), tuple(float(r) for r in ratios), seed, trials)


# ---------------------------------------------------------------------------
# the iteration


@dataclass
class StepRecord:
    m: int
    R_m: float
    eps_in: float
    eps_out: float
    bound: float
    alpha_norm: float
    beta_norm: float
    residual: float
    de_gamma: bool
    de_alpha: bool
    de_beta: bool
    alpha_injective: bool
    beta_injective: bool
    identity_residual: float = 0.0

    @property
    def de_ok(self):
        return self.de_gamma and self.de_alpha and self.de_beta

    def row(self):
        return {"m": self.m, "R_m": self.R_m, "eps_in": self.eps_in, "eps_out": self.eps_out,
                "bound": self.bound, "alpha_norm": self.alpha_norm, "beta_norm": self.beta_norm,
                "residual": self.residual, "de_ok": int(self.de_ok)}


TRACE_COLUMNS = ("m", "R_m", "eps_in", "eps_out", "bound", "alpha_norm", "beta_norm",
                 "residual", "de_ok")


@dataclass
class IterationTrace:
    """Per-step records and the final maps of :func:`run_split`."""

    steps: List[StepRecord] = field(default_factory=list)
    alpha: Optional[HoloMap] = None
    beta: Optional[HoloMap] = None
    alpha_limit_inverse: Optional[HoloMap] = None
    beta_limit_inverse: Optional[HoloMap] = None
    residual: float = float("nan")
    tail_bound: float = float("nan")
    composite_diffs: List[float] = field(default_factory=list)
    lipschitz: float = float("nan")
    lipschitz_ok: bool = True
    degree_ok: bool = True
    degree_counts: tuple = ()
    alpha_injective: bool = True
    beta_injective: bool = True
    alpha_norm: float = 0.0
    beta_norm: float = 0.0
    eps0: float = 0.0
    quad_tol: float = 0.0
    stop_reason: str = ""
    mode: str = "certified"
    consts: Optional[Constants] = None

    def rows(self):
        return [s.row() for s in self.steps]

    @property
    def eps_stop(self):
        return self.steps[-1].eps_out if self.steps else self.eps0

    def identity_ok(self):
        """Splitting residual within ``max(10 quadrature tolerance, 2 eps_stop)``."""
        return self.residual <= max(10 * self.quad_tol, 2 * self.eps_stop)

    @property
    def de_all(self):
        return all(s.de_ok for s in self.steps)


def _sup_disp(m: HoloMap, region: Region, h):
    return sup_norm(m.displacement(region_samples(region, h)))


def _split_residual(c, alpha, beta, region, h):
    """``sup |gamma - beta o alpha^-1|`` on the samples of ``region``."""
    z = region_samples(region, h)
    e = InverseMap(alpha).displacement(z)
    return sup_norm(c.displacement(z) - e - beta.displacement(z + e))


def run_split(gamma: HoloMap, pair: CartanPair, tau: float, eta: float, consts: Constants,
              max_m: int = 12, cut: Optional[Cutoff] = None, h: float = 1.0 / 128,
              stop_tol: Optional[float] = None, guard: float = DEFAULT_GUARD,
              n_lipschitz: int = 200, degree_targets: int = 400, seed: int = 42):
    """Split ``gamma = beta o alpha^-1`` on ``C(tau)``.

    Returns
    -------
    alpha, beta : HoloMap
        Products of the step factors, on ``A(2 tau)`` and ``B(2 tau)``.
    trace : IterationTrace
    """
    if cut is None:
        cut = build_cutoff(pair)
    practical = consts.mode == "practical"
    C0 = pair.region("C", 4 * tau + consts.R0)
    g0 = gamma if gamma.domain is not None else _with_domain(gamma, C0)
    eps0 = _sup_disp(g0, C0, h)
    trace = IterationTrace(mode=consts.mode, consts=consts, eps0=eps0)
    if not practical:
        thr = epsilon_threshold(eta, consts)
        if not eps0 < thr:
            raise IterationAborted(
                f"||gamma - Id|| = {eps0:.3e} on C(4tau+R0) is not below eps_eta = {thr:.3e}", trace)
    elif not eps0 < consts.cap:
        raise IterationAborted(f"||gamma - Id|| = {eps0:.3e} exceeds the practical cap", trace)
    if stop_tol is None:
        stop_tol = 1e-12 if practical else 1e-6 * eps0
    A_fin = pair.region("A", 2 * tau)
    B_fin = pair.region("B", 2 * tau)
    C_tau = pair.region("C", tau)
    alpha_t: HoloMap = Identity(pair.region("A", 4 * tau + consts.R0))
    beta_t: HoloMap = Identity(pair.region("B", 4 * tau + consts.R0))
    chain_ok = True
    current = g0
    eps_m = eps0
    m = 0
    trace.stop_reason = "max_m"
    while m < max_m:
        if eps_m <= stop_tol:
            trace.stop_reason = "tolerance"
            break
        R_m = consts.R(m)
        try:
            st = split_step(current, pair, 4 * tau, R_m, consts, cut, h=h, guard=guard,
                            check_input=(m == 0))
        except SplittingError as exc:
            raise IterationAborted(f"step {m} failed: {exc}", trace) from exc
        # the products live on A(4 tau + R_m/4); each factor must map this
        # set into the domain of the previous product
        A_m = pair.region("A", 4 * tau + R_m / 4)
        B_m = pair.region("B", 4 * tau + R_m / 4)
        za, zb = region_samples(A_m, h), region_samples(B_m, h)
        nested = (np.all(alpha_t.domain.contains(st.alpha(za)))
                  and np.all(beta_t.domain.contains(st.beta(zb))))
        chain_ok = chain_ok and bool(nested)
        new_alpha = CompositeMap(alpha_t, st.alpha, A_m)
        new_beta = CompositeMap(beta_t, st.beta, B_m)
        zf = region_samples(A_fin, h)
        trace.composite_diffs.append(sup_norm(new_alpha.displacement(zf) - alpha_t.displacement(zf)))
        alpha_t, beta_t = new_alpha, new_beta
        residual = _split_residual(g0, alpha_t, beta_t, C_tau, h)
        rec = StepRecord(m, R_m, st.eps_in, st.eps_out, st.bound, st.alpha_norm, st.beta_norm,
                         residual, st.eps_in < R_m / 32, st.alpha_norm < R_m / 32,
                         st.beta_norm < R_m / 32, st.alpha_injective, st.beta_injective,
                         st.checks.get("identity_residual", 0.0))
        trace.steps.append(rec)
        problems = []
        if not (st.alpha_injective and st.beta_injective):
            problems.append("injectivity not certified")
        if not nested:
            problems.append("factor leaves the domain of the product")
        if st.alpha_norm > consts.M3 * st.eps_in or st.beta_norm > consts.M3 * st.eps_in:
            problems.append("factor norms exceed M3 * eps")
        if practical and not st.eps_out < st.eps_in:
            problems.append("no contraction")
        if not practical and not rec.de_ok:
            problems.append("distance estimates violated")
        if problems:
            raise IterationAborted(f"step {m}: " + ", ".join(problems), trace)
        trace.quad_tol = max(trace.quad_tol, st.checks.get("holo_tol", 0.0))
        current = st.gamma_tilde
        eps_m = st.eps_out
        m += 1
    # tail of the product: the worst-case recursion from the last measured eps
    tail, e = 0.0, eps_m
    for k in range(m, m + 60):
        tail += consts.M3 * e
        e = consts.M5 / consts.R(k) * e * e
        if e == 0 or tail + consts.M3 * e == tail:
            break
    trace.tail_bound = tail
    trace.residual = _split_residual(g0, alpha_t, beta_t, C_tau, h)
    trace.alpha_norm = _sup_disp(alpha_t, A_fin, h)
    trace.beta_norm = _sup_disp(beta_t, B_fin, h)
    # a product of injective factors with nested ranges is injective
    steps_ok = all(s.alpha_injective and s.beta_injective for s in trace.steps)
    trace.alpha_injective = trace.beta_injective = bool(chain_ok and steps_ok)
    _final_checks(trace, pair, tau, alpha_t, beta_t, practical, h, n_lipschitz, degree_targets, seed)
    trace.alpha = alpha_t.with_domain(A_fin)
    trace.beta = beta_t.with_domain(B_fin)
    return trace.alpha, trace.beta, trace


def _with_domain(m: HoloMap, region: Region) -> HoloMap:
    return m.with_domain(region)


def _final_checks(trace, pair, tau, alpha, beta, practical, h, n_lipschitz, degree_targets, seed):
    rng = np.random.default_rng(seed)
    # In practical mode the factors move points much farther than tau, so
    # the nested sets are widened by 16 times the larger product norm.
    pad = 16 * max(trace.alpha_norm, trace.beta_norm) if practical else 0.0
    trace.alpha_limit_inverse = InverseMap(alpha, pair.region("A", 7 * tau / 2 + pad / 2))
    trace.beta_limit_inverse = InverseMap(beta, pair.region("B", 7 * tau / 2 + pad / 2))
    counts = []
    for piece, inv in (("A", trace.alpha_limit_inverse), ("B", trace.beta_limit_inverse)):
        contour = pair.region(piece, 13 * tau / 4 + pad).boundary_polyline()
        targets = region_samples(pair.region(piece, 51 * tau / 16 + pad / 2), h, boundary=False)
        if targets.size > degree_targets:
            targets = targets[rng.choice(targets.size, degree_targets, replace=False)]
        edge = pair.region(piece, 51 * tau / 16 + pad / 2).boundary_polyline()
        targets = np.concatenate([targets, edge[:: max(1, edge.size // 100)]])
        counts.append(preimage_counts(inv, contour, targets))
    allc = np.concatenate(counts)
    trace.degree_counts = (int(allc.min()), int(allc.max()))
    trace.degree_ok = bool(np.all(allc == 1))
    # Lipschitz diagnostic for alpha on A(51 tau/16)
    pts = region_samples(pair.region("A", 51 * tau / 16), h, boundary=False)
    i = rng.integers(0, pts.size, n_lipschitz)
    j = rng.integers(0, pts.size, n_lipschitz)
    keep = i != j
    x, y = pts[i[keep]], pts[j[keep]]
    ratio = np.abs(alpha(y) - alpha(x)) / np.abs(y - x)
    trace.lipschitz = float(ratio.max()) if ratio.size else 1.0
    trace.lipschitz_ok = bool(np.all(np.abs(alpha(y) - alpha(x)) <= trace.lipschitz * np.abs(y - x) * (1 + 1e-12)))


# ---------------------------------------------------------------------------
# families


@dataclass
class ParamFamily:
    """A family of pairs and maps sampled on a parameter grid.

    ``pair_fn(zeta)`` returns a Cartan pair; the map at ``zeta`` has
    displacement coefficients interpolated linearly between ``coeffs0`` and
    ``coeffs1``.
    """

    zetas: np.ndarray
    pair_fn: Callable[[float], CartanPair]
    coeffs0: Sequence[complex]
    coeffs1: Sequence[complex]
    tau_tilde: Optional[float] = None
    profile: str = "quintic"

    def coeffs(self, zeta):
        n = max(len(self.coeffs0), len(self.coeffs1))
        c0 = np.zeros(n, complex)
        c1 = np.zeros(n, complex)
        c0[:len(self.coeffs0)] = self.coeffs0
        c1[:len(self.coeffs1)] = self.coeffs1
        return (1 - zeta) * c0 + zeta * c1

    def gamma(self, zeta):
        return PolynomialMap.near_identity(self.coeffs(zeta))


@dataclass
class FamilyMember:
    zeta: float
    alpha: Optional[HoloMap]
    beta: Optional[HoloMap]
    trace: Optional[IterationTrace]
    error: Optional[str] = None


@dataclass
class FamilyResult:
    members: List[FamilyMember]
    consts: Constants
    moduli: dict
    input_moduli: list
    kappa: float
    failed: list

    @property
    def ok(self):
        return not self.failed


def continuity_modulus(maps, zetas, grids: Sequence[Region], h: float):
    """Sup of ``|f_zeta - f_zeta'|`` over common lattice nodes of adjacent
    parameters.

    Parameters
    ----------
    maps : sequence of callables
    zetas : sequence of float
    grids : sequence of Region
        Evaluation sets; their lattice samples of spacing ``h`` are matched
        through integer lattice coordinates.

    Returns
    -------
    list of (zeta, zeta', modulus)
    """
    keyed = []
    for reg in grids:
        pts = region_samples(reg, h, boundary=False)
        keys = np.rint(np.column_stack([pts.real, pts.imag]) / h).astype(np.int64)
        keyed.append((pts, keys))
    out = []
    for k in range(len(maps) - 1):
        p0, k0 = keyed[k]
        p1, k1 = keyed[k + 1]
        common, i0, _ = _intersect_keys(k0, k1)
        if common == 0:
            raise InvalidOverlap(f"no common nodes between zeta={zetas[k]:g} and {zetas[k + 1]:g}")
        z = p0[i0]
        out.append((float(zetas[k]), float(zetas[k + 1]),
                    float(np.max(np.abs(maps[k](z) - maps[k + 1](z))))))
    return out


def _intersect_keys(k0, k1):
    v0 = k0[:, 0] * (1 << 32) + k0[:, 1]
    v1 = k1[:, 0] * (1 << 32) + k1[:, 1]
    common, i0, i1 = np.intersect1d(v0, v1, return_indices=True)
    return common.size, i0, i1


def family_constants(family: ParamFamily, tau: float, mode: str, calib=None, **kw):
    """Constants from the worst pair over the grid: largest diameter and
    largest ``sup |d-bar chi|``."""
    pairs = [family.pair_fn(z) for z in family.zetas]
    cuts = [build_cutoff(p, family.tau_tilde, family.profile) for p in pairs]
    diam = max(p.omega.diameter for p in pairs)
    sdb = max(c.sup_dbar for c in cuts)
    mu = min(p.omega.min_curvature_radius() for p in pairs) / 8.0
    worst = int(np.argmax([p.omega.diameter for p in pairs]))
    consts = constants(pairs[worst], cuts[worst], tau, calib, mode, mu=mu,
                       sup_dbar=sdb, diameter=diam, **kw)
    return consts, pairs, cuts


def run_family(family: ParamFamily, tau: float, eta: float, max_m: int = 12, mode: str = "practical",
               calib=None, h: float = 1.0 / 128, workers: int = 1, consts: Optional[Constants] = None,
               **kw) -> FamilyResult:
    """Run :func:`run_split` for every parameter and measure continuity."""
    if consts is None:
        consts, pairs, cuts = family_constants(family, tau, mode, calib,
                                               **{k: v for k, v in kw.items() if k in ("work_radius", "cap")})
    else:
        pairs = [family.pair_fn(z) for z in family.zetas]
        cuts = [build_cutoff(p, family.tau_tilde, family.profile) for p in pairs]
    run_kw = {k: v for k, v in kw.items() if k not in ("work_radius", "cap")}

    def one(k):
        z = float(family.zetas[k])
        try:
            a, b, tr = run_split(family.gamma(z), pairs[k], tau, eta, consts, max_m, cuts[k], h, **run_kw)
            return FamilyMember(z, a, b, tr)
        except SplittingError as exc:
            return FamilyMember(z, None, None, getattr(exc, "trace", None), f"{exc.code}: {exc}")

    idx = range(len(family.zetas))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            members = list(ex.map(one, idx))
    else:
        members = [one(k) for k in idx]
    failed = [m.zeta for m in members if m.error]
    moduli, input_moduli, kappa = {}, [], float("nan")
    if not failed:
        zs = [m.zeta for m in members]
        A_regs = [p.region("A", 2 * tau) for p in pairs]
        B_regs = [p.region("B", 2 * tau) for p in pairs]
        C_regs = [p.region("C", tau) for p in pairs]
        moduli["alpha"] = continuity_modulus([m.alpha for m in members], zs, A_regs, h)
        moduli["beta"] = continuity_modulus([m.beta for m in members], zs, B_regs, h)
        gammas = [family.gamma(z) for z in zs]
        input_moduli = continuity_modulus(gammas, zs, C_regs, h)
        out_max = max(max(t[2] for t in moduli["alpha"]), max(t[2] for t in moduli["beta"]))
        in_max = max(t[2] for t in input_moduli)
        kappa = out_max / in_max if in_max > 0 else (0.0 if out_max == 0 else float("inf"))
    return FamilyResult(members, consts, moduli, input_moduli, kappa, failed)


def max_modulus(result: FamilyResult, which=("alpha", "beta")):
    return max(max(t[2] for t in result.moduli[w]) for w in which)
