"""Near-identity holomorphic maps ``z -> z + c(z)``.

Maps store their displacement ``c`` rather than their values so that small
quantities keep full relative precision: composing ``g`` after ``f`` gives the
displacement ``c_f(z) + c_g(z + c_f(z))``.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import (
    DomainViolation,
    IllConditionedContour,
    InvalidGrid,
    InvalidInput,
    InvalidParameter,
    NumericalFailure,
    PreconditionViolation,
)
from .geometry import Grid, Region, dilate

# K and const_1 for one complex variable
K_INJECTIVITY = 0.25
CONST_1 = 1.0

DEFAULT_H = 1.0 / 128


def sup_norm(values) -> float:
    """Maximum modulus over a nonempty sample of values."""
    v = np.asarray(values)
    if v.size == 0:
        raise InvalidInput("sup norm of an empty sample")
    return float(np.max(np.abs(v)))


def region_samples(region: Region, h: Optional[float] = None, boundary=True):
    """Lattice samples of a region, plus its boundary polyline if known.

    Sets thinner than the lattice spacing are still represented through the
    polyline, so a sup over these samples sees the whole set.
    """
    if region.samples is not None and h is None:
        pts = region.samples
    else:
        pts = region.sample(h or region.h or DEFAULT_H)
    if boundary and region._boundary is not None:
        pts = np.concatenate([pts, region.boundary_polyline()])
    if pts.size == 0:
        raise InvalidInput(f"region {region.name!r} has no samples at this spacing")
    return pts


class HoloMap:
    """A map ``z -> z + c(z)`` with a domain region.

    Subclasses implement :meth:`displacement`.  ``tag`` is one of
    ``identity``, ``polynomial``, ``composite``, ``inverse``, ``sampled`` or
    ``function``.
    """

    tag = "function"

    def __init__(self, domain: Optional[Region] = None):
        self.domain = domain
        self._norm_cache = {}

    def displacement(self, z):
        raise NotImplementedError

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z + self.displacement(z)

    def sup_norm(self, h: Optional[float] = None, region: Optional[Region] = None):
        """``(sup |c|, h)`` over samples of ``region`` (default: the domain)."""
        region = region or self.domain
        if region is None:
            raise InvalidInput("map has no domain to take a norm over")
        key = (id(region), h)
        if key not in self._norm_cache:
            pts = region_samples(region, h)
            self._norm_cache[key] = (sup_norm(self.displacement(pts)), h or region.h or DEFAULT_H)
        return self._norm_cache[key]

    def with_domain(self, domain):
        m = _Restricted(self, domain)
        return m


class _Restricted(HoloMap):
    def __init__(self, base, domain):
        super().__init__(domain)
        self.base = base
        self.tag = base.tag

    def displacement(self, z):
        return self.base.displacement(z)


class Identity(HoloMap):
    tag = "identity"

    def displacement(self, z):
        return np.zeros(np.shape(z), dtype=complex)


class FunctionMap(HoloMap):
    """Map given by a vectorised displacement function."""

    def __init__(self, disp, domain=None):
        super().__init__(domain)
        self._disp = disp

    def displacement(self, z):
        return np.asarray(self._disp(np.asarray(z, dtype=complex)), dtype=complex)


class PolynomialMap(HoloMap):
    """Polynomial map ``sum_k coeffs[k] z**k``.

    The displacement is evaluated by Horner's rule on the coefficients with
    the linear coefficient reduced by one.
    """

    tag = "polynomial"

    def __init__(self, coeffs, domain=None):
        super().__init__(domain)
        coeffs = [complex(c) for c in coeffs]
        if len(coeffs) < 2:
            coeffs = coeffs + [0j] * (2 - len(coeffs))
        self.coeffs = tuple(coeffs)
        d = list(coeffs)
        d[1] -= 1.0
        while len(d) > 1 and d[-1] == 0:
            d.pop()
        self._dcoeffs = np.array(d, dtype=complex)
        nz = [k for k, c in enumerate(self.coeffs) if c != 0]
        self.degree = max(nz) if nz else 0

    @classmethod
    def near_identity(cls, disp_coeffs, domain=None):
        """Map ``z + sum_k disp_coeffs[k] z**k``."""
        d = [complex(c) for c in disp_coeffs] + [0j, 0j]
        d[1] += 1.0
        return cls(d, domain)

    def displacement(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self._dcoeffs[-1], dtype=complex)
        for c in self._dcoeffs[-2::-1]:
            out = out * z + c
        return out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        k = np.arange(1, len(self.coeffs))
        dc = np.array(self.coeffs[1:]) * k
        out = np.full(z.shape, dc[-1] if len(dc) else 0j, dtype=complex)
        for c in dc[-2::-1]:
            out = out * z + c
        return out


class CompositeMap(HoloMap):
    """``outer o inner``."""

    tag = "composite"

    def __init__(self, outer: HoloMap, inner: HoloMap, domain=None):
        super().__init__(domain)
        self.outer = outer
        self.inner = inner

    def displacement(self, z):
        z = np.asarray(z, dtype=complex)
        d = self.inner.displacement(z)
        return d + self.outer.displacement(z + d)


class InverseMap(HoloMap):
    """Numerical inverse of a near-identity map by the fixed point
    ``e <- -c(w + e)``."""

    tag = "inverse"

    def __init__(self, phi: HoloMap, domain=None, tol=1e-15, max_steps=200, contraction=None):
        super().__init__(domain)
        self.phi = phi
        self.tol = tol
        self.max_steps = max_steps
        self.contraction = contraction

    def displacement(self, w):
        w = np.asarray(w, dtype=complex)
        flat = w.ravel()
        e = -self.phi.displacement(flat)
        active = np.arange(flat.size)
        for _ in range(self.max_steps):
            new = -self.phi.displacement(flat[active] + e[active])
            delta = np.abs(new - e[active])
            e[active] = new
            scale = np.maximum(1.0, np.abs(flat[active]))
            active = active[delta > self.tol * scale]
            if active.size == 0:
                return e.reshape(w.shape)
        resid = float(np.max(np.abs(e[active] + self.phi.displacement(flat[active] + e[active]))))
        raise NumericalFailure(
            f"fixed-point inversion did not converge in {self.max_steps} steps", residual=resid)


class SampledMap(HoloMap):
    """Displacement tabulated on a lattice grid and interpolated by bicubic
    splines of its real and imaginary parts.  Queries are clamped to the
    grid box."""

    tag = "sampled"

    def __init__(self, grid: Grid, values, domain=None, degree=3):
        super().__init__(domain)
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise InvalidGrid("sample array does not match the grid")
        self.grid = grid
        self.values = values
        xs, ys = grid.xs, grid.ys
        self._re = RectBivariateSpline(ys, xs, values.real, kx=degree, ky=degree)
        self._im = RectBivariateSpline(ys, xs, values.imag, kx=degree, ky=degree)
        self._box = grid.bbox

    def displacement(self, z):
        z = np.asarray(z, dtype=complex)
        x0, x1, y0, y1 = self._box
        x = np.clip(z.real.ravel(), x0, x1)
        y = np.clip(z.imag.ravel(), y0, y1)
        out = self._re.ev(y, x) + 1j * self._im.ev(y, x)
        return out.reshape(z.shape)


# ---------------------------------------------------------------------------
# operations


def check_range(points, region: Region, what="range", slack=1e-12):
    """Raise unless every point lies in ``region``.

    Points within ``slack`` of the region also pass; boundary samples of a
    nested dilation land on the boundary of the outer set up to rounding.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    bad = ~region.contains(pts)
    if np.any(bad) and slack > 0:
        bad[bad] = region.distance(pts[bad]) > slack
    if np.any(bad):
        raise DomainViolation(
            f"{np.count_nonzero(bad)} points of the {what} leave {region.name or 'the domain'}",
            points=pts[bad])


def compose(g: HoloMap, f: HoloMap, domain: Region, h: Optional[float] = None) -> CompositeMap:
    """Composite ``g o f`` on ``domain`` after checking ``f(domain) ⊆ dom(g)``
    on the samples of ``domain``."""
    if g.domain is not None:
        pts = region_samples(domain, h)
        check_range(f(pts), g.domain, what="inner map's image")
    return CompositeMap(g, f, domain)


def segment_tube_inside(V: Region, x, y, d, n_seg=64, n_circ=128) -> bool:
    """Whether the closed ``d``-tube around the segment ``[x, y]`` lies in ``V``
    (checked on circles about points of the segment)."""
    s = x + (y - x) * np.linspace(0.0, 1.0, n_seg)
    ring = d * np.exp(2j * np.pi * np.arange(n_circ) / n_circ)
    pts = np.concatenate([(s[:, None] + ring[None, :]).ravel(), s])
    return bool(np.all(V.contains(pts)))


def lipschitz_bound(F: HoloMap, V: Region, d: float, x: complex, y: complex,
                    h: Optional[float] = None, norm: Optional[float] = None):
    """Cauchy-estimate bound ``(||F||_V / d) |y - x|`` and whether
    ``|F(y) - F(x)|`` respects it.

    ``F`` is used through its values, not its displacement.
    """
    if not d > 0:
        raise InvalidParameter("d must be positive")
    x, y = complex(x), complex(y)
    if not segment_tube_inside(V, x, y, d):
        raise PreconditionViolation("the d-tube around the segment leaves V")
    if norm is None:
        norm = sup_norm(F(region_samples(V, h)))
    bound = CONST_1 * norm / d * abs(y - x)
    actual = abs(complex(F(np.array([y]))[0] - F(np.array([x]))[0]))
    return bound, bool(actual <= bound)


def injectivity_margin(c, D: Region, r: float, h: Optional[float] = None):
    """Certify injectivity of ``z + c(z)`` on ``D``.

    Certified when ``sup |c|`` over ``D(r)`` is at most ``K r`` with
    ``K = 1/4``: the Cauchy estimate then bounds ``|c'|`` by ``1/2`` on
    segments between points less than ``r/2`` apart, and points farther apart
    cannot collide because ``|c| <= r/4``.

    Returns
    -------
    (certified, K)
    """
    if not r > 0:
        raise InvalidParameter("r must be positive")
    Dr = dilate(D, r)
    pts = region_samples(Dr, h)
    if isinstance(c, HoloMap):
        if c.domain is not None:
            check_range(pts, c.domain, what=f"{Dr.name or 'D(r)'}")
        vals = c.displacement(pts)
    else:
        vals = np.asarray(c(pts))
    return bool(sup_norm(vals) <= K_INJECTIVITY * r), K_INJECTIVITY


def invert_near_identity(phi: HoloMap, D: Region, delta: float, eps: float,
                         h: Optional[float] = None, check=True) -> InverseMap:
    """Inverse of ``phi`` on ``D(delta - eps)``.

    Requires ``sup |phi - Id| < eps < delta`` on ``D(delta)``; the returned
    map satisfies ``phi(psi(w)) = w`` to fixed-point tolerance.  The
    contraction constant of the iteration is estimated from the Cauchy
    estimate and stored on the result.
    """
    if not eps < delta:
        raise InvalidParameter(f"need eps < delta, got eps={eps:g}, delta={delta:g}")
    if not eps > 0:
        raise InvalidParameter("eps must be positive")
    Dd = dilate(D, delta)
    s = None
    if check:
        pts = region_samples(Dd, h)
        s = sup_norm(phi.displacement(pts))
        if not s < eps:
            raise PreconditionViolation(f"sup |phi - Id| = {s:.3e} is not below eps = {eps:.3e}")
    contraction = None if s is None else (s / (eps - s) if eps > s else np.inf)
    dom = dilate(D, delta - eps) if delta - eps > 0 else D
    return InverseMap(phi, dom, contraction=contraction)


def _refined_winding(phi, contour, w, max_depth=24, values=None):
    pts = np.asarray(contour, dtype=complex)
    vals = (phi(pts) if values is None else np.asarray(values)) - w
    for _ in range(max_depth):
        if np.min(np.abs(vals)) < 1e-10:
            raise IllConditionedContour("map passes within 1e-10 of the target on the contour")
        nxt = np.roll(vals, -1)
        jump = np.abs(np.angle(nxt / vals)) > np.pi / 2
        if not np.any(jump):
            break
        idx = np.nonzero(jump)[0]
        mids = 0.5 * (pts[idx] + np.roll(pts, -1)[idx])
        mvals = phi(mids) - w
        pts = np.insert(pts, idx + 1, mids)
        vals = np.insert(vals, idx + 1, mvals)
    if np.min(np.abs(vals)) < 1e-10:
        raise IllConditionedContour("map passes within 1e-10 of the target on the contour")
    return np.angle(np.roll(vals, -1) / vals).sum() / (2 * np.pi)


def preimage_count(phi, contour, w) -> int:
    """Winding number of ``phi(contour) - w`` around 0.

    ``contour`` is a closed polyline (last point joined to the first).  The
    polyline is refined wherever consecutive arguments jump by more than
    ``pi/2``.
    """
    return int(round(_refined_winding(phi, contour, complex(w))))


def preimage_counts(phi, contour, ws, chunk=512):
    """Vectorised :func:`preimage_count` over many targets."""
    contour = np.asarray(contour, dtype=complex)
    ws = np.atleast_1d(np.asarray(ws, dtype=complex))
    vals = phi(contour)
    nxt = np.roll(vals, -1)
    out = np.empty(ws.size, dtype=int)
    for s in range(0, ws.size, chunk):
        w = ws[s:s + chunk, None]
        a = vals[None, :] - w
        b = nxt[None, :] - w
        steps = np.angle(b / a)
        close = np.min(np.abs(a), axis=1) < 1e-10
        jumpy = np.any(np.abs(steps) > np.pi / 2, axis=1)
        wn = np.rint(steps.sum(axis=1) / (2 * np.pi)).astype(int)
        for k in np.nonzero(close | jumpy)[0]:
            wn[k] = int(round(_refined_winding(phi, contour, ws[s + k], values=vals)))
        out[s:s + chunk] = wn
    return out


def dbar_field(f, h):
    """Central-difference ``(f_x + i f_y) / 2`` at interior nodes."""
    f = np.asarray(f, dtype=complex)
    if f.ndim != 2 or f.shape[0] < 3 or f.shape[1] < 3:
        raise InvalidGrid("need a 2-D grid with at least one interior point")
    fx = (f[1:-1, 2:] - f[1:-1, :-2]) / (2 * h)
    fy = (f[2:, 1:-1] - f[:-2, 1:-1]) / (2 * h)
    return 0.5 * (fx + 1j * fy)


def dbar_residual(f, h, mask=None) -> float:
    """Maximum of ``|d-bar f|`` by central differences over interior nodes.

    With ``mask``, only nodes whose four neighbours are all in the mask
    count as interior.
    """
    field = dbar_field(f, h)
    if mask is not None:
        m = np.asarray(mask, bool)
        inner = m[1:-1, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2] & m[2:, 1:-1] & m[:-2, 1:-1]
        if not inner.any():
            raise InvalidGrid("no interior points inside the mask")
        return float(np.max(np.abs(field[inner])))
    return float(np.max(np.abs(field)))
