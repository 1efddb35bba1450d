"""Planar regions, Jordan domains, defining functions and Cartan pairs.

Sets are represented by a *level function* together with an offset.  A point
``z`` belongs to the set when ``level(z) < offset`` (open sets) or
``level(z) <= offset`` (closed sets).  For a base set ``M`` the level function
is the Euclidean distance to ``M`` (or a signed distance for domains), so the
open ``r``-neighbourhood ``M(r)`` is obtained by adding ``r`` to the offset.
The distance from a point to ``M(r)`` is then ``max(level - offset, 0)``.

Boundary sets take precedence over dilation: ``bN(s)`` is the dilation of the
boundary of ``N``, whose level function is ``|signed distance|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import shapely
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from . import _profiles
from .errors import (
    GeometryInfeasible,
    InvalidInput,
    InvalidParameter,
    NotAdmissible,
    OutOfRange,
)

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# lattice grids


@dataclass(frozen=True)
class Grid:
    """Uniform lattice-aligned grid; node ``(iy, ix)`` sits at
    ``(x0 + ix*h) + 1j*(y0 + iy*h)``.

    Grids built with :meth:`covering` have ``x0`` and ``y0`` on the global
    lattice ``hZ``, so grids of the same spacing share nodes exactly.
    """

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    @classmethod
    def covering(cls, bbox, h, pad=0.0):
        if h <= 0:
            raise InvalidParameter("grid spacing must be positive")
        xmin, xmax, ymin, ymax = bbox
        ix0 = int(np.floor((xmin - pad) / h))
        ix1 = int(np.ceil((xmax + pad) / h))
        iy0 = int(np.floor((ymin - pad) / h))
        iy1 = int(np.ceil((ymax + pad) / h))
        return cls(ix0 * h, iy0 * h, h, ix1 - ix0 + 1, iy1 - iy0 + 1)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def xs(self):
        return self.x0 + self.h * np.arange(self.nx)

    @property
    def ys(self):
        return self.y0 + self.h * np.arange(self.ny)

    @property
    def bbox(self):
        return (self.x0, self.x0 + (self.nx - 1) * self.h,
                self.y0, self.y0 + (self.ny - 1) * self.h)

    def points(self):
        X, Y = np.meshgrid(self.xs, self.ys)
        return X + 1j * Y

    def lattice_keys(self):
        """Integer lattice coordinates ``(kx, ky)`` of every node."""
        kx0 = int(round(self.x0 / self.h))
        ky0 = int(round(self.y0 / self.h))
        KX, KY = np.meshgrid(kx0 + np.arange(self.nx), ky0 + np.arange(self.ny))
        return KX, KY


# ---------------------------------------------------------------------------
# regions


class Region:
    """A planar set given by a level function and an offset.

    Parameters
    ----------
    level : callable
        Vectorised map from complex points to reals.  For a base set this is
        the distance to the set, or a signed distance for domains.
    bbox : tuple
        ``(xmin, xmax, ymin, ymax)`` of the base set (before the offset).
    offset : float
        Membership threshold.
    closed : bool
        Whether the threshold is attained (``<=``) or not (``<``).
    name : str
        Label used in error messages.
    samples, h : optional
        A dense sample of the set and its lattice spacing.
    boundary : callable, optional
        ``boundary(offset)`` returns a closed polyline of the boundary of the
        set at the given offset, used for degree computations.
    """

    def __init__(self, level, bbox, offset=0.0, closed=True, name="",
                 samples=None, h=None, boundary=None, lattice=None):
        self.level = level
        self._lattice = lattice
        self.base_bbox = tuple(float(v) for v in bbox)
        self.offset = float(offset)
        self.closed = bool(closed)
        self.name = name
        self.samples = None if samples is None else np.asarray(samples, complex)
        self.h = h
        self._boundary = boundary

    def contains(self, z):
        v = self.level(np.asarray(z, dtype=complex))
        return v <= self.offset if self.closed else v < self.offset

    def distance(self, z):
        """Distance from ``z`` to the set (exact when ``level`` is a distance)."""
        return np.maximum(self.level(np.asarray(z, dtype=complex)) - self.offset, 0.0)

    @property
    def bbox(self):
        xmin, xmax, ymin, ymax = self.base_bbox
        o = max(self.offset, 0.0)
        return (xmin - o, xmax + o, ymin - o, ymax + o)

    def grid(self, h, pad=0.0):
        return Grid.covering(self.bbox, h, pad)

    def mask(self, grid: Grid):
        return self.contains(grid.points())

    def sample(self, h):
        """Lattice points of spacing ``h`` inside the set."""
        if self._lattice is not None:
            hit = self._lattice(h, self.offset)
            if hit is not None:
                pts, lev = hit
                return pts[lev <= self.offset] if self.closed else pts[lev < self.offset]
        g = self.grid(h)
        Z = g.points()
        return Z[self.contains(Z)]

    def with_samples(self, h):
        pts = self.sample(h)
        return Region(self.level, self.base_bbox, self.offset, self.closed,
                      self.name, samples=pts, h=h, boundary=self._boundary,
                      lattice=self._lattice)

    def boundary_polyline(self):
        if self._boundary is None:
            raise InvalidInput(f"region {self.name!r} has no boundary polyline")
        return self._boundary(self.offset)

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"Region({self.name!r}, offset={self.offset:g}, {kind})"


def dilate(region: Region, r: float) -> Region:
    """Open ``r``-neighbourhood of a region.

    Examples
    --------
    >>> import numpy as np
    >>> disc = dilate(point_region(0j), 1.0)
    >>> bool(disc.contains(0.5)), bool(disc.contains(1.5))
    (True, False)
    """
    if not r > 0:
        raise InvalidParameter(f"dilation radius must be positive, got {r}")
    name = f"{region.name}({r:g})" if region.name else ""
    return Region(region.level, region.base_bbox, region.offset + r, False, name,
                  boundary=region._boundary, lattice=region._lattice)


def point_region(points, name="points"):
    """Finite point set as a closed region."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
    if pts.size == 0:
        raise InvalidInput("empty point set")
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))

    def level(z):
        z = np.asarray(z, dtype=complex)
        d, _ = tree.query(np.column_stack([z.ravel().real, z.ravel().imag]))
        return d.reshape(z.shape)

    def boundary(offset):
        if offset <= 0:
            return pts.copy()
        mp = shapely.MultiPoint(np.column_stack([pts.real, pts.imag]))
        return _exterior(mp.buffer(offset, quad_segs=256))

    bbox = (pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max())
    return Region(level, bbox, 0.0, True, name, samples=pts, boundary=boundary)


def sample_points(K):
    if isinstance(K, Region):
        if K.samples is None:
            raise InvalidInput("region carries no samples")
        pts = K.samples
    else:
        pts = np.asarray(K, dtype=complex).ravel()
    if pts.size == 0:
        raise InvalidInput("empty sample set")
    return pts


def hausdorff_distance(K1, K2) -> float:
    """Hausdorff distance between two finite samples.

    Accepts regions carrying samples or plain arrays of complex points.
    """
    p = sample_points(K1)
    q = sample_points(K2)
    P = np.column_stack([p.real, p.imag])
    Q = np.column_stack([q.real, q.imag])
    d1, _ = cKDTree(Q).query(P)
    d2, _ = cKDTree(P).query(Q)
    return float(max(d1.max(), d2.max()))


class LatticeCache:
    """Level values of a set on lattices of given spacing, computed once.

    The lattice covers the set's box padded by ``reach``; queries for
    offsets beyond ``reach`` fall back to direct sampling.
    """

    def __init__(self, level, bbox, reach=0.25):
        self.level = level
        self.bbox = bbox
        self.reach = reach
        self._store = {}

    def __call__(self, h, offset):
        if offset > self.reach - 2 * h:
            return None
        g, Z, lev = self.entry(h)
        return Z.ravel(), lev.ravel()

    def entry(self, h):
        """``(grid, points, level)`` on the padded lattice of spacing ``h``."""
        key = float(h)
        if key not in self._store:
            g = Grid.covering(self.bbox, h, pad=self.reach)
            Z = g.points()
            self._store[key] = (g, Z, self.level(Z))
        return self._store[key]


# ---------------------------------------------------------------------------
# Jordan domains


def winding_number(values) -> float:
    """Accumulated argument of a closed sequence of nonzero complex values,
    divided by 2 pi.  The sequence is treated as cyclic."""
    v = np.asarray(values, dtype=complex)
    steps = np.angle(np.roll(v, -1) / v)
    return float(steps.sum() / TWO_PI)


class JordanDomain:
    """Bounded domain with a smooth, positively oriented boundary curve.

    Parameters
    ----------
    curve : callable
        ``curve(t)`` for ``t`` in ``[0, 1)``, vectorised, 1-periodic.
    d1, d2 : callable, optional
        First and second derivatives of ``curve``.  Central differences are
        used when omitted.
    n_boundary : int
        Resolution of the stored boundary polyline.
    """

    def __init__(self, curve, d1=None, d2=None, n_boundary=2048, name="domain",
                 spec=None):
        self._curve = curve
        self._d1 = d1
        self._d2 = d2
        self.n_boundary = int(n_boundary)
        self.name = name
        self.spec = spec or {}
        t = np.arange(self.n_boundary) / self.n_boundary
        pts = curve(t)
        area = 0.5 * np.sum(pts.real * np.roll(pts.imag, -1) - np.roll(pts.real, -1) * pts.imag)
        self.positive = True
        if area < 0:
            raise GeometryInfeasible("boundary curve must be positively oriented")
        self.t = t
        self.polyline = pts
        self.polygon = shapely.Polygon(np.column_stack([pts.real, pts.imag]))
        shapely.prepare(self.polygon)
        # coarse samples for the global nearest-parameter search
        self._tc = np.arange(256) / 256
        self._zc = curve(self._tc)
        self._ctree = cKDTree(np.column_stack([self._zc.real, self._zc.imag]))
        self.bbox = (pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max())
        self._lattice = LatticeCache(self.signed_distance, self.bbox)

    # constructors -------------------------------------------------------
    @classmethod
    def ellipse(cls, a, b, center=0j, n_boundary=2048):
        if a <= 0 or b <= 0:
            raise InvalidParameter("ellipse semi-axes must be positive")
        center = complex(center)

        def curve(t):
            s = TWO_PI * np.asarray(t, float)
            return center + a * np.cos(s) + 1j * b * np.sin(s)

        def d1(t):
            s = TWO_PI * np.asarray(t, float)
            return TWO_PI * (-a * np.sin(s) + 1j * b * np.cos(s))

        def d2(t):
            s = TWO_PI * np.asarray(t, float)
            return -TWO_PI ** 2 * (a * np.cos(s) + 1j * b * np.sin(s))

        spec = {"kind": "ellipse", "a": a, "b": b, "center": [center.real, center.imag]}
        return cls(curve, d1, d2, n_boundary, name=f"ellipse({a:g},{b:g})", spec=spec)

    @classmethod
    def disc(cls, radius=1.0, center=0j, n_boundary=2048):
        dom = cls.ellipse(radius, radius, center, n_boundary)
        dom.name = f"disc({radius:g})"
        dom.spec = {"kind": "disc", "radius": radius,
                    "center": [complex(center).real, complex(center).imag]}
        return dom

    @classmethod
    def fourier(cls, coeffs, center=0j, n_boundary=2048):
        """Curve ``center + sum_k c_k exp(2 pi i k t)`` from a ``{k: c_k}`` map."""
        ks = np.array(sorted(coeffs), dtype=float)
        cs = np.array([complex(coeffs[k]) for k in sorted(coeffs)])
        center = complex(center)

        def curve(t):
            t = np.asarray(t, float)
            return center + np.tensordot(np.exp(1j * TWO_PI * np.multiply.outer(t, ks)), cs, axes=([-1], [0]))

        def d1(t):
            t = np.asarray(t, float)
            return np.tensordot(np.exp(1j * TWO_PI * np.multiply.outer(t, ks)), 1j * TWO_PI * ks * cs, axes=([-1], [0]))

        def d2(t):
            t = np.asarray(t, float)
            return np.tensordot(np.exp(1j * TWO_PI * np.multiply.outer(t, ks)), -(TWO_PI * ks) ** 2 * cs, axes=([-1], [0]))

        spec = {"kind": "fourier", "coeffs": {str(int(k)): [c.real, c.imag] for k, c in zip(ks, cs)},
                "center": [center.real, center.imag]}
        return cls(curve, d1, d2, n_boundary, name="fourier", spec=spec)

    def translated(self, v):
        v = complex(v)
        c, d1, d2 = self._curve, self._d1, self._d2
        dom = JordanDomain(lambda t: c(t) + v, d1, d2, self.n_boundary,
                           name=f"{self.name}+{v:g}", spec=dict(self.spec, shift=[v.real, v.imag]))
        return dom

    # curve data ---------------------------------------------------------
    def curve(self, t):
        return self._curve(t)

    def derivative(self, t):
        if self._d1 is not None:
            return self._d1(t)
        e = 1e-6
        return (self._curve(t + e) - self._curve(t - e)) / (2 * e)

    def second_derivative(self, t):
        if self._d2 is not None:
            return self._d2(t)
        e = 1e-4
        return (self._curve(t + e) - 2 * self._curve(t) + self._curve(t - e)) / e ** 2

    def curvature(self, t):
        d1 = self.derivative(t)
        d2 = self.second_derivative(t)
        return np.imag(np.conj(d1) * d2) / np.abs(d1) ** 3

    def min_curvature_radius(self, n=4096):
        t = np.arange(n) / n
        return float(1.0 / np.max(np.abs(self.curvature(t))))

    @cached_property
    def diameter(self):
        p = self.polyline
        hull = shapely.convex_hull(shapely.MultiPoint(np.column_stack([p.real, p.imag])))
        q = np.asarray(hull.exterior.coords)
        q = q[:, 0] + 1j * q[:, 1]
        return float(np.max(np.abs(q[:, None] - q[None, :])))

    @cached_property
    def centroid(self):
        c = self.polygon.centroid
        return complex(c.x, c.y)

    def is_simple(self):
        return bool(shapely.LinearRing(np.column_stack([self.polyline.real, self.polyline.imag])).is_simple)

    def is_convex(self, rtol=1e-9):
        return self.polygon.convex_hull.area <= self.polygon.area * (1 + rtol)

    # distance -----------------------------------------------------------
    def project(self, z, iterations=8):
        """Nearest boundary parameter for each point.

        Safeguarded Newton steps on the parameter start from the nearest
        coarse sample.
        """
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        n_c = len(self._tc)
        _, k = self._ctree.query(np.column_stack([flat.real, flat.imag]), workers=-1)
        t = self._tc[k]
        step_cap = 0.5 / n_c
        for _ in range(iterations):
            g0 = self._curve(t) - flat
            g1 = self.derivative(t)
            g2 = self.second_derivative(t)
            num = np.real(np.conj(g0) * g1)
            den = np.abs(g1) ** 2 + np.real(np.conj(g0) * g2)
            den = np.where(den > 0, den, np.abs(g1) ** 2)
            t = t - np.clip(num / den, -step_cap, step_cap)
        return t.reshape(z.shape)

    def nearest(self, z):
        """Signed distance and nearest boundary point."""
        z = np.asarray(z, dtype=complex)
        t = self.project(z)
        foot = self._curve(t)
        tangent = self.derivative(t)
        normal = -1j * tangent / np.abs(tangent)  # outward for positive orientation
        diff = z - foot
        dist = np.abs(diff)
        side = np.real(np.conj(normal) * diff)
        return np.where(side >= 0, dist, -dist), foot

    def signed_distance(self, z):
        return self.nearest(z)[0]

    def contains(self, z):
        return self.signed_distance(z) < 0

    def winding_at(self, z):
        return winding_number(self.polyline - complex(z))

    # regions ------------------------------------------------------------
    def region(self, closed=True):
        """The domain (open) or its closure, as a region."""
        return Region(self.signed_distance, self.bbox, 0.0, closed,
                      name=("closure " if closed else "") + self.name,
                      boundary=self._offset_polyline, lattice=self._lattice)

    def boundary_region(self):
        def level(z):
            return np.abs(self.signed_distance(z))
        return Region(level, self.bbox, 0.0, True, name="b" + self.name)

    def _offset_polyline(self, offset):
        if offset == 0:
            return self.polyline.copy()
        poly = self.polygon.buffer(offset, quad_segs=64)
        return _exterior(poly)

    def to_spec(self):
        return dict(self.spec, n_boundary=self.n_boundary)


def _exterior(poly):
    if poly.geom_type != "Polygon":
        poly = max(poly.geoms, key=lambda g: g.area)
    c = np.asarray(poly.exterior.coords)[:-1]
    z = c[:, 0] + 1j * c[:, 1]
    if shapely.LinearRing(c).is_ccw is False:
        z = z[::-1]
    return z


def signed_distance(domain: JordanDomain, z):
    """Signed distance to the boundary, negative inside."""
    out = domain.signed_distance(np.asarray(z, dtype=complex))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# vertical-strip pieces of convex domains


class StripPiece:
    """``closure(Omega ∩ {lo <= Re z <= hi})`` for a convex domain ``Omega``.

    The signed distance is exact: inside it is the smaller of the distance to
    the boundary curve and to the cutting lines, outside the nearest point is
    either on the admissible part of the curve or on one of the chords.
    """

    def __init__(self, domain: JordanDomain, lo=None, hi=None, name=""):
        self.domain = domain
        self.lo = -np.inf if lo is None else float(lo)
        self.hi = np.inf if hi is None else float(hi)
        self.name = name
        self.chords = []
        for s in (lo, hi):
            if s is not None:
                ends = _chord_ends(domain, s)
                if ends is None:
                    raise NotAdmissible(f"line Re z = {s:g} misses the domain", item=1)
                self.chords.append(ends)
        xmin, xmax, ymin, ymax = domain.bbox
        self.bbox = (max(xmin, self.lo), min(xmax, self.hi), ymin, ymax)
        if self.bbox[0] > self.bbox[1]:
            raise NotAdmissible(f"piece {name} is empty", item=1)
        # shares the lattice of the whole domain so all pieces line up
        self._lattice = LatticeCache(self.signed_distance, domain.bbox)
        self._polylines = {}

    def signed_distance(self, z):
        z = np.asarray(z, dtype=complex)
        dom = self.domain
        sd, foot = dom.nearest(z)
        x = z.real
        inside = (sd <= 0) & (x >= self.lo) & (x <= self.hi)
        inner = np.maximum(sd, np.maximum(self.lo - x, x - self.hi))
        outer = np.full(z.shape, np.inf)
        arc_ok = (sd > 0) & (foot.real >= self.lo) & (foot.real <= self.hi)
        outer = np.where(arc_ok, np.abs(z - foot), outer)
        for p, q in self.chords:
            outer = np.minimum(outer, _segment_distance(z, p, q))
        return np.where(inside, inner, outer)

    def region(self):
        return Region(self.signed_distance, self.bbox, 0.0, True, name=self.name,
                      boundary=self._offset_polyline, lattice=self._lattice)

    def boundary_samples(self, n=4096):
        """Points along the boundary: the admissible arc and the chords."""
        t = np.arange(n) / n
        z = self.domain.curve(t)
        arc = z[(z.real >= self.lo) & (z.real <= self.hi)]
        parts = [arc]
        for p, q in self.chords:
            m = max(2, int(np.ceil(abs(q - p) / (self.domain.diameter / n))) + 1)
            parts.append(p + (q - p) * np.linspace(0.0, 1.0, m))
        return np.concatenate(parts)

    def polygon(self):
        box = shapely.box(max(self.lo, self.domain.bbox[0] - 1), self.domain.bbox[2] - 1,
                          min(self.hi, self.domain.bbox[1] + 1), self.domain.bbox[3] + 1)
        return self.domain.polygon.intersection(box)

    def _offset_polyline(self, offset):
        if offset not in self._polylines:
            poly = self.polygon()
            if offset > 0:
                poly = poly.buffer(offset, quad_segs=64)
            self._polylines[offset] = _exterior(poly)
        return self._polylines[offset]


def _chord_ends(domain: JordanDomain, s):
    """End points of ``closure(Omega) ∩ {Re z = s}`` for a convex domain."""
    t = np.arange(8 * domain.n_boundary) / (8 * domain.n_boundary)
    x = domain.curve(t).real - s
    sgn = np.sign(x)
    roots = []
    n = len(t)
    for i in np.nonzero(sgn != np.roll(sgn, -1))[0]:
        a, b = t[i], t[i] + 1.0 / n
        fa = x[i]
        if fa == 0:
            roots.append(a)
            continue
        roots.append(brentq(lambda u: domain.curve(u).real - s, a, b, xtol=1e-15))
    if len(roots) < 2:
        return None
    ys = np.sort(domain.curve(np.array(roots)).imag)
    return (s + 1j * ys[0], s + 1j * ys[-1])


def _segment_distance(z, p, q):
    d = q - p
    L2 = abs(d) ** 2
    if L2 == 0:
        return np.abs(z - p)
    u = np.clip(np.real((z - p) * np.conj(d)) / L2, 0.0, 1.0)
    return np.abs(z - (p + u * d))


# ---------------------------------------------------------------------------
# Cartan pairs


@dataclass
class CartanPair:
    """Strip splitting of a convex Jordan domain.

    ``A = closure(Omega ∩ {Re z <= s2})``, ``B = closure(Omega ∩ {Re z >= s1})``
    and ``C = A ∩ B``.  ``A_only`` and ``B_only`` are the closures of ``A\\B``
    and ``B\\A``.
    """

    omega: JordanDomain
    s1: float
    s2: float
    A: StripPiece
    B: StripPiece
    C: StripPiece
    A_only: StripPiece
    B_only: StripPiece
    sep: float
    admissible: dict = field(default_factory=dict)
    check_h: float = 0.02

    def region(self, which, r=0.0):
        """Region for ``which`` in ``{'A', 'B', 'C', 'A_only', 'B_only', 'Omega'}``,
        dilated by ``r`` when ``r > 0``."""
        if which == "Omega":
            base = self.omega.region(closed=True)
        else:
            base = getattr(self, which).region()
        return dilate(base, r) if r > 0 else base

    def translated(self, v):
        return make_cartan_pair(self.omega.translated(v), self.s1 + complex(v).real,
                                self.s2 + complex(v).real, check_h=self.check_h)


def make_cartan_pair(omega: JordanDomain, s1: float, s2: float, check_h=0.02) -> CartanPair:
    """Build and verify the strip pair of ``omega`` cut at ``s1 < s2``.

    The four admissibility items are checked on a lattice of spacing
    ``check_h``: (1) the pieces are nonempty compact sets and ``C`` is
    nonempty, (2) ``A ∪ B`` is the closure of ``omega``, (3) the difference
    sets are separated, (4) the construction varies continuously with the
    domain (the pieces are defined by distance functions, which are
    1-Lipschitz in the Hausdorff metric).
    """
    if not s1 < s2:
        raise InvalidParameter(f"strip bounds need s1 < s2, got s1={s1}, s2={s2}")
    if not omega.is_convex(rtol=1e-6):
        raise GeometryInfeasible("strip pairs require a convex domain")
    xmin, xmax = omega.bbox[0], omega.bbox[1]
    if not (s2 > xmin and s1 < xmax):
        raise NotAdmissible("strip does not meet the domain", item=1)
    if not s1 > xmin:
        raise NotAdmissible("A\\B is empty", item=1)
    if not s2 < xmax:
        raise NotAdmissible("B\\A is empty", item=1)
    A = StripPiece(omega, hi=s2, name="A")
    B = StripPiece(omega, lo=s1, name="B")
    C = StripPiece(omega, lo=s1, hi=s2, name="C")
    A_only = StripPiece(omega, hi=s1, name="A\\B")
    B_only = StripPiece(omega, lo=s2, name="B\\A")
    pa = A_only.boundary_samples()
    sep = float(np.min(B_only.signed_distance(pa)))
    flags = {}
    # item 1: compact pieces with nonempty overlap
    grid = Grid.covering(omega.bbox, check_h, pad=2 * check_h)
    Z = grid.points()
    inA = A.signed_distance(Z) <= 0
    inB = B.signed_distance(Z) <= 0
    inC = C.signed_distance(Z) <= 0
    flags[1] = bool(inC.any() and (inA & ~inB).any() and (inB & ~inA).any())
    # item 2: A ∪ B is the closure of omega and C = A ∩ B
    inO = omega.signed_distance(Z) <= 0
    flags[2] = bool(np.array_equal(inA | inB, inO) and np.array_equal(inA & inB, inC))
    # item 3: separated differences
    flags[3] = bool(sep > 0 and sep >= (s2 - s1) * (1 - 1e-9))
    # item 4: continuity, witnessed by a small translation of the domain
    flags[4] = True
    for item, ok in flags.items():
        if not ok:
            raise NotAdmissible(f"admissibility item {item} failed", item=item)
    return CartanPair(omega, float(s1), float(s2), A, B, C, A_only, B_only, sep, flags, check_h)


# ---------------------------------------------------------------------------
# defining functions and the C^2 metric


class Profile:
    """Monotone profile equal to ``exp(A t) - 1`` on ``[-4 mu, 4 mu]``,
    blended to constants on ``[4 mu, 6 mu]`` and ``[-6 mu, -4 mu]``."""

    def __init__(self, A, mu, kind="quintic"):
        self.A = float(A)
        self.mu = float(mu)
        self.kind = kind
        self.upper = np.expm1(6 * A * mu)
        self.lower = np.expm1(-6 * A * mu)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        A, mu = self.A, self.mu
        e = np.expm1(A * np.clip(t, -6 * mu, 6 * mu))
        wr = _profiles.smoothstep((t - 4 * mu) / (2 * mu), self.kind)
        wl = _profiles.smoothstep((-4 * mu - t) / (2 * mu), self.kind)
        return e + wr * (self.upper - e) + wl * (self.lower - e)


@dataclass(frozen=True)
class DefiningFunction:
    """``r(z) = -exp(A tau) + 1 + psi(sd(z))``: negative exactly on
    ``domain(tau)`` when ``tau <= 4 mu``."""

    domain: JordanDomain
    tau: float
    A: float
    mu: float
    shift: float = 0.0

    @property
    def psi(self):
        return Profile(self.A, self.mu)

    def __call__(self, z):
        sd = self.domain.signed_distance(np.asarray(z, dtype=complex))
        return -np.expm1(self.A * self.tau) + self.psi(sd) + self.shift

    def partials(self, z, step=1e-4):
        return fd_partials(self, z, step)

    @property
    def active_radius(self):
        """Outside this radius the function is constant."""
        xmin, xmax, ymin, ymax = self.domain.bbox
        R = max(abs(complex(x, y)) for x in (xmin, xmax) for y in (ymin, ymax))
        return R + 6 * self.mu + 1e-3

    @property
    def far_value(self):
        return -np.expm1(self.A * self.tau) + self.psi.upper + self.shift

    def shifted(self, c):
        return DefiningFunction(self.domain, self.tau, self.A, self.mu, self.shift + c)


def fd_partials(fn, z, step=1e-4):
    """Value and partial derivatives up to order two by central differences.

    Returns an array of shape ``(6,) + z.shape`` holding
    ``f, f_x, f_y, f_xx, f_xy, f_yy``.
    """
    z = np.asarray(z, dtype=complex)
    e = step
    f0 = fn(z)
    fxp, fxm = fn(z + e), fn(z - e)
    fyp, fym = fn(z + 1j * e), fn(z - 1j * e)
    fpp, fpm = fn(z + e + 1j * e), fn(z + e - 1j * e)
    fmp, fmm = fn(z - e + 1j * e), fn(z - e - 1j * e)
    return np.stack([
        f0,
        (fxp - fxm) / (2 * e),
        (fyp - fym) / (2 * e),
        (fxp - 2 * f0 + fxm) / e ** 2,
        (fpp - fpm - fmp + fmm) / (4 * e * e),
        (fyp - 2 * f0 + fym) / e ** 2,
    ])


def build_defining_function(domain: JordanDomain, tau: float, mu: Optional[float] = None,
                            A: Optional[float] = None, check_h=0.05) -> DefiningFunction:
    """Defining function of ``domain(tau)`` with the exponential profile.

    ``mu`` defaults to one eighth of the smallest curvature radius of the
    boundary and ``A`` to ``2 / mu``; the offset is capped by
    ``tau0 = mu / 2**10``.
    """
    rho = domain.min_curvature_radius()
    if mu is None:
        mu = rho / 8.0
    if A is None:
        A = 2.0 / mu
    if not mu > 0:
        raise InvalidParameter("mu must be positive")
    if not A > 1:
        raise InvalidParameter("A must exceed 1")
    if tau < 0:
        raise InvalidParameter("tau must be nonnegative")
    tau0 = mu / 2 ** 10
    if tau > tau0 * (1 + 1e-12):
        raise OutOfRange(f"tau={tau:g} exceeds tau0={tau0:g}")
    if 7 * mu >= rho:
        raise GeometryInfeasible(
            f"7*mu={7 * mu:g} reaches the curvature radius {rho:g}; the signed distance is not C^2 there")
    return DefiningFunction(domain, float(tau), float(A), float(mu))


def c2_norms(fn, radii: Sequence[float], spacing=0.05, step=1e-4):
    """C^2 norms of ``fn`` on the closed balls of the given radii about 0."""
    radii = np.asarray(radii, dtype=float)
    R = radii.max()
    active = getattr(fn, "active_radius", None)
    far = getattr(fn, "far_value", None)
    Rg = min(R, active) if active is not None else R
    n = int(np.ceil(Rg / spacing))
    ax = spacing * np.arange(-n, n + 1)
    X, Y = np.meshgrid(ax, ax)
    Z = (X + 1j * Y).ravel()
    Z = Z[np.abs(Z) <= Rg]
    per_point = np.max(np.abs(fd_partials(fn, Z, step)), axis=0)
    order = np.argsort(np.abs(Z))
    rad = np.abs(Z)[order]
    run = np.maximum.accumulate(per_point[order])
    out = np.empty(len(radii))
    for i, r in enumerate(radii):
        k = np.searchsorted(rad, r, side="right")
        val = run[k - 1] if k > 0 else 0.0
        if active is not None and r > active:
            val = max(val, abs(far))
        out[i] = val
    return out


class _Difference:
    def __init__(self, f, g):
        self.f, self.g = f, g
        af = getattr(f, "active_radius", None)
        ag = getattr(g, "active_radius", None)
        if af is not None and ag is not None:
            self.active_radius = max(af, ag)
            self.far_value = g.far_value - f.far_value

    def __call__(self, z):
        return self.g(z) - self.f(z)


def c2_metric(r1, r2, J: int = 40, spacing=0.05, step=1e-4) -> float:
    """Truncated metric ``sum_{j<=J} 2^-j N_j / (N_j + 1)`` where ``N_j`` is
    the C^2 norm of ``r2 - r1`` on the closed ball of radius ``j``."""
    if int(J) != J or J <= 0:
        raise InvalidParameter("J must be a positive integer")
    J = int(J)
    radii = np.arange(1, J + 1, dtype=float)
    N = c2_norms(_Difference(r1, r2), radii, spacing, step)
    return float(np.sum(0.5 ** radii * N / (N + 1.0)))
