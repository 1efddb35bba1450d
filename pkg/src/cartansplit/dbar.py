"""Solid Cauchy transform as a solution operator for the d-bar equation.

For a bounded, compactly supported coefficient ``f`` the transform

    T f(z) = (1/pi) * integral of f(w) / (z - w) dA(w)

satisfies ``d-bar (T f) = f``.  On a lattice the integral is a discrete
convolution; cells near the target are integrated exactly against the
kernel (``f`` held constant on each cell), so the weak singularity costs no
accuracy.  The remaining cells use the midpoint rule.

The sup-norm constant follows from ``(1/pi) * integral over |w - z| <= rho of
dA / |w - z| = 2 rho``: if ``f`` lives in ``Omega(eps)`` and ``z`` in the
closure of ``Omega``, then ``|w - z| <= diam + eps``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from .errors import InvalidParameter, InvalidSupport, OutOfRange
from .geometry import Grid, JordanDomain
from .holo import SampledMap, dbar_field

NEAR_CELLS = 16


def _rect_antiderivatives(x, y):
    r2 = x * x + y * y
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(r2 > 0, np.log(np.where(r2 > 0, r2, 1.0)), 0.0)
        ax = np.where(x != 0, x * np.arctan(y / np.where(x != 0, x, 1.0)), 0.0)
        ay = np.where(y != 0, y * np.arctan(x / np.where(y != 0, y, 1.0)), 0.0)
    F = ax + 0.5 * y * lg
    G = ay + 0.5 * x * lg
    return F, G


def rect_integral(x1, x2, y1, y2):
    """Exact ``integral of du / u`` over the rectangle ``[x1,x2] x [y1,y2]``
    (``u = x + iy``), vectorised."""
    F22, G22 = _rect_antiderivatives(x2, y2)
    F12, G12 = _rect_antiderivatives(x1, y2)
    F21, G21 = _rect_antiderivatives(x2, y1)
    F11, G11 = _rect_antiderivatives(x1, y1)
    Ix = F22 - F12 - F21 + F11
    Iy = G22 - G12 - G21 + G11
    return Ix - 1j * Iy


@lru_cache(maxsize=16)
def _unit_kernel(ny, nx, near=NEAR_CELLS):
    """Kernel on unit spacing for all lattice offsets of an ``ny x nx`` grid.

    Entry ``[ky + ny - 1, kx + nx - 1]`` is ``(1/pi)`` times the integral of
    ``1 / (D - v)`` over the unit cell, with ``D = kx + i ky``.
    """
    kx = np.arange(-(nx - 1), nx)
    ky = np.arange(-(ny - 1), ny)
    KX, KY = np.meshgrid(kx, ky)
    D = KX + 1j * KY
    with np.errstate(divide="ignore", invalid="ignore"):
        ker = np.where(D != 0, 1.0 / D, 0.0)
    close = (np.abs(KX) <= near) & (np.abs(KY) <= near)
    x = KX[close].astype(float)
    y = KY[close].astype(float)
    ker[close] = rect_integral(x - 0.5, x + 0.5, y - 0.5, y + 0.5)
    ker = ker / np.pi
    ker.setflags(write=False)
    return ker


def cell_kernel(D, h, near=NEAR_CELLS):
    """Kernel weight of one cell for displacements ``D = z - w`` (any
    position, not only lattice offsets)."""
    D = np.asarray(D, dtype=complex)
    u = D / h
    close = (np.abs(u.real) <= near + 0.5) & (np.abs(u.imag) <= near + 0.5)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(u != 0, 1.0 / u, 0.0)
    if np.any(close):
        x, y = u.real[close], u.imag[close]
        out[close] = rect_integral(x - 0.5, x + 0.5, y - 0.5, y + 0.5)
    return out * h / np.pi


@dataclass(frozen=True)
class Form01Sample:
    """Coefficient of a (0,1)-form sampled on a lattice.

    ``values`` holds the coefficient, ``weights`` the fraction of each cell
    that belongs to the set the form lives on.  The quadrature density is
    ``values * weights``.
    """

    grid: Grid
    values: np.ndarray
    weights: Optional[np.ndarray] = None

    @property
    def density(self):
        if self.weights is None:
            return self.values
        return self.values * self.weights

    @property
    def support(self):
        return self.density != 0

    @property
    def h(self):
        return self.grid.h

    @classmethod
    def from_function(cls, fn, grid: Grid, domain: Optional[JordanDomain] = None,
                      eps: float = 0.0):
        """Sample ``fn`` on ``grid``; with ``domain``, restrict it to
        ``domain(eps)`` using linear cell weights that vanish outside."""
        Z = grid.points()
        vals = np.asarray(fn(Z), dtype=complex) * np.ones(Z.shape)
        w = None
        if domain is not None:
            w = truncation_weights(domain.signed_distance(Z), eps, grid.h)
        return cls(grid, vals, w)

    def sup(self):
        d = self.density
        return float(np.max(np.abs(d))) if d.size else 0.0


def truncation_weights(sd, eps, h):
    """Cell weights for the sublevel set ``{sd < eps}``.

    The weight falls linearly from 1 to 0 over the last lattice spacing
    inside the set, so the support stays strictly inside ``{sd < eps}`` and
    the weights vary continuously with the set.
    """
    return np.clip(-(np.asarray(sd) - eps) / h, 0.0, 1.0)


def cauchy_transform_grid(form: Form01Sample):
    """Transform evaluated at every node of the form's grid."""
    g = form.grid
    ker = _unit_kernel(g.ny, g.nx)
    full = fftconvolve(form.density, ker, mode="full")
    return full[g.ny - 1:2 * g.ny - 1, g.nx - 1:2 * g.nx - 1] * g.h


def cauchy_transform(form: Form01Sample, z, chunk=256):
    """Transform at arbitrary points inside the grid box (direct sum)."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    x0, x1, y0, y1 = form.grid.bbox
    h = form.grid.h
    if np.any((flat.real < x0 - h / 2) | (flat.real > x1 + h / 2) |
              (flat.imag < y0 - h / 2) | (flat.imag > y1 + h / 2)):
        raise OutOfRange("target outside the form's grid box")
    dens = form.density
    nz = dens != 0
    W = form.grid.points()[nz]
    F = dens[nz]
    out = np.empty(flat.shape, dtype=complex)
    for s in range(0, flat.size, chunk):
        D = flat[s:s + chunk, None] - W[None, :]
        out[s:s + chunk] = cell_kernel(D, h) @ F
    return out.reshape(z.shape)


def operator_constant(omega: JordanDomain, tau0: float) -> float:
    """``2 (diam(omega) + 2 tau0)``."""
    return 2.0 * (omega.diameter + 2.0 * tau0)


@dataclass
class DbarSolution:
    """Solution values on the grid of the form, with the target mask."""

    grid: Grid
    values: np.ndarray
    target: np.ndarray
    C: float
    f_sup: float
    residual: float
    residual_mask: np.ndarray = field(repr=False, default=None)

    @property
    def h(self):
        return self.grid.h

    def sup(self):
        return float(np.max(np.abs(self.values[self.target])))

    def interpolant(self, domain=None):
        return SampledMap(self.grid, self.values, domain)

    def to_csv(self, path):
        Z = self.grid.points()[self.target]
        U = self.values[self.target]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "re_u", "im_u"])
            for z, u in zip(Z, U):
                w.writerow([repr(z.real), repr(z.imag), repr(u.real), repr(u.imag)])


def smooth_mask(form: Form01Sample, guard: float = 0.0):
    """Nodes at least ``guard`` away from cells with fractional weight,
    where the sampled coefficient is not smooth."""
    if form.weights is None or guard <= 0:
        return np.ones(form.grid.shape, bool)
    w = form.weights
    rough = (w > 0) & (w < 1)
    # a weight jump between neighbours also counts as rough
    jump = np.zeros_like(rough)
    jump[:, 1:] |= w[:, 1:] != w[:, :-1]
    jump[1:, :] |= w[1:, :] != w[:-1, :]
    rough |= jump & (np.abs(form.values) > 0)
    if not rough.any():
        return np.ones(form.grid.shape, bool)
    dist = ndimage.distance_transform_edt(~rough) * form.grid.h
    return dist >= guard


def residual_field(u, form: Form01Sample):
    """``|d-bar u - f|`` at interior nodes (zero-padded to grid shape)."""
    out = np.full(form.grid.shape, np.nan)
    out[1:-1, 1:-1] = np.abs(dbar_field(u, form.grid.h) - form.density[1:-1, 1:-1])
    return out


def solve_dbar(form: Form01Sample, omega: JordanDomain, eps: float, tau0: float,
               guard: float = 0.0, sd=None) -> DbarSolution:
    """Solve ``d-bar u = f`` on the closure of ``omega``.

    Parameters
    ----------
    form : Form01Sample
        Coefficient supported in ``omega(eps)``.
    omega : JordanDomain
    eps : float
        Support margin, at most ``tau0``.
    tau0 : float
        Global cap on margins; fixes the constant ``C``.
    guard : float
        Width of the band around non-smooth parts of the form that is left
        out of the residual estimate.
    sd : array, optional
        Signed distance of ``omega`` at the grid nodes, if already known.
    """
    if not eps > 0:
        raise InvalidParameter("eps must be positive")
    if eps > tau0:
        raise InvalidParameter(f"eps={eps:g} exceeds the cap tau0={tau0:g}")
    if sd is None:
        sd = omega.signed_distance(form.grid.points())
    supp = form.support
    if np.any(supp & ~(sd < eps)):
        raise InvalidSupport("form is nonzero outside omega(eps)")
    u = cauchy_transform_grid(form)
    target = sd <= 0
    res_f = residual_field(u, form)
    mask = target & smooth_mask(form, guard) & np.isfinite(res_f)
    residual = float(np.max(res_f[mask])) if mask.any() else float("nan")
    return DbarSolution(form.grid, u, target, operator_constant(omega, tau0),
                        form.sup(), residual, mask)
