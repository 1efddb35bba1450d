"""Smooth cutoff across the overlap strip of a Cartan pair.

The cutoff depends only on ``Re z``: it equals 1 left of ``l`` and 0 right of
``r`` with a smoothstep in between.  Since ``d-bar = (d_x + i d_y) / 2`` and
``chi`` does not depend on ``y``, ``d-bar chi = chi_x / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _profiles
from .errors import InvalidParameter
from .geometry import CartanPair, Grid, dilate


@dataclass(frozen=True)
class Cutoff:
    """Cutoff ``chi(z) = 1 - S((Re z - l) / w)`` with ``w = r - l``.

    Attributes
    ----------
    left, right : float
        Transition interval ``[l, r]`` in ``Re z``.
    tau_tilde : float
        Margin; ``chi`` is 1 on ``closure(A\\B)(tau_tilde)`` and 0 on
        ``closure(B\\A)(tau_tilde)``.
    profile : str
        ``'quintic'`` (C^2) or ``'septic'`` (C^3).
    """

    left: float
    right: float
    tau_tilde: float
    profile: str = "quintic"

    @property
    def width(self):
        return self.right - self.left

    def chi(self, z):
        x = np.real(np.asarray(z, dtype=complex))
        return 1.0 - _profiles.smoothstep((x - self.left) / self.width, self.profile)

    def dbar_chi(self, z):
        x = np.real(np.asarray(z, dtype=complex))
        return -0.5 * _profiles.smoothstep_slope((x - self.left) / self.width, self.profile) / self.width

    @property
    def sup_dbar(self):
        return dbar_chi_sup(self)

    def translated(self, v):
        dx = complex(v).real
        return Cutoff(self.left + dx, self.right + dx, self.tau_tilde, self.profile)


def dbar_chi_sup(c: Cutoff) -> float:
    """``sup |d-bar chi| = max slope / (2 w)``; ``15 / (16 w)`` for the
    quintic profile."""
    return _profiles.max_slope(c.profile) / (2.0 * c.width)


def build_cutoff(pair: CartanPair, tau_tilde=None, profile="quintic", check_h=0.02,
                 check_taus=None) -> Cutoff:
    """Cutoff for a strip pair with transition ``[s1 + 2 tau~, s2 - 2 tau~]``.

    ``tau_tilde`` defaults to ``(s2 - s1) / 256`` and may not exceed
    ``(s2 - s1) / 128``, which keeps the difference sets more than
    ``64 tau~`` apart.  The identity ``A(t) ∩ B(t) = C(t)`` is checked on a
    lattice for a few ``t <= tau~``.
    """
    gap = pair.s2 - pair.s1
    if tau_tilde is None:
        tau_tilde = gap / 256.0
    if not tau_tilde > 0:
        raise InvalidParameter("tau_tilde must be positive")
    if tau_tilde > gap / 128.0:
        raise InvalidParameter(
            f"tau_tilde={tau_tilde:g} too large: the separation {pair.sep:g} must exceed 64*tau_tilde "
            f"with room for the dilations (item 3 needs tau_tilde <= {gap / 128:g})")
    if profile not in _profiles.PROFILES:
        raise InvalidParameter(f"unknown profile {profile!r}")
    cut = Cutoff(pair.s1 + 2 * tau_tilde, pair.s2 - 2 * tau_tilde, float(tau_tilde), profile)
    if check_taus is None:
        check_taus = (tau_tilde / 4, tau_tilde / 2, tau_tilde)
    grid = Grid.covering(pair.omega.bbox, check_h, pad=2 * tau_tilde + check_h)
    Z = grid.points()
    # add points hugging the cutting lines, where the identity is delicate
    ys = np.linspace(pair.omega.bbox[2] - tau_tilde, pair.omega.bbox[3] + tau_tilde, 401)
    for s in (pair.s1, pair.s2):
        for dx in (-tau_tilde, -tau_tilde / 3, 0.0, tau_tilde / 3, tau_tilde):
            Z = np.concatenate([Z.ravel(), s + dx + 1j * ys])
    for t in check_taus:
        inA = dilate(pair.A.region(), t).contains(Z)
        inB = dilate(pair.B.region(), t).contains(Z)
        inC = dilate(pair.C.region(), t).contains(Z)
        if not np.array_equal(inA & inB, inC):
            raise InvalidParameter(f"A(t) ∩ B(t) differs from C(t) at t={t:g}")
    return cut
