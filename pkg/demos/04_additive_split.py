"""Cutoff and additive splitting.

A smooth cutoff chi equal to 1 on A\\B and 0 on B\\A turns a small map c on
C into two holomorphic pieces a on A and b on B with b - a = c on C.
"""
import numpy as np

from cartansplit.cutoff import build_cutoff
from cartansplit.geometry import JordanDomain, make_cartan_pair
from cartansplit.holo import PolynomialMap
from cartansplit.iteration import constants
from cartansplit.splitting import split_additive

om = JordanDomain.ellipse(2.0, 1.0)
pair = make_cartan_pair(om, -0.3, 0.3)
cut = build_cutoff(pair)
x = np.linspace(-0.35, 0.35, 8)
print("chi across the strip:", np.round(cut.chi(x), 4))
print(f"transition [{cut.left:.3f}, {cut.right:.3f}], sup |d-bar chi| = {cut.sup_dbar:.4f}")

tau = om.min_curvature_radius() / 8 / 1024 / 5
k = constants(pair, cut, tau, mode="practical")
c = PolynomialMap.near_identity([1e-4, 3e-4j, 2e-4, -1e-4])
sp = split_additive(c, pair, 4 * tau + k.R0 / 2, 4 * tau + k.R0, cut, k.tau0_work)
print(f"|c| = {sp.norm_c:.3e}, |a| = {sp.norm_a:.3e}, |b| = {sp.norm_b:.3e}, M3 = {sp.M3:.3f}")
print(f"max |c - (b - a)| on the overlap: {sp.identity_residual:.2e} (tolerance {sp.tolerance:.2e})")
print(f"d-bar residual of a and b: {sp.holo_a:.2e}, {sp.holo_b:.2e}")
