"""The quadratic iteration: gamma = beta o alpha^-1 on the overlap.

Practical mode uses a working radius and checks the step inequalities as it
goes; certified mode uses the worst-case constants and only accepts inputs
below the threshold eps_eta.
"""
import numpy as np

from cartansplit.cutoff import build_cutoff
from cartansplit.geometry import JordanDomain, make_cartan_pair
from cartansplit.holo import PolynomialMap
from cartansplit.iteration import constants, epsilon_threshold, run_split

om = JordanDomain.ellipse(2.0, 1.0)
pair = make_cartan_pair(om, -0.3, 0.3)
cut = build_cutoff(pair)
tau = om.min_curvature_radius() / 8 / 1024 / 5


def show(trace):
    print(f"  {'m':>2} {'R_m':>9} {'eps_in':>9} {'eps_out':>9} {'bound':>9} {'residual':>9}")
    for s in trace.steps:
        print(f"  {s.m:>2} {s.R_m:9.2e} {s.eps_in:9.2e} {s.eps_out:9.2e} {s.bound:9.2e} {s.residual:9.2e}")
    print(f"  final residual {trace.residual:.2e}, injective {trace.alpha_injective and trace.beta_injective},"
          f" degree check {trace.degree_ok}, Lipschitz {trace.lipschitz:.5f}")


print("practical mode, gamma(z) = z + 1e-4 (z^2 - 0.3 z^3):")
k = constants(pair, cut, tau, mode="practical")
_, _, tr = run_split(PolynomialMap.near_identity([0, 0, 1e-4, -3e-5]), pair, tau, 1.0, k, cut=cut)
show(tr)

print("certified mode:")
kc = constants(pair, cut, tau, mode="certified")
thr = epsilon_threshold(1.0, kc)
print(f"  R0 = {kc.R0:.3e}, M3 = {kc.M3:.3f}, M4 = {kc.M4:.4g}, M5 = {kc.M5:.4g}, eps_eta = {thr:.3e}")
gamma = PolynomialMap.near_identity(np.array([0, 0, 1.0, -0.3]) * thr / 2)
_, _, tr = run_split(gamma, pair, tau, 1.0, kc, cut=cut)
show(tr)
print(f"  distance estimates eps < R_m/32 at every step: {tr.de_all}")
