"""Solving d-bar u = f on a bounded domain with the Cauchy transform.

For f = 1 on the unit disc the solution is u = conj(z) inside the disc,
which gives an exact check.  The finite-difference d-bar residual of u
falls like h^2.
"""
import numpy as np

from cartansplit.dbar import Form01Sample, operator_constant, solve_dbar
from cartansplit.geometry import Grid, JordanDomain
from cartansplit.verify import bump_form

disc = JordanDomain.disc(1.0)
grid = Grid.covering(disc.bbox, 1 / 128, pad=0.15)
form = Form01Sample.from_function(lambda z: np.ones_like(z), grid, disc, 0.1)
sol = solve_dbar(form, disc, 0.1, 0.1, guard=0.15)
inner = np.abs(grid.points()) < 0.8
err = np.max(np.abs(sol.values[inner] - np.conj(grid.points()[inner])))
print(f"f = 1 on the disc: max |u - conj z| on |z| < 0.8 is {err:.2e}")

print("residual under refinement for a smooth bump:")
hs = (1 / 32, 1 / 64, 1 / 128)
res = []
for h in hs:
    g = Grid.covering(disc.bbox, h, pad=0.05)
    f = bump_form(g, 0.1j, 0.8, 2)
    s = solve_dbar(f, disc, 0.01, 0.01)
    res.append(s.residual)
    print(f"  h = 1/{round(1 / h)}: residual {s.residual:.3e}, sup|u| {s.sup():.4f} <= C sup|f| = {s.C * f.sup():.4f}")
print(f"observed order {np.polyfit(np.log(hs), np.log(res), 1)[0]:.3f}")
print(f"operator constant for the unit disc with margin 0.5: {operator_constant(disc, 0.5):.4f}")
