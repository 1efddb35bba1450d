"""Continuity in a parameter.

A disc drifts upward and the map's quadratic coefficient grows as zeta goes
from 0 to 1.  The split is computed at every grid point and the largest jump
between neighbours is compared for two grid spacings.  A small grid keeps
the demo short; the test suite runs the 11 and 21 point grids.
"""
import numpy as np

from cartansplit.geometry import JordanDomain, make_cartan_pair
from cartansplit.iteration import ParamFamily, max_modulus, run_family


def family(n):
    return ParamFamily(np.linspace(0, 1, n),
                       lambda z: make_cartan_pair(JordanDomain.disc(1.0, 0.05j * z), -0.3, 0.3),
                       [0, 0, 1e-4], [0, 0, 2e-4])


tau = 1 / 8 / 1024 / 5
mods = []
for n in (3, 5):
    res = run_family(family(n), tau, 1.0, mode="practical", workers=4)
    mods.append(max_modulus(res))
    print(f"{n} points: failed {res.failed}, output modulus {mods[-1]:.3e}, "
          f"output/input ratio {res.kappa:.3f}")
print(f"halving the spacing divides the modulus by {mods[0] / mods[1]:.3f}")
