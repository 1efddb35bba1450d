"""Near-identity holomorphic maps: composition, inversion, injectivity and
preimage counting by the argument principle."""
import numpy as np

from cartansplit.geometry import JordanDomain, dilate
from cartansplit.holo import (
    CompositeMap,
    PolynomialMap,
    injectivity_margin,
    invert_near_identity,
    preimage_counts,
    region_samples,
)

D = JordanDomain.disc(1.0).region()
phi = PolynomialMap.near_identity([0.002, 0.01, 0.005j, -0.003])
psi = PolynomialMap.near_identity([0, 0, 1e-3])

z = np.array([0.1 + 0.2j, -0.4, 0.7j])
print("phi o psi at sample points:", CompositeMap(phi, psi)(z))

# a near-identity map with sup |phi - Id| <= r/4 on D(r) is injective on D
ok, margin = injectivity_margin(phi, D, 0.3, 1 / 32)
print(f"injective on D (certified with r = 0.3): {ok}, margin {margin:.4f}")

inv = invert_near_identity(phi, D, 0.3, 0.05, h=1 / 32)
w = region_samples(inv.domain, 1 / 32)
print(f"inverse round trip on {w.size} points: max error {np.max(np.abs(phi(inv(w)) - w)):.2e}")

# every point well inside the image has exactly one preimage
contour = dilate(D, 0.3).boundary_polyline()
targets = region_samples(dilate(D, 0.25), 1 / 16)
counts = preimage_counts(phi, contour, targets)
print(f"preimage counts over {targets.size} targets: min {counts.min()}, max {counts.max()}")
