"""Domains, dilations and the strip pair.

An ellipse is cut by the strip -0.3 < Re z < 0.3 into two overlapping
pieces A (left) and B (right) with intersection C.  Everything downstream
works on dilations of these three sets.
"""
from cartansplit.geometry import JordanDomain, dilate, hausdorff_distance, make_cartan_pair, point_region

om = JordanDomain.ellipse(2.0, 1.0)
print(f"ellipse: diameter {om.diameter:.4f}, smallest curvature radius {om.min_curvature_radius():.4f}")

for z in (0j, 0.5 + 0.5j, 1.9 + 0.4j, 3 + 2j):
    print(f"  signed distance at {z}: {om.signed_distance(z):+.6f}")

pair = make_cartan_pair(om, -0.3, 0.3)
print(f"admissibility conditions: {pair.admissible}\nseparation of A\\B and B\\A: {pair.sep:.4f}")

C = pair.region("C")
C1 = pair.region("C", 0.05)
for z in (0.29, 0.32, 0.36):
    print(f"  {z} in C: {bool(C.contains(z))}, in C(0.05): {bool(C1.contains(z))}")

# dilation is monotone and a translated pair moves by the translation in Hausdorff distance
reg = om.region()
print("2.2 in dilate(ellipse, 0.19):", bool(dilate(reg, 0.19).contains(2.2)),
      " in dilate(ellipse, 0.3):", bool(dilate(reg, 0.3).contains(2.2)))
v = 0.05 + 0.02j
d = hausdorff_distance(point_region(pair.A_only.boundary_samples(2048)),
                       point_region(pair.translated(v).A_only.boundary_samples(2048)))
print(f"Hausdorff distance after translating by |v| = {abs(v):.4f}: {d:.4f}")
