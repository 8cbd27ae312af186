"""
Facets outside the known families
=================================

When the curvature condition fails, or k grows past 2, the hull has facets
with no closed form. Maximizing violation over the polar at many probe points
collects them; each candidate is kept only if its tight points span full
dimension.
"""
import numpy as np

from concavecuts.core import ConcaveFunction, Instance
from concavecuts.cuts import LinearCut, tight_affine_dimension
from concavecuts.hull22 import classify_family, enumerate_polar_facets, valid_everywhere

cq = ConcaveFunction.capped_quadratic(8.0)

###############################################################################
# k = 2 with the condition violated. Facets with a nonzero constant show up.

inst = Instance((2, 2, 5, 5, 5, 5, 5), 2, cq)
for ray in enumerate_polar_facets(inst):
    cut = ray.to_cut()
    if abs(cut.pi0) > 1e-9:
        print(f"{cut.pi0:8.3f} + {np.round(cut.pi, 3)}  {classify_family(inst, cut)}")

###############################################################################
# A nearby inequality with constant -11 is valid but only touches a
# six-dimensional face; it is the constant -10 facet weakened by ``1 - x2``.

weak = LinearCut(np.array([20, 39, 35, 35, 35, 35, 35.0]), -11.0, "PolarRay")
print("valid:", valid_everywhere(inst, weak), " tight dimension:", tight_affine_dimension(weak, inst))

###############################################################################
# k = 3: a facet with zero constant and negative coefficients throughout.

inst = Instance((6, 6, 6, 6, 8, 8, 8), 3, cq)
labels = [classify_family(inst, r) for r in enumerate_polar_facets(inst)]
print(f"{len(labels)} facets, {labels.count('unknown')} outside the known families")
