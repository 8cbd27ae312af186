"""
The convex hull for k = 2
=========================

For two items at most and two weights, five families plus the trivial rows
describe the hull. Each fractional point falls into one of five categories,
and one inequality per category is the most violated. We check that against
the separation LP, which decides hull membership independently.
"""
import numpy as np

from concavecuts.core import ConcaveFunction, Instance
from concavecuts.hull22 import classify, designated_cut, p22_system, separation_lp, verify_hull

inst = Instance((1, 4, 1, 4, 4, 1, 4), 2, ConcaveFunction.sqrt())

###############################################################################
# The explicit system is small: one inequality per distinguished item and
# family, plus the super-average inequality.

for cut in p22_system(inst):
    print(f"{cut.family:>12} {cut.provenance}: {np.round(cut.pi, 3)}")

###############################################################################
# At a few random points the designated cut matches the LP optimum.

rng = np.random.default_rng(3)
for _ in range(5):
    x = rng.random(inst.n)
    x *= min(1.0, 2 * rng.random() / x.sum())
    cat = classify(inst, x)
    print(f"{cat.tag.value}: cut {designated_cut(inst, cat).rhs(x):.6f}  LP {separation_lp(inst, x).value:.6f}")

###############################################################################
# On a thousand probes membership in the hull and in the system coincide.
# Dropping the super-average inequality breaks that when both classes have
# at least three items.

for drop in (False, True):
    rep = verify_hull(inst, 1000, seed=0, super_average=not drop)
    print(f"super-average {'dropped' if drop else 'kept'}: {rep.agree}/{rep.points} agree, "
          f"categories {rep.categories}")
