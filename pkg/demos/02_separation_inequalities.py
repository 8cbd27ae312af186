"""
Separation inequalities lifted across weight classes
====================================================

Inside one weight class the cardinality-constrained hull is described by
separation inequalities, indexed by ``i0``. Lifting them onto the other class
gives the lower-SI (start from the light items) and the higher-SI (start
from the heavy ones). The higher-SI closed form needs a curvature condition.
"""
import numpy as np

from concavecuts.core import ConcaveFunction, Instance, two_weight_profile
from concavecuts.cuts import max_violation
from concavecuts.lift_si import (
    AssumptionError, SiParams, assumption_sides, check_assumption, higher_si_cut, lower_si_cut, oracle_lifted_si,
)

inst = Instance((1, 1, 1, 1, 6, 6, 6, 6, 6), 3, ConcaveFunction.sqrt())
prof = two_weight_profile(inst)

###############################################################################
# Lower-SIs for each ``i0``. ``i0 = k - 1`` reproduces a lifted-EPI.

for i0 in range(inst.k):
    params = SiParams(i0, "lower", prof.IL, prof.IH)
    cut = lower_si_cut(inst, params)
    same = np.allclose(cut.pi, oracle_lifted_si(inst, params))
    print(f"lower-SI  i0={i0}: {np.round(cut.pi, 3)}  oracle agrees: {same}  "
          f"max violation {max_violation(cut, inst):.1e}")

###############################################################################
# The higher-SI is exact when the condition holds at ``i0``.

for i0 in range(inst.k):
    lhs, rhs = assumption_sides(prof, inst.f, inst.k, i0)
    print(f"i0={i0}: {lhs:.4f} <= {rhs:.4f} ? {check_assumption(prof, inst.f, inst.k, i0)}")
    try:
        cut = higher_si_cut(inst, SiParams(i0, "higher", prof.IH, prof.IL))
        print("   higher-SI:", np.round(cut.pi, 3))
    except AssumptionError as exc:
        print("   refused:", exc)

###############################################################################
# A capped quadratic that turns down early breaks the condition.

cq = Instance((2, 2, 5, 5, 5, 5, 5), 2, ConcaveFunction.capped_quadratic(8.0))
print("capped quadratic:", assumption_sides(two_weight_profile(cq), cq.f, 2, 0))
