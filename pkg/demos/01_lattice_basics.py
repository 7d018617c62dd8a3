"""Lattices with a 1-unconditional basis: norms, duals, the functional calculus."""

import numpy as np

from fremlinlab import (
    HomogeneousFunction,
    NormedLatticeSpace,
    apply_homogeneous,
    eval_dual_norm,
    eval_norm,
    half_power_product,
    is_disjoint,
)

# three families; all norms depend only on |x|
spaces = [
    NormedLatticeSpace.lp(3, 3),
    NormedLatticeSpace.weighted_lp(3, [1, 2, 1]),
    NormedLatticeSpace.interlace(3, 2, 1, 0.8),  # max(||x||_2, 0.8 ||x||_1)
]
x = np.array([1.0, -2.0, 0.5])
for sp in spaces:
    print(f"{sp.label():22s} ||x|| = {eval_norm(sp, x):.6f}   ||x||_* = {eval_dual_norm(sp, x):.6f}")

# the calculus acts coordinatewise with t^p = |t|^p sign t
y = np.array([4.0, 1.0, 0.0])
print("x^(1/2) y^(1/2) =", half_power_product(x, y))
two_sum = HomogeneousFunction.p_sum(2.0)
print("(x^2 + y^2)^(1/2) =", apply_homogeneous(two_sum, [x, y]))

# disjoint positives: the p-sum reduces to the ordinary sum
a, b = np.array([1.0, 0, 3.0]), np.array([0, 2.0, 0])
print("disjoint:", is_disjoint(a, b), apply_homogeneous(HomogeneousFunction.p_sum(3.0), [a, b]))
