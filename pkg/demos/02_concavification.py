"""The p-concavification seminorm and its certificates."""

import math

import numpy as np

from fremlinlab import (
    NormedLatticeSpace,
    al_trinorm,
    concavification_seminorm,
    lower_estimate_constant,
    oplus,
    seminorm_bruteforce_oracle,
    verify_estimate_transfer,
)

# in l_4 the 2-concavification is l_2 on squares; in l_1 it is l_1 on squares
for sp, expected in [(NormedLatticeSpace.lp(2, 4), math.sqrt(2)), (NormedLatticeSpace.lp(2, 1), 2.0)]:
    r = concavification_seminorm(sp, [1.0, 1.0], 2.0)
    print(f"{sp.label()}: ||(1,1)||_(2) in [{r.value:.8f}, {r.upper:.8f}], expected {expected:.8f}")

sp = NormedLatticeSpace.interlace(2, 2, 1, 0.8)
x = np.array([0.7, -1.3])
r = concavification_seminorm(sp, x, 2.0)
print(f"\n{sp.label()}, x = {x}: value {r.value:.6f}, gap {r.gap:.1e}, {r.iterations} rounds")
print("  dual functional:", r.dual_certificate)
print("  primal pieces v_k (their 2-sum is |x|):")
for v in r.primal_certificate:
    print("   ", v)
print("  2-sum of the pieces:", np.sqrt(sum(v**2 for v in r.primal_certificate)))
print("  grid oracle (res 128):", seminorm_bruteforce_oracle(sp, x, 2.0, grid_resolution=128))

# the new addition is the 2-sum; the seminorm is subadditive for it
y = np.array([1.0, 0.2])
lhs = concavification_seminorm(sp, oplus(x, y, 2.0), 2.0).value
rhs = r.value + concavification_seminorm(sp, y, 2.0).value
print(f"\n||x (+) y||_(2) = {lhs:.6f} <= {rhs:.6f}")

# lower estimates and the AL renorming
l15 = NormedLatticeSpace.lp(3, 1.5)
M = lower_estimate_constant(l15, 2.0, budget=500).best_constant_lower_bound
print(f"\nlower 2-estimate constant of {l15.label()} (best witness): {M:.12f}")
rep = verify_estimate_transfer(l15, 2.0, [[1, 0, 0], [0, -2, 0], [0, 0, 0.5]], M=1.0)
print(f"transfer: left {rep.left:.6f} >= right {rep.right:.6f} ({rep.holds})")
print("trinorm of (3, 4) in l_2:", al_trinorm(NormedLatticeSpace.lp(2, 2), [3, 4]))
