"""The diagonal of E (x) E modulo the off-diagonal ideal versus the 2-concavification."""

import numpy as np

from fremlinlab import (
    NormedLatticeSpace,
    TensorElement,
    half_power_product,
    ioc_residual,
    verify_main_isometry,
)

rng = np.random.default_rng(7)
for sp in [
    NormedLatticeSpace.lp(2, 4),
    NormedLatticeSpace.lp(3, 1.5),
    NormedLatticeSpace.interlace(2, 1, 2, 1),
    NormedLatticeSpace.weighted_lp(3, [1, 2, 1]),
]:
    x = rng.normal(size=sp.dim)
    r = verify_main_isometry(sp, x)
    print(
        f"{sp.label():22s} seminorm {r.seminorm_value:.6f}  primal {r.quotient_primal:.6f}  "
        f"dual {r.quotient_dual:.6f}  discrepancy {r.max_discrepancy:.1e}  {'ok' if r.passed else 'FAIL'}"
    )

# members of the off-diagonal ideal have zero quotient norm
sp = NormedLatticeSpace.lp(3, 3)
x, y = np.abs(rng.normal(size=3)), np.abs(rng.normal(size=3))
z = half_power_product(x, y)
xy = TensorElement.elementary(sp, sp, x, y)
print("\nresidual of x(x)y - y(x)x:", ioc_residual(xy - TensorElement.elementary(sp, sp, y, x)))
print("residual of x(x)y - z(x)z:", ioc_residual(xy - TensorElement.elementary(sp, sp, z, z)))
print("residual of e1(x)e1:      ", ioc_residual(TensorElement.elementary(sp, sp, [1, 0, 0], [1, 0, 0])))
