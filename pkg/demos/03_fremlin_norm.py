"""Bracketing the Fremlin projective tensor norm."""

import numpy as np

from fremlinlab import NormedLatticeSpace, RegularOperator, TensorElement, fremlin_norm, pairing, regular_norm, tensor_meet_eval

E = NormedLatticeSpace.lp(2, 3)
u = TensorElement(E, E, [[1.0, -0.5], [0.25, 2.0]])
b = fremlin_norm(u, tol=1e-4)
print(f"||u|| in [{b.lower:.7f}, {b.upper:.7f}] after {b.iterations} rounds")

# the lower end comes with an operator of regular norm one
T = b.certificate_T
print("certificate T:\n", T.matrix)
print(f"  regular norm {regular_norm(T):.9f}, pairing {pairing(u, T):.7f}")

# the upper end with positive rank-one pieces majorizing |u|
print("decomposition:")
for x, y in b.certificate_decomp:
    print(f"  x = {np.round(x, 5)}, y = {np.round(y, 5)}, ||x|| ||y|| = {E.norm(x) * E.norm(y):.6f}")

# cross norm
x, y = np.array([1.0, -2.0]), np.array([0.5, 0.3])
b = fremlin_norm(TensorElement.elementary(E, E, x, y))
print(f"\n||x (x) y|| in [{b.lower:.7f}, {b.upper:.7f}], ||x|| ||y|| = {E.norm(x) * E.norm(y):.7f}")

# distinct basis tensors are disjoint: their meet pairs to zero with any T >= 0
e11 = TensorElement(E, E, [[1.0, 0.0], [0.0, 0.0]])
e22 = TensorElement(E, E, [[0.0, 0.0], [0.0, 1.0]])
T = RegularOperator(np.array([[2.0, 1.0], [3.0, 4.0]]), E, E)
print("\n<e11 ^ e22, T> =", tensor_meet_eval(e11, e22, T), "(LP:", tensor_meet_eval(e11, e22, T, method="lp"), ")")
