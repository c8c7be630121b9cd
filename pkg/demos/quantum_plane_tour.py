# A walk through the quantum plane: build it, weight it, move between levels.
#
#   python demos/quantum_plane_tour.py

import numpy as np

from subfock.fock import parse_element, represent, shift_block
from subfock.limits import qsphere_report
from subfock.quantize import iota, jmath
from subfock.subproduct import named_system, validate
from subfock.weights import build_weight, phi

q = 0.5
s = named_system("quantum_plane", {"n": 2, "M": 6, "q": q})
print("system:", s.tag)
print("level dimensions:", s.dims)  # m + 1, like polynomials in two variables
print("subproduct law holds:", validate(s).passed)

# %% the shifts
# S_1 on H_1 -> H_2. Rows are coordinates in the orthonormal basis of H_2.
np.set_printoptions(precision=4, suppress=True)
print("\nS_1 restricted to H_1:\n", shift_block(s, 1, 1).real)

# z1 z2 - q z2 z1 spans the ideal in degree 2, so the shifts obey S_1 S_2 = q S_2 S_1
lhs = represent(parse_element("Z1Z2 - 0.5*Z2Z1", 2), s, [2]).block(2)
print("||(S_1 S_2 - q S_2 S_1)|_H0|| =", np.linalg.norm(lhs))

# %% weights
# The diagonal weight (1/q, q) is the one for which the connecting maps are state preserving.
ws = build_weight(s, (1 / q, q))
for m in range(4):
    b = np.random.default_rng(m).standard_normal((s.dim(m), s.dim(m)))
    print(f"m={m}: phi_m(B) = {phi(ws, m, b).real:+.6f}   phi_5(iota(B)) = "
          f"{phi(ws, 5, iota(s, b, m, 5)).real:+.6f}")

# j pushes level-5 matrices back down; it is unital
print("\n||j_{5,2}(1) - 1|| =", np.linalg.norm(jmath(ws, np.eye(6), 5, 2) - np.eye(3)))

# %% the Q-sphere relation
# sum_r q_r^-1 S_r* S_r tends to a multiple of the identity, exactly in the limit only.
rep = qsphere_report(ws, row=2)
print("\n" + rep.identity)
for m, r in rep.rows:
    print(f"  m={m}  residual {r:.3e}")
