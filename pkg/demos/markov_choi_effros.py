# The Markov operator and the Choi-Effros product on level sequences.
#
#   python demos/markov_choi_effros.py

from subfock.fock import parse_element, represent, top_level
from subfock.limits import choi_effros_profile, contravariant_sequence, markov_residuals
from subfock.subproduct import build_symmetric, named_system
from subfock.weights import build_weight

ws = build_weight(named_system("quantum_plane", {"n": 2, "M": 7, "q": 0.5}), (2.0, 0.5))
x = parse_element("Zd1*Z1", 2)
top = top_level(x, ws.system)

# %% fixed points
# Contravariant images form a j-coherent sequence, so Phi leaves them alone.
seq = contravariant_sequence(ws, x, range(0, top + 1), top)
print("Phi on contravariant images of Zd1 Z1:")
for m, r in markov_residuals(ws, seq).items():
    print(f"  m={m}  {r:.1e}")

# The plain level blocks of Zd1 Z1 only agree with Phi of themselves modulo compacts.
rep = represent(x, ws.system, range(0, top + 1))
print("Phi on the level blocks of Zd1 Z1:")
for m, r in markov_residuals(ws, rep).items():
    print(f"  m={m}  {r:.4f}")

# %% Choi-Effros product
# Phi^r of the pointwise product approaches the symbol of the product as r grows.
ws = build_weight(build_symmetric(2, 8))
report = choi_effros_profile(ws, parse_element("Z1*Zd2", 2), parse_element("Z2*Zd1", 2), 1, 8)
print("\n" + report.identity)
for r, res in report.rows:
    print(f"  r={r}  {res:.6f}")
