# Berezin transform and commutator decay on the symmetric Fock space.
#
# Symbols cut down to level m and embedded back again approach the original
# element, and the compressed shifts commute better and better.
#
#   python demos/berezin_convergence.py

from subfock.fock import parse_element
from subfock.limits import arveson_report, berezin_report, strict_quantization_report
from subfock.subproduct import build_symmetric
from subfock.weights import build_weight

L = 11
ws = build_weight(build_symmetric(2, L))
f = parse_element("Z1*Zd1", 2)

# %% Berezin transform of Z1 Z1*
# ||sigma(breve_sigma(f)) - f|| at level m, using level L for the limit state.
rep = berezin_report(ws, f, range(1, 6))
print(rep.identity)
prev = None
for m, d in rep.rows:
    step = "" if prev is None else f"  ratio {d / prev:.3f}"
    print(f"  m={m}  {d:.6f}{step}")
    prev = d

# %% strict quantization columns
g = parse_element("Z2*Zd2", 2)
rep = strict_quantization_report(ws, f, g, range(1, 5), L - 1)
print("\n" + rep.identity)
print("  " + "  ".join(rep.columns))
for row in rep.rows:
    print("  " + "  ".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row))

# %% Arveson: commutators of compressed shifts
rep = arveson_report(build_symmetric(2, 8))
print("\n" + rep.identity)
for m, cc, ca in rep.rows:
    print(f"  m={m}  [S_i,S_j] {cc:.1e}   [S_i,S_j*] {ca:.4f}")
