"""Acceptance gate: fourteen criteria, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or directly as a script.  Frozen
profiles below were produced by the brute-force routines in ``oracles.py``; the
tests re-derive them from the oracle and compare the library to both.
"""
import itertools
import math
import sys

import numpy as np
import pytest

import oracles
from acceptance_log import criterion
from cases import compatible_cases, qplane, weight_cases
from subfock.cli import build_parser, cmd_invariants, render_csv
from subfock.fock import (
    ShiftPolynomial,
    parse_element,
    represent,
    row_sum_residual,
    top_level,
    word_shift,
)
from subfock.limits import (
    choi_effros_profile,
    commutator_norm,
    contravariant_sequence,
    markov_residuals,
    strict_quantization_report,
)
from subfock.polynomials import COMMUTATIVE
from subfock.quantize import (
    berezin_transform,
    contravariant_symbol,
    covariant_symbol,
    final_projection,
    iota,
    iota_compression,
    isometry_V,
    jmath,
    weighted_adjoint,
)
from subfock.subproduct import build_full, build_symmetric, named_system, subproduct_residual
from subfock.tensor import dagger, dimension_cap, operator_norm, random_matrix, word_index, words
from subfock.weights import WeightError, build_weight, phi

SEEDS = range(20)

BEREZIN_M11 = [0.30303030303030365, 0.20454545454545503, 0.14545454545454573,
               0.10606060606060597, 0.07792207792207785]
COMMUTATOR_S1_S2STAR = [0.5, 0.23570226039551587, 0.16666666666666674, 0.12247448713915887,
                        0.09999999999999987, 0.08247860988423233]
VON_NEUMANN_M10 = [0.06, 0.048, 0.0336, 0.025714285714285745]
CHOI_EFFROS_M8 = {
    ((1, 1), (2, 2)): [0.06076388888888884, 0.03906249999999997, 0.026041666666666602,
                       0.017361111111111105, 0.011160714285714246, 0.006510416666666657,
                       0.0028935185185185175, 0.0],
    ((1, 2), (2, 1)): [0.18229166666666666, 0.11718749999999997, 0.078125,
                       0.05208333333333334, 0.03348214285714288, 0.019531250000000028,
                       0.00868055555555558, 0.0],
}


def builtins(M):
    """Every built-in family with n <= 3 at truncation M."""
    out = {}
    for n in (1, 2, 3):
        out[f"full{n}"] = build_full(n, M)
        out[f"sym{n}"] = build_symmetric(n, M)
    for n in (2, 3):
        out[f"mono{n}"] = named_system("monomial", {"n": n, "M": M})
        out[f"mono{n}c"] = named_system("monomial", {"n": n, "M": M, "mode": COMMUTATIVE})
    for q in (0.3, 0.5, 1.0):
        out[f"qplane{q}"] = qplane(q, M)
    return out


def splits(M):
    return [(m, l) for l in range(M + 1) for m in range(l + 1)]


def invariant_weight_cases(M):
    """(label, WeightSystem) for all-ones and (0.5, 2) wherever invariance passes."""
    cases = []
    for name, s in builtins(M).items():
        for q in ((1.0,) * s.n, (0.5, 2.0)):
            if len(q) != s.n:
                continue
            try:
                cases.append((f"{name}-{q}", build_weight(s, q)))
            except WeightError:
                pass
    return cases


def degree_le_one(n):
    out = [ShiftPolynomial.scalar(n)]
    out += [ShiftPolynomial.monomial(n, [j], [k]) for j in range(1, n + 1) for k in range(1, n + 1)]
    return out


def random_degree_le_one(n, count, seed):
    rng = np.random.default_rng(seed)
    basis = degree_le_one(n)
    out = []
    for _ in range(count):
        c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        f = basis[0] * complex(c[0])
        for ck, b in zip(c[1:], basis[1:]):
            f = f + b * complex(ck)
        out.append(f)
    return out


# ---------------------------------------------------------------------------

def test_criterion_01_subproduct_law():
    with criterion(1, "subproduct law on every built-in, n <= 3, M = 6") as note:
        worst = 0.0
        for name, s in builtins(6).items():
            for m, l in splits(6):
                r = subproduct_residual(s, m, l)
                worst = max(worst, r)
                assert r <= 1e-10, (name, m, l)
                if s.n ** l <= 243:
                    pl = s.projection(l)
                    pml = np.kron(s.projection(m), s.projection(l - m))
                    explicit = operator_norm(pl @ pml @ pl - pl)
                    assert explicit <= 1e-10, (name, m, l)
        note["detail"] = f"worst {worst:.1e}"


def test_criterion_02_dimension_tables():
    with criterion(2, "dimension tables for symmetric, full and quantum plane"):
        for n in (1, 2):
            assert build_symmetric(n, 8).dims == [math.comb(n + m - 1, m) for m in range(9)]
        with dimension_cap(4**8, 4**8):
            assert build_symmetric(3, 8).dims == [math.comb(m + 2, m) for m in range(9)]
            assert build_symmetric(4, 8).dims == [math.comb(m + 3, m) for m in range(9)]
        assert build_full(2, 8).dims == [2**m for m in range(9)]
        assert build_full(3, 6).dims == [3**m for m in range(7)]
        gen = {(1, 2): 1.0, (2, 1): -0.5}
        brute = [2**m - oracles.free_ideal_rank(gen, 2, m) for m in range(9)]
        assert brute == [m + 1 for m in range(9)]
        assert qplane(0.5, 8).dims == brute
        for q in (0.3, 1.0):
            assert qplane(q, 8).dims == brute


def test_criterion_03_row_sums():
    with criterion(3, "row-sum identity, S and R versions, every built-in") as note:
        worst = 0.0
        for name, s in builtins(5).items():
            for l in range(s.M):
                for m in range(l + 1):
                    for side in ("S", "R"):
                        r = row_sum_residual(s, m, l, side)
                        worst = max(worst, r)
                        assert r <= 1e-10, (name, m, l, side)
        note["detail"] = f"worst {worst:.1e}"


def test_criterion_04_iota_routes_and_coherence():
    with criterion(4, "iota: R-sum vs compression and coherence, 20 seeds") as note:
        worst = 0.0
        for name, s in builtins(4).items():
            for seed in SEEDS:
                rng = np.random.default_rng(seed)
                for m in range(s.M + 1):
                    a = random_matrix(rng, s.dim(m))
                    for l in range(m, s.M + 1):
                        i = iota(s, a, m, l)
                        r = operator_norm(i - iota_compression(s, a, m, l))
                        for mid in range(m, l + 1):
                            r = max(r, operator_norm(iota(s, iota(s, a, m, mid), mid, l) - i))
                        worst = max(worst, r)
                        assert r <= 1e-12, (name, seed, m, l)
        note["detail"] = f"worst {worst:.1e}"


def test_criterion_05_isometries():
    with criterion(5, "V isometry and final projection for every split") as note:
        cases = invariant_weight_cases(5)
        labels = {label for label, _ in cases}
        assert "qplane0.5-(0.5, 2.0)" in labels and "sym2-(0.5, 2.0)" in labels
        worst = 0.0
        for label, ws in cases:
            s = ws.system
            for m, l in splits(s.M):
                v = isometry_V(ws, m, l)
                vd = weighted_adjoint(ws, v, m, l)
                r = max(operator_norm(vd @ v - np.eye(s.dim(l))),
                        operator_norm(v @ vd - final_projection(s, m, l)))
                worst = max(worst, r)
                assert r <= 1e-10, (label, m, l)
        note["detail"] = f"{len(cases)} weighted systems, worst {worst:.1e}"


def test_criterion_06_adjointness():
    with criterion(6, "phi_l(A iota(B)) = phi_m(j(A) B), 20 seeds, all splits") as note:
        worst = 0.0
        for label, ws in invariant_weight_cases(4):
            s = ws.system
            for seed in SEEDS:
                rng = np.random.default_rng(seed)
                for m, l in splits(s.M):
                    a, b = random_matrix(rng, s.dim(l)), random_matrix(rng, s.dim(m))
                    r = abs(phi(ws, l, a @ iota(s, b, m, l)) - phi(ws, m, jmath(ws, a, l, m) @ b))
                    worst = max(worst, r)
                    assert r <= 1e-10, (label, seed, m, l)
        note["detail"] = f"worst {worst:.1e}"


def test_criterion_07_state_compatibility():
    with criterion(7, "state compatibility of iota and j, j unital") as note:
        worst = 0.0
        for label, ws in compatible_cases(5):
            s = ws.system
            rng = np.random.default_rng(7)
            for m, l in splits(s.M):
                a, b = random_matrix(rng, s.dim(l)), random_matrix(rng, s.dim(m))
                r = max(abs(phi(ws, l, iota(s, b, m, l)) - phi(ws, m, b)),
                        abs(phi(ws, m, jmath(ws, a, l, m)) - phi(ws, l, a)))
                worst = max(worst, r)
                assert r <= 1e-10, (label, m, l)
                assert operator_norm(jmath(ws, np.eye(s.dim(l)), l, m) - np.eye(s.dim(m))) <= 1e-12
        # phi_m o j = phi_l needs no compatibility
        for label, ws in invariant_weight_cases(4):
            rng = np.random.default_rng(8)
            for m, l in splits(ws.system.M):
                a = random_matrix(rng, ws.system.dim(l))
                assert abs(phi(ws, m, jmath(ws, a, l, m)) - phi(ws, l, a)) <= 1e-10, (label, m, l)
        note["detail"] = f"worst {worst:.1e} on the compatible family"


def test_criterion_08_quasi_free_values():
    with criterion(8, "phi_l(S_j S_k*) constant in l and equal to the Q_m matrix element") as note:
        worst = 0.0
        for label, ws in compatible_cases(5):
            s = ws.system
            for m in (1, 2):
                u = s.U[m]
                tr = ws.trace(m)
                for j, k in itertools.product(words(s.n, m), repeat=2):
                    # <p_m e_k | Q_m p_m e_j> in the coordinates of H_m
                    expect = u[word_index(k, s.n)] @ ws.Q[m] @ u[word_index(j, s.n)].conj() / tr
                    for l in range(m, s.M + 1):
                        sj = word_shift(s, j, l - m)
                        sk = word_shift(s, k, l - m)
                        r = abs(phi(ws, l, sj @ dagger(sk)) - expect)
                        worst = max(worst, r)
                        assert r <= 1e-10, (label, j, k, l)
        note["detail"] = f"worst {worst:.1e}"


def test_criterion_09_contravariant_duality_and_constancy():
    with criterion(9, "contravariant duality and j-constancy") as note:
        worst = 0.0
        cases = weight_cases(4) + compatible_cases(4)
        for label, ws in cases:
            s = ws.system
            rng = np.random.default_rng(9)
            elements = degree_le_one(s.n) + random_degree_le_one(s.n, 10, 1)
            for f in elements:
                L = top_level(f, s)
                f_L = represent(f, s, [L]).block(L)
                for m in range(0, (L - f.height) // 2 + 1):
                    sym = contravariant_symbol(ws, f, m)
                    a = random_matrix(rng, s.dim(m))
                    cov = covariant_symbol(s, a, m, [L]).block(L)
                    dual = abs(phi(ws, m, dagger(a) @ sym) - phi(ws, L, dagger(cov) @ f_L))
                    ups = (contravariant_symbol(ws, f, l, headroom=False) for l in range(m, L + 1))
                    const = max(operator_norm(jmath(ws, up, l, m) - sym)
                                for l, up in zip(range(m, L + 1), ups))
                    worst = max(worst, dual, const)
                    assert dual <= 1e-9 and const <= 1e-9, (label, str(f), m)
        note["detail"] = f"{len(cases)} weighted systems, worst {worst:.1e}"


def test_criterion_10_berezin_profile():
    with criterion(10, "Berezin difference norms, symmetric n=2, f = Z1 Z1*") as note:
        assert np.allclose(oracles.berezin_profile(11, range(1, 6)), BEREZIN_M11, atol=1e-12)
        ws = build_weight(build_symmetric(2, 11))
        f = parse_element("Z1*Zd1", 2)
        norms = [berezin_transform(ws, f, m).norm for m in range(1, 6)]
        assert np.allclose(norms, BEREZIN_M11, atol=1e-9)
        assert all(a > b for a, b in zip(norms, norms[1:]))
        assert norms[-1] / norms[0] <= 0.5
        note["detail"] = f"ratio {norms[-1] / norms[0]:.3f}"


def test_criterion_11_markov_and_choi_effros():
    with criterion(11, "Markov fixed points and Choi-Effros profiles") as note:
        worst = 0.0
        systems = [build_weight(qplane(0.5, 7), (0.5, 2.0)), build_weight(qplane(0.5, 7), (2.0, 0.5)),
                   build_weight(build_symmetric(2, 7)), build_weight(build_full(2, 6), (1.0, 3.0))]
        for ws in systems:
            for f in degree_le_one(2) + random_degree_le_one(2, 3, 11):
                top = top_level(f, ws.system)
                x = contravariant_sequence(ws, f, range(0, top + 1), top)
                r = max(markov_residuals(ws, x).values())
                worst = max(worst, r)
                assert r <= 1e-10, (ws.system.tag, str(f))
        L = 8
        ws = build_weight(build_symmetric(2, L))
        # pairs (Z_i Z_j*, Z_k Z_l*) keyed by ((i, j), (k, l))
        for (fij, gkl), frozen in CHOI_EFFROS_M8.items():
            f = ShiftPolynomial.monomial(2, [fij[0]], [fij[1]])
            g = ShiftPolynomial.monomial(2, [gkl[0]], [gkl[1]])
            oracle = oracles.choi_effros_residuals(oracles.rep_ZZd(*fij, L),
                                                   oracles.rep_ZZd(*gkl, L), L, 1)
            assert np.allclose(oracle, frozen, atol=1e-12)
            got = choi_effros_profile(ws, f, g, 1, L).column("residual")
            assert np.allclose(got, frozen, atol=1e-9)
            assert all(a > b for a, b in zip(got, got[1:]))
        note["detail"] = f"Markov worst {worst:.1e}"


def test_criterion_12_arveson():
    with criterion(12, "Arveson commutators on commutative systems") as note:
        comm = [build_symmetric(2, 7), build_symmetric(3, 5),
                named_system("monomial", {"n": 2, "M": 7, "mode": COMMUTATIVE}),
                named_system("monomial", {"n": 3, "M": 5, "mode": COMMUTATIVE}), qplane(1.0, 7)]
        for s in comm:
            for m in range(s.M - 1):
                for i, j in itertools.combinations(range(1, s.n + 1), 2):
                    assert commutator_norm(s, i, j, m, False) <= 1e-12, (s.tag, m, i, j)
        assert np.allclose([oracles.commutator_S1_S2star(m) for m in range(1, 7)],
                           COMMUTATOR_S1_S2STAR, atol=1e-12)
        sym = build_symmetric(2, 7)
        got = [commutator_norm(sym, 1, 2, m, True) for m in range(1, 7)]
        assert np.allclose(got, COMMUTATOR_S1_S2STAR, atol=1e-10)
        assert all(a > b for a, b in zip(got, got[1:]))
        assert got[-1] / got[0] <= 0.3
        note["detail"] = f"ratio {got[-1] / got[0]:.3f}"


def test_criterion_13_von_neumann_gap():
    with criterion(13, "von Neumann gap non-increasing, f = Z1 Z1*, g = Z2 Z2*"):
        rows = oracles.strict_rows(10, range(1, 5))
        assert np.allclose([r[2] for r in rows], VON_NEUMANN_M10, atol=1e-12)
        ws = build_weight(build_symmetric(2, 10))
        rep = strict_quantization_report(ws, parse_element("Z1*Zd1", 2), parse_element("Z2*Zd2", 2),
                                         range(1, 5), 10)
        gaps = rep.column("von_neumann_gap")
        assert np.allclose(gaps, VON_NEUMANN_M10, atol=1e-9)
        assert all(a >= b for a, b in zip(gaps, gaps[1:]))


def test_criterion_14_determinism():
    with criterion(14, "invariants CSV is byte-identical for a fixed seed"):
        argv = ["invariants", "--system", "quantum_plane", "--q", "0.5", "--M", "5",
                "--seed", "1234"]
        outputs = []
        for _ in range(2):
            args = build_parser().parse_args(argv)
            args.format = "csv"
            outputs.append(render_csv(cmd_invariants(args)).encode())
        assert outputs[0] == outputs[1]
        assert b"fail" not in outputs[0]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
