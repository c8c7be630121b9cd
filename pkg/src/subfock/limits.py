"""Level-sequence analytics: asymptotic norms, the Markov operator, Choi–Effros
products and the diagnostic reports built on the quantize module.

Sequences are degree-0 :class:`GradedOperator` values.  Truncation gives no
error bounds, so every report returns the whole level profile alongside any
summary number.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .fock import (
    GradedOperator,
    ShiftPolynomial,
    shift_block,
    stacked_shifts,
    top_level,
    word_shift,
)
from .polynomials import COMMUTATIVE
from .quantize import berezin_transform, contravariant_symbol, iota, jmath
from .subproduct import SubproductSystem
from .tensor import DEFAULT_TOL, dagger, numerical_rank, operator_norm
from .weights import WeightSystem

SequenceElement = GradedOperator

DEFAULT_WINDOW = 3


@dataclass
class Report:
    """Tabular report: ``identity`` names the relation being measured."""

    identity: str
    columns: List[str]
    rows: List[list]
    flags: Dict[str, object] = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _as_sequence(x: GradedOperator) -> GradedOperator:
    if x.degree != 0:
        raise ValueError("level sequences are degree-0 operators")
    return x


def asymptotic_norm(x: GradedOperator, window: int = DEFAULT_WINDOW):
    """Max of ‖X_m‖ over the top ``window`` levels, and the full profile."""
    x = _as_sequence(x)
    if not x.blocks:
        raise ValueError("empty level range")
    if window < 1 or window > len(x.blocks):
        raise ValueError(f"window {window} not within 1..{len(x.blocks)}")
    profile = {m: operator_norm(b) for m, b in x.blocks.items()}
    return max(list(profile.values())[-window:]), profile


def is_iota_constant(x: GradedOperator, start: Optional[int] = None, tol: float = 1e-10) -> bool:
    """X_l = ι_{m,l}(X_m) for consecutive levels from ``start`` on."""
    x = _as_sequence(x)
    levels = [m for m in x.levels if start is None or m >= start]
    return all(operator_norm(iota(x.system, x.blocks[a], a, b) - x.blocks[b]) <= tol
               for a, b in zip(levels, levels[1:]) if b == a + 1)


def is_j_constant(ws: WeightSystem, x: GradedOperator, tol: float = 1e-10) -> bool:
    """X_m = j_{m+1,m}(X_{m+1}) on every consecutive pair."""
    return all(r <= tol for r in markov_residuals(ws, x).values())


def asymptotic_mult_gap(system: SubproductSystem, a: np.ndarray, b: np.ndarray,
                        m: int, r: int, l: int) -> float:
    """‖ι_{r,l}(ι_{m,r}(A)ι_{m,r}(B)) − ι_{m,l}(A)ι_{m,l}(B)‖."""
    if not 0 <= m <= r <= l <= system.M:
        raise ValueError(f"need m <= r <= l <= M, got {m}, {r}, {l}")
    inner = iota(system, iota(system, a, m, r) @ iota(system, b, m, r), r, l)
    return operator_norm(inner - iota(system, a, m, l) @ iota(system, b, m, l))


# ---------------------------------------------------------------------------
# Markov operator and Choi–Effros product

def markov_apply(ws: WeightSystem, x: GradedOperator) -> GradedOperator:
    """(ΦX)_m = j_{m+1,m}(X_{m+1}); the top level is dropped."""
    x = _as_sequence(x)
    blocks = {m: jmath(ws, x.blocks[m + 1], m + 1, m) for m in x.levels if m + 1 in x.blocks}
    if not blocks:
        raise ValueError("Markov operator needs at least two consecutive levels")
    return GradedOperator(x.system, 0, blocks, f"Φ({x.label})")


def markov_residuals(ws: WeightSystem, x: GradedOperator) -> Dict[int, float]:
    """‖(ΦX)_m − X_m‖ per level."""
    y = markov_apply(ws, x)
    return {m: operator_norm(b - x.blocks[m]) for m, b in y.blocks.items()}


def pointwise_product(x: GradedOperator, y: GradedOperator) -> GradedOperator:
    common = [m for m in x.levels if m in y.blocks]
    return GradedOperator(x.system, 0, {m: x.blocks[m] @ y.blocks[m] for m in common})


def choi_effros_product(ws: WeightSystem, x: GradedOperator, y: GradedOperator,
                        r: int) -> GradedOperator:
    """Φ^r(XY)."""
    z = pointwise_product(_as_sequence(x), _as_sequence(y))
    if r < 0:
        raise ValueError("r must be non-negative")
    if len(z.blocks) <= r:
        raise ValueError(f"need more than {r} levels, have {len(z.blocks)}")
    for _ in range(r):
        z = markov_apply(ws, z)
    return z


def contravariant_sequence(ws: WeightSystem, f: ShiftPolynomial, levels: Sequence[int],
                           level: Optional[int] = None) -> GradedOperator:
    """(ς̆^{(m)}(f))_m over ``levels``, all with ω_Q estimated at the same level.

    Levels close to the estimation level have little headroom; the sequence is
    still j-constant, which is what the Markov and Choi–Effros code needs.
    """
    return GradedOperator(
        ws.system, 0,
        {m: contravariant_symbol(ws, f, m, level, headroom=False) for m in levels}, f"ς̆({f})")


def choi_effros_profile(ws: WeightSystem, f: ShiftPolynomial, g: ShiftPolynomial, m: int,
                        level: Optional[int] = None) -> Report:
    """Residual ‖Φ^r(ς̆(f)ς̆(g))_m − ς̆^{(m)}(fg)‖ for r = 0 .. L−m."""
    fg = f * g
    big = min(top_level(f, ws.system), top_level(g, ws.system), top_level(fg, ws.system))
    big = big if level is None else level
    x = contravariant_sequence(ws, f, range(m, big + 1), big)
    y = contravariant_sequence(ws, g, range(m, big + 1), big)
    target = contravariant_symbol(ws, fg, m, big)
    rows = []
    z = pointwise_product(x, y)
    for r in range(0, big - m + 1):
        rows.append([r, operator_norm(z.blocks[m] - target)])
        if r < big - m:
            z = markov_apply(ws, z)
    return Report("Choi-Effros: Phi^r(XY)_m -> contravariant(fg)_m", ["r", "residual"], rows,
                  {"m": m, "level": big, "f": str(f), "g": str(g)})


# ---------------------------------------------------------------------------
# reports

def strict_quantization_report(ws: WeightSystem, f: ShiftPolynomial, g: ShiftPolynomial,
                               m_range: Sequence[int], level: Optional[int] = None) -> Report:
    """Rieffel, von Neumann and Dirac columns of the contravariant quantization."""
    fg = f * g
    rows = []
    for m in m_range:
        sf = contravariant_symbol(ws, f, m, level)
        sg = contravariant_symbol(ws, g, m, level)
        sfg = contravariant_symbol(ws, fg, m, level)
        rows.append([m, operator_norm(sf), operator_norm(sfg - sf @ sg),
                     m * operator_norm(sf @ sg - sg @ sf)])
    return Report("strict quantization: Rieffel norm, von Neumann gap, Dirac bracket",
                  ["m", "rieffel_norm", "von_neumann_gap", "dirac_scaled_commutator"], rows,
                  {"f": str(f), "g": str(g), "level": level})


def commutator_norm(system: SubproductSystem, i: int, j: int, m: int, adjoint_j: bool) -> float:
    """‖[S_i, S_j]|_{H_m}‖ or ‖[S_i, S_j*]|_{H_m}‖."""
    if adjoint_j:
        if m + 1 > system.M:
            raise ValueError("level too high for [S_i, S_j*]")
        up = dagger(shift_block(system, j, m)) @ shift_block(system, i, m)     # S_j* S_i
        if m == 0:
            down = np.zeros_like(up)
        else:
            down = shift_block(system, i, m - 1) @ dagger(shift_block(system, j, m - 1))
        return operator_norm(down - up)
    if m + 2 > system.M:
        raise ValueError("level too high for [S_i, S_j]")
    return operator_norm(word_shift(system, (i, j), m) - word_shift(system, (j, i), m))


def arveson_report(system: SubproductSystem, levels: Optional[Sequence[int]] = None) -> Report:
    """max_{i<j} ‖[S_i,S_j]|_{H_m}‖ and max_{i,j} ‖[S_i,S_j*]|_{H_m}‖ per level."""
    n = system.n
    levels = range(0, system.M - 1) if levels is None else levels
    rows = []
    for m in levels:
        cc = max((commutator_norm(system, i, j, m, False)
                  for i in range(1, n + 1) for j in range(i + 1, n + 1)), default=0.0)
        ca = max(commutator_norm(system, i, j, m, True)
                 for i in range(1, n + 1) for j in range(1, n + 1))
        rows.append([m, cc, ca])
    flags = {"applies": system.mode == COMMUTATIVE}
    return Report("Arveson: [S_i,S_j] = 0 and [S_i,S_j*] -> 0 on commutative systems",
                  ["m", "max_comm_SiSj", "max_comm_SiSj_star"], rows, flags)


def qsphere_residual(ws: WeightSystem, m: int, row: int = 1) -> float:
    """‖Σ_r q_r^{-1} S_r* S_r|_{H_m} − q_row^{-1} I‖.

    ``row`` is the row of the fundamental representation the generators are
    matched with; which one applies depends on how the basis is ordered.
    """
    system = ws.system
    if m + 1 > system.M:
        raise ValueError("level too high for S_r* S_r")
    if not 1 <= row <= system.n:
        raise ValueError(f"row {row} not in 1..{system.n}")
    d = system.dim(m)
    acc = np.zeros((d, d), dtype=complex)
    for r in range(1, system.n + 1):
        s = shift_block(system, r, m)
        acc += dagger(s) @ s / ws.q[r - 1]
    return operator_norm(acc - np.eye(d) / ws.q[row - 1])


def qsphere_report(ws: WeightSystem, levels: Optional[Sequence[int]] = None,
                   row: int = 1) -> Report:
    levels = range(0, ws.system.M) if levels is None else levels
    return Report(f"Q-sphere: sum_r q_r^-1 S_r* S_r = q_{row}^-1 (mod compacts)",
                  ["m", "residual"], [[m, qsphere_residual(ws, m, row)] for m in levels],
                  {"row": row})


def normal_order_span_report(system: SubproductSystem, m: int, tol: float = DEFAULT_TOL):
    """(rank of span{S_j S_k*|_{H_m} : |j| = |k| ≤ m}, d_m²)."""
    d = system.dim(m)
    vecs = []
    for p in range(0, m + 1):
        # S_j S_k* on H_m factors through H_{m−p}: blocks W_j W_k^†
        for _, w in stacked_shifts(system, p, m - p, "S"):
            ops = np.einsum("jab,kcb->jkac", w, w.conj()).reshape(-1, d * d)
            vecs.extend(ops)
    return numerical_rank(vecs, tol), d * d


def markov_report(ws: WeightSystem, x: GradedOperator) -> Report:
    res = markov_residuals(ws, x)
    return Report("Markov: Phi(X) = X on the projective limit", ["m", "residual"],
                  [[m, r] for m, r in res.items()], {"label": x.label})


def berezin_report(ws: WeightSystem, f: ShiftPolynomial, m_range: Sequence[int],
                   level: Optional[int] = None, window: int = DEFAULT_WINDOW) -> Report:
    rows = []
    for m in m_range:
        res = berezin_transform(ws, f, m, level, window)
        rows.append([m, res.norm])
    return Report("Berezin: ||sigma(breve_sigma(f)) - f|| -> 0", ["m", "difference_norm"], rows,
                  {"f": str(f), "level": level, "window": window})


__all__ = [
    "SequenceElement", "Report", "asymptotic_norm", "is_iota_constant", "is_j_constant",
    "asymptotic_mult_gap", "markov_apply", "markov_residuals", "pointwise_product",
    "choi_effros_product", "contravariant_sequence", "choi_effros_profile",
    "strict_quantization_report", "commutator_norm", "arveson_report", "qsphere_residual",
    "qsphere_report", "normal_order_span_report", "markov_report", "berezin_report",
]
