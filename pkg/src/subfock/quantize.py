"""Inductive and projective maps between levels, and the symbol maps built on them.

Every map here has two independent routes: a sum over word shifts and a
compression or partial-trace formula through the isometries U_m.  The
``*_compression`` / ``*_partial_trace`` / ``*_frame`` functions are the second
routes and exist mainly so tests can compare them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .fock import (
    GradedOperator,
    ShiftPolynomial,
    represent,
    stacked_shifts,
    top_level,
    u_dagger,
)
from .subproduct import SubproductSystem
from .tensor import dagger, operator_norm
from .weights import WeightSystem, phi

NormalOrderedElement = ShiftPolynomial

CONSTANCY_TOL = 1e-10


class HeadroomError(ValueError):
    """Raised when the truncation is too low for the requested computation."""

    def __init__(self, message, required_M: int):
        super().__init__(message)
        self.required_M = required_M


def _check_pair(system: SubproductSystem, m: int, l: int) -> None:
    if not 0 <= m <= l <= system.M:
        raise ValueError(f"need 0 <= m <= l <= M={system.M}, got m={m}, l={l}")


def _check_shape(a: np.ndarray, shape, what="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != tuple(shape):
        raise ValueError(f"{what} has shape {a.shape}, expected {tuple(shape)}")
    return a


def _shift_stack(system, p, m, side):
    parts = [w for _, w in stacked_shifts(system, p, m, side)]
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


# ---------------------------------------------------------------------------
# inductive maps

def _conj_sum(system, a, m, l, side):
    """Σ_r X_r A X_r* over words |r| = l − m with X = R (side 'R') or S."""
    _check_pair(system, m, l)
    d = system.dim(m)
    a = _check_shape(a, (d, d))
    out = np.zeros((system.dim(l),) * 2, dtype=complex)
    for _, w in stacked_shifts(system, l - m, m, side):
        out += np.einsum("rab,bc,rdc->ad", w, a, w.conj(), optimize=True)
    return out


def iota(system: SubproductSystem, a: np.ndarray, m: int, l: int) -> np.ndarray:
    """ι_{m,l}(A) = Σ_{|k|=l−m} R_k A R_k*."""
    return _conj_sum(system, a, m, l, "R")


def iota_bar(system: SubproductSystem, a: np.ndarray, m: int, l: int) -> np.ndarray:
    """ῑ_{m,l}(A) = Σ_{|s|=l−m} S_s A S_s*."""
    return _conj_sum(system, a, m, l, "S")


def _compress(system, a, m, l, left):
    _check_pair(system, m, l)
    n = system.n
    d = system.dim(m)
    a = _check_shape(a, (d, d))
    big = system.U[m] @ a @ dagger(system.U[m])
    ul = system.U[l]
    if left:
        cube = ul.reshape(n**m, n ** (l - m), -1)
        moved = np.einsum("ab,bcd->acd", big, cube).reshape(n**l, -1)
    else:
        cube = ul.reshape(n ** (l - m), n**m, -1)
        moved = np.einsum("ab,cbd->cad", big, cube).reshape(n**l, -1)
    return dagger(ul) @ moved


def iota_compression(system: SubproductSystem, a: np.ndarray, m: int, l: int) -> np.ndarray:
    """U_l†(U_m A U_m† ⊗ 1)U_l."""
    return _compress(system, a, m, l, left=True)


def iota_bar_compression(system: SubproductSystem, a: np.ndarray, m: int, l: int) -> np.ndarray:
    """U_l†(1 ⊗ U_m A U_m†)U_l."""
    return _compress(system, a, m, l, left=False)


def graded_iota(system: SubproductSystem, x: np.ndarray, m: int, l: int, k: int) -> np.ndarray:
    """ι^{(k)}_{m,l}(X) = Σ_{|r|=l−m} R_r X R_r* for X : H_m -> H_{m+k}."""
    _check_pair(system, m, l)
    if l + k > system.M:
        raise ValueError(f"target level {l + k} above truncation")
    x = _check_shape(x, (max(system.dim(m + k), 0), system.dim(m)))
    rows = max(system.dim(l + k), 0)
    if m + k < 0 or rows == 0:
        return np.zeros((rows, system.dim(l)), dtype=complex)
    src = _shift_stack(system, l - m, m, "R")
    dst = _shift_stack(system, l - m, m + k, "R")
    return np.einsum("rab,bc,rdc->ad", dst, x, src.conj(), optimize=True)


# ---------------------------------------------------------------------------
# projective maps

def _weighted_sum(ws, a, l, m, side):
    system = ws.system
    _check_pair(system, m, l)
    a = _check_shape(a, (system.dim(l),) * 2)
    wts = ws.word_weights(l - m)
    out = np.zeros((system.dim(m),) * 2, dtype=complex)
    for sl, w in stacked_shifts(system, l - m, m, side):
        out += np.einsum("r,rab,ac,rcd->bd", wts[sl], w.conj(), a, w, optimize=True)
    return out * (ws.trace(m) / ws.trace(l))


def jmath(ws: WeightSystem, a: np.ndarray, l: int, m: int) -> np.ndarray:
    """j_{l,m}(A) = (Tr Q_m / Tr Q_l) Σ_{|r|=l−m} q_r R_r* A R_r, q_r = Π q_{r_i}."""
    return _weighted_sum(ws, a, l, m, "R")


def jmath_bar(ws: WeightSystem, a: np.ndarray, l: int, m: int) -> np.ndarray:
    """S-version of :func:`jmath`, the φ-adjoint of ῑ."""
    return _weighted_sum(ws, a, l, m, "S")


def graded_jmath(ws: WeightSystem, x: np.ndarray, l: int, m: int, k: int) -> np.ndarray:
    """j^{(k)}_{l,m}(X) for X : H_{l+k} -> H_l; the φ-adjoint of ι^{(k)}_{m,l}."""
    system = ws.system
    _check_pair(system, m, l)
    if l + k > system.M:
        raise ValueError(f"source level {l + k} above truncation")
    cols = max(system.dim(m + k), 0)
    x = _check_shape(x, (system.dim(l), max(system.dim(l + k), 0)))
    if m + k < 0 or cols == 0:
        return np.zeros((system.dim(m), cols), dtype=complex)
    wts = ws.word_weights(l - m)
    left = _shift_stack(system, l - m, m, "R")
    right = _shift_stack(system, l - m, m + k, "R")
    out = np.einsum("r,rab,ac,rcd->bd", wts, left.conj(), x, right, optimize=True)
    return out * (ws.trace(m) / ws.trace(l))


# ---------------------------------------------------------------------------
# isometries V, V̄

def _split_factor(ws, m, l):
    return np.sqrt(ws.trace(m) * ws.trace(l - m) / ws.trace(l))


def isometry_V(ws: WeightSystem, m: int, l: int) -> np.ndarray:
    """V : H_l -> H_m ⊗ H_{l−m}, λ (U_m ⊗ U_{l−m})† U_l."""
    system = ws.system
    _check_pair(system, m, l)
    lam = _split_factor(ws, m, l)
    return lam * dagger(np.kron(system.U[m], system.U[l - m])) @ system.U[l]


def isometry_Vbar(ws: WeightSystem, m: int, l: int) -> np.ndarray:
    """V̄ : H_l -> H_{l−m} ⊗ H_m."""
    system = ws.system
    _check_pair(system, m, l)
    lam = _split_factor(ws, m, l)
    return lam * dagger(np.kron(system.U[l - m], system.U[m])) @ system.U[l]


def isometry_V_shift_form(ws: WeightSystem, m: int, l: int) -> np.ndarray:
    """V assembled from right word shifts: λ Σ_r R_r*|_{H_l} ⊗ U_{l−m}† e_r."""
    system = ws.system
    _check_pair(system, m, l)
    r_stack = _shift_stack(system, l - m, m, "R")           # (n^{l−m}, d_l, d_m)
    frame = u_dagger(system, l - m)                          # (d_{l−m}, n^{l−m})
    v = np.einsum("rab,cr->bca", r_stack.conj(), frame)
    return _split_factor(ws, m, l) * v.reshape(system.dim(m) * system.dim(l - m), -1)


def weighted_adjoint(ws: WeightSystem, v: np.ndarray, m: int, l: int, bar: bool = False) -> np.ndarray:
    """Adjoint of V (or V̄) for the inner products given by ρ^(l) and ρ^(m) ⊗ ρ^(l−m)."""
    a, b = (l - m, m) if bar else (m, l - m)
    rho_pair = np.kron(ws.rho[a], ws.rho[b])
    return np.linalg.solve(ws.rho[l], dagger(v) @ rho_pair)


def final_projection(system: SubproductSystem, m: int, l: int, bar: bool = False) -> np.ndarray:
    """Matrix of p_l(p_m ⊗ p_{l−m}) in the coordinates of H_m ⊗ H_{l−m}."""
    a, b = (l - m, m) if bar else (m, l - m)
    k = dagger(np.kron(system.U[a], system.U[b])) @ system.U[l]
    return k @ dagger(k)


def _partial_trace(ws, x, a, b, trace_second):
    da, db = ws.system.dim(a), ws.system.dim(b)
    t = x.reshape(da, db, da, db)
    if trace_second:
        return np.einsum("ibjc,cb->ij", t, ws.rho[b])
    return np.einsum("bicj,cb->ij", t, ws.rho[a])


def jmath_partial_trace(ws: WeightSystem, a: np.ndarray, l: int, m: int) -> np.ndarray:
    """(id ⊗ φ_{l−m})(V A V^H), V^H the plain conjugate transpose.

    With the ρ-weighted adjoint in place of V^H the formula does not
    reproduce the R-sum; the coordinate identity needs the Euclidean one.
    """
    v = isometry_V(ws, m, l)
    x = v @ _check_shape(a, (ws.system.dim(l),) * 2) @ dagger(v)
    return _partial_trace(ws, x, m, l - m, trace_second=True)


def jmath_bar_partial_trace(ws: WeightSystem, a: np.ndarray, l: int, m: int) -> np.ndarray:
    """(φ_{l−m} ⊗ id)(V̄ A V̄^H)."""
    v = isometry_Vbar(ws, m, l)
    x = v @ _check_shape(a, (ws.system.dim(l),) * 2) @ dagger(v)
    return _partial_trace(ws, x, l - m, m, trace_second=False)


# ---------------------------------------------------------------------------
# covariant symbol and the limit state

def frame_coefficients(system: SubproductSystem, a: np.ndarray, m: int) -> np.ndarray:
    """A_{j,k} = ⟨U_m† e_j | A U_m† e_k⟩ over words of length m."""
    return system.U[m] @ a @ dagger(system.U[m])


def covariant_symbol(system: SubproductSystem, a: np.ndarray, m: int, levels=None) -> GradedOperator:
    """ς^{(m)}(A) with level-l block ι_{m,l}(A), l ≥ m."""
    levels = range(m, system.M + 1) if levels is None else levels
    return GradedOperator(system, 0, {l: iota(system, a, m, l) for l in levels if l >= m},
                          f"ς^({m})")


def covariant_symbol_frame(system: SubproductSystem, a: np.ndarray, m: int, l: int) -> np.ndarray:
    """Σ_{j,k} A_{j,k} S_j S_k*|_{H_l}, evaluated blockwise."""
    _check_pair(system, m, l)
    coeff = frame_coefficients(system, a, m)
    s = _shift_stack(system, m, l - m, "S")     # (n^m, d_l, d_{l−m})
    return np.einsum("jk,jab,kcb->ac", coeff, s, s.conj(), optimize=True)


@dataclass
class LimitState:
    values: Dict[int, complex]
    estimate: complex
    exact: bool


def limit_state(ws: WeightSystem, x: GradedOperator) -> LimitState:
    """Per-level values φ_m(X_m); the top value estimates ω_Q(X)."""
    if x.degree != 0:
        raise ValueError("limit state is defined on degree-0 operators")
    values = {m: phi(ws, m, b) for m, b in x.blocks.items()}
    if not values:
        raise ValueError("operator has no levels")
    tail = list(values.values())[-3:]
    exact = len(tail) >= 3 and max(abs(v - tail[-1]) for v in tail) <= CONSTANCY_TOL
    return LimitState(values, tail[-1], exact)


# ---------------------------------------------------------------------------
# contravariant symbol

@dataclass
class ContravariantResult:
    matrix: np.ndarray
    level: int          # truncation level L used to estimate ω_Q
    exact: bool         # the result did not change over levels L−2..L
    spread: float       # max deviation from the level-L result over L−2..L−1


def _required_level(f: ShiftPolynomial, m: int) -> int:
    return 2 * m + f.height


def _contravariant_at(ws: WeightSystem, f: ShiftPolynomial, l: int, big: int) -> np.ndarray:
    """Frame formula for ς̆_k^{(l)}(f) with ω_Q estimated at truncation level ``big``.

    For f of degree −k the result maps H_{l+k} -> H_l and equals
    (Tr Q_l Tr Q_{big+k} / Tr Q_big) Σ_{|a|=l,|b|=l+k} q_b^{-1} φ_{big+k}(S_b S_a* f) S_a S_b*.
    """
    system = ws.system
    k = -f.degree
    if big - l < 0 or l + k < 0:
        return np.zeros((system.dim(l), max(system.dim(l + k), 0)), dtype=complex)
    fb = represent(f, system, [big + k]).block(big + k)         # H_{big+k} -> H_big
    g = fb @ ws.rho[big + k]
    wa = _shift_stack(system, l, big - l, "S")                   # (n^l, d_big, d_{big−l})
    wb = _shift_stack(system, l + k, big - l, "S")               # (n^{l+k}, d_{big+k}, d_{big−l})
    gwb = np.einsum("xy,byz->bxz", g, wb)
    omega = np.einsum("axz,bxz->ba", wa.conj(), gwb)             # φ(S_b S_a* f)
    qb = ws.word_weights(l + k)
    coeff = (omega / qb[:, None]).T                              # [a, b]
    pref = ws.trace(l) * ws.trace(big + k) / ws.trace(big)
    return pref * (u_dagger(system, l) @ coeff @ system.U[l + k])


def contravariant_symbol_info(ws: WeightSystem, f: ShiftPolynomial, m: int,
                              level: Optional[int] = None) -> ContravariantResult:
    system = ws.system
    if f.degree != 0:
        raise ValueError("contravariant symbol needs a degree-0 element")
    top = top_level(f, system)
    big = top if level is None else level
    if big > top:
        raise HeadroomError(f"element undefined at level {big}", big + (system.M - top))
    need = _required_level(f, m)
    if big < need:
        raise HeadroomError(
            f"level {big} too low for m={m}: need {need}", need + (system.M - top))
    mat = _contravariant_at(ws, f, m, big)
    spread = max(operator_norm(_contravariant_at(ws, f, m, lv) - mat)
                 for lv in (big - 1, big - 2))
    return ContravariantResult(mat, big, spread <= CONSTANCY_TOL, spread)


def contravariant_symbol(ws: WeightSystem, f: ShiftPolynomial, m: int,
                         level: Optional[int] = None, headroom: bool = True) -> np.ndarray:
    """ς̆^{(m)}(f) = Tr Q_m Σ_{j,k} (Q^{⊗m})^{-1}_{j,j} ω_Q(Z_j Z_k* f) S_k S_j*|_{H_m}.

    ω_Q is estimated by φ_L at the truncation level L (default: the highest
    level on which f is represented).  Requires L ≥ 2m + (creation length of f)
    unless ``headroom`` is False, which only asks m ≤ L; whole level sequences
    sharing one L need that.
    """
    system = ws.system
    if f.degree != 0:
        raise ValueError("contravariant symbol needs a degree-0 element")
    top = top_level(f, system)
    big = top if level is None else level
    need = _required_level(f, m) if headroom else m
    if big > top or big < need:
        raise HeadroomError(f"level {big} unusable for m={m}: need {need} <= L <= {top}",
                            need + (system.M - top))
    return _contravariant_at(ws, f, m, big)


def contravariant_symbol_via_j(ws: WeightSystem, f: ShiftPolynomial, m: int,
                               level: Optional[int] = None) -> np.ndarray:
    """j_{L,m} applied to the level-L representative of f."""
    big = top_level(f, ws.system) if level is None else level
    return jmath(ws, represent(f, ws.system, [big]).block(big), big, m)


def graded_contravariant_symbol(ws: WeightSystem, f: ShiftPolynomial, l: int,
                                level: Optional[int] = None) -> np.ndarray:
    """ς̆_k^{(l)}(f) for f of degree −k, as j^{(k)}_{L,l} of its representative."""
    system = ws.system
    k = -f.degree
    top = min(top_level(f, system) - k, system.M)
    big = top if level is None else level
    if big < l or big > top or big + k < 0:
        raise HeadroomError(f"level {big} unusable for l={l}", l + system.M - top)
    x = represent(f, system, [big + k]).block(big + k)
    return graded_jmath(ws, x, big, l, k)


def graded_contravariant_frame(ws: WeightSystem, f: ShiftPolynomial, l: int, level: int) -> np.ndarray:
    return _contravariant_at(ws, f, l, level)


# ---------------------------------------------------------------------------
# Berezin transform

@dataclass
class BerezinResult:
    operator: GradedOperator      # ς^{(m)}(ς̆^{(m)}(f)) on levels m..L
    profile: Dict[int, float]     # ‖β(f)_l − f_l‖ per level
    norm: float                   # max over the trailing window
    symbol: np.ndarray


def berezin_transform(ws: WeightSystem, f: ShiftPolynomial, m: int,
                      level: Optional[int] = None, window: int = 3) -> BerezinResult:
    system = ws.system
    sym = contravariant_symbol(ws, f, m, level)
    big = top_level(f, system) if level is None else level
    levels = list(range(m, big + 1))
    beta = covariant_symbol(system, sym, m, levels)
    rep = represent(f, system, levels)
    profile = {l: operator_norm(beta.blocks[l] - rep.blocks[l]) for l in levels}
    tail = list(profile.values())[-window:]
    return BerezinResult(beta, profile, max(tail), sym)


__all__ = [
    "HeadroomError", "NormalOrderedElement", "iota", "iota_bar", "iota_compression",
    "iota_bar_compression", "graded_iota", "jmath", "jmath_bar", "graded_jmath", "isometry_V",
    "isometry_Vbar", "isometry_V_shift_form", "weighted_adjoint", "final_projection",
    "jmath_partial_trace", "jmath_bar_partial_trace", "frame_coefficients", "covariant_symbol",
    "covariant_symbol_frame", "LimitState", "limit_state", "ContravariantResult",
    "contravariant_symbol", "contravariant_symbol_info", "contravariant_symbol_via_j",
    "graded_contravariant_symbol", "graded_contravariant_frame", "BerezinResult",
    "berezin_transform",
]
