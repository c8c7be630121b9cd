"""Truncated Fock space of a subproduct system.

Operators are stored level by level.  A degree-k operator has a block
``d_{m+k} x d_m`` for each source level m it is defined on.  Blocks whose
target level is negative are kept as empty ``0 x d_m`` matrices, so that for
example ``S_k*`` restricted to the vacuum is the zero map without special
cases.  Blocks that would need a level above the truncation are simply absent.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .polynomials import PolynomialError, _parse_coefficient, _split_terms
from .subproduct import SubproductSystem
from .tensor import dagger, operator_norm, word_index

# rough element budget for stacked word-shift arrays
_CHUNK_ELEMENTS = 1 << 22


class LevelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# cached per-system data

def _cache(system: SubproductSystem) -> dict:
    return system._cache


def u_dagger(system: SubproductSystem, m: int) -> np.ndarray:
    c = _cache(system)
    key = ("uh", m)
    if key not in c:
        c[key] = np.ascontiguousarray(dagger(system.U[m]))
    return c[key]


def _dim(system: SubproductSystem, m: int) -> int:
    return system.dim(m) if m <= system.M else -1


def _empty(system, rows_level, cols_level):
    return np.zeros((max(system.dim(rows_level), 0), max(system.dim(cols_level), 0)), dtype=complex)


def _check_level(system: SubproductSystem, m: int, top: int) -> None:
    if m < 0 or top > system.M:
        raise LevelError(f"level range {m}..{top} outside 0..{system.M}")


# ---------------------------------------------------------------------------
# shift blocks

def shift_block(system: SubproductSystem, k: int, m: int) -> np.ndarray:
    """S_k restricted to H_m, as a d_{m+1} x d_m matrix."""
    return word_shift(system, (k,), m)


def right_shift_block(system: SubproductSystem, k: int, m: int) -> np.ndarray:
    """R_k restricted to H_m."""
    return right_word_shift(system, (k,), m)


def word_shift(system: SubproductSystem, w: Sequence[int], m: int) -> np.ndarray:
    """S_w = S_{w_1} ... S_{w_p} on H_m, i.e. U_{m+p}^† (e_w ⊗ U_m)."""
    w = tuple(w)
    p = len(w)
    if m < 0:
        return _empty(system, m + p, m)
    _check_level(system, m, m + p)
    key = ("S", w, m)
    c = _cache(system)
    if key not in c:
        n = system.n
        i = word_index(w, n)
        uh = u_dagger(system, m + p)
        c[key] = uh[:, i * n**m:(i + 1) * n**m] @ system.U[m]
    return c[key]


def right_word_shift(system: SubproductSystem, w: Sequence[int], m: int) -> np.ndarray:
    """U_{m+p}^† (U_m ⊗ e_w).  Equals R_{w_p} ... R_{w_1} on H_m."""
    w = tuple(w)
    p = len(w)
    if m < 0:
        return _empty(system, m + p, m)
    _check_level(system, m, m + p)
    key = ("R", w, m)
    c = _cache(system)
    if key not in c:
        n = system.n
        i = word_index(w, n)
        uh = u_dagger(system, m + p).reshape(-1, n**m, n**p)
        c[key] = uh[:, :, i] @ system.U[m]
    return c[key]


def stacked_shifts(system: SubproductSystem, p: int, m: int, side: str = "S",
                   chunk: Optional[int] = None) -> Iterator[Tuple[slice, np.ndarray]]:
    """Yield ``(word_slice, W)`` with W[r] the left (``S``) or right (``R``)
    word shift for word index r, from H_m to H_{m+p}."""
    _check_level(system, m, m + p)
    n = system.n
    nw = n**p
    d_out, d_in = system.dim(m + p), system.dim(m)
    if chunk is None:
        chunk = max(1, _CHUNK_ELEMENTS // max(1, d_out * max(n**m, d_in)))
    uh = u_dagger(system, m + p)
    if side == "S":
        cube = uh.reshape(d_out, nw, n**m)
    elif side == "R":
        cube = uh.reshape(d_out, n**m, nw).transpose(0, 2, 1)
    else:
        raise ValueError("side must be 'S' or 'R'")
    for start in range(0, nw, chunk):
        sl = slice(start, min(nw, start + chunk))
        part = np.ascontiguousarray(cube[:, sl, :].transpose(1, 0, 2))
        yield sl, part @ system.U[m]


def row_sum_residual(system: SubproductSystem, m: int, l: int, side: str = "S") -> float:
    """‖Σ_{|r|=m} S_r S_r*|_{H_l} − I‖ (or the R version)."""
    if not 0 <= m <= l <= system.M:
        raise LevelError(f"need 0 <= m <= l <= M, got m={m}, l={l}")
    d = system.dim(l)
    acc = np.zeros((d, d), dtype=complex)
    for _, w in stacked_shifts(system, m, l - m, side):
        acc += np.einsum("rab,rcb->ac", w, w.conj())
    return operator_norm(acc - np.eye(d))


# ---------------------------------------------------------------------------
# graded operators

@dataclass(eq=False)
class GradedOperator:
    system: SubproductSystem
    degree: int
    blocks: Dict[int, np.ndarray]
    label: str = ""

    def __post_init__(self):
        clean = {}
        for m, b in self.blocks.items():
            m = int(m)
            if m < 0 or m > self.system.M:
                continue
            if m + self.degree > self.system.M:
                raise LevelError(f"block at level {m} maps above the truncation")
            b = np.asarray(b, dtype=complex)
            expect = (max(self.system.dim(m + self.degree), 0), self.system.dim(m))
            if b.shape != expect:
                raise LevelError(f"block at level {m} has shape {b.shape}, expected {expect}")
            clean[m] = b
        # levels whose target is negative are automatically zero
        for m in range(0, min(-self.degree, self.system.M + 1)):
            clean.setdefault(m, np.zeros((0, self.system.dim(m)), dtype=complex))
        self.blocks = dict(sorted(clean.items()))

    @property
    def levels(self) -> List[int]:
        return list(self.blocks)

    def block(self, m: int) -> np.ndarray:
        if m < 0 or m + self.degree < 0:
            return _empty(self.system, m + self.degree, m)
        try:
            return self.blocks[m]
        except KeyError:
            raise LevelError(f"{self.label or 'operator'} undefined at level {m}") from None

    def defined_at(self, m: int) -> bool:
        return m < 0 or m + self.degree < 0 or m in self.blocks

    def restrict(self, levels) -> "GradedOperator":
        return GradedOperator(self.system, self.degree,
                              {m: self.blocks[m] for m in levels if m in self.blocks}, self.label)

    def __matmul__(self, other):
        return compose(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"GradedOperator(degree={self.degree}, levels={self.levels}, label={self.label!r})"


def compose(x: GradedOperator, y: GradedOperator) -> GradedOperator:
    if x.system is not y.system:
        raise ValueError("operators belong to different systems")
    blocks = {}
    for m in y.levels:
        mid = m + y.degree
        if mid < 0:
            blocks[m] = _empty(x.system, m + x.degree + y.degree, m)
        elif x.defined_at(mid):
            blocks[m] = x.block(mid) @ y.block(m)
    return GradedOperator(x.system, x.degree + y.degree, blocks, f"{x.label}{y.label}")


def adjoint(x: GradedOperator) -> GradedOperator:
    blocks = {m + x.degree: dagger(b) for m, b in x.blocks.items() if m + x.degree >= 0}
    return GradedOperator(x.system, -x.degree, blocks, f"({x.label})*" if x.label else "")


def add(x: GradedOperator, y: GradedOperator) -> GradedOperator:
    if x.degree != y.degree:
        raise ValueError(f"cannot add degree {x.degree} and degree {y.degree}")
    common = [m for m in x.levels if m in y.blocks]
    return GradedOperator(x.system, x.degree, {m: x.blocks[m] + y.blocks[m] for m in common})


def scale(x: GradedOperator, c: complex) -> GradedOperator:
    return GradedOperator(x.system, x.degree, {m: c * b for m, b in x.blocks.items()}, x.label)


def level_norms(x: GradedOperator) -> List[float]:
    return [operator_norm(b) for b in x.blocks.values()]


def identity(system: SubproductSystem, levels=None) -> GradedOperator:
    levels = range(system.M + 1) if levels is None else levels
    return GradedOperator(system, 0, {m: np.eye(system.dim(m), dtype=complex) for m in levels}, "1")


def vacuum_projection(system: SubproductSystem) -> GradedOperator:
    blocks = {m: np.zeros((system.dim(m),) * 2, dtype=complex) for m in range(system.M + 1)}
    blocks[0] = np.ones((1, 1), dtype=complex)
    return GradedOperator(system, 0, blocks, "|Ω⟩⟨Ω|")


def shift(system: SubproductSystem, k: int) -> GradedOperator:
    return GradedOperator(system, 1, {m: shift_block(system, k, m) for m in range(system.M)},
                          f"S{k}")


def right_shift(system: SubproductSystem, k: int) -> GradedOperator:
    return GradedOperator(system, 1, {m: right_shift_block(system, k, m) for m in range(system.M)},
                          f"R{k}")


def gauge_action(x: GradedOperator, t: float) -> GradedOperator:
    """γ_t multiplies a degree-k operator by e^{ikt}."""
    return scale(x, np.exp(1j * x.degree * t))


def vacuum_expectation(x: GradedOperator) -> complex:
    if x.degree != 0:
        raise ValueError("vacuum expectation needs a degree-0 operator")
    return complex(x.block(0)[0, 0])


# ---------------------------------------------------------------------------
# polynomials in the shifts

Letter = Tuple[int, bool]  # (k, is_adjoint)

_TOKEN_RE = re.compile(r"Z(d?)(\d+)")


@dataclass(frozen=True)
class ShiftPolynomial:
    """Finite sum of products of Z_k and Z_k*.

    Each term is ``coefficient, letters`` where ``letters`` lists the factors
    in operator order (leftmost first) as ``(k, is_adjoint)`` pairs.
    """

    n: int
    terms: Tuple[Tuple[complex, Tuple[Letter, ...]], ...]

    def __post_init__(self):
        acc: Dict[Tuple[Letter, ...], complex] = {}
        for c, letters in self.terms:
            letters = tuple((int(k), bool(a)) for k, a in letters)
            for k, _ in letters:
                if not 1 <= k <= self.n:
                    raise PolynomialError(f"letter {k} out of range 1..{self.n}")
            acc[letters] = acc.get(letters, 0) + complex(c)
        degs = {_degree(l) for l in acc}
        if len(degs) > 1:
            raise PolynomialError(f"mixed degrees {sorted(degs)} in one element")
        terms = tuple((c, l) for l, c in sorted(acc.items(), key=lambda t: (len(t[0]), t[0]))
                      if c != 0)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def scalar(cls, n: int, c: complex = 1.0) -> "ShiftPolynomial":
        return cls(n, ((c, ()),))

    @classmethod
    def monomial(cls, n: int, creation: Sequence[int] = (), annihilation: Sequence[int] = (),
                 c: complex = 1.0) -> "ShiftPolynomial":
        """c · Z_j Z_k* for words j = ``creation`` and k = ``annihilation``."""
        letters = tuple((k, False) for k in creation)
        letters += tuple((k, True) for k in reversed(tuple(annihilation)))
        return cls(n, ((c, letters),))

    @property
    def degree(self) -> int:
        return _degree(self.terms[0][1]) if self.terms else 0

    @property
    def height(self) -> int:
        """Largest number of creation letters in a term."""
        return max((sum(1 for _, a in l if not a) for _, l in self.terms), default=0)

    def excursion(self) -> Tuple[int, int]:
        """(lowest, highest) level offset visited when a term acts on H_l from the right."""
        lo = hi = 0
        for _, letters in self.terms:
            pos = 0
            for _, a in reversed(letters):
                pos += -1 if a else 1
                lo, hi = min(lo, pos), max(hi, pos)
        return lo, hi

    def is_normal_ordered(self) -> bool:
        for _, letters in self.terms:
            seen_adj = False
            for _, a in letters:
                if a:
                    seen_adj = True
                elif seen_adj:
                    return False
        return True

    def is_anti_normal_ordered(self) -> bool:
        """Every annihilation letter sits left of every creation letter."""
        for _, letters in self.terms:
            flags = [a for _, a in letters]
            if flags != sorted(flags, reverse=True):
                return False
        return True

    def __mul__(self, other):
        if isinstance(other, ShiftPolynomial):
            if other.n != self.n:
                raise ValueError("elements over different n")
            return ShiftPolynomial(self.n, tuple((a * b, la + lb) for a, la in self.terms
                                                 for b, lb in other.terms))
        return ShiftPolynomial(self.n, tuple((c * other, l) for c, l in self.terms))

    __rmul__ = __mul__

    def __add__(self, other):
        if other.n != self.n:
            raise ValueError("elements over different n")
        return ShiftPolynomial(self.n, self.terms + other.terms)

    def __sub__(self, other):
        return self + other * -1.0

    def adjoint(self) -> "ShiftPolynomial":
        return ShiftPolynomial(self.n, tuple((np.conj(c), tuple((k, not a) for k, a in reversed(l)))
                                             for c, l in self.terms))

    def __str__(self):
        return format_element(self)

    def __repr__(self):
        return f"ShiftPolynomial({format_element(self)!r})"


def _degree(letters) -> int:
    return sum(-1 if a else 1 for _, a in letters)


def parse_element(text: str, n: int) -> ShiftPolynomial:
    """Parse ``"0.5 * Z1Z2 * Zd1Zd2 - i * Zd1 * Z1"``.

    A run ``Zd<k1>...Zd<kp>`` denotes Z_k* for the word k = (k1..kp), so
    ``Z1Z2 * Zd1Zd2`` is Z_{12} Z_{12}*.
    """
    s = re.sub(r"\s+", "", text)
    if not s:
        raise PolynomialError("empty element")
    terms = []
    for sign, body in _split_terms(s):
        coeff = complex(sign)
        letters: List[Letter] = []
        for k, tok in enumerate(body.split("*")):
            if not tok:
                raise PolynomialError(f"empty factor in {body!r}")
            if tok.startswith("Z"):
                toks = _TOKEN_RE.findall(tok)
                if "".join(f"Z{d}{v}" for d, v in toks) != tok:
                    raise PolynomialError(f"cannot parse factor {tok!r}")
                kinds = {d for d, _ in toks}
                if len(kinds) != 1:
                    raise PolynomialError(f"factor {tok!r} mixes Z and Zd; separate with '*'")
                run = [int(v) for _, v in toks]
                if kinds == {"d"}:
                    letters.extend((v, True) for v in reversed(run))
                else:
                    letters.extend((v, False) for v in run)
            elif k == 0:
                coeff *= _parse_coefficient(tok)
            else:
                raise PolynomialError(f"cannot parse factor {tok!r}")
        terms.append((coeff, tuple(letters)))
    return ShiftPolynomial(n, tuple(terms))


def _format_letters(letters) -> str:
    runs = []
    for k, a in letters:
        if runs and runs[-1][0] == a:
            runs[-1][1].append(k)
        else:
            runs.append((a, [k]))
    parts = []
    for a, ks in runs:
        if a:
            parts.append("".join(f"Zd{k}" for k in reversed(ks)))
        else:
            parts.append("".join(f"Z{k}" for k in ks))
    return " * ".join(parts)


def format_element(f: ShiftPolynomial) -> str:
    if not f.terms:
        return "0"
    out = ""
    for c, letters in f.terms:
        mono = _format_letters(letters)
        for val, suffix in ((c.real, ""), (c.imag, "i")):
            if val == 0:
                continue
            tok = repr(abs(val)) + suffix + (f" * {mono}" if mono else "")
            if not out:
                out = ("-" if val < 0 else "") + tok
            else:
                out += (" - " if val < 0 else " + ") + tok
    return out


def _term_block(system: SubproductSystem, letters, m: int) -> Optional[np.ndarray]:
    """Block of one product of shifts on H_m; None if a level above M is needed."""
    level = m
    out = np.eye(system.dim(m), dtype=complex) if m >= 0 else None
    # group consecutive letters of the same kind into word shifts
    runs: List[Tuple[bool, List[int]]] = []
    for k, a in reversed(letters):
        if runs and runs[-1][0] == a:
            runs[-1][1].append(k)
        else:
            runs.append((a, [k]))
    for a, ks in runs:
        p = len(ks)
        if a:
            # S_a* S_b* arrives as ks = [b, a] and equals (S_b S_a)*
            target = level - p
            if target < 0:
                return np.zeros((max(system.dim(m + _degree(letters)), 0), system.dim(m)),
                                dtype=complex)
            blk = dagger(word_shift(system, tuple(ks), target))
            level = target
        else:
            target = level + p
            if target > system.M:
                return None
            blk = word_shift(system, tuple(reversed(ks)), level)
            level = target
        out = blk @ out
    return out


def represent(f: ShiftPolynomial, system: SubproductSystem, levels=None) -> GradedOperator:
    """Toeplitz representative of ``f``: Σ c S_{letters} blockwise.

    Levels where some term would leave the truncation are omitted.
    """
    if f.n != system.n:
        raise ValueError(f"element over n={f.n} but system has n={system.n}")
    levels = range(system.M + 1) if levels is None else levels
    blocks = {}
    for m in levels:
        if m + f.degree > system.M or m < 0:
            continue
        acc = np.zeros((max(system.dim(m + f.degree), 0), system.dim(m)), dtype=complex)
        ok = True
        for c, letters in f.terms:
            b = _term_block(system, letters, m)
            if b is None:
                ok = False
                break
            acc += c * b
        if ok:
            blocks[m] = acc
    return GradedOperator(system, f.degree, blocks, format_element(f))


def top_level(f: ShiftPolynomial, system: SubproductSystem) -> int:
    """Highest level on which the representative of ``f`` is defined."""
    return system.M - f.excursion()[1]


# ---------------------------------------------------------------------------
# operator dump

def dump_operator(x: GradedOperator) -> dict:
    levels = {}
    for m, b in x.blocks.items():
        inter = np.empty(2 * b.size)
        inter[0::2] = b.real.ravel()
        inter[1::2] = b.imag.ravel()
        levels[str(m)] = {"rows": b.shape[0], "cols": b.shape[1], "entries": inter.tolist()}
    return {"degree": x.degree, "levels": levels}


def load_operator(system: SubproductSystem, data) -> GradedOperator:
    if isinstance(data, str):
        data = json.loads(data)
    blocks = {}
    for m, blk in data["levels"].items():
        e = np.asarray(blk["entries"], dtype=float)
        blocks[int(m)] = (e[0::2] + 1j * e[1::2]).reshape(blk["rows"], blk["cols"])
    return GradedOperator(system, int(data["degree"]), blocks)


__all__ = [
    "GradedOperator", "ShiftPolynomial", "LevelError", "shift_block", "right_shift_block",
    "word_shift", "right_word_shift", "stacked_shifts", "row_sum_residual", "compose", "adjoint",
    "add", "scale", "level_norms", "identity", "vacuum_projection", "shift", "right_shift",
    "gauge_action", "vacuum_expectation", "parse_element", "format_element", "represent",
    "top_level", "dump_operator", "load_operator", "u_dagger",
]
