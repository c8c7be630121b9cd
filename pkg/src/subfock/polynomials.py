"""Homogeneous polynomials in free or commuting variables z1..zn.

A polynomial is stored as a map from words to coefficients.  In commutative
mode every word is kept sorted, so a word stands for the monomial with that
multidegree.
"""
from __future__ import annotations

import collections
import itertools
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from .tensor import Word, check_dim, word_index, words

FREE = "free"
COMMUTATIVE = "commutative"
MODES = (FREE, COMMUTATIVE)

_COEFF_ZERO = 0.0


class PolynomialError(ValueError):
    pass


@dataclass(frozen=True)
class HomPoly:
    n: int
    degree: int
    mode: str
    terms: Dict[Word, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise PolynomialError(f"unknown mode {self.mode!r}")
        clean = {}
        for w, c in self.terms.items():
            w = tuple(int(x) for x in w)
            if len(w) != self.degree:
                raise PolynomialError(f"word {w} has length != degree {self.degree}")
            if any(not 1 <= x <= self.n for x in w):
                raise PolynomialError(f"variable index in {w} exceeds n={self.n}")
            if self.mode == COMMUTATIVE:
                w = tuple(sorted(w))
            clean[w] = clean.get(w, 0) + complex(c)
        clean = {w: c for w, c in sorted(clean.items()) if c != _COEFF_ZERO}
        object.__setattr__(self, "terms", clean)

    def __str__(self):
        return format_poly(self)

    def is_zero(self) -> bool:
        return not self.terms


# ---------------------------------------------------------------------------
# parsing / printing

_NUM = r"(?:\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
_COEFF_RE = re.compile(rf"^(?:({_NUM})?(i)|({_NUM}))$")
_FACTOR_RE = re.compile(r"^z(\d+)(?:\^(\d+))?$")


def _parse_coefficient(tok: str) -> complex:
    m = _COEFF_RE.match(tok)
    if not m:
        raise PolynomialError(f"cannot parse coefficient {tok!r}")
    if m.group(2):
        return complex(0, float(m.group(1)) if m.group(1) else 1.0)
    return complex(float(m.group(3)))


def _split_terms(text: str) -> List[tuple]:
    # a sign right after e/E belongs to a float exponent; no other token contains e
    pieces = re.split(r"(?<![eE])([+-])", text)
    out = []
    if pieces[0]:
        out.append((1, pieces[0]))
    for k in range(1, len(pieces), 2):
        body = pieces[k + 1]
        if not body:
            raise PolynomialError("dangling or repeated sign")
        out.append((-1 if pieces[k] == "-" else 1, body))
    return out


def parse_poly(text: str, n: int, mode: str = FREE) -> HomPoly:
    """Parse e.g. ``"z1*z2 - 0.5*z2*z1"`` or ``"2i*z1^2*z3"``."""
    if mode not in MODES:
        raise PolynomialError(f"unknown mode {mode!r}")
    s = re.sub(r"\s+", "", text)
    if not s:
        raise PolynomialError("empty polynomial")
    terms: Dict[Word, complex] = {}
    degree = None
    for sign, body in _split_terms(s):
        coeff = complex(sign)
        letters: List[int] = []
        for k, tok in enumerate(body.split("*")):
            if not tok:
                raise PolynomialError(f"empty factor in {body!r}")
            fm = _FACTOR_RE.match(tok)
            if fm:
                var = int(fm.group(1))
                power = int(fm.group(2)) if fm.group(2) else 1
                if not 1 <= var <= n:
                    raise PolynomialError(f"variable z{var} exceeds n={n}")
                letters.extend([var] * power)
            elif k == 0:
                coeff *= _parse_coefficient(tok)
            else:
                raise PolynomialError(f"cannot parse factor {tok!r}")
        if degree is None:
            degree = len(letters)
        elif len(letters) != degree:
            raise PolynomialError(f"non-homogeneous polynomial {text!r}")
        w = tuple(sorted(letters)) if mode == COMMUTATIVE else tuple(letters)
        terms[w] = terms.get(w, 0) + coeff
    return HomPoly(n=n, degree=degree, mode=mode, terms=terms)


def _format_word(w: Word, mode: str) -> str:
    if not w:
        return ""
    if mode == COMMUTATIVE:
        return "*".join(f"z{v}" if p == 1 else f"z{v}^{p}" for v, p in sorted(Counter(w).items()))
    return "*".join(f"z{v}" for v in w)


def format_poly(p: HomPoly) -> str:
    """Canonical text; ``parse_poly(format_poly(p), ...)`` reproduces ``p``."""
    if p.is_zero():
        return "0" + ("" if p.degree == 0 else "*" + "*".join(["z1"] * p.degree))
    parts = []
    for w, c in p.terms.items():
        mono = _format_word(w, p.mode)
        # a complex coefficient is written as two terms on the same monomial
        for val, suffix in ((c.real, ""), (c.imag, "i")):
            if val == 0:
                continue
            sign = "-" if val < 0 else "+"
            tok = repr(abs(val)) + suffix
            parts.append((sign, tok + ("*" + mono if mono else "")))
    text = ""
    for k, (sign, tok) in enumerate(parts):
        if k == 0:
            text = ("-" if sign == "-" else "") + tok
        else:
            text += f" {sign} {tok}"
    return text


# ---------------------------------------------------------------------------
# evaluation into Fock space

def symmetrized_basis_vector(w: Sequence[int], n: int) -> np.ndarray:
    """Average of e_v over all rearrangements v of ``w``."""
    m = len(w)
    v = np.zeros(n**m, dtype=complex)
    perms = list(_distinct_rearrangements(collections.Counter(w), m))
    for p in perms:
        v[word_index(p, n)] = 1.0
    return v / len(perms)


def _distinct_rearrangements(counts: "collections.Counter", m: int):
    if m == 0:
        yield ()
        return
    for k in sorted(counts):
        if counts[k]:
            counts[k] -= 1
            for rest in _distinct_rearrangements(counts, m - 1):
                yield (k,) + rest
            counts[k] += 1


def evaluate_on_basis(f: HomPoly) -> np.ndarray:
    check_dim(f.n**f.degree, "H^{⊗m} dimension")
    v = np.zeros(f.n**f.degree, dtype=complex)
    for w, c in f.terms.items():
        if f.mode == FREE:
            v[word_index(w, f.n)] += c
        else:
            v += c * symmetrized_basis_vector(w, f.n)
    return v


def sorted_monomials(n: int, m: int) -> List[Word]:
    return list(itertools.combinations_with_replacement(range(1, n + 1), m))


def ideal_degree_matrix(generators: Sequence[HomPoly], m: int) -> np.ndarray:
    """Columns spanning the degree-m component of the ideal, evaluated on the basis."""
    if not generators:
        return np.zeros((0, 0), dtype=complex)
    n = generators[0].n
    mode = generators[0].mode
    for g in generators:
        if g.mode != mode:
            raise PolynomialError("generators mix free and commutative modes")
        if g.n != n:
            raise PolynomialError("generators have different variable counts")
    check_dim(n**m, "H^{⊗m} dimension")
    cols = []
    for g in generators:
        if g.degree > m or g.is_zero():
            continue
        free_len = m - g.degree
        if mode == FREE:
            v = evaluate_on_basis(g).reshape(-1, 1)
            for a in range(free_len + 1):
                b = free_len - a
                block = np.kron(np.kron(np.eye(n**a), v), np.eye(n**b))
                cols.append(block)
        else:
            for x in sorted_monomials(n, free_len):
                prod = HomPoly(n, m, COMMUTATIVE, {tuple(x) + w: c for w, c in g.terms.items()})
                cols.append(evaluate_on_basis(prod).reshape(-1, 1))
    if not cols:
        return np.zeros((n**m, 0), dtype=complex)
    return np.hstack(cols).astype(complex)


def ideal_degree_span(generators: Sequence[HomPoly], m: int) -> List[np.ndarray]:
    mat = ideal_degree_matrix(generators, m)
    return [mat[:, k] for k in range(mat.shape[1])]


def load_ideal_file(path) -> tuple:
    """Read an ideal file (TOML or JSON) with fields ``n``, ``mode``, ``generators``.

    Returns ``(n, mode, [HomPoly, ...])``.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PolynomialError(f"malformed JSON: {exc}") from None
    else:
        data = _load_toml(text)
    try:
        n = int(data["n"])
        mode = data.get("mode", FREE)
        if mode not in (FREE, COMMUTATIVE):
            raise PolynomialError(f"unknown mode {mode!r}")
        gens = [parse_poly(g, n, mode) for g in data.get("generators", [])]
    except KeyError as exc:
        raise PolynomialError(f"ideal file missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PolynomialError):
            raise
        raise PolynomialError(f"bad ideal file: {exc}") from None
    return n, mode, gens


def _load_toml(text: str) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # python < 3.11
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise PolynomialError(f"malformed TOML: {exc}") from None


def monomial_count(n: int, m: int) -> int:
    return math.comb(n + m - 1, m)


__all__ = [
    "FREE", "COMMUTATIVE", "HomPoly", "PolynomialError", "parse_poly", "format_poly",
    "evaluate_on_basis", "ideal_degree_span", "ideal_degree_matrix", "load_ideal_file",
    "symmetrized_basis_vector", "sorted_monomials", "monomial_count", "words",
]
