"""Subproduct systems stored as isometries U_m : H_m -> H^{⊗m}."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .polynomials import (
    COMMUTATIVE,
    FREE,
    HomPoly,
    PolynomialError,
    ideal_degree_matrix,
    parse_poly,
    sorted_monomials,
    symmetrized_basis_vector,
)
from .tensor import DEFAULT_TOL, check_dim, dagger, orthonormal_complement, operator_norm


class ValidationError(ValueError):
    """Raised when a constructed family violates the subproduct law."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class SubproductSystem:
    n: int
    M: int
    U: tuple
    tag: str = "custom"
    mode: str = FREE
    generators: tuple = ()
    params: dict = field(default_factory=dict)
    # derived blocks (shifts, adjoints) memoized by the fock module
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.U) != self.M + 1:
            raise ValueError(f"expected {self.M + 1} isometries, got {len(self.U)}")
        for m, u in enumerate(self.U):
            if u.shape[0] != self.n**m:
                raise ValueError(f"U_{m} has {u.shape[0]} rows, expected {self.n**m}")
            if u.shape[1] and operator_norm(dagger(u) @ u - np.eye(u.shape[1])) > 1e-10:
                raise ValueError(f"U_{m} does not have orthonormal columns")
        if self.U[0].shape != (1, 1) or abs(abs(self.U[0][0, 0]) - 1) > 1e-12:
            raise ValueError("H_0 must be C")
        frozen = []
        for u in self.U:
            u = np.array(u, dtype=complex)
            u.setflags(write=False)
            frozen.append(u)
        object.__setattr__(self, "U", tuple(frozen))

    @property
    def dims(self) -> List[int]:
        return [u.shape[1] for u in self.U]

    def dim(self, m: int) -> int:
        if m < 0:
            return 0
        return self.U[m].shape[1]

    def projection(self, m: int) -> np.ndarray:
        u = self.U[m]
        return u @ dagger(u)

    def __repr__(self):
        return f"SubproductSystem(tag={self.tag!r}, n={self.n}, M={self.M}, dims={self.dims})"


# ---------------------------------------------------------------------------
# constructors

def _check_size(n: int, M: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if M < 0:
        raise ValueError("M must be non-negative")
    check_dim(n**M, "n^M")


def build_full(n: int, M: int) -> SubproductSystem:
    _check_size(n, M)
    U = tuple(np.eye(n**m, dtype=complex) for m in range(M + 1))
    return SubproductSystem(n, M, U, tag="full", mode=FREE)


def symmetric_basis(n: int, m: int) -> np.ndarray:
    """Orthonormal basis of H^{∨m}: normalized orbit sums, sorted words in lex order."""
    cols = []
    for w in sorted_monomials(n, m):
        v = symmetrized_basis_vector(w, n)
        cols.append(v / np.linalg.norm(v))
    return np.column_stack(cols) if cols else np.zeros((n**m, 0), dtype=complex)


def build_symmetric(n: int, M: int) -> SubproductSystem:
    _check_size(n, M)
    U = tuple(symmetric_basis(n, m) for m in range(M + 1))
    return SubproductSystem(n, M, U, tag="symmetric", mode=COMMUTATIVE)


def build_from_ideal(
    generators: Sequence[HomPoly],
    mode: str,
    n: int,
    M: int,
    tol: float = DEFAULT_TOL,
    tag: Optional[str] = None,
    params: Optional[dict] = None,
) -> SubproductSystem:
    _check_size(n, M)
    for g in generators:
        if g.n != n or g.mode != mode:
            raise PolynomialError("generator variable count or mode does not match system")
    U = []
    for m in range(M + 1):
        span = ideal_degree_matrix(generators, m) if generators else np.zeros((n**m, 0))
        if mode == FREE:
            comp = orthonormal_complement(list(span.T), n**m, tol)
        else:
            sym = symmetric_basis(n, m)
            coords = dagger(sym) @ span if span.size else np.zeros((sym.shape[1], 0))
            comp = sym @ orthonormal_complement(list(coords.T), sym.shape[1], tol)
        U.append(np.asarray(comp, dtype=complex))
    if U[0].shape[1] == 1:
        U[0] = np.ones((1, 1), dtype=complex)
    system = SubproductSystem(
        n, M, tuple(U),
        tag=tag or f"ideal({'; '.join(str(g) for g in generators)})",
        mode=mode, generators=tuple(generators), params=dict(params or {}),
    )
    report = validate(system)
    if not report.passed:
        m, l, r = report.worst
        raise ValidationError(f"subproduct law fails at (m={m}, l={l}), residual {r:.3e}", report)
    return system


def quantum_space_generators(n: int, q: complex) -> List[HomPoly]:
    """z_i z_j − q z_j z_i for i < j; for n = 2 this is the quantum plane."""
    return [HomPoly(n, 2, FREE, {(i, j): 1.0, (j, i): -q})
            for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def named_system(name: str, params: Optional[dict] = None) -> SubproductSystem:
    """Registry of example systems.

    ``params`` keys: ``n``, ``M``, plus ``q`` for ``quantum_plane`` and
    ``monomials`` (list of strings) and optional ``mode`` for ``monomial``.
    """
    p = dict(params or {})
    n = int(p.get("n", 2))
    M = int(p.get("M", 4))
    if name == "full":
        return build_full(n, M)
    if name == "symmetric":
        return build_symmetric(n, M)
    if name == "quantum_plane":
        q = complex(p.get("q", 1.0))
        if q.imag == 0:
            q = q.real
        return build_from_ideal(quantum_space_generators(n, q), FREE, n, M,
                                tag=f"quantum_plane(q={q})", params={"q": q})
    if name == "monomial":
        mode = p.get("mode", FREE)
        monos = p.get("monomials", ["z1*z1"])
        gens = [parse_poly(s, n, mode) for s in monos]
        if any(len(g.terms) != 1 for g in gens):
            raise PolynomialError("monomial system needs single-term generators")
        return build_from_ideal(gens, mode, n, M, tag=f"monomial({', '.join(monos)}; {mode})",
                                params={"monomials": list(monos)})
    raise KeyError(f"unknown system {name!r}")


# ---------------------------------------------------------------------------
# validation

@dataclass
class ValidationReport:
    residuals: List[tuple]  # (m, l, residual)
    tol: float

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for _, _, r in self.residuals)

    @property
    def worst(self) -> tuple:
        return max(self.residuals, key=lambda t: t[2]) if self.residuals else (0, 0, 0.0)


def subproduct_residual(system: SubproductSystem, m: int, l: int) -> float:
    """‖p_l (p_m ⊗ p_{l−m}) p_l − p_l‖, computed in the coordinates of U_l."""
    ul = system.U[l]
    if ul.shape[1] == 0:
        return 0.0
    k = dagger(ul) @ np.kron(system.U[m], system.U[l - m])
    return operator_norm(k @ dagger(k) - np.eye(ul.shape[1]))


def validate(system: SubproductSystem, tol: float = DEFAULT_TOL) -> ValidationReport:
    res = [(m, l, subproduct_residual(system, m, l))
           for l in range(system.M + 1) for m in range(l + 1)]
    return ValidationReport(res, tol)


def ideal_component(system: SubproductSystem, m: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the degree-m ideal component attached to ``system``.

    Free mode: H^{⊗m} ⊖ H_m.  Commutative mode: H^{∨m} ⊖ H_m.
    """
    u = system.U[m]
    if system.mode == COMMUTATIVE:
        sym = symmetric_basis(system.n, m)
        coords = dagger(sym) @ u
        return sym @ orthonormal_complement(list(coords.T), sym.shape[1], tol)
    return orthonormal_complement(list(u.T), system.n**m, tol)


def subspace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """‖P_a − P_b‖ for isometries a, b."""
    return operator_norm(a @ dagger(a) - b @ dagger(b))


def expected_symmetric_dim(n: int, m: int) -> int:
    return math.comb(n + m - 1, m)


__all__ = [
    "SubproductSystem", "ValidationError", "ValidationReport", "build_full", "build_symmetric",
    "build_from_ideal", "named_system", "validate", "subproduct_residual", "ideal_component",
    "symmetric_basis", "quantum_space_generators", "subspace_distance",
]
