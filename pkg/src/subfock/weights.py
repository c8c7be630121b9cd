"""Diagonal weights Q, their level compressions Q_m and the states φ_m."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .subproduct import SubproductSystem
from .tensor import dagger, operator_norm

DEFAULT_INVARIANCE_TOL = 1e-8


class WeightError(ValueError):
    def __init__(self, message, level=None, residual=None):
        super().__init__(message)
        self.level = level
        self.residual = residual


def word_weights(q: Sequence[float], m: int) -> np.ndarray:
    """Diagonal of Q^{⊗m} in word order: entry r is Π_i q_{r_i}."""
    return reduce(np.kron, [np.asarray(q, dtype=float)] * m, np.ones(1))


def invariance_residual(system: SubproductSystem, q: Sequence[float], m: int) -> float:
    """‖(I − p_m) Q^{⊗m} p_m‖ / ‖Q^{⊗m}‖."""
    u = system.U[m]
    if u.shape[1] == 0:
        return 0.0
    qd = word_weights(q, m)
    qu = qd[:, None] * u
    return operator_norm(qu - u @ (dagger(u) @ qu)) / float(np.max(qd))


@dataclass(frozen=True, eq=False)
class WeightSystem:
    system: SubproductSystem
    q: tuple
    Q: tuple       # Q_m
    Q_inv: tuple
    traces: tuple  # Tr Q_m
    rho: tuple     # Q_m / Tr Q_m
    residuals: tuple

    @property
    def M(self) -> int:
        return self.system.M

    def trace(self, m: int) -> float:
        return self.traces[m]

    def word_weights(self, m: int) -> np.ndarray:
        return word_weights(self.q, m)

    def min_density_eigenvalue(self, m: int) -> float:
        """Smallest eigenvalue of ρ^(m); a faithfulness heuristic only."""
        if self.rho[m].size == 0:
            return float("nan")
        return float(np.linalg.eigvalsh(self.rho[m])[0])


def build_weight(system: SubproductSystem, q: Sequence[float] | None = None,
                 tol: float = DEFAULT_INVARIANCE_TOL) -> WeightSystem:
    n = system.n
    q = tuple(float(x) for x in (q if q is not None else [1.0] * n))
    if len(q) != n:
        raise WeightError(f"expected {n} weights, got {len(q)}")
    if any(not np.isfinite(x) or x <= 0 for x in q):
        raise WeightError("weights must be positive and finite")
    Qs, Qinv, traces, rhos, res = [], [], [], [], []
    for m in range(system.M + 1):
        r = invariance_residual(system, q, m)
        res.append(r)
        if r > tol:
            raise WeightError(f"Q^(⊗{m}) does not preserve H_{m}: residual {r:.3e} > {tol:.1e}",
                              level=m, residual=r)
        u = system.U[m]
        qm = dagger(u) @ (word_weights(q, m)[:, None] * u)
        qm = (qm + dagger(qm)) / 2
        tr = float(np.trace(qm).real)
        Qs.append(qm)
        Qinv.append(np.linalg.inv(qm) if qm.size else qm)
        traces.append(tr)
        rhos.append(qm / tr if qm.size else qm)
    return WeightSystem(system, q, tuple(Qs), tuple(Qinv), tuple(traces), tuple(rhos), tuple(res))


def _check_square(ws: WeightSystem, m: int, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    d = ws.system.dim(m)
    if a.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix at level {m}, got {a.shape}")
    return a


def phi(ws: WeightSystem, m: int, a: np.ndarray) -> complex:
    """φ_m(A) = Tr(ρ^(m) A)."""
    a = _check_square(ws, m, a)
    return complex(np.einsum("ij,ji->", ws.rho[m], a))


def modular_conjugate(ws: WeightSystem, m: int, a: np.ndarray, t: complex) -> np.ndarray:
    """Q_m^{it} A Q_m^{−it}; complex t allowed (t = −i gives Q_m A Q_m^{−1})."""
    a = _check_square(ws, m, a)
    evals, vecs = np.linalg.eigh(ws.Q[m])
    left = (vecs * evals ** (1j * t)) @ dagger(vecs)
    right = (vecs * evals ** (-1j * t)) @ dagger(vecs)
    return left @ a @ right


def kms_residual(ws: WeightSystem, m: int, a: np.ndarray, b: np.ndarray) -> float:
    """|φ_m(AB) − φ_m(B Q_m A Q_m^{-1})|."""
    sa = ws.Q[m] @ _check_square(ws, m, a) @ ws.Q_inv[m]
    return abs(phi(ws, m, a @ b) - phi(ws, m, b @ sa))


def multiplicativity_residual(ws: WeightSystem, m: int, l: int) -> float:
    """‖Q_l^{-1} U_l†(Q^{⊗m} ⊗ Q^{⊗(l−m)}) U_l − I‖."""
    u = ws.system.U[l]
    if u.shape[1] == 0:
        return 0.0
    qd = np.kron(word_weights(ws.q, m), word_weights(ws.q, l - m))
    return operator_norm(ws.Q_inv[l] @ (dagger(u) @ (qd[:, None] * u)) - np.eye(u.shape[1]))


__all__ = [
    "WeightSystem", "WeightError", "build_weight", "phi", "modular_conjugate", "kms_residual",
    "invariance_residual", "word_weights", "multiplicativity_residual",
]
