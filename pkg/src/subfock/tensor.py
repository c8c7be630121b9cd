"""Dense complex linear algebra on tensor powers of C^n.

Basis vectors of H^{⊗m} are indexed by words over the letters 1..n, ordered
by their positional (base-n) code.  ``kron`` uses the same ordering, so
``e_w ⊗ e_v`` is the basis vector of the concatenated word ``wv``.
"""
from __future__ import annotations

import contextlib
import itertools
import warnings
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

Word = tuple  # tuple[int, ...], letters in 1..n

DIM_HARD_CAP = 8192
DIM_WARN = 2048
DEFAULT_TOL = 1e-10


class DimensionCapError(ValueError):
    pass


_cap = {"hard": DIM_HARD_CAP, "warn": DIM_WARN}


@contextlib.contextmanager
def dimension_cap(hard: int, warn: int | None = None):
    """Temporarily change the ambient dimension cap (and warning threshold)."""
    saved = dict(_cap)
    _cap["hard"] = hard
    _cap["warn"] = max(hard, saved["warn"]) if warn is None else warn
    try:
        yield
    finally:
        _cap.update(saved)


def check_dim(dim: int, what: str = "dimension") -> None:
    if dim > _cap["hard"]:
        raise DimensionCapError(f"{what} {dim} exceeds hard cap {_cap['hard']}")
    if dim > _cap["warn"]:
        warnings.warn(f"{what} {dim} above {_cap['warn']}; dense SVD will be slow", RuntimeWarning)


def word_index(w: Sequence[int], n: int) -> int:
    """Positional code of the word ``w`` among words of length ``len(w)``."""
    idx = 0
    for letter in w:
        if not 1 <= letter <= n:
            raise ValueError(f"letter {letter} out of range 1..{n}")
        idx = idx * n + (letter - 1)
    return idx


def index_word(idx: int, m: int, n: int) -> Word:
    """Inverse of :func:`word_index` on words of length ``m``."""
    if not 0 <= idx < n**m:
        raise ValueError(f"index {idx} out of range for length {m}")
    letters = []
    for _ in range(m):
        idx, r = divmod(idx, n)
        letters.append(r + 1)
    return tuple(reversed(letters))


def words(n: int, m: int) -> Iterable[Word]:
    """All words of length ``m``, in index order."""
    return itertools.product(range(1, n + 1), repeat=m)


def basis_vector(w: Sequence[int], n: int) -> np.ndarray:
    v = np.zeros(n ** len(w), dtype=complex)
    v[word_index(w, n)] = 1.0
    return v


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    check_dim(a.shape[0] * b.shape[0], "kron row count")
    check_dim(a.shape[1] * b.shape[1], "kron column count")
    return np.kron(a, b)


def orthonormal_complement(spanning, ambient_dim: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the complement of ``span(spanning)``.

    Rank is decided by singular values above ``tol * s_max``.  An empty
    spanning set returns the identity.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in spanning]
    if not vecs:
        return np.eye(ambient_dim, dtype=complex)
    for v in vecs:
        if v.shape[0] != ambient_dim:
            raise ValueError(f"vector length {v.shape[0]} != ambient dimension {ambient_dim}")
    s = np.column_stack(vecs)
    if not np.any(s):
        return np.eye(ambient_dim, dtype=complex)
    # reduce to an orthonormal range basis first so the full SVD stays square in ambient_dim
    rng = scipy.linalg.orth(s, rcond=tol)
    return scipy.linalg.null_space(rng.conj().T, rcond=tol).astype(complex)


def numerical_rank(vectors, tol: float = DEFAULT_TOL) -> int:
    vecs = [np.asarray(v).reshape(-1) for v in vectors]
    if not vecs:
        return 0
    sv = np.linalg.svd(np.column_stack(vecs), compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value; 0 for empty or zero matrices."""
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def swap_legs(d1: int, d2: int) -> np.ndarray:
    """Permutation matrix taking C^{d1} ⊗ C^{d2} to C^{d2} ⊗ C^{d1}."""
    p = np.zeros((d1 * d2, d1 * d2))
    for i in range(d1):
        for j in range(d2):
            p[j * d1 + i, i * d2 + j] = 1.0
    return p


def random_matrix(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(random_matrix(rng, dim))
    return q * (np.diag(r) / np.abs(np.diag(r)))
