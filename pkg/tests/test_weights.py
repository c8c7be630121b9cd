import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subfock.polynomials import FREE, parse_poly
from subfock.subproduct import build_from_ideal, build_full, build_symmetric, named_system
from subfock.tensor import dagger, operator_norm, random_matrix
from subfock.weights import (
    WeightError,
    build_weight,
    invariance_residual,
    kms_residual,
    modular_conjugate,
    multiplicativity_residual,
    phi,
    word_weights,
)


def qplane(M=5, q=0.5):
    return named_system("quantum_plane", {"n": 2, "M": M, "q": q})


def test_all_ones_gives_normalized_trace():
    s = named_system("monomial", {"n": 2, "M": 4})
    ws = build_weight(s)
    for m in range(5):
        assert np.allclose(ws.Q[m], np.eye(s.dim(m)))
        a = random_matrix(np.random.default_rng(m), s.dim(m))
        assert phi(ws, m, a) == pytest.approx(np.trace(a) / s.dim(m))


@pytest.mark.parametrize("q", [(0.5, 2.0), (2.0, 0.5), (1.0, 3.0)])
def test_quantum_plane_weights_pass(q):
    ws = build_weight(qplane(), q)
    assert max(ws.residuals) <= 1e-10


def test_symmetric_any_diagonal_passes():
    assert max(build_weight(build_symmetric(2, 5), (1, 2)).residuals) <= 1e-10


def test_phi_examples():
    ws = build_weight(build_symmetric(2, 3))
    assert phi(ws, 2, np.diag([1, 0, 0])) == pytest.approx(1 / 3)
    ws = build_weight(build_full(2, 2), (1, 3))
    assert phi(ws, 1, np.diag([1, 0])) == pytest.approx(1 / 4)
    assert phi(ws, 2, np.eye(4)) == pytest.approx(1)
    with pytest.raises(ValueError):
        phi(ws, 1, np.eye(3))


def test_incompatible_weights_rejected():
    s = build_from_ideal([parse_poly("z1*z1 - z2*z2", 2)], FREE, 2, 4)
    with pytest.raises(WeightError) as exc:
        build_weight(s, (1, 2))
    assert exc.value.level == 2
    assert exc.value.residual > 0.1
    assert invariance_residual(s, (1, 2), 2) == pytest.approx(exc.value.residual)


@pytest.mark.parametrize("q", [(1.0,), (0.0, 1.0), (-1.0, 1.0), (float("inf"), 1.0)])
def test_bad_weight_vectors(q):
    with pytest.raises(WeightError):
        build_weight(build_full(2, 2), q)


def test_level_data_consistency():
    s = qplane(6)
    ws = build_weight(s, (2.0, 0.5))
    for m in range(7):
        u = s.U[m]
        brute = dagger(u) @ np.diag(word_weights((2.0, 0.5), m)) @ u
        assert np.allclose(ws.Q[m], brute)
        assert operator_norm(ws.Q[m] @ ws.Q_inv[m] - np.eye(s.dim(m))) <= 1e-10
        assert np.trace(ws.rho[m]).real == pytest.approx(1)
        assert ws.min_density_eigenvalue(m) > 0
        for l in range(m, 7):
            assert multiplicativity_residual(ws, m, l) <= 1e-10


def test_word_weights_are_products():
    w = word_weights((2.0, 3.0), 3)
    assert w[0b101] == pytest.approx(3 * 2 * 3)
    assert word_weights((2.0, 3.0), 0).tolist() == [1.0]


def test_modular_flow():
    ws = build_weight(qplane(), (0.5, 2.0))
    rng = np.random.default_rng(7)
    a = random_matrix(rng, 3)
    assert np.allclose(modular_conjugate(ws, 2, a, 0), a)
    assert np.allclose(modular_conjugate(ws, 2, ws.Q[2], 1.7), ws.Q[2])
    assert np.allclose(modular_conjugate(ws, 2, a, -1j), ws.Q[2] @ a @ ws.Q_inv[2])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 5))
def test_kms_and_positivity(seed, m):
    ws = build_weight(qplane(), (0.5, 2.0))
    rng = np.random.default_rng(seed)
    d = ws.system.dim(m)
    a, b = random_matrix(rng, d), random_matrix(rng, d)
    assert kms_residual(ws, m, a, b) <= 1e-9
    assert phi(ws, m, dagger(a) @ a).real >= -1e-12
    assert phi(ws, m, np.eye(d)) == pytest.approx(1)
