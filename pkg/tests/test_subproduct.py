import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from subfock.polynomials import COMMUTATIVE, FREE, PolynomialError, parse_poly
from subfock.subproduct import (
    SubproductSystem,
    ValidationError,
    build_from_ideal,
    build_full,
    build_symmetric,
    expected_symmetric_dim,
    ideal_component,
    named_system,
    quantum_space_generators,
    subproduct_residual,
    subspace_distance,
    symmetric_basis,
    validate,
)
from subfock.tensor import DimensionCapError, dagger, operator_norm


def projection_residual(system, m, l):
    """‖p_l (p_m ⊗ p_{l−m}) p_l − p_l‖ with explicit projections on H^{⊗l}."""
    pl = system.projection(l)
    pml = np.kron(system.projection(m), system.projection(l - m))
    return operator_norm(pl @ pml @ pl - pl)


def test_full_dims():
    assert build_full(3, 4).dims == [1, 3, 9, 27, 81]


def test_symmetric_dims():
    for n in (1, 2, 3):
        assert build_symmetric(n, 5).dims == [math.comb(n + m - 1, m) for m in range(6)]


def test_symmetric_basis_is_symmetric():
    b = symmetric_basis(2, 3)
    assert np.allclose(dagger(b) @ b, np.eye(4))
    # invariant under any leg permutation; check the cyclic one
    perm = np.array([int("".join(np.roll(list(f"{i:03b}"), 1)), 2) for i in range(8)])
    assert np.allclose(b[perm], b)


def test_quantum_plane_dims_match_brute_force():
    s = named_system("quantum_plane", {"n": 2, "M": 7, "q": 0.5})
    gen = {(1, 2): 1.0, (2, 1): -0.5}
    assert s.dims == [2**m - oracles.free_ideal_rank(gen, 2, m) for m in range(8)]
    assert s.dims == [m + 1 for m in range(8)]


def test_monomial_dims():
    assert named_system("monomial", {"n": 2, "M": 5}).dims == [1, 2, 3, 5, 8, 13]
    comm = named_system("monomial", {"n": 2, "M": 5, "mode": COMMUTATIVE})
    assert comm.dims == [1, 2, 2, 2, 2, 2]


@pytest.mark.parametrize("name,params", [
    ("full", {"n": 2, "M": 4}),
    ("symmetric", {"n": 3, "M": 4}),
    ("quantum_plane", {"n": 2, "M": 5, "q": 0.3}),
    ("monomial", {"n": 2, "M": 5}),
    ("monomial", {"n": 2, "M": 5, "mode": COMMUTATIVE}),
])
def test_residual_matches_projection_oracle(name, params):
    s = named_system(name, params)
    for l in range(s.M + 1):
        for m in range(l + 1):
            r = subproduct_residual(s, m, l)
            assert r <= 1e-10
            assert abs(r - projection_residual(s, m, l)) <= 1e-10


def test_quantum_plane_at_q1_is_symmetric():
    qp = named_system("quantum_plane", {"n": 2, "M": 5, "q": 1.0})
    sym = build_symmetric(2, 5)
    for m in range(6):
        assert subspace_distance(qp.U[m], sym.U[m]) <= 1e-10


def test_ideal_component_is_complement():
    s = named_system("quantum_plane", {"n": 2, "M": 4, "q": 0.5})
    for m in range(5):
        c = ideal_component(s, m)
        assert c.shape[1] + s.dim(m) == 2**m
        assert operator_norm(dagger(c) @ s.U[m]) <= 1e-10
    comm = named_system("monomial", {"n": 2, "M": 4, "mode": COMMUTATIVE})
    c = ideal_component(comm, 3)
    assert c.shape[1] == 2  # z1^3, z1^2 z2 inside the symmetric tensors


def test_commutative_z1sq_spans_the_right_monomials():
    s = named_system("monomial", {"n": 2, "M": 4, "mode": COMMUTATIVE})
    target = symmetric_basis(2, 3)[:, 2:]  # z1 z2^2 and z2^3
    assert subspace_distance(s.U[3], target) <= 1e-10


def test_violating_family_fails_validation():
    e = np.eye(2)
    U = (np.ones((1, 1)), e[:, :1], np.eye(4)[:, 3:])  # H_1 = e1, H_2 = e22
    s = SubproductSystem(2, 2, U)
    report = validate(s)
    assert not report.passed
    assert report.worst[2] == pytest.approx(1.0)


def test_constructor_checks():
    with pytest.raises(ValueError):
        SubproductSystem(2, 1, (np.ones((1, 1)),))
    with pytest.raises(ValueError):
        SubproductSystem(2, 1, (np.ones((1, 1)), np.ones((2, 1))))
    with pytest.raises(ValueError):
        SubproductSystem(2, 1, (np.ones((1, 1)), np.ones((3, 1)) / np.sqrt(3)))
    s = build_full(2, 2)
    with pytest.raises(ValueError):
        s.U[1][0, 0] = 5


def test_builder_errors():
    with pytest.raises(KeyError):
        named_system("nope")
    with pytest.raises(PolynomialError):
        named_system("monomial", {"monomials": ["z1*z2 + z2*z1"]})
    with pytest.raises(DimensionCapError):
        build_full(2, 14)
    with pytest.raises(PolynomialError):
        build_from_ideal([parse_poly("z1*z1", 3)], FREE, 2, 3)
    with pytest.raises(ValueError):
        build_full(0, 2)


def test_validation_error_carries_report():
    err = ValidationError("x", report="r")
    assert err.report == "r"


def test_quantum_space_n3():
    s = build_from_ideal(quantum_space_generators(3, 0.5), FREE, 3, 4)
    assert s.dims == [expected_symmetric_dim(3, m) for m in range(5)]


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 3.0))
def test_quantum_plane_property(q):
    s = named_system("quantum_plane", {"n": 2, "M": 5, "q": q})
    assert s.dims == [m + 1 for m in range(6)]
    assert validate(s).passed
