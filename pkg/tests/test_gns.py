import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsd.algebra import OPERATOR_NORM, build_full_matrix_algebra, op_norm
from qsd.derivations import inner_derivation, zero_derivation
from qsd.errors import DegenerateSpaceError, IndefiniteFunctionalError
from qsd.gns import (
    cyclic_rank,
    density_functional,
    form_from_functional,
    gns_construct,
    inner,
    intertwining_residual,
    reconstruction_residual,
    trace_state,
    vector_state,
    verify_form_properties,
    verify_functional_bounds,
)

from conftest import SIGMA3, random_density, random_hermitian, random_unit_vector, unit

seeds = st.integers(min_value=0, max_value=2**32 - 1)
E1 = np.array([1.0, 0.0])
XI = np.array([1.0, 1.0]) / np.sqrt(2)


def brute_gram(f):
    B = f.algebra.basis
    return np.array([[f(bj.conj().T @ bi) for bj in B] for bi in B])


def test_inner_is_linear_in_first_slot():
    u, v = np.array([1j, 0]), np.array([1, 0])
    assert inner(u, v) == 1j
    assert inner(v, u) == -1j


def test_vector_state_e1(m2):
    f = vector_state(m2, E1)
    g = gns_construct(f)
    rank = np.linalg.matrix_rank(brute_gram(f), tol=1e-12)
    assert g.hilbert_dim == rank == 2
    # unitary equivalence with the identity representation: same structure constants, isometric
    U = np.stack([g.lam(unit(2, 0, 0)), g.lam(unit(2, 1, 0))], axis=1)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
    for b in m2.basis:
        np.testing.assert_allclose(g.pi(b) @ U, U @ b, atol=1e-12)
    assert reconstruction_residual(g, f) < 1e-12


def test_trace_state_m2():
    alg = build_full_matrix_algebra(2)
    f = trace_state(alg)
    np.testing.assert_allclose(brute_gram(f), np.eye(4) / 2, atol=1e-15)
    g = gns_construct(f)
    assert g.hilbert_dim == 4
    assert reconstruction_residual(g, f) < 1e-12


def test_zero_functional(m2):
    with pytest.raises(DegenerateSpaceError):
        gns_construct(density_functional(m2, np.zeros((2, 2))))


def test_indefinite_rejected(m2):
    with pytest.raises(IndefiniteFunctionalError):
        density_functional(m2, np.diag([1.0, -0.5]))


def test_vector_state_requires_unit_norm(m2):
    with pytest.raises(ValueError):
        vector_state(m2, np.array([2.0, 0.0]))


def test_bounds_zero_derivation(m2):
    f = vector_state(m2, E1)
    report = verify_functional_bounds(f, zero_derivation(m2))
    assert report.empirical_C == 0


def test_bounds_e1_sigma3(m2):
    f = vector_state(m2, E1)
    delta = inner_derivation(SIGMA3, m2)
    C = np.linalg.norm(SIGMA3 @ E1)
    assert C == 1
    assert verify_functional_bounds(f, delta, candidate_C=C).passed
    # <[s3, x] e1, e1> = 0 for every x, so any C passes on this state
    brute = max(abs(f(delta(b))) for b in m2.basis)
    assert brute == 0
    low = verify_functional_bounds(f, delta, candidate_C=0.1)
    assert low.empirical_C == 0 and low.passed


def test_bounds_failing_candidate(m2):
    f = vector_state(m2, XI)
    delta = inner_derivation(SIGMA3, m2)
    x = unit(2, 0, 1)
    lhs = abs(f(delta(x)))
    rhs = np.sqrt(f(x.conj().T @ x).real) + np.sqrt(f(x @ x.conj().T).real)
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(np.sqrt(2))
    report = verify_functional_bounds(f, delta, candidate_C=0.1)
    assert not report.passed and report.witness is not None
    assert report.empirical_C >= 1 / np.sqrt(2) - 1e-12
    g = gns_construct(f)
    C = np.linalg.norm(SIGMA3 @ XI)
    assert verify_functional_bounds(f, delta, candidate_C=C).passed
    assert g.hilbert_dim == 2


def test_form_properties_e1(m2):
    f = vector_state(m2, E1)
    phi = form_from_functional(f)
    report = verify_form_properties(phi, inner_derivation(SIGMA3, m2), OPERATOR_NORM, C=1.0)
    assert report.invariance_residual < 1e-12
    assert report.kappa <= 1 + 1e-12
    assert report.passed


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4), st.booleans())
def test_reconstruction_and_cyclicity(seed, d, use_density):
    r = np.random.default_rng(seed)
    alg = build_full_matrix_algebra(d)
    if use_density:
        f = density_functional(alg, random_density(r, d, rank=int(r.integers(1, d + 1))))
    else:
        f = vector_state(alg, random_unit_vector(r, d))
    g = gns_construct(f)
    assert reconstruction_residual(g, f) < 1e-10
    assert cyclic_rank(g) == g.hilbert_dim
    assert g.hilbert_dim == np.linalg.matrix_rank(brute_gram(f), tol=1e-12 * np.abs(brute_gram(f)).max())
    for _ in range(3):
        x = alg.random_element(r)
        # continuity proxy with kappa = 1 for states: ||pi(x) xi|| <= ||x||
        assert np.linalg.norm(g.pi(x) @ g.cyclic_vector) <= op_norm(x) + 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 4))
def test_representation_is_homomorphism(seed, d):
    r = np.random.default_rng(seed)
    alg = build_full_matrix_algebra(d)
    g = gns_construct(density_functional(alg, random_density(r, d)))
    x, y = alg.random_element(r), alg.random_element(r)
    np.testing.assert_allclose(g.pi(x @ y), g.pi(x) @ g.pi(y), atol=1e-10)
    np.testing.assert_allclose(g.pi(x.conj().T), g.pi(x).conj().T, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 4))
def test_intertwining_between_runs(seed, d):
    r = np.random.default_rng(seed)
    alg = build_full_matrix_algebra(d)
    f = vector_state(alg, random_unit_vector(r, d))
    assert intertwining_residual(gns_construct(f), gns_construct(f)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(2, 4))
def test_functional_bound_with_hxi(seed, d):
    r = np.random.default_rng(seed)
    alg = build_full_matrix_algebra(d)
    xi = random_unit_vector(r, d)
    H = random_hermitian(r, d)
    report = verify_functional_bounds(
        vector_state(alg, xi), inner_derivation(H, alg), candidate_C=np.linalg.norm(H @ xi), samples=40, seed=seed
    )
    assert report.passed
