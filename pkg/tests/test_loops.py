import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from conftest import CYLINDER, random_twisted
from dpw_delaunay.delaunay import xi_loop, xi_minus1
from dpw_delaunay.loops import (
    E1,
    E2,
    E3,
    IDENTITY,
    LoopError,
    LoopMatrix,
    circle_points,
    diag,
    evaluate,
    from_samples,
    is_positive_loop,
    is_twisted,
    is_twisted_derivative,
    is_unitary_on_circle,
    lambda_derivative,
    multiply,
    off,
    samples,
    scale_lambda,
    star,
    su2_to_vector,
    vector_to_su2,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_evaluate_identity():
    np.testing.assert_allclose(evaluate(LoopMatrix.identity(), 1j), IDENTITY)


def test_evaluate_single_negative_mode():
    L = LoopMatrix.from_modes({-1: off(1, 1)})
    np.testing.assert_allclose(evaluate(L, 2.0), off(0.5, 0.5))


def test_evaluate_delaunay_residue():
    np.testing.assert_allclose(evaluate(xi_loop(CYLINDER), 1.0), [[0, 0.5], [0.5, 0]], atol=1e-15)


def test_evaluate_at_zero():
    with pytest.raises(LoopError):
        evaluate(LoopMatrix.from_modes({-1: off(1, 1)}), 0)
    P = LoopMatrix.from_modes({0: diag(2, 0.5), 1: off(1, 0)}, degree=2)
    np.testing.assert_allclose(evaluate(P, 0), diag(2, 0.5))


def test_multiply_neutral(rng):
    L = random_twisted(rng, 3)
    np.testing.assert_allclose((L @ LoopMatrix.identity()).coeffs, L.coeffs, atol=1e-14)


def test_multiply_mode_addition(rng):
    A = rng.normal(size=(2, 2))
    B = rng.normal(size=(2, 2))
    P = multiply(LoopMatrix.from_modes({-1: A}), LoopMatrix.from_modes({1: B}))
    np.testing.assert_allclose(P.coeff(0), A @ B, atol=1e-14)
    np.testing.assert_allclose(np.delete(P.coeffs, 1, axis=0), 0, atol=1e-14)


def test_multiply_matches_pointwise(rng):
    L1, L2 = random_twisted(rng, 2), random_twisted(rng, 2)
    lam = circle_points(64)
    prod = multiply(L1, L2, headroom=2)
    np.testing.assert_allclose(evaluate(prod, lam), evaluate(L1, lam) @ evaluate(L2, lam), atol=1e-12)


def test_multiply_truncation_recorded(rng):
    L1, L2 = random_twisted(rng, 2), random_twisted(rng, 2)
    assert multiply(L1, L2).discarded > 0
    assert multiply(L1, L2, headroom=2).discarded == 0


def test_multiply_radius_mismatch():
    with pytest.raises(LoopError):
        multiply(LoopMatrix.identity(radius=1.0), LoopMatrix.identity(radius=0.5))


def test_derivative_examples():
    M = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.abs(lambda_derivative(LoopMatrix.constant(M, degree=2)).coeffs).max() == 0
    D = lambda_derivative(LoopMatrix.from_modes({1: M}))
    np.testing.assert_allclose(D.coeff(0), M)


def test_derivative_against_finite_difference():
    xi = xi_loop(CYLINDER)
    h = 1e-5
    fd = (xi_minus1(CYLINDER, 1 + h) - xi_minus1(CYLINDER, 1 - h)) / (2 * h)
    assert np.abs(evaluate(lambda_derivative(xi), 1.0) - fd).max() <= 1e-9


def test_twist_predicate():
    L = LoopMatrix.from_modes({0: diag(1, 2), 1: off(1, 3), -2: diag(4, 5)})
    assert is_twisted(L)
    assert not is_twisted(LoopMatrix.from_modes({0: off(1, 1)}))
    assert is_twisted(xi_loop(CYLINDER))


def test_unitary_predicate():
    assert is_unitary_on_circle(LoopMatrix.identity())
    assert not is_unitary_on_circle(LoopMatrix.constant(diag(2, 0.5)))
    lam = circle_points(256)
    vals = np.array([expm(0.7j * x) for x in xi_minus1(CYLINDER, lam)])
    assert is_unitary_on_circle(from_samples(vals, 32), samples=64)


def test_positive_predicate():
    assert is_positive_loop(LoopMatrix.identity())
    assert not is_positive_loop(LoopMatrix.from_modes({-1: off(1, 0), 0: IDENTITY}))
    assert is_positive_loop(LoopMatrix.constant(diag(2, 0.5)))
    assert not is_positive_loop(LoopMatrix.constant(diag(-2, -0.5)))
    assert not is_positive_loop(LoopMatrix.constant(diag(2j, -0.5j)))


def test_star_examples(rng):
    assert np.array_equal(star(LoopMatrix.identity()).coeffs, LoopMatrix.identity().coeffs)
    L = random_twisted(rng, 3)
    assert np.array_equal(star(star(L)).coeffs, L.coeffs)
    lam = circle_points(16)
    np.testing.assert_allclose(evaluate(star(L), lam),
                               np.conj(np.swapaxes(evaluate(L, lam), -1, -2)), atol=1e-13)


def test_star_of_unitary_inverts():
    lam = circle_points(256)
    F = from_samples(np.array([expm(0.7j * x) for x in xi_minus1(CYLINDER, lam)]), 32)
    prod = multiply(star(F), F, headroom=32)
    np.testing.assert_allclose(evaluate(prod, circle_points(64)), np.broadcast_to(IDENTITY, (64, 2, 2)),
                               atol=1e-12)


def test_from_samples_examples():
    ident = from_samples(np.broadcast_to(IDENTITY, (8, 2, 2)), 2)
    np.testing.assert_allclose(ident.coeffs, LoopMatrix.identity(2).coeffs, atol=1e-15)
    lam = circle_points(8)
    pure = from_samples(np.array([off(1 / l, 1 / l) for l in lam]), 2)
    np.testing.assert_allclose(pure.coeff(-1), off(1, 1), atol=1e-15)
    np.testing.assert_allclose(np.delete(pure.coeffs, 1, axis=0), 0, atol=1e-15)


def test_from_samples_exponential():
    lam = circle_points(256)
    L = from_samples(np.array([expm(np.log(2) * x) for x in xi_minus1(CYLINDER, lam)]), 32)
    check = np.exp(2j * np.pi * (np.arange(64) + 0.37) / 64)
    oracle = np.array([expm(np.log(2) * x) for x in xi_minus1(CYLINDER, check)])
    assert np.abs(evaluate(L, check) - oracle).max() <= 1e-10


def test_from_samples_too_few():
    with pytest.raises(LoopError):
        from_samples(np.zeros((5, 2, 2)), 2)


def test_from_samples_radius():
    L = LoopMatrix.from_modes({-1: off(1, 2), 0: diag(1, 1)}, radius=0.5)
    again = from_samples(samples(L, 16), 3, radius=0.5)
    np.testing.assert_allclose(again.resize(1).coeffs, L.coeffs, atol=1e-13)


def test_json_round_trip(rng):
    L = random_twisted(rng, 2)
    again = LoopMatrix.from_json(L.to_json())
    assert np.array_equal(again.coeffs, L.coeffs)


def test_coefficients_are_read_only(rng):
    L = random_twisted(rng, 1)
    with pytest.raises(ValueError):
        L.coeffs[0, 0, 0] = 1


def test_su2_identification(rng):
    v = rng.normal(size=3)
    X = vector_to_su2(v)
    np.testing.assert_allclose(su2_to_vector(X), v)
    assert np.linalg.det(X).real == pytest.approx(v @ v)
    np.testing.assert_allclose(su2_to_vector(np.array([E1, E2, E3])), np.eye(3))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_product_is_pointwise(seed, d1, d2):
    rng = np.random.default_rng(seed)
    L1, L2 = random_twisted(rng, d1), random_twisted(rng, d2)
    lam = circle_points(32)
    prod = multiply(L1, L2, headroom=min(d1, d2))
    assert np.abs(evaluate(prod, lam) - evaluate(L1, lam) @ evaluate(L2, lam)).max() <= 1e-11
    assert is_twisted(prod)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4))
def test_twist_preserved(seed, d):
    L = random_twisted(np.random.default_rng(seed), d)
    assert is_twisted(star(L))
    D = lambda_derivative(L)
    assert is_twisted_derivative(D)
    assert is_twisted(scale_lambda(LoopMatrix(D.resize(d + 1).coeffs), 1))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4))
def test_sampling_round_trip(seed, d):
    L = random_twisted(np.random.default_rng(seed), d)
    again = from_samples(samples(L, 2 * d + 2), d)
    assert np.abs(again.coeffs - L.coeffs).max() <= 1e-12
