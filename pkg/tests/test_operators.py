import numpy as np
import pytest

from phasespace_ur.lca import bits, cyclic, translate_operator
from phasespace_ur.operators import (
    as_density,
    convolve_function_operator,
    convolve_operator_operator,
    momentum_average,
    momentum_marginal,
    position_marginal,
    pure,
    random_density,
    random_pure_state,
    translate_function,
)


def test_as_density_validation():
    with pytest.raises(ValueError):
        as_density(np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        as_density(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        as_density(np.array([[0.5, 1.0], [0.0, 0.5]]))
    np.testing.assert_allclose(as_density(np.array([1.0, 1.0])), np.full((2, 2), 0.5))


def test_random_states_are_valid(rng):
    for d in (2, 3, 7):
        as_density(random_density(d, rng))
        assert np.linalg.norm(random_pure_state(d, rng)) == pytest.approx(1.0)


def test_position_zero_has_flat_momentum():
    g = cyclic(5)
    rho = pure(np.eye(5)[0])
    np.testing.assert_allclose(position_marginal(g, rho).probs, np.eye(5)[0])
    np.testing.assert_allclose(momentum_marginal(g, rho).probs, 0.2)


def test_marginals_vector_and_matrix_agree(rng):
    g = bits(2)
    psi = random_pure_state(4, rng)
    np.testing.assert_allclose(momentum_marginal(g, psi).probs, momentum_marginal(g, pure(psi)).probs)
    np.testing.assert_allclose(position_marginal(g, psi).probs, position_marginal(g, pure(psi)).probs)


def test_translate_point_projector():
    g = cyclic(5)
    P0 = pure(np.eye(5)[0])
    for q in range(5):
        np.testing.assert_allclose(translate_operator(g, (q, 0), P0), pure(np.eye(5)[q]), atol=1e-14)


def test_momentum_average_is_position_diagonal(rng):
    g = cyclic(4)
    rho = random_density(4, rng)
    np.testing.assert_allclose(momentum_average(g, rho), np.diag(np.diag(rho)), atol=1e-12)


def test_convolution_with_constant_function(rng):
    g = cyclic(3)
    A = random_density(3, rng) * 2.5
    out = convolve_function_operator(g, np.ones((3, 3)), A)
    np.testing.assert_allclose(out, np.trace(A) * np.eye(3), atol=1e-12)


def test_convolution_preserves_positivity(rng):
    g = cyclic(4)
    f = rng.random((4, 4))
    out = convolve_function_operator(g, f, random_density(4, rng))
    assert np.linalg.eigvalsh(out)[0] > -1e-12


def test_operator_convolution_integrates_to_traces(rng):
    g = cyclic(3)
    A, B = random_density(3, rng), random_density(3, rng)
    f = convolve_operator_operator(g, A, B)
    assert np.max(np.abs(f.imag)) < 1e-12
    assert np.all(f.real > -1e-12)
    assert (f.sum() * g.phase_space_weight).real == pytest.approx(1.0)


def test_translate_function_shifts_indices():
    g = cyclic(3)
    f = np.arange(9.0).reshape(3, 3)
    out = translate_function(g, f, (1, 2))
    assert out[1, 2] == f[0, 0]
    assert out[0, 0] == f[2, 1]


def test_function_convolution_covariance(rng):
    # α_ξ(f ∗ A) = (α_ξ f) ∗ A in the labelling where α_ξ acts on functions by shifts
    g = cyclic(3)
    A = random_density(3, rng)
    f = rng.random((3, 3))
    lhs = translate_operator(g, (1, 2), convolve_function_operator(g, f, A))
    rhs = convolve_function_operator(g, translate_function(g, f, (1, 2)), A)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
