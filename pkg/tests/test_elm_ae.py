import numpy as np
import pytest

from radtd.elm_ae import (
    ElmParams,
    get_activation,
    hidden,
    init_weights,
    reconstruct,
    solve_output_weights,
    train,
)
from radtd.errors import ConfigError, DataError, ShapeError
from radtd.self_set import rbf_errors


def test_init_weights_are_orthonormal_and_seeded():
    a, b = init_weights(D=196, L=10, seed=3)
    assert a.shape == (10, 196) and b.shape == (10,)
    np.testing.assert_allclose(a @ a.T, np.eye(10), atol=1e-12)
    assert np.linalg.norm(b) == pytest.approx(1.0, abs=1e-12)
    a2, b2 = init_weights(D=196, L=10, seed=3)
    np.testing.assert_array_equal(a, a2)
    np.testing.assert_array_equal(b, b2)
    a3, _ = init_weights(D=196, L=10, seed=4)
    assert not np.array_equal(a, a3)


def test_more_hidden_nodes_than_features_rejected():
    with pytest.raises(ConfigError, match="L <= D"):
        init_weights(D=4, L=5, seed=0)


def test_sigmoid_of_zero_is_half():
    H = hidden(np.zeros((2, 3)), np.zeros(2), np.ones((4, 3)))
    np.testing.assert_array_equal(H, 0.5)


def test_unknown_activation():
    with pytest.raises(ConfigError):
        get_activation("softsign")


def test_ridge_solution_matches_normal_equations():
    rng = np.random.default_rng(0)
    X = rng.random((10, 20))
    params = train(X, L=5, C=1e3, seed=1)
    H = hidden(params.a, params.b, X)
    expected = np.linalg.solve(np.eye(5) / 1e3 + H.T @ H, H.T @ X)
    np.testing.assert_allclose(params.beta, expected, rtol=1e-9, atol=1e-10)


def test_ridge_limit_approaches_pseudoinverse():
    rng = np.random.default_rng(0)
    X = rng.random((10, 20))
    a, b = init_weights(20, 5, seed=2)
    H = hidden(a, b, X)
    np.testing.assert_allclose(solve_output_weights(H, X, 1e10), solve_output_weights(H, X, np.inf), rtol=1e-4, atol=1e-5)


def test_interpolation_when_batch_smaller_than_hidden_layer():
    rng = np.random.default_rng(5)
    X = rng.random((5, 20))
    params = train(X, L=10, C=np.inf, seed=0)
    np.testing.assert_allclose(reconstruct(params, X), X, atol=1e-6)


def test_zero_batch_gives_zero_output_weights():
    params = train(np.zeros((10, 16)), L=4, C=1e3, seed=0)
    np.testing.assert_array_equal(params.beta, 0.0)
    np.testing.assert_array_equal(reconstruct(params, np.zeros((3, 16))), 0.0)


def test_training_is_deterministic():
    X = np.random.default_rng(2).random((10, 30))
    p1, p2 = train(X, 6, 1e3, seed=9), train(X, 6, 1e3, seed=9)
    np.testing.assert_array_equal(p1.beta, p2.beta)
    p1.check()


def test_trained_params_are_read_only():
    params = train(np.random.default_rng(0).random((4, 9)), 3, 10.0, seed=0)
    with pytest.raises(ValueError):
        params.beta[0, 0] = 1.0


def test_bad_inputs():
    with pytest.raises(DataError):
        train(np.array([[0.0, np.inf, 1.0]]), 1, 1e3, 0)
    with pytest.raises(ConfigError):
        train(np.ones((2, 3)), 1, 0.0, 0)
    params = train(np.ones((2, 3)), 1, 1e3, 0)
    with pytest.raises(ShapeError):
        reconstruct(params, np.ones((2, 4)))


def test_param_shapes_validated():
    with pytest.raises(ShapeError):
        ElmParams(a=np.eye(2), b=np.ones(3), beta=np.eye(2), C=1.0)


def test_single_feature_single_node():
    params = ElmParams(a=np.array([[1.0]]), b=np.array([0.0]), beta=np.array([[2.0]]), C=1.0)
    # sigmoid(0) * 2
    np.testing.assert_allclose(reconstruct(params, np.array([0.0])), [[1.0]])


def test_normal_equation_residual_on_random_batches():
    rng = np.random.default_rng(21)
    for seed in range(100):
        X = rng.random((10, 196))
        params = train(X, L=10, C=1e3, seed=seed)
        H = hidden(params.a, params.b, X)
        rhs = H.T @ X
        residual = (np.eye(10) / 1e3 + H.T @ H) @ params.beta - rhs
        assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(rhs)


@pytest.mark.slow
def test_ridge_distance_to_pseudoinverse_shrinks_with_C():
    rng = np.random.default_rng(8)
    for seed in range(10):
        X = rng.random((10, 30))
        a, b = init_weights(30, 5, seed=seed)
        H = hidden(a, b, X)
        pinv_beta = solve_output_weights(H, X, np.inf)
        gaps = [np.linalg.norm(solve_output_weights(H, X, C) - pinv_beta) for C in (1e2, 1e4, 1e6, 1e8)]
        assert all(later < earlier for earlier, later in zip(gaps, gaps[1:])), gaps


@pytest.mark.slow
def test_more_hidden_nodes_reconstruct_no_worse():
    sizes = (1, 2, 5, 10)
    mean_errors = np.zeros(len(sizes))
    for seed in range(10):
        X = np.random.default_rng(seed).random((10, 30))
        for i, L in enumerate(sizes):
            params = train(X, L=L, C=1e3, seed=seed)
            mean_errors[i] += rbf_errors(X, reconstruct(params, X)).mean() / 10
    assert np.all(np.diff(mean_errors) <= 1e-12), mean_errors
