import numpy as np
import pytest

from regimbalance.learner import (
    Mlp,
    MlpConfig,
    Standardizer,
    TrainingError,
    forward,
    init,
    loss_and_grads,
    predict,
    train,
)


def reference_loss(m, X, y):
    """Loss computed from the plain forward pass, without any backprop code."""
    out = predict(m, X)
    if m.config.loss == "mae":
        return np.mean(np.abs(out - y))
    return -np.mean(y * np.log(out) + (1 - y) * np.log(1 - out))


def fd_grads(m, X, y, h=1e-5):
    grads = []
    for p in m.params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = reference_loss(m, X, y)
            p[idx] = old - h
            down = reference_loss(m, X, y)
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


@pytest.mark.parametrize("loss", ["mae", "bce"])
def test_gradients_match_finite_differences(loss):
    rng = np.random.default_rng(7)
    m = init(MlpConfig(input_dim=4, loss=loss, seed=3))
    for b in m.biases:
        b[:] = rng.normal(0, 0.1, b.shape)
    X = rng.normal(size=(8, 4))
    y = rng.normal(size=8) if loss == "mae" else rng.integers(0, 2, 8).astype(float)
    _, analytic = loss_and_grads(m, X, y)
    for a, n in zip(analytic, fd_grads(m, X, y)):
        scale = max(np.linalg.norm(a), np.linalg.norm(n), 1e-8)
        assert np.linalg.norm(a - n) / scale <= 1e-4


def test_init_contract():
    cfg = MlpConfig(input_dim=4, seed=12)
    a, b = init(cfg), init(cfg)
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)
    assert all(np.all(bias == 0) for bias in a.biases)
    assert np.all(np.abs(a.weights[0]) <= np.sqrt(1.5))
    assert [w.shape for w in a.weights] == [(4, 20), (20, 20), (20, 20), (20, 1)]


def zero_net(loss):
    m = init(MlpConfig(input_dim=3, loss=loss))
    for p in m.params:
        p[...] = 0
    return m


def test_zero_network_outputs():
    assert forward(zero_net("mae"), [1.0, 2.0, 3.0]) == 0.0
    assert forward(zero_net("bce"), [1.0, 2.0, 3.0]) == 0.5


def test_hand_computed_toy_net():
    m = Mlp(
        MlpConfig(input_dim=2, hidden=(2,)),
        [np.array([[1.0, -1.0], [2.0, 0.5]]), np.array([[3.0], [-2.0]])],
        [np.array([0.5, 0.0]), np.array([0.25])],
    )
    x = np.array([1.0, -1.0])
    # hidden pre-activation: [1 - 2 + 0.5, -1 - 0.5] = [-0.5, -1.5] -> relu [0, 0]
    assert forward(m, x) == pytest.approx(0.25)
    x = np.array([1.0, 1.0])
    # hidden: [3.5, -0.5] -> [3.5, 0]; output 3 * 3.5 + 0.25
    assert forward(m, x) == pytest.approx(10.75)


def test_positive_homogeneity():
    m = init(MlpConfig(input_dim=2, loss="bce", seed=1))
    for w in m.weights:
        w[...] = 0.2 * np.abs(w)
    x = np.array([0.03, 0.08])
    z1 = np.log(forward(m, x) / (1 - forward(m, x)))
    z3 = np.log(forward(m, 3 * x) / (1 - forward(m, 3 * x)))
    assert z3 == pytest.approx(3 * z1, rel=1e-9)


def test_predict_batch_matches_loop():
    rng = np.random.default_rng(0)
    m = init(MlpConfig(input_dim=4, seed=5))
    X = rng.normal(size=(17, 4))
    loop = np.array([forward(m, row) for row in X])
    np.testing.assert_allclose(predict(m, X), loop, rtol=0, atol=1e-12)
    assert predict(m, np.empty((0, 4))).size == 0
    assert predict(m, X[:1]).tolist() == [forward(m, X[0])]


def test_dimension_mismatch():
    m = init(MlpConfig(input_dim=4))
    with pytest.raises(ValueError):
        predict(m, np.zeros((2, 3)))
    with pytest.raises(ValueError):
        forward(m, np.zeros(5))


def test_zero_learning_rate_keeps_parameters():
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(40, 4)), rng.normal(size=40)
    m = init(MlpConfig(input_dim=4, learning_rate=0.0, epochs=3))
    trained, hist = train(m, X, y)
    for a, b in zip(m.params, trained.params):
        np.testing.assert_array_equal(a, b)
    assert hist[0] == pytest.approx(hist[-1], rel=1e-12)


def test_learns_identity():
    rng = np.random.default_rng(2)
    x = rng.uniform(-1, 1, (200, 1))
    m = init(MlpConfig(input_dim=1, epochs=200, seed=0))
    trained, hist = train(m, x, x[:, 0])
    assert np.mean(np.abs(predict(trained, x) - x[:, 0])) < 0.1
    assert hist[-1] < hist[0]


def test_training_is_deterministic():
    rng = np.random.default_rng(3)
    X, y = rng.normal(size=(64, 4)), rng.integers(0, 2, 64)
    cfg = MlpConfig(input_dim=4, loss="bce", epochs=5, seed=8)
    a, ha = train(init(cfg), X, y)
    b, hb = train(init(cfg), X, y)
    assert ha == hb
    for pa, pb in zip(a.params, b.params):
        np.testing.assert_array_equal(pa, pb)


def test_non_finite_loss_aborts():
    m = init(MlpConfig(input_dim=1, epochs=1))
    with pytest.raises(TrainingError), np.errstate(over="ignore", invalid="ignore"):
        train(m, np.array([[1e308], [1e308]]), np.array([0.0, 1.0]))


def test_json_round_trip():
    m = init(MlpConfig(input_dim=3, loss="bce", seed=4))
    back = Mlp.from_json(m.to_json())
    assert back.config == m.config
    for a, b in zip(m.params, back.params):
        np.testing.assert_array_equal(a, b)


def test_standardizer():
    X = np.array([[1.0, 5.0], [3.0, 5.0]])
    s = Standardizer.fit(X)
    np.testing.assert_allclose(s.transform(X), [[-1, 0], [1, 0]])
