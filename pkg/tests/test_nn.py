import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ackdrl.exceptions import ConfigError, ShapeError
from ackdrl.nn import MLP, AdamState, adam_step, backward, forward, mlp_init, soft_update

from oracles import fd_check, scalar_forward


def random_net(rng, sizes=None, hidden=None, output=None):
    if sizes is None:
        depth = rng.integers(2, 5)
        sizes = [int(rng.integers(1, 9))] + [int(rng.integers(1, 17)) for _ in range(depth - 2)] + [int(rng.integers(1, 5))]
    hidden = hidden or ["relu", "tanh"][rng.integers(2)]
    output = output or ["linear", "tanh"][rng.integers(2)]
    net = mlp_init(sizes, hidden, output, rng)
    for b in net.biases:
        b[...] = rng.normal(0, 0.1, b.shape)
    return net


class TestInit:
    def test_shapes(self):
        net = mlp_init([4, 8, 2], rng=np.random.default_rng(0))
        assert [w.shape for w in net.weights] == [(8, 4), (2, 8)]
        assert [b.shape for b in net.biases] == [(8,), (2,)]
        assert all(np.all(b == 0) for b in net.biases)

    def test_deterministic(self):
        a = mlp_init([4, 8, 2], rng=np.random.default_rng(5))
        b = mlp_init([4, 8, 2], rng=np.random.default_rng(5))
        assert all(np.array_equal(p, q) for p, q in zip(a.parameters(), b.parameters()))

    def test_glorot_bound(self):
        net = mlp_init([4, 8, 2], rng=np.random.default_rng(1))
        assert np.abs(net.weights[0]).max() <= math.sqrt(6 / 12)
        assert np.abs(net.weights[1]).max() <= math.sqrt(6 / 10)

    @pytest.mark.parametrize("sizes", [[], [3]])
    def test_rejects_too_few_layers(self, sizes):
        with pytest.raises(ConfigError):
            mlp_init(sizes)


class TestForward:
    def test_zero_net(self):
        net = mlp_init([3, 5, 2], rng=np.random.default_rng(0))
        for p in net.parameters():
            p[...] = 0
        assert np.all(net.predict(np.ones((4, 3))) == 0)

    def test_identity_layer(self):
        net = MLP((3, 3), "relu", "linear", [np.eye(3)], [np.zeros(3)])
        x = np.random.default_rng(0).normal(size=(5, 3))
        np.testing.assert_array_equal(net.predict(x), x)

    @pytest.mark.parametrize("hidden, output", [("relu", "linear"), ("tanh", "tanh"), ("relu", "tanh")])
    def test_matches_scalar_oracle(self, hidden, output):
        rng = np.random.default_rng(3)
        net = random_net(rng, [5, 7, 3], hidden, output)
        x = rng.normal(size=(6, 5))
        np.testing.assert_allclose(net.predict(x), scalar_forward(net, x), atol=1e-12, rtol=0)

    def test_tanh_output_bounded(self):
        net = random_net(np.random.default_rng(0), [3, 8, 2], "relu", "tanh")
        out = net.predict(np.random.default_rng(1).normal(0, 100, size=(50, 3)))
        assert np.all(np.abs(out) <= 1.0)

    def test_bitwise_deterministic(self):
        net = random_net(np.random.default_rng(0), [4, 16, 16, 2])
        x = np.random.default_rng(1).normal(size=(8, 4))
        assert net.predict(x).tobytes() == net.predict(x).tobytes()

    def test_shape_mismatch(self):
        net = mlp_init([4, 2], rng=np.random.default_rng(0))
        with pytest.raises(ShapeError):
            net.predict(np.zeros((2, 3)))


class TestBackward:
    def test_zero_output_gradient(self):
        rng = np.random.default_rng(0)
        net = random_net(rng, [4, 6, 3])
        x = rng.normal(size=(5, 4))
        grads, gin = backward(net, forward(net, x)[1], np.zeros((5, 3)))
        assert all(np.all(g == 0) for g in grads) and np.all(gin == 0)

    def test_linear_closed_form(self):
        rng = np.random.default_rng(0)
        net = MLP((3, 2), "relu", "linear", [rng.normal(size=(2, 3))], [np.zeros(2)])
        x = rng.normal(size=(4, 3))
        g = rng.normal(size=(4, 2))
        grads, gin = backward(net, forward(net, x)[1], g)
        np.testing.assert_allclose(grads[0], g.T @ x, atol=1e-14)
        np.testing.assert_allclose(grads[1], g.sum(axis=0), atol=1e-14)
        np.testing.assert_allclose(gin, g @ net.weights[0], atol=1e-14)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000))
    def test_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        net = random_net(rng)
        x = rng.normal(size=(int(rng.integers(1, 6)), net.layer_sizes[0]))
        g = rng.normal(size=(x.shape[0], net.layer_sizes[-1]))
        assert fd_check(net, x, g) <= 1e-4

    def test_cache_mismatch(self):
        rng = np.random.default_rng(0)
        a = mlp_init([3, 4, 2], rng=rng)
        b = mlp_init([3, 5, 2], rng=rng)
        with pytest.raises(ShapeError):
            backward(b, forward(a, np.zeros((1, 3)))[1], np.zeros((1, 2)))


class TestAdam:
    def test_zero_gradient_keeps_parameters(self):
        net = random_net(np.random.default_rng(0), [3, 4, 2])
        before = [p.copy() for p in net.parameters()]
        adam = AdamState.for_network(net)
        adam_step(net, [np.zeros_like(p) for p in before], adam)
        assert all(np.array_equal(a, b) for a, b in zip(before, net.parameters()))
        assert adam.step_count == 1

    def test_first_step_is_signed_learning_rate(self):
        rng = np.random.default_rng(0)
        net = random_net(rng, [3, 4, 2])
        before = [p.copy() for p in net.parameters()]
        grads = [np.sign(rng.normal(size=p.shape)) * (0.5 + np.abs(rng.normal(size=p.shape))) for p in before]
        adam = AdamState.for_network(net, alpha=0.01)
        adam_step(net, grads, adam)
        for b, p, g in zip(before, net.parameters(), grads):
            np.testing.assert_allclose(p - b, -0.01 * np.sign(g), rtol=1e-6)

    def test_quadratic_converges(self):
        # minimise 0.5 * ||W x - y||^2 over a single linear layer
        rng = np.random.default_rng(2)
        net = MLP((3, 2), "relu", "linear", [rng.normal(size=(2, 3))], [rng.normal(size=2)])
        x = rng.normal(size=(32, 3))
        target = x @ rng.normal(size=(3, 2)) + rng.normal(size=2)
        adam = AdamState.for_network(net, alpha=0.05)

        def loss():
            return 0.5 * np.mean(np.sum((net.predict(x) - target) ** 2, axis=1))

        losses = [loss()]
        for _ in range(300):
            out, cache = forward(net, x)
            grads, _ = backward(net, cache, (out - target) / len(x))
            adam_step(net, grads, adam)
            losses.append(loss())
        assert losses[100] < losses[0]
        assert losses[-1] < 1e-3 * losses[0]

    def test_shape_mismatch(self):
        net = mlp_init([3, 2], rng=np.random.default_rng(0))
        with pytest.raises(ShapeError):
            adam_step(net, [np.zeros((3, 2)), np.zeros(2)], AdamState.for_network(net))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 1000), st.floats(1e-6, 1e6))
    def test_finite_and_shape_preserving(self, seed, scale):
        rng = np.random.default_rng(seed)
        net = random_net(rng, [3, 5, 2])
        adam = AdamState.for_network(net)
        for _ in range(5):
            adam_step(net, [scale * rng.normal(size=p.shape) for p in net.parameters()], adam)
        assert [p.shape for p in net.parameters()] == [(5, 3), (5,), (2, 5), (2,)]
        assert all(np.all(np.isfinite(p)) for p in net.parameters())


class TestSoftUpdate:
    def pair(self, seed=0):
        rng = np.random.default_rng(seed)
        return random_net(rng, [3, 4, 2], "relu", "linear"), random_net(rng, [3, 4, 2], "relu", "linear")

    def test_tau_one_keeps_target(self):
        target, online = self.pair()
        before = [p.tobytes() for p in target.parameters()]
        soft_update(target, online, 1.0)
        assert [p.tobytes() for p in target.parameters()] == before

    def test_tau_zero_copies_online(self):
        target, online = self.pair()
        soft_update(target, online, 0.0)
        assert all(np.array_equal(a, b) for a, b in zip(target.parameters(), online.parameters()))

    def test_scalar(self):
        target = MLP((1, 1), "relu", "linear", [np.array([[2.0]])], [np.array([2.0])])
        online = MLP((1, 1), "relu", "linear", [np.array([[1.0]])], [np.array([1.0])])
        soft_update(target, online, 0.99)
        assert target.weights[0][0, 0] == 1.99 and target.biases[0][0] == 1.99

    def test_contraction(self):
        target, online = self.pair(4)
        tau = 0.9
        dist = lambda: math.sqrt(sum(np.sum((a - b) ** 2) for a, b in zip(target.parameters(), online.parameters())))
        d = dist()
        for _ in range(20):
            soft_update(target, online, tau)
            d_new = dist()
            assert d_new == pytest.approx(tau * d, abs=1e-12)
            d = d_new

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0.0, 1.0))
    def test_contraction_any_tau(self, seed, tau):
        target, online = self.pair(seed)
        before = [t - o for t, o in zip(target.parameters(), online.parameters())]
        soft_update(target, online, tau)
        for t, o, d in zip(target.parameters(), online.parameters(), before):
            np.testing.assert_allclose(t - o, tau * d, rtol=0, atol=1e-12)

    def test_tau_then_one_equals_tau(self):
        t1, online = self.pair(1)
        t2 = t1.copy()
        soft_update(t1, online, 0.7)
        soft_update(t1, online, 1.0)
        soft_update(t2, online, 0.7)
        assert all(np.array_equal(a, b) for a, b in zip(t1.parameters(), t2.parameters()))

    def test_architecture_mismatch(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ShapeError):
            soft_update(mlp_init([3, 4, 2], rng=rng), mlp_init([3, 5, 2], rng=rng), 0.5)
