import math

import numpy as np
import pytest

from drheal.errors import CheckpointError, TrainingAborted
from drheal.nn import (
    GradientSet,
    InitializerSpec,
    LayerShape,
    MlpNetwork,
    OptimizerState,
    apply_update,
    backward,
    deserialize_network,
    forward,
    init_network,
    mlp_layers,
    network_fingerprint,
    serialize_network,
    set_layer_weights,
)


def random_net(rng, max_layers=3, max_width=16, out_activation=None):
    n_layers = int(rng.integers(1, max_layers + 1))
    dims = [int(rng.integers(1, max_width + 1)) for _ in range(n_layers + 1)]
    layers = []
    for i in range(n_layers):
        if i == n_layers - 1:
            act = out_activation or rng.choice(["linear", "softmax", "tanh"])
        else:
            act = rng.choice(["relu", "tanh", "linear"])
        layers.append(LayerShape(dims[i], dims[i + 1], str(act)))
    return init_network(layers, InitializerSpec("glorot_uniform",
                                                int(rng.integers(2**31))))


def manual_net(weights, biases, activations, scheme="glorot_uniform", seed=0):
    layers = [LayerShape(w.shape[1], w.shape[0], act)
              for w, act in zip(weights, activations)]
    return MlpNetwork(layers, weights, biases, InitializerSpec(scheme, seed))


class TestInit:
    def test_glorot_bound_64x64(self):
        net = init_network([LayerShape(64, 64, "relu")],
                           InitializerSpec("glorot_uniform", 0))
        bound = math.sqrt(6.0 / 128.0)
        assert np.all(np.abs(net.weights[0]) <= bound)
        assert np.all(net.biases[0] == 0.0)

    def test_he_bound(self):
        net = init_network([LayerShape(32, 8, "relu")],
                           InitializerSpec("he_uniform", 1))
        assert np.all(np.abs(net.weights[0]) <= math.sqrt(6.0 / 32.0))

    def test_same_seed_bit_identical(self):
        layers = mlp_layers(4, [16, 16], "linear", 2)
        a = init_network(layers, InitializerSpec("glorot_uniform", 42))
        b = init_network(layers, InitializerSpec("glorot_uniform", 42))
        assert a.equal_params(b)

    def test_zero_dim_rejected(self):
        with pytest.raises(ValueError):
            LayerShape(0, 4, "relu")

    def test_chaining_validated(self):
        with pytest.raises(ValueError):
            init_network([LayerShape(4, 8, "relu"), LayerShape(7, 2, "linear")],
                         InitializerSpec("glorot_uniform", 0))

    def test_softmax_only_on_output(self):
        with pytest.raises(ValueError):
            init_network([LayerShape(4, 8, "softmax"),
                          LayerShape(8, 2, "linear")],
                         InitializerSpec("glorot_uniform", 0))


class TestForward:
    def test_zero_net_all_zero(self, backend):
        net = manual_net([np.zeros((3, 2)), np.zeros((2, 3))],
                         [np.zeros(3), np.zeros(2)], ["relu", "relu"])
        trace = forward(net, np.array([1.5, -2.0]))
        assert np.all(trace.activation(0) == 0.0)
        assert np.all(trace.output == 0.0)

    def test_identity_linear(self, backend):
        net = manual_net([np.eye(2)], [np.zeros(2)], ["linear"])
        assert np.array_equal(forward(net, np.array([3.0, -1.0])).output,
                              np.array([3.0, -1.0]))

    def test_hand_relu(self, backend):
        net = manual_net([np.array([[2.0]])], [np.array([1.0])], ["relu"])
        trace = forward(net, np.array([3.0]))
        assert trace.pre_activation(0) == 7.0
        assert trace.output == 7.0

    def test_purity(self):
        net = random_net(np.random.default_rng(0))
        x = np.random.default_rng(1).normal(size=net.in_dim)
        a = forward(net, x).output
        b = forward(net, x).output
        assert np.array_equal(a, b)

    def test_nonfinite_input_rejected(self):
        net = manual_net([np.eye(2)], [np.zeros(2)], ["linear"])
        with pytest.raises(ValueError):
            forward(net, np.array([np.inf, 0.0]))

    def test_length_mismatch(self):
        net = manual_net([np.eye(2)], [np.zeros(2)], ["linear"])
        with pytest.raises(ValueError):
            forward(net, np.array([1.0, 2.0, 3.0]))

    def test_softmax_rows_normalized(self, backend):
        net = manual_net([np.array([[400.0, 0.0], [0.0, -400.0]])],
                         [np.zeros(2)], ["softmax"])
        out = forward(net, np.array([2.0, 1.0])).output
        assert np.all(np.isfinite(out))
        assert out.sum() == pytest.approx(1.0, abs=1e-12)


class TestBackward:
    def test_linear_hand_gradient(self, backend):
        net = manual_net([np.array([[5.0]])], [np.array([0.5])], ["linear"])
        trace = forward(net, np.array([3.0]))
        grads = backward(net, trace, np.array([1.0]))  # loss = output
        assert grads.d_weights[0][0, 0] == 3.0
        assert grads.d_biases[0][0] == 1.0

    def test_relu_blocks_gradient(self, backend):
        net = manual_net([np.array([[1.0]])], [np.array([-2.0])], ["relu"])
        trace = forward(net, np.array([1.0]))  # z = -1 < 0
        grads = backward(net, trace, np.array([1.0]))
        assert grads.d_weights[0][0, 0] == 0.0
        assert grads.d_biases[0][0] == 0.0

    @staticmethod
    def _loss_and_grad(net, x, c):
        trace = forward(net, x)
        return float(np.dot(c, trace.output)), trace

    def check_against_finite_differences(self, net, rng, h=1e-6):
        x = rng.normal(size=net.in_dim)
        c = rng.normal(size=net.out_dim)
        _, trace = self._loss_and_grad(net, x, c)
        grads = backward(net, trace, c)
        max_rel = 0.0
        for l in range(net.n_layers):
            for arr, g in ((net.weights[l], grads.d_weights[l]),
                           (net.biases[l], grads.d_biases[l])):
                flat = arr.ravel()
                gflat = g.ravel()
                for i in range(flat.size):
                    original = flat[i]
                    flat[i] = original + h
                    up, _ = self._loss_and_grad(net, x, c)
                    flat[i] = original - h
                    down, _ = self._loss_and_grad(net, x, c)
                    flat[i] = original
                    fd = (up - down) / (2.0 * h)
                    denom = max(abs(fd), abs(gflat[i]), 1e-6)
                    max_rel = max(max_rel, abs(fd - gflat[i]) / denom)
        return max_rel

    def test_finite_difference_spot_check(self):
        rng = np.random.default_rng(99)
        net = init_network(mlp_layers(4, [8], "linear", 3),
                           InitializerSpec("glorot_uniform", 7))
        assert self.check_against_finite_differences(net, rng) < 1e-5

    def test_shape_mismatch(self):
        net = manual_net([np.eye(2)], [np.zeros(2)], ["linear"])
        trace = forward(net, np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            backward(net, trace, np.array([1.0, 2.0, 3.0]))


class TestApplyUpdate:
    def test_sgd_hand_case(self):
        net = manual_net([np.array([[1.0]])], [np.array([0.0])], ["linear"])
        grads = GradientSet([np.array([[2.0]])], [np.array([0.0])])
        apply_update(net, grads, OptimizerState.sgd(0.1))
        assert net.weights[0][0, 0] == pytest.approx(0.8, abs=1e-15)

    def test_zero_gradients_no_change(self):
        net = random_net(np.random.default_rng(5))
        before = net.copy()
        grads = GradientSet([np.zeros_like(w) for w in net.weights],
                            [np.zeros_like(b) for b in net.biases])
        apply_update(net, grads, OptimizerState.adam(1e-3))
        assert net.equal_params(before)

    def test_adam_two_steps_match_hand_recurrence(self):
        # Scalar recurrence evaluated independently.
        lr, b1, b2, eps = 1e-3, 0.9, 0.999, 1e-8
        w = 0.7
        m = v = 0.0
        gradients = [0.3, -1.2]
        for t, g in enumerate(gradients, start=1):
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            w = w - lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)

        net = manual_net([np.array([[0.7]])], [np.array([0.0])], ["linear"])
        state = OptimizerState.adam(lr)
        for g in gradients:
            apply_update(net, GradientSet([np.array([[g]])],
                                          [np.array([0.0])]), state)
        assert net.weights[0][0, 0] == pytest.approx(w, rel=1e-12)

    def test_first_adam_step_closed_form(self):
        # After one step the bias corrections cancel: w' = w - lr*g/(|g|+eps')
        lr = 0.01
        g = 0.5
        net = manual_net([np.array([[1.0]])], [np.array([0.0])], ["linear"])
        state = OptimizerState.adam(lr)
        apply_update(net, GradientSet([np.array([[g]])], [np.array([0.0])]),
                     state)
        expected = 1.0 - lr * g / (abs(g) + state.eps)
        assert net.weights[0][0, 0] == pytest.approx(expected, rel=1e-9)

    def test_nonfinite_gradients_abort(self):
        net = manual_net([np.array([[1.0]])], [np.array([0.0])], ["linear"])
        grads = GradientSet([np.array([[np.nan]])], [np.array([0.0])])
        with pytest.raises(TrainingAborted):
            apply_update(net, grads, OptimizerState.sgd(0.1))


class TestSetLayerWeights:
    def test_empty_indices_identity(self):
        net = random_net(np.random.default_rng(2))
        out = set_layer_weights(net, 0, [], np.zeros((0, net.in_dim)),
                                np.zeros(0))
        assert out.equal_params(net)

    def test_row_isolation_bitwise(self):
        net = init_network(mlp_layers(4, [8], "linear", 3),
                           InitializerSpec("glorot_uniform", 3))
        new_row = np.full((1, 8), 0.25)
        out = set_layer_weights(net, 1, [2], new_row, np.array([0.125]))
        diff_rows = [i for i in range(3)
                     if not np.array_equal(out.weights[1][i], net.weights[1][i])]
        assert diff_rows == [2]
        assert np.array_equal(out.weights[1][2], new_row[0])
        assert out.biases[1][2] == 0.125
        assert np.array_equal(out.weights[0], net.weights[0])
        assert np.array_equal(out.biases[0], net.biases[0])

    def test_out_of_range_index(self):
        net = random_net(np.random.default_rng(4))
        width = net.layers[0].out_dim
        with pytest.raises(IndexError):
            set_layer_weights(net, 0, [width], np.zeros((1, net.in_dim)),
                              np.zeros(1))


class TestCheckpoint:
    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            net = random_net(rng)
            restored = deserialize_network(serialize_network(net))
            assert restored.equal_params(net)
            assert restored.initializer == net.initializer
            assert network_fingerprint(restored) == network_fingerprint(net)

    def test_truncated_payload(self):
        data = serialize_network(random_net(np.random.default_rng(7)))
        with pytest.raises(CheckpointError):
            deserialize_network(data[:len(data) - 9])

    def test_corrupt_payload(self):
        data = bytearray(serialize_network(random_net(np.random.default_rng(8))))
        data[-1] ^= 0xFF
        with pytest.raises(CheckpointError):
            deserialize_network(bytes(data))

    def test_future_version_rejected(self):
        data = bytearray(serialize_network(random_net(np.random.default_rng(9))))
        data[4:8] = (99).to_bytes(4, "little")
        with pytest.raises(CheckpointError):
            deserialize_network(bytes(data))

    def test_wrong_magic_rejected(self):
        data = bytearray(serialize_network(random_net(np.random.default_rng(10))))
        data[0:4] = b"XXXX"
        with pytest.raises(CheckpointError):
            deserialize_network(bytes(data))


class TestWeightScaleGradientMonotonicity:
    def test_downstream_gradient_scales_with_incoming_magnitude(self):
        # Linear 3 -> 4 -> 2 net: shrinking one hidden neuron's incoming
        # row shrinks its activation, hence the gradient w.r.t. its
        # outgoing weights. Checked on fixed instances.
        rng = np.random.default_rng(11)
        base = init_network(mlp_layers(3, [4], "linear", 2,
                                       hidden_activation="linear"),
                            InitializerSpec("glorot_uniform", 12))
        x = rng.normal(size=3)
        c = rng.normal(size=2)
        neuron = 1
        norms = []
        for s in (0.001, 0.01, 0.1, 0.5, 1.0):
            net = base.copy()
            net.weights[0][neuron, :] *= s
            net.biases[0][neuron] *= s
            trace = forward(net, x)
            grads = backward(net, trace, c)
            norms.append(np.abs(grads.d_weights[1][:, neuron]).sum())
        assert all(a <= b + 1e-15 for a, b in zip(norms, norms[1:]))

    def test_nan_weights_rejected_on_construction(self):
        with pytest.raises(ValueError):
            manual_net([np.array([[np.nan]])], [np.zeros(1)], ["linear"])
