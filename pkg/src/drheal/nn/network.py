"""Minimal dense network engine: forward with activation capture and
exact reverse-mode gradients.

Everything is float64. Forward and backward run through the kernel
backend; this module owns shapes, validation, and initialization.
"""

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels

ACTIVATION_IDS = {"linear": _kernels.ACT_LINEAR, "relu": _kernels.ACT_RELU,
                  "tanh": _kernels.ACT_TANH, "softmax": _kernels.ACT_SOFTMAX}
INITIALIZER_SCHEMES = ("glorot_uniform", "he_uniform")


@dataclass(frozen=True)
class LayerShape:
    in_dim: int
    out_dim: int
    activation: str

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError("layer dims must be >= 1")
        if self.activation not in ACTIVATION_IDS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass(frozen=True)
class InitializerSpec:
    scheme: str
    seed: int

    def __post_init__(self):
        if self.scheme not in INITIALIZER_SCHEMES:
            raise ValueError(f"unknown initializer scheme {self.scheme!r}")


def initializer_bound(scheme, in_dim, out_dim):
    """Half-width of the uniform sampling interval for one layer."""
    if scheme == "glorot_uniform":
        return math.sqrt(6.0 / (in_dim + out_dim))
    return math.sqrt(6.0 / in_dim)  # he_uniform


def sample_weight_block(scheme, rng, rows, in_dim, out_dim):
    """Fresh initializer draw for `rows` incoming rows of a layer."""
    bound = initializer_bound(scheme, in_dim, out_dim)
    return rng.uniform(-bound, bound, size=(rows, in_dim))


class MlpNetwork:
    """Layered dense network: weights W[l] (out, in), biases b[l] (out,)."""

    def __init__(self, layers, weights, biases, initializer):
        layers = list(layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        for first, second in zip(layers, layers[1:]):
            if first.out_dim != second.in_dim:
                raise ValueError(
                    f"layer dims do not chain: {first.out_dim} -> {second.in_dim}")
        for i, layer in enumerate(layers):
            if layer.activation == "softmax" and i != len(layers) - 1:
                raise ValueError("softmax is only valid on the output layer")
        if len(weights) != len(layers) or len(biases) != len(layers):
            raise ValueError("parameter count does not match layer count")
        for layer, w, b in zip(layers, weights, biases):
            if w.shape != (layer.out_dim, layer.in_dim):
                raise ValueError(f"weight shape {w.shape} does not match {layer}")
            if b.shape != (layer.out_dim,):
                raise ValueError(f"bias shape {b.shape} does not match {layer}")
        self.layers = layers
        self.weights = [np.ascontiguousarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.ascontiguousarray(b, dtype=np.float64) for b in biases]
        self.initializer = initializer
        self.validate_finite()

    @property
    def in_dim(self):
        return self.layers[0].in_dim

    @property
    def out_dim(self):
        return self.layers[-1].out_dim

    @property
    def n_layers(self):
        return len(self.layers)

    def hidden_layer_indices(self):
        return list(range(len(self.layers) - 1))

    def validate_finite(self):
        for w, b in zip(self.weights, self.biases):
            if not np.all(np.isfinite(w)) or not np.all(np.isfinite(b)):
                raise ValueError("network parameters contain non-finite values")

    def copy(self):
        return MlpNetwork(self.layers,
                          [w.copy() for w in self.weights],
                          [b.copy() for b in self.biases],
                          self.initializer)

    def equal_params(self, other):
        return (self.layers == other.layers
                and all(np.array_equal(a, b)
                        for a, b in zip(self.weights, other.weights))
                and all(np.array_equal(a, b)
                        for a, b in zip(self.biases, other.biases)))


def init_network(layers, initializer: InitializerSpec) -> MlpNetwork:
    """Sample weights per the scheme (biases zero), deterministic in seed."""
    rng = np.random.Generator(np.random.PCG64(initializer.seed))
    weights = []
    biases = []
    for layer in layers:
        weights.append(sample_weight_block(
            initializer.scheme, rng, layer.out_dim, layer.in_dim, layer.out_dim))
        biases.append(np.zeros(layer.out_dim))
    return MlpNetwork(layers, weights, biases, initializer)


def mlp_layers(in_dim, hidden, out_activation, out_dim,
               hidden_activation="relu"):
    """Convenience builder: e.g. mlp_layers(4, [64, 64], 'linear', 2)."""
    dims = [in_dim] + list(hidden)
    layers = [LayerShape(dims[i], dims[i + 1], hidden_activation)
              for i in range(len(dims) - 1)]
    layers.append(LayerShape(dims[-1], out_dim, out_activation))
    return layers


class ForwardTrace:
    """Per-layer pre-activations and activations for one forward pass.

    Arrays are batch-major (n, dim); single-vector inputs are stored as a
    batch of one and squeezed on output access.
    """

    def __init__(self, x, zs, activations, single):
        self.x = x
        self.zs = zs
        self.activations = activations
        self._single = single

    @property
    def output(self):
        out = self.activations[-1]
        return out[0] if self._single else out

    def activation(self, layer_index):
        a = self.activations[layer_index]
        return a[0] if self._single else a

    def pre_activation(self, layer_index):
        z = self.zs[layer_index]
        return z[0] if self._single else z


class GradientSet:
    """dL/dW and dL/db per layer, summed over the batch."""

    def __init__(self, d_weights, d_biases):
        self.d_weights = d_weights
        self.d_biases = d_biases

    def all_finite(self):
        return (all(np.all(np.isfinite(g)) for g in self.d_weights)
                and all(np.all(np.isfinite(g)) for g in self.d_biases))

    def scaled(self, factor):
        return GradientSet([g * factor for g in self.d_weights],
                           [g * factor for g in self.d_biases])


def _as_batch(x, dim, what):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != dim:
        raise ValueError(f"{what} must have {dim} columns, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} contains non-finite values")
    return np.ascontiguousarray(x), single


def forward(net: MlpNetwork, x) -> ForwardTrace:
    """Pure forward pass capturing every layer's z and a."""
    x, single = _as_batch(x, net.in_dim, "input")
    zs = []
    activations = []
    current = x
    for layer, w, b in zip(net.layers, net.weights, net.biases):
        z, a = _kernels.dense_forward(current, w, b,
                                      ACTIVATION_IDS[layer.activation])
        zs.append(z)
        activations.append(a)
        current = a
    return ForwardTrace(x, zs, activations, single)


def backward(net: MlpNetwork, trace: ForwardTrace, loss_grad_at_output) -> GradientSet:
    """Exact gradients of the loss w.r.t. every weight and bias.

    `loss_grad_at_output` is dL/da at the output layer, shaped like the
    trace output (vector or batch). Gradients are summed over the batch.
    """
    da = np.asarray(loss_grad_at_output, dtype=np.float64)
    if da.ndim == 1:
        da = da[None, :]
    out = trace.activations[-1]
    if da.shape != out.shape:
        raise ValueError(
            f"output gradient shape {da.shape} does not match output {out.shape}")
    da = np.ascontiguousarray(da)

    d_weights = [None] * net.n_layers
    d_biases = [None] * net.n_layers
    for l in range(net.n_layers - 1, -1, -1):
        act_id = ACTIVATION_IDS[net.layers[l].activation]
        dz = _kernels.act_backward(act_id, trace.zs[l], trace.activations[l], da)
        layer_input = trace.x if l == 0 else trace.activations[l - 1]
        dw, db, dx = _kernels.dense_backward(dz, layer_input, net.weights[l])
        d_weights[l] = dw
        d_biases[l] = db
        da = dx
    return GradientSet(d_weights, d_biases)


def set_layer_weights(net: MlpNetwork, layer_index, row_indices,
                      new_rows, new_biases) -> MlpNetwork:
    """Copy of `net` with the named incoming rows and biases replaced.

    Rows not named are bit-identical to the input network.
    """
    if not (0 <= layer_index < net.n_layers):
        raise IndexError(f"layer index {layer_index} out of range")
    layer = net.layers[layer_index]
    row_indices = [int(i) for i in row_indices]
    for i in row_indices:
        if not (0 <= i < layer.out_dim):
            raise IndexError(f"row index {i} out of range for {layer}")
    new_rows = np.asarray(new_rows, dtype=np.float64)
    new_biases = np.asarray(new_biases, dtype=np.float64)
    if new_rows.shape != (len(row_indices), layer.in_dim):
        raise ValueError(
            f"new rows must have shape ({len(row_indices)}, {layer.in_dim})")
    if new_biases.shape != (len(row_indices),):
        raise ValueError(f"new biases must have shape ({len(row_indices)},)")
    if len(row_indices) and (not np.all(np.isfinite(new_rows))
                             or not np.all(np.isfinite(new_biases))):
        raise ValueError("replacement values must be finite")

    result = net.copy()
    if row_indices:
        result.weights[layer_index][row_indices, :] = new_rows
        result.biases[layer_index][row_indices] = new_biases
    return result
