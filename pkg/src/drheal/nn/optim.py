"""First-order optimizers: plain SGD and bias-corrected Adam."""

import numpy as np

from ..errors import TrainingAborted


class OptimizerState:
    """Holds the update rule and (for Adam) per-parameter moments.

    Moments are allocated on the first update so one state can be created
    before the network shapes are known.
    """

    def __init__(self, scheme, learning_rate, beta1=0.9, beta2=0.999,
                 eps=1e-8):
        if scheme not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer scheme {scheme!r}")
        if learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")
        self.scheme = scheme
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.timestep = 0
        self.m_w = None
        self.v_w = None
        self.m_b = None
        self.v_b = None

    @classmethod
    def sgd(cls, learning_rate):
        return cls("sgd", learning_rate)

    @classmethod
    def adam(cls, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls("adam", learning_rate, beta1, beta2, eps)

    def _ensure_moments(self, net):
        if self.m_w is None:
            self.m_w = [np.zeros_like(w) for w in net.weights]
            self.v_w = [np.zeros_like(w) for w in net.weights]
            self.m_b = [np.zeros_like(b) for b in net.biases]
            self.v_b = [np.zeros_like(b) for b in net.biases]


def apply_update(net, grads, opt_state):
    """One optimizer step. Mutates `net` and `opt_state` in place and
    returns them (the hot path avoids re-allocating parameters)."""
    if len(grads.d_weights) != net.n_layers:
        raise ValueError("gradient layer count does not match the network")
    for layer, gw, gb in zip(net.layers, grads.d_weights, grads.d_biases):
        if gw.shape != (layer.out_dim, layer.in_dim) or gb.shape != (layer.out_dim,):
            raise ValueError("gradient shapes do not match the network")
    if not grads.all_finite():
        raise TrainingAborted("non-finite gradients")

    if opt_state.scheme == "sgd":
        lr = opt_state.learning_rate
        for l in range(net.n_layers):
            net.weights[l] -= lr * grads.d_weights[l]
            net.biases[l] -= lr * grads.d_biases[l]
        return net, opt_state

    # adam
    opt_state._ensure_moments(net)
    opt_state.timestep += 1
    t = opt_state.timestep
    b1, b2, eps, lr = (opt_state.beta1, opt_state.beta2, opt_state.eps,
                       opt_state.learning_rate)
    bias1 = 1.0 - b1 ** t
    bias2 = 1.0 - b2 ** t
    for l in range(net.n_layers):
        for params, g, m, v in (
            (net.weights[l], grads.d_weights[l], opt_state.m_w[l], opt_state.v_w[l]),
            (net.biases[l], grads.d_biases[l], opt_state.m_b[l], opt_state.v_b[l]),
        ):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            params -= lr * (m / bias1) / (np.sqrt(v / bias2) + eps)
    return net, opt_state
