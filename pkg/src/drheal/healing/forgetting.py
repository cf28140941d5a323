"""Intentional forgetting: re-initialize hypoactive neurons with
under-scaled weights.

For every masked neuron the incoming weight row is replaced by a fresh
draw from the network's original initializer multiplied by the scale
rate, and its bias returns to the initializer's zero. Outgoing weights
are retained by default so downstream computation of the kept neurons
stays intact; `reset_outgoing=True` additionally re-initializes the
masked neurons' outgoing columns the same way.
"""

import numpy as np

from ..errors import BindingError
from ..nn import (
    InitializerSpec,
    MlpNetwork,
    initializer_bound,
    network_fingerprint,
    sample_weight_block,
    set_layer_weights,
)
from ..tracing import HypoactiveMask


def forget_minor_behavior(net: MlpNetwork, mask: HypoactiveMask,
                          scale_rate: float, initializer: InitializerSpec,
                          reset_outgoing: bool = False) -> MlpNetwork:
    """New network with the masked neurons' weights forgotten.

    Unmasked rows and biases (and, unless `reset_outgoing`, all outgoing
    weights) are bit-identical to the input network.
    """
    if not (0.0 < scale_rate <= 1.0):
        raise ValueError("scale_rate must be in (0, 1]")
    fingerprint = network_fingerprint(net)
    if mask.network_fingerprint != fingerprint:
        raise BindingError(
            "mask is bound to a different network checkpoint "
            f"({mask.network_fingerprint[:12]}... != {fingerprint[:12]}...)")
    hidden = net.hidden_layer_indices()
    if len(mask.layer_indices) != len(hidden):
        raise ValueError(
            f"mask covers {len(mask.layer_indices)} layers but the network "
            f"has {len(hidden)} hidden layers")

    rng = np.random.Generator(np.random.PCG64(initializer.seed))
    result = net
    for layer_index, rows in zip(hidden, mask.layer_indices):
        if len(rows) == 0:
            continue
        layer = net.layers[layer_index]
        block = scale_rate * sample_weight_block(
            initializer.scheme, rng, len(rows), layer.in_dim, layer.out_dim)
        result = set_layer_weights(result, layer_index, rows, block,
                                   np.zeros(len(rows)))
        if reset_outgoing:
            next_layer = net.layers[layer_index + 1]
            bound = initializer_bound(initializer.scheme, next_layer.in_dim,
                                      next_layer.out_dim)
            out_block = scale_rate * rng.uniform(
                -bound, bound, size=(next_layer.out_dim, len(rows)))
            out = result.copy()
            out.weights[layer_index + 1][:, rows] = out_block
            result = out
    if result is net:
        result = net.copy()
    return result
