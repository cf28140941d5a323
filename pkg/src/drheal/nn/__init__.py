"""Dense-network engine: forward with trace capture, exact backprop,
initializers, optimizers, and bit-exact checkpoints."""

from .checkpoint import deserialize_network, network_fingerprint, serialize_network
from .network import (
    ACTIVATION_IDS,
    ForwardTrace,
    GradientSet,
    InitializerSpec,
    LayerShape,
    MlpNetwork,
    backward,
    forward,
    init_network,
    initializer_bound,
    mlp_layers,
    sample_weight_block,
    set_layer_weights,
)
from .optim import OptimizerState, apply_update

__all__ = [
    "ACTIVATION_IDS",
    "ForwardTrace",
    "GradientSet",
    "InitializerSpec",
    "LayerShape",
    "MlpNetwork",
    "OptimizerState",
    "apply_update",
    "backward",
    "deserialize_network",
    "forward",
    "init_network",
    "initializer_bound",
    "mlp_layers",
    "network_fingerprint",
    "sample_weight_block",
    "serialize_network",
    "set_layer_weights",
]
