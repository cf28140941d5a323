"""Network checkpoints: versioned, self-describing, bit-exact.

Container layout is documented in :mod:`drheal._container`; the header
meta holds layer shapes, activation names, and the initializer spec, and
the arrays are ``w0, b0, w1, b1, ...``.
"""

import hashlib

from .. import _container
from .network import InitializerSpec, LayerShape, MlpNetwork

MAGIC = b"DHNN"
VERSION = 1


def serialize_network(net: MlpNetwork) -> bytes:
    meta = {
        "layers": [{"in_dim": l.in_dim, "out_dim": l.out_dim,
                    "activation": l.activation} for l in net.layers],
        "initializer": {"scheme": net.initializer.scheme,
                        "seed": net.initializer.seed},
    }
    arrays = []
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        arrays.append((f"w{i}", w))
        arrays.append((f"b{i}", b))
    return _container.pack(MAGIC, VERSION, meta, arrays)


def deserialize_network(data: bytes) -> MlpNetwork:
    _, meta, arrays = _container.unpack(data, MAGIC, VERSION)
    layers = [LayerShape(int(l["in_dim"]), int(l["out_dim"]), l["activation"])
              for l in meta["layers"]]
    init = InitializerSpec(meta["initializer"]["scheme"],
                           int(meta["initializer"]["seed"]))
    weights = [arrays[f"w{i}"] for i in range(len(layers))]
    biases = [arrays[f"b{i}"] for i in range(len(layers))]
    return MlpNetwork(layers, weights, biases, init)


def network_fingerprint(net: MlpNetwork) -> str:
    """Stable hex digest of the full checkpoint (metadata + parameters)."""
    return hashlib.sha256(serialize_network(net)).hexdigest()
