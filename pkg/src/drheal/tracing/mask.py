"""Hypoactive-neuron selection from an activation trace.

Per hidden layer the count of neurons to forget is
``round_half_up(forget_rate/100 * width)``; the selected indices are the
lowest-scoring neurons, ties broken toward the lowest index. The output
layer is never selectable (traces only cover hidden layers).
"""

import math
from dataclasses import dataclass

import numpy as np

from .trace import ActivationTrace


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class HypoactiveMask:
    layer_indices: list  # sorted int arrays, one per hidden layer
    network_fingerprint: str
    forget_rate: float

    def __post_init__(self):
        self.layer_indices = [np.asarray(idx, dtype=np.int64)
                              for idx in self.layer_indices]

    def total_selected(self):
        return int(sum(len(idx) for idx in self.layer_indices))

    def is_empty(self):
        return self.total_selected() == 0


def detect_minor_regions(trace: ActivationTrace,
                         forget_rate: float) -> HypoactiveMask:
    """Select the lowest-activation neurons of every hidden layer."""
    if not (0.0 <= forget_rate <= 100.0):
        raise ValueError("forget_rate must be a percentage in [0, 100]")
    layer_indices = []
    for scores in trace.layer_scores:
        width = len(scores)
        count = round_half_up(forget_rate / 100.0 * width)
        # Stable sort keeps equal scores in index order (lowest index wins).
        order = np.argsort(scores, kind="stable")
        layer_indices.append(np.sort(order[:count]))
    return HypoactiveMask(layer_indices, trace.network_fingerprint,
                          forget_rate)
