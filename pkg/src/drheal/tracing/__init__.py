"""Activation-trace collection and hypoactive-neuron detection."""

from .trace import (
    ActivationTrace,
    ObservationSet,
    collect_observations,
    compute_activation_trace,
    load_agent_traces,
    load_trace,
    save_agent_traces,
    save_trace,
    trace_agent_networks,
    trace_to_csv,
)
from .mask import HypoactiveMask, detect_minor_regions, round_half_up

__all__ = [
    "ActivationTrace",
    "HypoactiveMask",
    "ObservationSet",
    "collect_observations",
    "compute_activation_trace",
    "detect_minor_regions",
    "load_agent_traces",
    "load_trace",
    "round_half_up",
    "save_agent_traces",
    "save_trace",
    "trace_agent_networks",
    "trace_to_csv",
]
