"""drheal: self-healing for deep RL agents on drifted environments.

Trains DQN/PPO agents on parameterized classic-control tasks, detects
when an environment drift breaks a trained agent, erases the agent's
low-activation ("minor behavior") neurons by re-initializing them with
under-scaled weights, and fine-tunes on the drifted environment: the
under-scaled rows relearn slowly while untouched neurons adapt fast.
A plain continual-learning baseline and an experiment harness with
metrics and statistical tests support side-by-side comparison.
"""

from . import _kernels
from ._version import __version__
from .agents import (
    Agent,
    DqnHyperparams,
    PpoHyperparams,
    ReplayBuffer,
    TrainOutcome,
    act,
    load_agent,
    load_replay,
    save_agent,
    save_replay,
    train_dqn,
    train_ppo,
)
from .envs import (
    DriftSpec,
    EnvParams,
    EnvSpec,
    evaluate,
    is_solved,
    load_drifts,
    make_env,
    sample_drifts,
    save_drifts,
)
from .harness import (
    ExperimentPlan,
    adaptability_ratio,
    decrease_ratio,
    increase_ratio,
    quadrant_classify,
    run_experiment,
    vargha_delaney_a12,
    wilcoxon_rank_sum,
)
from .healing import (
    HealingConfig,
    HealingReport,
    detect_failure,
    dual_speed_cl,
    forget_minor_behavior,
    heal_drdrl,
    heal_vanilla_cl,
)
from .nn import (
    InitializerSpec,
    LayerShape,
    MlpNetwork,
    OptimizerState,
    apply_update,
    backward,
    deserialize_network,
    forward,
    init_network,
    network_fingerprint,
    serialize_network,
    set_layer_weights,
)
from .tracing import (
    ActivationTrace,
    HypoactiveMask,
    ObservationSet,
    collect_observations,
    compute_activation_trace,
    detect_minor_regions,
    load_trace,
    save_trace,
    trace_agent_networks,
)

__all__ = [
    "ActivationTrace",
    "Agent",
    "DqnHyperparams",
    "DriftSpec",
    "EnvParams",
    "EnvSpec",
    "ExperimentPlan",
    "HealingConfig",
    "HealingReport",
    "HypoactiveMask",
    "InitializerSpec",
    "LayerShape",
    "MlpNetwork",
    "ObservationSet",
    "OptimizerState",
    "PpoHyperparams",
    "ReplayBuffer",
    "TrainOutcome",
    "__version__",
    "act",
    "adaptability_ratio",
    "apply_update",
    "backward",
    "collect_observations",
    "compute_activation_trace",
    "decrease_ratio",
    "deserialize_network",
    "detect_failure",
    "detect_minor_regions",
    "dual_speed_cl",
    "evaluate",
    "forget_minor_behavior",
    "forward",
    "heal_drdrl",
    "heal_vanilla_cl",
    "increase_ratio",
    "init_network",
    "is_solved",
    "load_agent",
    "load_drifts",
    "load_replay",
    "load_trace",
    "make_env",
    "network_fingerprint",
    "quadrant_classify",
    "run_experiment",
    "sample_drifts",
    "save_agent",
    "save_drifts",
    "save_replay",
    "save_trace",
    "serialize_network",
    "set_layer_weights",
    "train_dqn",
    "train_ppo",
    "vargha_delaney_a12",
    "wilcoxon_rank_sum",
]
