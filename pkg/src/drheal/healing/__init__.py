"""Self-healing pipelines: intentional forgetting plus dual-speed
continual fine-tuning, and the vanilla continual-learning baseline."""

from .forgetting import forget_minor_behavior
from .heal import (
    METHOD_DRDRL,
    METHOD_VANILLA_CL,
    HealingConfig,
    HealingReport,
    detect_failure,
    dual_speed_cl,
    heal_drdrl,
    heal_vanilla_cl,
)

__all__ = [
    "METHOD_DRDRL",
    "METHOD_VANILLA_CL",
    "HealingConfig",
    "HealingReport",
    "detect_failure",
    "dual_speed_cl",
    "forget_minor_behavior",
    "heal_drdrl",
    "heal_vanilla_cl",
]
