"""Comparison metrics: increase/decrease ratios and adaptability ratio."""


def increase_ratio(drdrl_x: float, cl_x: float) -> float:
    """Percent change of X under drdrl relative to the CL baseline:
    (drdrl_x - cl_x) / cl_x * 100."""
    if cl_x == 0:
        raise ZeroDivisionError("increase ratio undefined for cl_x = 0")
    return (drdrl_x - cl_x) / cl_x * 100.0


def decrease_ratio(cl_x: float, drdrl_x: float) -> float:
    """Percent reduction of X under drdrl relative to the CL baseline:
    (cl_x - drdrl_x) / cl_x * 100. Negative means degradation."""
    if cl_x == 0:
        raise ZeroDivisionError("decrease ratio undefined for cl_x = 0")
    return (cl_x - drdrl_x) / cl_x * 100.0


def adaptability_ratio(adapted_count: int, total_count: int) -> float:
    """Percentage of (agent, drifted environment) pairs adapted."""
    if total_count < 1:
        raise ValueError("total_count must be >= 1")
    if not (0 <= adapted_count <= total_count):
        raise ValueError("adapted_count must be in [0, total_count]")
    # multiply first: integer counts then one division, exact for the
    # common whole-percent cases
    return adapted_count * 100.0 / total_count
