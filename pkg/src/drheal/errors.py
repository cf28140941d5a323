"""Exception types shared across the package."""


class SchemaError(ValueError):
    """Parameter set or spec violates an environment schema invariant."""


class CheckpointError(ValueError):
    """Corrupt, truncated, or wrong-version serialized payload."""


class BindingError(ValueError):
    """An artifact is bound to a different network/spec fingerprint."""


class TrainingAborted(RuntimeError):
    """Training hit a non-finite loss or gradient."""
