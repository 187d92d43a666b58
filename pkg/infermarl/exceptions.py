from typing import Optional


class InfermarlError(Exception):
    """Base class for every error raised by infermarl"""


class ContractViolation(InfermarlError, ValueError):
    """A precondition of an operation does not hold (shapes, scenario, batch size)"""


class ConfigError(InfermarlError, ValueError):
    """
    Invalid experiment configuration.

    Args:
        key: Name of the offending configuration key
        message: Human readable reason
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class CheckpointError(InfermarlError):
    """Checkpoint bytes or JSON cannot be decoded"""


class TrialFailure(InfermarlError):
    """A single trial raised; the experiment keeps going over the remaining trials"""

    def __init__(self, trial_index: int, cause: Optional[BaseException] = None):
        self.trial_index = trial_index
        self.cause = cause
        super().__init__(f"trial {trial_index} failed: {cause!r}")
