# marl_avoidance/errors.py
from typing import Optional


class MarlError(ValueError):
    """Base class for every error raised by marl_avoidance."""


class ConfigurationError(MarlError):
    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class InputError(MarlError):
    pass


class ShapeMismatchError(MarlError):
    pass


class NonFiniteGradientError(MarlError):
    pass


class ReplayNotReadyError(MarlError):
    """Sampling was requested before the buffer holds a full batch."""


class UnsupportedScenarioError(MarlError):
    pass


class TrainingDivergedError(MarlError):
    def __init__(self, message: str, snapshot_path: Optional[str] = None):
        self.snapshot_path = snapshot_path
        super().__init__(message)


class CheckpointError(MarlError):
    pass


class CheckpointIncompatibleError(CheckpointError):
    pass


class MetricsFormatError(MarlError):
    def __init__(self, message: str, line_number: int):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")
