"""Smart-home fall monitoring: CNN classifier, drone link, and alert pipeline."""

from .errors import (
    ConfigurationError,
    FallwatchError,
    FormatError,
    IngestionError,
    InputError,
    ProtocolError,
    ShapeError,
    TelemetryParseError,
    TrainingDivergedError,
    TransportError,
)
from .model import (
    FALL,
    NOT_FALL,
    EpochStats,
    FallNet,
    TrainConfig,
    build_fallnet,
    predict_label,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "FallwatchError",
    "FormatError",
    "IngestionError",
    "InputError",
    "ProtocolError",
    "ShapeError",
    "TelemetryParseError",
    "TrainingDivergedError",
    "TransportError",
    "EpochStats",
    "FallNet",
    "TrainConfig",
    "FALL",
    "NOT_FALL",
    "build_fallnet",
    "predict_label",
    "train",
]
