"""Python front end for the RAMP exploration library."""

from ._ramp import (
    Config,
    ConfigError,
    Maze,
    Trainer,
    coverage,
    epoch_csv_header,
    histogram_entropy,
    oracle,
    run_training,
    verify,
)

__all__ = [
    "Config",
    "ConfigError",
    "Maze",
    "Trainer",
    "coverage",
    "epoch_csv_header",
    "histogram_entropy",
    "oracle",
    "run_training",
    "verify",
]
