"""Weakly supervised text-to-SQL: question tokenization, dataset generation,
policy-gradient training, evaluation, and direct query execution."""

from ._sqlgen import (
    Environment,
    SqlgenError,
    evaluate_checkpoint,
    generate_dataset,
    predict,
    train,
)

__all__ = [
    "Environment",
    "SqlgenError",
    "evaluate_checkpoint",
    "generate_dataset",
    "predict",
    "train",
]

__version__ = "0.1.0"
