"""Execution estimators: pluggable recovery of unrecorded execution state."""

from .base import (ALL_FIELDS_TOKEN, AliasVerdict, ExecutionEstimator,
                   PromptExample, RecoveryRequest)
from .oracle import OracleEstimator
from .llm import LlmEstimator

__all__ = [
    "ALL_FIELDS_TOKEN",
    "AliasVerdict",
    "ExecutionEstimator",
    "PromptExample",
    "RecoveryRequest",
    "OracleEstimator",
    "LlmEstimator",
]
