"""MiniLang micro-interpreter: full tracing, partial projection, ground truth."""

from .syntax import MiniProgram, parse_program
from .stdlib import BUILTIN_NAMES, CLASS_STRUCTURES, LIB_FILES
from .tracer import (
    GroundTruthAnswer,
    SliceQuery,
    make_partial,
    oracle_dependency,
    run_full,
)
from .examples import MOTIVATING_SOURCE, motivating_case

__all__ = [
    "MiniProgram",
    "parse_program",
    "BUILTIN_NAMES",
    "CLASS_STRUCTURES",
    "LIB_FILES",
    "GroundTruthAnswer",
    "SliceQuery",
    "run_full",
    "make_partial",
    "oracle_dependency",
    "MOTIVATING_SOURCE",
    "motivating_case",
]
