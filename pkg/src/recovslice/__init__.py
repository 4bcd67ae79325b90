"""Partial-trace dynamic data-dependency slicing.

The package answers one-step slicing queries — *which step last defined
the value this access path denotes at this step?* — over execution traces
that record only part of a program, recovering the missing state with a
pluggable execution estimator (an exact replay-backed one, or a language
model behind a completion cache).

Typical use::

    from recovslice import (MiniProgram, run_full, make_partial,
                            OracleEstimator, slice_dependency)

    full = run_full(MiniProgram(files={"main.mini": source}), seed=0)
    partial = make_partial(full, ["main.mini"])
    result = slice_dependency(partial, step_id, "obj.field",
                              OracleEstimator(full))
    print(result.def_step, result.case_kind)
"""

from .access_path import (PathSegment, ReferencePath, parse_path,
                          resolve_in_graph)
from .errors import (BackendUnavailable, EstimatorError, PathSyntaxError,
                     RecoveryFailed, RecovsliceError, UnknownStep,
                     UnresolvablePath)
from .estimator import LlmEstimator, OracleEstimator
from .estimator.base import (AliasVerdict, ExecutionEstimator, PromptExample,
                             RecoveryRequest)
from .evalkit import (LEVELS, GeneratedCase, RecoveryScore, ScoreReport,
                      evaluate_dependency, evaluate_recovery, generate_case,
                      iter_corpus, score_recovery, write_corpus)
from .micro_tracer import (GroundTruthAnswer, MiniProgram, SliceQuery,
                           make_partial, oracle_dependency, run_full)
from .object_graph import ObjectGraph, ObjectNode
from .slicer import (CASE_CALL_SITE, CASE_DIRECT, CASE_NONE, SliceResult,
                     recovery_request_for, slice_dependency)
from .trace_model import (MemoryLocation, Step, Trace, VariableInstance,
                          load_trace)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # slicing
    "slice_dependency", "SliceResult", "recovery_request_for",
    "CASE_DIRECT", "CASE_CALL_SITE", "CASE_NONE",
    # traces
    "Trace", "Step", "VariableInstance", "MemoryLocation", "load_trace",
    # access paths
    "ReferencePath", "PathSegment", "parse_path", "resolve_in_graph",
    # estimators
    "ExecutionEstimator", "OracleEstimator", "LlmEstimator",
    "RecoveryRequest", "AliasVerdict", "PromptExample", "ObjectGraph",
    "ObjectNode",
    # recording and ground truth
    "MiniProgram", "run_full", "make_partial", "SliceQuery",
    "oracle_dependency", "GroundTruthAnswer",
    # benchmarking
    "LEVELS", "GeneratedCase", "generate_case", "write_corpus",
    "iter_corpus", "evaluate_dependency", "evaluate_recovery",
    "score_recovery", "ScoreReport", "RecoveryScore",
    # errors
    "RecovsliceError", "EstimatorError", "RecoveryFailed",
    "BackendUnavailable", "PathSyntaxError", "UnknownStep",
    "UnresolvablePath",
]
