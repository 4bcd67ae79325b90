"""Estimator protocol and the request/verdict types it exchanges.

An execution estimator answers three kinds of questions about execution
state that a partial trace did not record:

* `recover_object_graph` — expand a variable's rendered content into a
  structured object graph at a given step;
* `infer_alias` — which expressions at a step alias fields of a known
  object;
* `infer_is_def` — whether a step (including code it calls out of sight)
  writes a given field of a known object.

The backing can be anything: the bundled implementations answer from a fully
recorded reference run (`OracleEstimator`) or from a language model
(`LlmEstimator`).  Estimators may expose a `last_call_info` dict describing
their latest answer (cache keys, example provenance); callers surface it as
diagnostics but never depend on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence, runtime_checkable

from ..llm_backend.prompts import PromptExample
from ..object_graph import ALL_FIELDS_TOKEN, ObjectGraph
from ..trace_model import Step, Trace

__all__ = ["ALL_FIELDS_TOKEN", "PromptExample", "RecoveryRequest",
           "AliasVerdict", "ExecutionEstimator"]


@dataclass(frozen=True)
class RecoveryRequest:
    """Everything needed to recover one variable's object graph at a step."""

    root_name: str
    root_type: str
    root_value: str  # rendered content, as recorded in the trace
    step_code: str
    step_id: int  # id in the queried trace, for reporting
    step_key: tuple[str, int, int]  # (file, line, order): run-stable locator
    focal_path: Optional[str] = None  # rendered path of interest; None = all
    class_structures: tuple[str, ...] = ()
    adaptive_example: Optional[PromptExample] = None

    @property
    def focal_or_all(self) -> str:
        return self.focal_path if self.focal_path is not None else ALL_FIELDS_TOKEN


@dataclass
class AliasVerdict:
    """Aliases found at one step: rendered field path -> aliasing expression."""

    pairs: dict[str, str] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.pairs)


@runtime_checkable
class ExecutionEstimator(Protocol):
    def recover_object_graph(self, request: RecoveryRequest) -> ObjectGraph:
        """Expand `request.root_name` into a graph; raises EstimatorError."""
        ...

    def infer_alias(self, trace: Trace, step: Step, known_root: str,
                    known_graph: ObjectGraph,
                    fields_of_interest: Sequence[str],
                    known_aliases: Sequence[str] = ()) -> AliasVerdict:
        """Aliases the step introduces for the listed fields of the root."""
        ...

    def infer_is_def(self, trace: Trace, target_step: Step, usage_step: Step,
                     queried_field: str, known_graph: ObjectGraph) -> bool:
        """Whether `target_step` (directly or through what it calls) writes
        `queried_field` of the known root object."""
        ...
