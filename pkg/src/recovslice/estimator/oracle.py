"""Estimator that answers from a fully recorded reference run.

Useful for scoring and tests: it gives the best possible answers for traces
produced by this package's own tracer, with no model in the loop.  It keys
steps by their (file, line, order) event identity, so it accepts steps from
any projection of the same run.

Each recovered graph keeps a side table mapping every rendered field path to
the true memory location of the instance behind it; alias and definition
questions about that graph are then plain location lookups.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import EstimatorError, RecoveryFailed, UnresolvablePath
from ..micro_tracer.tracer import locate_instance
from ..object_graph import ObjectGraph, ObjectNode
from ..trace_model import MemoryLocation, Step, Trace, VariableInstance
from .base import AliasVerdict, RecoveryRequest

__all__ = ["OracleEstimator"]


class OracleEstimator:
    """Answers estimator questions from an annotated full trace."""

    def __init__(self, full: Trace):
        if not full.is_full or full.runtime_index is None:
            raise ValueError("OracleEstimator requires an annotated full trace")
        self.full = full
        self.last_call_info: dict = {}
        # id(graph) -> (graph, rendered path -> true location); holding the
        # graph keeps its id from being recycled.
        self._graphs: dict[int, tuple[ObjectGraph, dict]] = {}

    # -- protocol -------------------------------------------------------------

    def recover_object_graph(self, request: RecoveryRequest) -> ObjectGraph:
        q_full = self._full_step(request.step_key)
        try:
            root = locate_instance(self.full, q_full, request.root_name)
        except UnresolvablePath as exc:
            raise RecoveryFailed(str(exc)) from exc
        locations: dict[str, MemoryLocation] = {}
        graph = ObjectGraph(
            self._node(root, request.root_name, request.root_name, locations))
        self._graphs[id(graph)] = (graph, locations)
        self.last_call_info = {"estimator": "oracle"}
        return graph

    def infer_alias(self, trace: Trace, step: Step, known_root: str,
                    known_graph: ObjectGraph,
                    fields_of_interest: Sequence[str],
                    known_aliases: Sequence[str] = ()) -> AliasVerdict:
        side = self._side(known_graph)
        full_step = self._full_step(step.event_key)
        pairs: dict[str, str] = {}
        for field_path in fields_of_interest:
            location = side.get(field_path)
            if location is None:
                continue
            # Reads come first so a visible name wins over a callee formal.
            for vid in (*full_step.reads, *full_step.writes):
                instance = self.full.variable(vid)
                if instance.location == location:
                    pairs[field_path] = instance.name
                    break
        self.last_call_info = {"estimator": "oracle"}
        return AliasVerdict(pairs)

    def infer_is_def(self, trace: Trace, target_step: Step, usage_step: Step,
                     queried_field: str, known_graph: ObjectGraph) -> bool:
        side = self._side(known_graph)
        location = side.get(queried_field)
        if location is None:
            raise EstimatorError(
                f"field {queried_field!r} is not part of the known graph")
        full_target = self._full_step(target_step.event_key)
        index = self.full.runtime_index
        self.last_call_info = {"estimator": "oracle"}
        for step in self.full.steps:
            if step.step_id != full_target.step_id and \
                    full_target.step_id not in index.caller_chain(step.step_id):
                continue
            if any(self.full.variable(w).location == location
                   for w in step.writes):
                return True
        return False

    # -- helpers --------------------------------------------------------------

    def _full_step(self, event_key: tuple) -> Step:
        step = self.full.step_by_event(tuple(event_key))
        if step is None:
            raise EstimatorError(
                f"event {event_key!r} does not occur in the reference run")
        return step

    def _side(self, graph: ObjectGraph) -> dict:
        entry = self._graphs.get(id(graph))
        if entry is None or entry[0] is not graph:
            raise EstimatorError("graph was not recovered by this estimator")
        return entry[1]

    def _node(self, instance: VariableInstance, name: str, path: str,
              locations: dict) -> ObjectNode:
        """Build a wire-normal node (only leaves carry values) and record
        every node's true location under its rendered path."""
        locations[path] = instance.location
        node = ObjectNode(name=name, type_name=instance.type_name,
                          value="" if instance.children else instance.content)
        for label, child_id in instance.children:
            child_path = f"{path}[{label}]" if label.isdigit() \
                else f"{path}.{label}"
            node.add(self._node(self.full.variable(child_id), label,
                                child_path, locations))
        return node
