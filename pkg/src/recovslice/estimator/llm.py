"""Execution estimator backed by a completion model.

All three estimator questions are answered by rendering a prompt, completing
it through a cached completer, and parsing the reply.  Failures that the
parsers can describe trigger one repair round for recovery and otherwise
surface as :class:`~recovslice.errors.EstimatorError` (or a subclass), so
callers can degrade instead of crashing.  Transport problems and offline
cache misses surface as :class:`~recovslice.errors.BackendUnavailable`.

After every answered call, :attr:`LlmEstimator.last_call_info` describes how
the answer was produced (prompt cache key, whether it came from the cache,
and, for recovery, which worked example was used).
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence, Union

from ..errors import (BackendUnavailable, CacheMissInOfflineMode,
                      EstimatorError, MalformedGraph, NoJsonBlock, NoVerdict,
                      ProbeFault, RecoveryFailed, TransportError,
                      UnsupportedShape)
from ..llm_backend.cache import CompletionCache
from ..llm_backend.parsing import (parse_alias_response, parse_graph_response,
                                   parse_verdict_response)
from ..llm_backend.prompts import (STATIC_RECOVERY_EXAMPLE, PromptExample,
                                   build_alias_prompt,
                                   build_definition_prompt,
                                   build_recovery_prompt)
from ..llm_backend.transport import CachedCompleter, HttpTransport
from ..object_graph import ObjectGraph
from ..trace_model import Step, Trace, VariableInstance
from .base import AliasVerdict, RecoveryRequest

__all__ = ["LlmEstimator"]

Completer = Union[CachedCompleter, Callable[[str], str]]


class LlmEstimator:
    """Answers estimator questions with a completion model.

    Pass a ready `completer` (anything with a ``complete(prompt)`` method,
    or a plain callable), or give `cache_dir` and the estimator assembles a
    :class:`CachedCompleter` over an environment-configured HTTP transport.
    With `adaptive_context` on (the default), recovery prompts carry a
    worked example harvested from a replay of the variable's own shape,
    falling back to the canned example when the shape cannot be replayed.
    """

    def __init__(self, completer: Optional[Completer] = None, *,
                 cache_dir=None, transport=None, model: Optional[str] = None,
                 offline: bool = False, adaptive_context: bool = True):
        if completer is None:
            if cache_dir is None:
                raise ValueError(
                    "LlmEstimator needs either a completer or a cache_dir")
            if transport is None and not offline:
                transport = HttpTransport(model=model)
            completer = CachedCompleter(CompletionCache(cache_dir),
                                        transport=transport, model=model,
                                        offline=offline)
        self.completer = completer
        self.adaptive_context = adaptive_context
        self.last_call_info: dict = {}

    # -- plumbing -------------------------------------------------------------

    def _complete(self, prompt: str) -> str:
        try:
            if hasattr(self.completer, "complete"):
                return self.completer.complete(prompt)
            return self.completer(prompt)
        except BackendUnavailable:
            raise
        except (TransportError, CacheMissInOfflineMode) as exc:
            raise BackendUnavailable(str(exc)) from exc

    def _finish(self, info: dict) -> None:
        info["cache_key"] = getattr(self.completer, "last_cache_key", None)
        info["from_cache"] = getattr(self.completer, "last_from_cache", None)
        self.last_call_info = info

    @staticmethod
    def _step_instances(trace: Trace, step: Step) -> list[VariableInstance]:
        out: list[VariableInstance] = []
        seen: set[str] = set()
        for var_id in tuple(step.reads) + tuple(step.writes):
            if var_id not in seen:
                seen.add(var_id)
                out.append(trace.variable(var_id))
        return out

    @staticmethod
    def _callee_sources(step: Step) -> tuple[str, ...]:
        source = step.instruction.callee_source
        return (source,) if source else ()

    # -- recovery -------------------------------------------------------------

    def _choose_example(self, request: RecoveryRequest):
        """The worked example for a recovery prompt, with provenance."""
        if request.adaptive_example is not None:
            return request.adaptive_example, "provided", None
        if not self.adaptive_context:
            return STATIC_RECOVERY_EXAMPLE, "static", None
        # Imported lazily: context_gen replays probes through this package.
        from ..context_gen import build_adaptive_example
        try:
            harvested = build_adaptive_example(request)
        except (UnsupportedShape, ProbeFault) as exc:
            return STATIC_RECOVERY_EXAMPLE, "static", {"fallback": str(exc)}
        harvest = {"probe_lines": harvested.probe_source.count("\n"),
                   "adapted_step_line": harvested.adapted_step_line}
        return harvested.example, "adaptive", harvest

    @staticmethod
    def _parse_recovery(response: str, expected_root: str):
        try:
            graph = parse_graph_response(response)
        except (NoJsonBlock, MalformedGraph) as exc:
            return None, str(exc)
        if graph.root_name != expected_root:
            return None, (f"the root key was {graph.root_name!r}, "
                          f"expected {expected_root!r}")
        return graph, None

    def recover_object_graph(self, request: RecoveryRequest) -> ObjectGraph:
        example, example_kind, harvest = self._choose_example(request)
        info: dict = {"kind": "recovery", "example": example_kind}
        if harvest is not None:
            info["harvest"] = harvest
        prompt = build_recovery_prompt(
            name=request.root_name, type_name=request.root_type,
            value=request.root_value, path=request.focal_or_all,
            structures=tuple(request.class_structures),
            code=request.step_code, example=example)
        response = self._complete(prompt)
        self._finish(info)
        graph, problem = self._parse_recovery(response, request.root_name)
        if graph is not None:
            return graph
        repair_prompt = (
            prompt + response
            + "\n\nThe previous output could not be used: " + problem
            + ".\nReturn only the corrected JSON object in a ```json code"
            + " fence, keyed by the focal variable name"
            + f" `{request.root_name}`.\n")
        response = self._complete(repair_prompt)
        info["repaired"] = True
        self._finish(info)
        graph, repair_problem = self._parse_recovery(response,
                                                     request.root_name)
        if graph is None:
            raise RecoveryFailed(
                f"recovery of {request.root_name!r} failed: {problem};"
                f" after repair: {repair_problem}")
        return graph

    # -- aliasing -------------------------------------------------------------

    def infer_alias(self, trace: Trace, step: Step, known_root: str,
                    known_graph: ObjectGraph,
                    fields_of_interest: Sequence[str],
                    known_aliases: Sequence[str] = ()) -> AliasVerdict:
        variables: list[tuple[str, str]] = []
        variable_fields: list[tuple[str, dict[str, str]]] = []
        seen: set[str] = set()
        for inst in self._step_instances(trace, step):
            if inst.name in seen:
                continue
            seen.add(inst.name)
            variables.append((inst.name, inst.type_name))
            fields = {label: trace.variable(child_id).type_name
                      for label, child_id in inst.children}
            variable_fields.append((inst.name, fields))
        prompt = build_alias_prompt(
            code=step.code, callee_sources=self._callee_sources(step),
            variables=variables, variable_fields=variable_fields,
            root_name=known_root,
            graph_json=known_graph.to_compact_json(typed_root=True),
            known_aliases=tuple(known_aliases),
            fields_of_interest=tuple(fields_of_interest))
        info = {"kind": "alias", "step_id": step.step_id}
        response = self._complete(prompt)
        self._finish(info)
        try:
            pairs = parse_alias_response(response)
        except NoJsonBlock as exc:
            raise EstimatorError(
                f"alias answer for step {step.step_id} contained no JSON"
                " object") from exc
        return AliasVerdict(pairs=pairs)

    # -- definition checks ----------------------------------------------------

    def infer_is_def(self, trace: Trace, target_step: Step, usage_step: Step,
                     queried_field: str, known_graph: ObjectGraph) -> bool:
        graph_json = known_graph.to_compact_json(typed_root=True)
        variables: list[tuple[str, str, str]] = []
        seen: set[str] = set()
        for inst in self._step_instances(trace, target_step):
            if inst.name in seen:
                continue
            seen.add(inst.name)
            # The root's known structure is more informative than its
            # flat rendering.
            value = graph_json if inst.name == known_graph.root_name \
                else inst.content
            variables.append((inst.name, inst.type_name, value))
        prompt = build_definition_prompt(
            target_code=target_step.code,
            callee_sources=self._callee_sources(target_step),
            variables=variables, root_name=known_graph.root_name,
            graph_json=graph_json,
            usage_code=usage_step.code, field_path=queried_field)
        info = {"kind": "definition", "step_id": target_step.step_id}
        response = self._complete(prompt)
        self._finish(info)
        try:
            return parse_verdict_response(response)
        except NoVerdict as exc:
            raise EstimatorError(
                f"definition answer for step {target_step.step_id}"
                " contained no verdict") from exc
