"""One-step dynamic data-dependency slicing over partial traces.

Given a trace, a query step, and an access path (``sharedList.elementData[0]
.value[1]``), :func:`slice_dependency` answers: which step last defined the
value that the path denotes at the query step?  The answer is either

* ``case1_direct`` — the defining write happened at a recorded step, which
  is returned directly;
* ``case2_call_site`` — the write happened out of sight, inside something a
  recorded step invoked; that innermost recorded call site is returned; or
* ``none`` — no defining step precedes the query in this trace.

Partial traces do not record the internals of unobserved code, so the
algorithm leans on two sources of evidence:

1. **Recorded locations.**  Every recorded variable instance carries a
   memory location; two instances alias exactly when their locations are
   equal.  Locations known for a path prefix propagate forward through the
   trace for free ("must-alias bridges"), and a leaf location, once known,
   turns definition detection into a plain location scan.
2. **An execution estimator.**  Where locations are missing, the estimator
   recovers the root's object graph, proposes aliases introduced at call
   sites, and judges whether a call site (directly or through its hidden
   callees) writes the queried field.

Estimator failures never abort a query; each is recorded as a ``degraded``
provenance event.  Recovery and alias failures narrow the evidence and the
scan continues, but a failed definition check ends the query with ``none``:
the unassessed call site could supersede any older visible write, so a
stale answer would be worse than no answer.  Every conclusion the
algorithm reaches is logged in ``SliceResult.provenance``, which doubles
as the audit trail for ablation tests.

Known limits, by design: the path root must be read or written at the query
step itself, and a definition is only found as ``case1_direct`` when either
the leaf's own cell write is recorded or its parent's location is known.
Writes reaching the leaf exclusively through never-observed intermediate
objects are left to the estimator's call-site checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .access_path import ReferencePath, parse_path, resolve_in_graph
from .errors import EstimatorError, RootMismatch, UnknownStep, UnresolvablePath
from .estimator.base import ExecutionEstimator, RecoveryRequest
from .object_graph import ObjectGraph
from .trace_model import (CASE_CALL_SITE, CASE_DIRECT, CASE_NONE, Step,
                          Trace, VariableInstance)

__all__ = ["CASE_DIRECT", "CASE_CALL_SITE", "CASE_NONE", "SliceResult",
           "slice_dependency", "recovery_request_for"]


@dataclass
class SliceResult:
    """The answer to one slicing query, with its evidence trail."""

    query_step: int
    path: str
    def_step: Optional[int]
    case_kind: str
    provenance: list[dict] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "query": {"step": self.query_step, "path": self.path},
            "def_step": self.def_step,
            "case_kind": self.case_kind,
            "provenance": self.provenance,
        }

    def serialize(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2,
                          ensure_ascii=False) + "\n"


def _step_instances(trace: Trace, step: Step) -> list[VariableInstance]:
    """The step's distinct instances, reads first, in recorded order."""
    out: list[VariableInstance] = []
    seen: set[str] = set()
    for var_id in tuple(step.reads) + tuple(step.writes):
        if var_id not in seen:
            seen.add(var_id)
            out.append(trace.variable(var_id))
    return out


def _root_at_step(trace: Trace, step: Step, root_name: str) -> VariableInstance:
    for inst in _step_instances(trace, step):
        if inst.name == root_name:
            return inst
    raise UnresolvablePath(
        f"{root_name!r} is not read or written at step {step.step_id}")


class _Slicer:
    """State for one query: anchors, alias names, and provenance."""

    def __init__(self, trace: Trace, query: Step, path: ReferencePath,
                 estimator: ExecutionEstimator,
                 class_structures: Sequence[str]):
        self.trace = trace
        self.query = query
        self.path = path
        self.estimator = estimator
        self.class_structures = tuple(class_structures)
        self.provenance: list[dict] = []
        self.n = len(path.segments)
        # Rendered prefix per length k (1-based): [k] == path.prefix(k).
        self.rendered = [""] + [path.prefix(k).render()
                                for k in range(1, self.n + 1)]
        self.render_to_k = {self.rendered[k]: k
                            for k in range(1, self.n + 1)}
        self.anchors: dict[int, str] = {}       # k -> location token
        self.loc_to_k: dict[str, int] = {}
        self.alias_names: dict[int, set[str]] = {1: {path.root_name}}
        self.hot_ids: set[str] = set()          # var ids aliasing any prefix
        self.graph: Optional[ObjectGraph] = None

    # -- misc -----------------------------------------------------------------

    def _result(self, def_step: Optional[int], case_kind: str) -> SliceResult:
        return SliceResult(query_step=self.query.step_id,
                           path=self.rendered[self.n], def_step=def_step,
                           case_kind=case_kind, provenance=self.provenance)

    def _degraded(self, stage: str, error: Exception,
                  step_id: Optional[int] = None) -> None:
        event = {"kind": "degraded", "stage": stage, "error": str(error)}
        if step_id is not None:
            event["step"] = step_id
        self.provenance.append(event)

    def _anchor(self, k: int, token: str) -> None:
        if k not in self.anchors:
            self.anchors[k] = token
            self.loc_to_k.setdefault(token, k)

    # -- anchoring ------------------------------------------------------------

    def anchor_root(self) -> VariableInstance:
        root = _root_at_step(self.trace, self.query, self.path.root_name)
        self._anchor(1, root.location.token)
        self.provenance.append({
            "kind": "root_anchor", "step": self.query.step_id,
            "var_id": root.var_id, "location": root.location.token})
        return root

    def anchor_recorded_children(self, root: VariableInstance) -> None:
        """Follow recorded child edges along the path as far as they go."""
        inst = root
        for k, seg in enumerate(self.path.segments[1:], start=2):
            child_id = inst.child(seg.selector)
            if child_id is None:
                return
            inst = self.trace.variable(child_id)
            self._anchor(k, inst.location.token)
            self.provenance.append({
                "kind": "recorded_anchor", "prefix": self.rendered[k],
                "location": inst.location.token})

    def anchor_leaf_cell(self) -> Optional[str]:
        """The leaf's location: anchored directly, or derived from its parent.

        A primitive leaf lives in a cell of its parent object, and cell
        tokens are built from the parent's heap token plus the edge label,
        so knowing the parent pins the leaf.
        """
        if self.n in self.anchors:
            return self.anchors[self.n]
        parent = self.anchors.get(self.n - 1)
        if parent is None or not parent.startswith("h"):
            return None
        token = f"c{parent[1:]}.{self.path.segments[-1].selector}"
        self._anchor(self.n, token)
        self.provenance.append({
            "kind": "leaf_anchor", "location": token, "derived": True})
        return token

    # -- recovery -------------------------------------------------------------

    def recover(self, root: VariableInstance) -> None:
        """Recover the root's object graph, or degrade to recorded evidence.

        Without a graph the alias and definition checks have nothing to
        show the estimator, so they are skipped and the query is answered
        from recorded locations alone.
        """
        request = RecoveryRequest(
            root_name=root.name, root_type=root.type_name,
            root_value=root.content, step_code=self.query.code,
            step_id=self.query.step_id, step_key=self.query.event_key,
            focal_path=self.rendered[self.n],
            class_structures=self.class_structures)
        try:
            self.graph = self.estimator.recover_object_graph(request)
        except EstimatorError as exc:
            self._degraded("recovery", exc, self.query.step_id)
            return
        info = getattr(self.estimator, "last_call_info", None) or {}
        event = {"kind": "recovery", "status": "ok",
                 "step": self.query.step_id}
        # Not copied: from_cache — whether a response was served from the
        # cache must not distinguish a replayed session from the original.
        for key in ("example", "cache_key", "repaired"):
            if key in info:
                event[key] = info[key]
        self.provenance.append(event)
        if info.get("example") == "adaptive" or "harvest" in info:
            harvest = {"kind": "harvest_example",
                       "used": info.get("example") == "adaptive"}
            harvest.update(info.get("harvest") or {})
            self.provenance.append(harvest)
        try:
            node = resolve_in_graph(self.path, self.graph)
        except RootMismatch as exc:
            self._degraded("resolve", exc)
            return
        if node is None:
            self._degraded("resolve", UnresolvablePath(
                f"recovered graph has no node at {self.rendered[self.n]!r}"))

    # -- forward alias pass ---------------------------------------------------

    def _bridge(self, step: Step, insts: list[VariableInstance]) -> None:
        for inst in insts:
            k = self.loc_to_k.get(inst.location.token)
            if k is None:
                continue
            self.hot_ids.add(inst.var_id)
            names = self.alias_names.setdefault(k, set())
            if inst.name not in names:
                names.add(inst.name)
                self.provenance.append({
                    "kind": "must_alias", "step": step.step_id,
                    "prefix": self.rendered[k], "name": inst.name,
                    "location": inst.location.token})

    def _ask_aliases(self, step: Step, insts: list[VariableInstance]) -> None:
        step_names = [inst.name for inst in insts]
        known = [name for name in step_names
                 if name in self.alias_names.get(1, ())]
        try:
            verdict = self.estimator.infer_alias(
                self.trace, step, self.path.root_name, self.graph,
                fields_of_interest=self.rendered[1:],
                known_aliases=known)
        except EstimatorError as exc:
            self._degraded("alias_check", exc, step.step_id)
            return
        self.provenance.append({
            "kind": "alias_check", "step": step.step_id,
            "claims": dict(verdict.pairs)})
        for prefix, expr in verdict.pairs.items():
            k = self.render_to_k.get(prefix)
            if k is None:
                continue
            self.alias_names.setdefault(k, set()).add(expr)
            for inst in insts:
                if inst.name == expr:
                    self.hot_ids.add(inst.var_id)
                    self._anchor(k, inst.location.token)

    def forward_pass(self) -> None:
        """Walk steps before the query, growing aliases and anchors."""
        all_names = set()
        for t in self.trace.steps:
            if t.step_id >= self.query.step_id:
                break
            insts = _step_instances(self.trace, t)
            self._bridge(t, insts)
            if t.is_call_site and self.graph is not None:
                all_names.clear()
                all_names.update(*self.alias_names.values())
                if any(inst.name in all_names for inst in insts):
                    self._ask_aliases(t, insts)

    # -- backward definition scan ----------------------------------------------

    def backward_scan(self) -> SliceResult:
        loc_q = self.anchor_leaf_cell()
        for t in reversed(self.trace.steps):
            if t.step_id >= self.query.step_id:
                continue
            if loc_q is not None and any(
                    self.trace.variable(w).location.token == loc_q
                    for w in t.writes):
                self.provenance.append({
                    "kind": "fast_path", "step": t.step_id,
                    "location": loc_q})
                return self._result(t.step_id, CASE_DIRECT)
            if t.is_call_site and any(
                    var_id in self.hot_ids
                    for var_id in tuple(t.reads) + tuple(t.writes)):
                if self.graph is None:
                    # A hidden callee here may define the field.  Without a
                    # recovered graph the estimator cannot be consulted, and
                    # any older visible write would be a stale answer.
                    self._degraded("def_check", EstimatorError(
                        "call site cannot be assessed without a recovered "
                        "graph"), t.step_id)
                    return self._result(None, CASE_NONE)
                try:
                    is_def = self.estimator.infer_is_def(
                        self.trace, t, self.query, self.rendered[self.n],
                        self.graph)
                except EstimatorError as exc:
                    self._degraded("def_check", exc, t.step_id)
                    return self._result(None, CASE_NONE)
                self.provenance.append({
                    "kind": "def_check", "step": t.step_id,
                    "verdict": bool(is_def)})
                if is_def:
                    return self._result(t.step_id, CASE_CALL_SITE)
        return self._result(None, CASE_NONE)


def _root_only(trace: Trace, query: Step, root: VariableInstance,
               provenance: list[dict]) -> SliceResult:
    """Root-only queries never need the estimator: slots and whole-object
    installs are always recorded with their locations."""
    token = root.location.token
    hit = trace.last_step_before(
        query.step_id,
        lambda s: any(trace.variable(w).location.token == token
                      for w in s.writes))
    if hit is not None:
        provenance.append({"kind": "fast_path", "step": hit.step_id,
                           "location": token})
        return SliceResult(query.step_id, root.name, hit.step_id,
                           CASE_DIRECT, provenance)
    return SliceResult(query.step_id, root.name, None, CASE_NONE, provenance)


def slice_dependency(trace: Trace, step_id: int,
                     path: Union[str, ReferencePath],
                     estimator: ExecutionEstimator, *,
                     class_structures: Sequence[str] = ()) -> SliceResult:
    """Answer one slicing query against `trace`.

    `path` is an access path string or a parsed :class:`ReferencePath`
    whose root is read or written at step `step_id`.  `class_structures`
    are type-layout lines handed to the estimator when it must recover
    the root's object graph (harmless to omit for recorded-only queries).

    Raises :class:`UnknownStep` for a bad step id and
    :class:`UnresolvablePath` when the root is not observed at the query
    step; estimator trouble degrades the answer instead of raising.
    """
    if not trace.has_step(step_id):
        raise UnknownStep(f"no step {step_id} in the trace")
    parsed = parse_path(path) if isinstance(path, str) else path
    query = trace.step(step_id)

    state = _Slicer(trace, query, parsed, estimator, class_structures)
    root = state.anchor_root()
    if state.n == 1:
        return _root_only(trace, query, root, state.provenance)

    state.anchor_recorded_children(root)
    state.recover(root)
    state.forward_pass()
    return state.backward_scan()


def recovery_request_for(trace: Trace, step_id: int,
                         path: Union[str, ReferencePath], *,
                         class_structures: Sequence[str] = ()
                         ) -> RecoveryRequest:
    """Build the recovery request a slice of `path` at `step_id` would issue.

    Lets callers run (and score) graph recovery in isolation.  Raises the
    same errors as :func:`slice_dependency` for bad steps and unobserved
    roots.
    """
    if not trace.has_step(step_id):
        raise UnknownStep(f"no step {step_id} in the trace")
    parsed = parse_path(path) if isinstance(path, str) else path
    query = trace.step(step_id)
    root = _root_at_step(trace, query, parsed.root_name)
    return RecoveryRequest(
        root_name=root.name, root_type=root.type_name,
        root_value=root.content, step_code=query.code,
        step_id=query.step_id, step_key=query.event_key,
        focal_path=parsed.render(),
        class_structures=tuple(class_structures))
