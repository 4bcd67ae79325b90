"""Running programs, projecting partial traces, and oracle dependency answers.

`run_full` executes a program with the bundled container library merged in
and returns a fully annotated trace.  `make_partial` projects that trace onto
an instrumented-file subset the way a real-world partial recorder would see
it: steps renumbered, call-site flags recomputed against the partition, and
variable detail pruned to what instrumentation of those files could observe.
`oracle_dependency` answers a one-step dependency query from the full trace
and projects the answer into partial-trace terms, giving ground truth to
score any other answerer against.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

from ..access_path import ReferencePath, parse_path
from ..errors import UnknownStep, UnresolvablePath
from ..trace_model import (CASE_CALL_SITE, CASE_DIRECT, CASE_NONE,
                           Instruction, Step, Trace, VariableInstance)
from .interpreter import execute
from .stdlib import LIB_FILES
from .syntax import MiniProgram, parse_file, parse_program

__all__ = ["CASE_DIRECT", "CASE_CALL_SITE", "CASE_NONE", "SliceQuery",
           "GroundTruthAnswer", "run_full", "make_partial",
           "oracle_dependency", "locate_instance"]


@dataclass(frozen=True)
class SliceQuery:
    """One-step dependency query: an access path read at a given step."""

    step_id: int
    path: ReferencePath

    @classmethod
    def make(cls, step_id: int, path: Union[str, ReferencePath]) -> "SliceQuery":
        if isinstance(path, str):
            path = parse_path(path)
        return cls(step_id=step_id, path=path)


@dataclass(frozen=True)
class GroundTruthAnswer:
    """The defining step (in partial-trace ids) and how it was reached.

    `case_kind` is `case1_direct` when the defining statement itself is in an
    instrumented file, `case2_call_site` when the definition happened inside
    uninstrumented code and the answer is its innermost instrumented call
    site, and `none` when no instrumented step accounts for the definition.
    """

    def_step: Optional[int]
    case_kind: str


@lru_cache(maxsize=None)
def _lib_function_names(lib_file: str) -> frozenset:
    return frozenset(fn.name for fn in parse_file(LIB_FILES[lib_file], lib_file))


def _merge_library(program: MiniProgram) -> MiniProgram:
    """Add bundled container files unless the program supplies its own.

    Defining any function of a bundled type (or reusing the library file id)
    drops that bundled file entirely in favor of the program's definitions.
    """
    user_names = set()
    for file_id, source in program.files.items():
        user_names.update(fn.name for fn in parse_file(source, file_id))
    merged = dict(program.files)
    for lib_file in LIB_FILES:
        if lib_file in merged:
            continue
        if _lib_function_names(lib_file) & user_names:
            continue
        merged[lib_file] = LIB_FILES[lib_file]
    return MiniProgram(files=merged, entry=program.entry)


def run_full(program: MiniProgram, seed: int = 0,
             step_budget: int = 1_000_000) -> Trace:
    """Execute `program` and return its annotated full trace.

    A runtime fault does not raise: the trace ends at the faulting statement
    and carries the fault message in its runtime index.
    """
    parsed = parse_program(_merge_library(program))
    return execute(parsed, seed=seed, step_budget=step_budget).build_trace()


# -- partial projection -------------------------------------------------------

def make_partial(full: Trace, instrumented_files, depth: int = 1) -> Trace:
    """Project a full trace onto `instrumented_files`.

    Steps outside the partition disappear and the rest are renumbered 1..n
    (their `order` field still identifies the original event).  A retained
    step becomes a call site exactly when it invoked something that is not
    visible in the partition, and then carries that callee's source.  Frame
    slots of uninstrumented routines vanish from read/write lists, and
    children edges survive only below instances whose type is defined in an
    instrumented file, at most `depth` layers under any retained instance.
    """
    index = full.runtime_index
    if not full.is_full or index is None:
        raise ValueError("make_partial requires an annotated full trace")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    partition = list(dict.fromkeys(instrumented_files))
    if not partition:
        raise ValueError("partition must name at least one file")
    unknown = [f for f in partition if f not in full.instrumented_files]
    if unknown:
        raise ValueError(f"unknown files in partition: {unknown}")

    def _visible(vid: str) -> bool:
        scope = index.instance_scopes.get(vid)
        return scope is None or scope in partition

    steps = []
    roots: list[str] = []
    for new_id, step in enumerate(
            (s for s in full.steps if s.file_id in partition), start=1):
        calls = index.calls.get(step.step_id, ())
        invisible = [c for c in calls
                     if c.file_id is None or c.file_id not in partition]
        callee_source = next(
            (c.source for c in invisible if c.source is not None), None)
        reads = tuple(v for v in step.reads if _visible(v))
        writes = tuple(v for v in step.writes if _visible(v))
        roots.extend(reads)
        roots.extend(writes)
        instruction = Instruction(
            file_id=step.file_id, line=step.line, code_text=step.code,
            is_call_site=bool(invisible), callee_source=callee_source)
        steps.append(Step(step_id=new_id, instruction=instruction,
                          order=step.order, reads=reads, writes=writes))

    kept_edges = _prune_children(full, partition, roots, depth)
    variables = []
    for var in full.variables.values():
        if var.var_id in kept_edges:
            variables.append(VariableInstance(
                var_id=var.var_id, name=var.name, type_name=var.type_name,
                content=var.content, location=var.location,
                children=kept_edges[var.var_id]))

    hidden = sorted(fn for fn, file_id in index.routines.items()
                    if file_id not in partition)
    routines = list(full.uninstrumented_routines) + \
        [fn for fn in hidden if fn not in full.uninstrumented_routines]
    return Trace(completeness="partial", instrumented_files=partition,
                 uninstrumented_routines=routines,
                 variables=variables, steps=steps)


def _prune_children(full: Trace, partition, roots, depth: int) -> dict:
    """Retained var_id -> retained children edges, breadth-first from roots."""
    index = full.runtime_index

    def _children_visible(var: VariableInstance) -> bool:
        if var.type_name == "Array":
            return True  # arrays take the visibility of whatever holds them
        home = index.type_homes.get(var.type_name)
        return home is not None and home in partition

    kept: dict[str, tuple] = {}
    frontier = list(dict.fromkeys(roots))
    for vid in frontier:
        kept[vid] = ()
    level = 0
    while frontier and level < depth:
        next_frontier = []
        for vid in frontier:
            var = full.variable(vid)
            if not _children_visible(var):
                continue
            kept[vid] = var.children
            for _label, child in var.children:
                if child not in kept:
                    kept[child] = ()
                    next_frontier.append(child)
        frontier = next_frontier
        level += 1
    return kept


# -- oracle -------------------------------------------------------------------

def oracle_dependency(full: Trace, partial: Trace,
                      query: SliceQuery) -> GroundTruthAnswer:
    """Answer a dependency query from the full trace, in partial-trace terms.

    Resolves the query path through recorded children edges, finds the last
    step before the query that wrote the resolved value's location, and
    projects that step into the partial trace: directly if its file is
    instrumented, else through its innermost instrumented call site.
    """
    index = full.runtime_index
    if index is None:
        raise ValueError("oracle_dependency requires an annotated full trace")
    if not partial.has_step(query.step_id):
        raise UnknownStep(f"no step {query.step_id} in the partial trace")
    q_partial = partial.step(query.step_id)
    q_full = full.step_by_event(q_partial.event_key)
    if q_full is None:
        raise UnknownStep(
            f"step {query.step_id} does not correspond to any full-trace event")

    root = locate_instance(full, q_full, query.path.root_name)
    node = root
    for i, segment in enumerate(query.path.segments[1:], start=1):
        child = node.child(segment.selector)
        if child is None:
            prefix = query.path.prefix(i).render()
            raise UnresolvablePath(
                f"path {query.path.render()!r} has no value past {prefix!r} "
                f"at step {query.step_id}")
        node = full.variable(child)

    loc = node.location
    s_def = full.last_step_before(
        q_full.step_id,
        lambda s: any(full.variable(w).location == loc for w in s.writes))
    if s_def is None:
        return GroundTruthAnswer(None, CASE_NONE)

    to_partial = {s.event_key: s.step_id for s in partial.steps}
    if s_def.file_id in partial.instrumented_files:
        return GroundTruthAnswer(to_partial[s_def.event_key], CASE_DIRECT)
    for caller_id in index.caller_chain(s_def.step_id):
        caller = full.step(caller_id)
        if caller.file_id in partial.instrumented_files:
            return GroundTruthAnswer(to_partial[caller.event_key],
                                     CASE_CALL_SITE)
    return GroundTruthAnswer(None, CASE_NONE)


def locate_instance(full: Trace, q_full: Step, root_name: str) -> VariableInstance:
    """Latest instance named `root_name` in the query step's frame."""
    index = full.runtime_index
    frame = index.frames.get(q_full.step_id)
    for step in reversed(full.steps):
        if step.step_id > q_full.step_id or index.frames.get(step.step_id) != frame:
            continue
        for vid in (*step.reads, *step.writes):
            if full.variable(vid).name == root_name:
                return full.variable(vid)
    raise UnresolvablePath(
        f"variable {root_name!r} is not visible at step {q_full.step_id}")
