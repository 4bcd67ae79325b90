"""Execution trace model: steps, variable instances, locations, (de)serialization.

A trace is a pair of a step sequence and a variable-instance table.  Steps
reference instances by id in their read/write sets; instances reference each
other through labeled children edges.  Content strings are pre-stringified by
the recorder and treated as opaque here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

from .errors import DanglingReference, NonMonotonicSteps, SchemaViolation

__all__ = [
    "TRACE_VERSION",
    "CASE_DIRECT",
    "CASE_CALL_SITE",
    "CASE_NONE",
    "MemoryLocation",
    "VariableInstance",
    "Instruction",
    "Step",
    "CalledRoutine",
    "RuntimeIndex",
    "Trace",
    "load_trace",
]

TRACE_VERSION = 1

# How a defining step relates to the queried trace's instrumentation: the
# write happened at a recorded step, behind a recorded call site, or was
# never observed.
CASE_DIRECT = "case1_direct"
CASE_CALL_SITE = "case2_call_site"
CASE_NONE = "none"

_TOP_KEYS = {"version", "completeness", "partition", "variables", "steps"}
_VAR_KEYS = {"var_id", "name", "type", "content", "location", "children"}
_LOC_KEYS = {"kind", "token"}
_CHILD_KEYS = {"label", "var_id"}
_STEP_KEYS = {"step_id", "file", "line", "order", "code", "is_call_site",
              "callee_source", "reads", "writes"}
_LOC_KINDS = {"recorded", "synthetic"}


@dataclass(frozen=True)
class MemoryLocation:
    """Opaque location token; two instances alias iff (kind, token) are equal.

    Synthetic locations name recovered instances and live in a namespace of
    their own, so they can never collide with recorded ones.
    """

    kind: str
    token: str

    def __post_init__(self):
        if self.kind not in _LOC_KINDS:
            raise SchemaViolation(f"unknown location kind {self.kind!r}")

    @property
    def is_recorded(self) -> bool:
        return self.kind == "recorded"


@dataclass
class VariableInstance:
    """One observed value of a variable: (name, content string, location)."""

    var_id: str
    name: str
    type_name: str
    content: str
    location: MemoryLocation
    children: tuple[tuple[str, str], ...] = ()  # (edge label, child var_id)

    def child(self, label: str) -> Optional[str]:
        for lab, vid in self.children:
            if lab == label:
                return vid
        return None


@dataclass(frozen=True)
class Instruction:
    """A source statement; (file_id, line) plus its verbatim text."""

    file_id: str
    line: int
    code_text: str
    is_call_site: bool = False
    callee_source: Optional[str] = None


@dataclass
class Step:
    """One execution of an instruction.

    `order` is the 1-based occurrence count of (file_id, line) during the
    run; (file, line, order) identifies the same event across projections of
    the same run, while step_id is positional within its own trace.
    """

    step_id: int
    instruction: Instruction
    order: int
    reads: tuple[str, ...] = ()
    writes: tuple[str, ...] = ()

    @property
    def file_id(self) -> str:
        return self.instruction.file_id

    @property
    def line(self) -> int:
        return self.instruction.line

    @property
    def code(self) -> str:
        return self.instruction.code_text

    @property
    def is_call_site(self) -> bool:
        return self.instruction.is_call_site

    @property
    def event_key(self) -> tuple[str, int, int]:
        return (self.instruction.file_id, self.instruction.line, self.order)


@dataclass(frozen=True)
class CalledRoutine:
    """A routine invoked by a statement; builtins have no file or source."""

    name: str
    file_id: Optional[str] = None
    source: Optional[str] = None


@dataclass
class RuntimeIndex:
    """In-memory run metadata attached by the interpreter, never serialized.

    The trace JSON schema carries no call-stack information, so anything that
    needs caller chains (oracle dependency analysis, the oracle estimator,
    partial projection) requires a trace that still carries its RuntimeIndex.
    """

    # step_id -> step_id of the statement that invoked the enclosing call
    callers: dict[int, Optional[int]] = field(default_factory=dict)
    # step_id -> frame uid the statement executed in
    frames: dict[int, int] = field(default_factory=dict)
    # step_id -> routines its statement invoked, in call order
    calls: dict[int, tuple[CalledRoutine, ...]] = field(default_factory=dict)
    # var_id -> owning file for frame-slot instances (None for heap cells)
    instance_scopes: dict[str, Optional[str]] = field(default_factory=dict)
    # type name -> file that defines it (its init, or first `new` site)
    type_homes: dict[str, str] = field(default_factory=dict)
    # function name -> defining file
    routines: dict[str, str] = field(default_factory=dict)
    fault: Optional[str] = None

    def caller_chain(self, step_id: int) -> list[int]:
        """Enclosing call-step ids, innermost first."""
        chain = []
        cur = self.callers.get(step_id)
        while cur is not None:
            chain.append(cur)
            cur = self.callers.get(cur)
        return chain


class Trace:
    """A (possibly partial) execution trace plus its variable table."""

    def __init__(self, completeness: str, instrumented_files: Iterable[str],
                 uninstrumented_routines: Iterable[str],
                 variables: Iterable[VariableInstance], steps: Iterable[Step],
                 runtime_index: Optional[RuntimeIndex] = None):
        if completeness not in ("partial", "full"):
            raise SchemaViolation(f"bad completeness {completeness!r}")
        self.completeness = completeness
        self.instrumented_files = tuple(instrumented_files)
        self.uninstrumented_routines = tuple(uninstrumented_routines)
        self.variables: dict[str, VariableInstance] = {}
        for var in variables:
            if var.var_id in self.variables:
                raise SchemaViolation(f"duplicate var_id {var.var_id!r}")
            self.variables[var.var_id] = var
        self.steps = list(steps)
        self.runtime_index = runtime_index
        self._by_id = {s.step_id: s for s in self.steps}
        self._check()

    # -- validation ---------------------------------------------------------

    def _check(self) -> None:
        last = 0
        for s in self.steps:
            if s.step_id <= last:
                raise NonMonotonicSteps(
                    f"step_id {s.step_id} after {last} is not increasing")
            last = s.step_id
            for vid in (*s.reads, *s.writes):
                if vid not in self.variables:
                    raise DanglingReference(
                        f"step {s.step_id} references unknown var {vid!r}")
            if self.completeness == "partial" and \
                    s.instruction.file_id not in self.instrumented_files:
                raise SchemaViolation(
                    f"partial trace contains step {s.step_id} from "
                    f"uninstrumented file {s.instruction.file_id!r}")
        for var in self.variables.values():
            for _label, vid in var.children:
                if vid not in self.variables:
                    raise DanglingReference(
                        f"instance {var.var_id} has dangling child {vid!r}")

    # -- lookups ------------------------------------------------------------

    @property
    def is_full(self) -> bool:
        return self.completeness == "full"

    def step(self, step_id: int) -> Step:
        try:
            return self._by_id[step_id]
        except KeyError:
            raise KeyError(f"no step with id {step_id}") from None

    def has_step(self, step_id: int) -> bool:
        return step_id in self._by_id

    def variable(self, var_id: str) -> VariableInstance:
        return self.variables[var_id]

    def last_step_before(self, step_id: int,
                         predicate: Callable[[Step], bool]) -> Optional[Step]:
        """Most recent step strictly before `step_id` satisfying `predicate`."""
        for s in reversed(self.steps):
            if s.step_id >= step_id:
                continue
            if predicate(s):
                return s
        return None

    def step_by_event(self, key: tuple[str, int, int]) -> Optional[Step]:
        for s in self.steps:
            if s.event_key == key:
                return s
        return None

    # -- serialization ------------------------------------------------------

    def to_json_obj(self) -> dict:
        variables = []
        for var in self.variables.values():
            variables.append({
                "var_id": var.var_id,
                "name": var.name,
                "type": var.type_name,
                "content": var.content,
                "location": {"kind": var.location.kind,
                             "token": var.location.token},
                "children": [{"label": lab, "var_id": vid}
                             for lab, vid in var.children],
            })
        steps = []
        for s in self.steps:
            obj = {
                "step_id": s.step_id,
                "file": s.instruction.file_id,
                "line": s.instruction.line,
                "order": s.order,
                "code": s.instruction.code_text,
                "is_call_site": s.instruction.is_call_site,
                "reads": list(s.reads),
                "writes": list(s.writes),
            }
            if s.instruction.callee_source is not None:
                obj["callee_source"] = s.instruction.callee_source
            steps.append(obj)
        return {
            "version": TRACE_VERSION,
            "completeness": self.completeness,
            "partition": {
                "instrumented_files": list(self.instrumented_files),
                "uninstrumented_routines": list(self.uninstrumented_routines),
            },
            "variables": variables,
            "steps": steps,
        }

    def serialize(self) -> bytes:
        # Canonical: fixed key order from construction, stable formatting.
        text = json.dumps(self.to_json_obj(), indent=2, ensure_ascii=False)
        return (text + "\n").encode("utf-8")

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.serialize())

    # -- construction -------------------------------------------------------

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Trace":
        if not isinstance(obj, dict):
            raise SchemaViolation("trace document must be a JSON object")
        _require_keys("trace", obj, _TOP_KEYS, required=_TOP_KEYS)
        if obj["version"] != TRACE_VERSION:
            raise SchemaViolation(f"unsupported version {obj['version']!r}")
        part = obj["partition"]
        _require_keys("partition", part,
                      {"instrumented_files", "uninstrumented_routines"},
                      required={"instrumented_files", "uninstrumented_routines"})
        variables = []
        for i, v in enumerate(obj["variables"]):
            _require_keys(f"variables[{i}]", v, _VAR_KEYS, required=_VAR_KEYS)
            loc = v["location"]
            _require_keys(f"variables[{i}].location", loc, _LOC_KEYS,
                          required=_LOC_KEYS)
            if loc["kind"] not in _LOC_KINDS:
                raise SchemaViolation(
                    f"variables[{i}]: unknown location kind {loc['kind']!r}")
            children = []
            for j, c in enumerate(v["children"]):
                _require_keys(f"variables[{i}].children[{j}]", c, _CHILD_KEYS,
                              required=_CHILD_KEYS)
                children.append((c["label"], c["var_id"]))
            variables.append(VariableInstance(
                var_id=_expect_str(v, "var_id", i),
                name=_expect_str(v, "name", i),
                type_name=_expect_str(v, "type", i),
                content=_expect_str(v, "content", i),
                location=MemoryLocation(loc["kind"], loc["token"]),
                children=tuple(children),
            ))
        steps = []
        for i, s in enumerate(obj["steps"]):
            _require_keys(f"steps[{i}]", s, _STEP_KEYS,
                          required=_STEP_KEYS - {"callee_source"})
            if not isinstance(s["step_id"], int) or isinstance(s["step_id"], bool):
                raise SchemaViolation(f"steps[{i}]: step_id must be an integer")
            if not isinstance(s["line"], int) or not isinstance(s["order"], int):
                raise SchemaViolation(f"steps[{i}]: line/order must be integers")
            if not isinstance(s["is_call_site"], bool):
                raise SchemaViolation(f"steps[{i}]: is_call_site must be a bool")
            callee = s.get("callee_source")
            if callee is not None and not isinstance(callee, str):
                raise SchemaViolation(f"steps[{i}]: callee_source must be a string")
            instr = Instruction(
                file_id=s["file"], line=s["line"], code_text=s["code"],
                is_call_site=s["is_call_site"], callee_source=callee)
            steps.append(Step(
                step_id=s["step_id"], instruction=instr, order=s["order"],
                reads=tuple(s["reads"]), writes=tuple(s["writes"])))
        return cls(
            completeness=obj["completeness"],
            instrumented_files=part["instrumented_files"],
            uninstrumented_routines=part["uninstrumented_routines"],
            variables=variables,
            steps=steps,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return self.to_json_obj() == other.to_json_obj()


def _require_keys(where: str, obj, allowed: set, required: set) -> None:
    if not isinstance(obj, dict):
        raise SchemaViolation(f"{where}: expected a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaViolation(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SchemaViolation(f"{where}: missing keys {sorted(missing)}")


def _expect_str(obj: dict, key: str, index: int) -> str:
    val = obj[key]
    if not isinstance(val, str):
        raise SchemaViolation(f"variables[{index}]: {key} must be a string")
    return val


def load_trace(source: str | bytes | Path) -> Trace:
    """Load and validate a trace from a file path or raw JSON bytes/text."""
    if isinstance(source, Path) or (isinstance(source, str) and
                                    not source.lstrip().startswith("{")):
        raw = Path(source).read_bytes()
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = source.encode("utf-8")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"not valid JSON: {exc}") from exc
    return Trace.from_json_obj(obj)
