"""Adaptive recovery examples built by replaying a value's shape.

The canned recovery example shipped with the prompts shows an unrelated
type, which costs accuracy when the variable being recovered looks nothing
like it.  This module closes that gap: given a variable's recorded rendering
(say a ``List`` whose content is ``["002"]``), it writes a tiny probe
program that rebuilds a value of the same shape, runs it fully instrumented,
reads the true object graph out of the run with the reference estimator, and
packages the pair as a worked example for the recovery prompt.

Probes are deliberately conservative: only flat container renderings are
rebuilt (scalar elements, fields, and entries).  Anything deeper raises
:class:`~recovslice.errors.UnsupportedShape`, and a probe whose replay
faults raises :class:`~recovslice.errors.ProbeFault`; callers fall back to
the canned example in both cases.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import MiniSyntaxError, ProbeFault, UnsupportedShape
from .estimator.base import PromptExample, RecoveryRequest
from .estimator.oracle import OracleEstimator
from .micro_tracer import run_full
from .micro_tracer.stdlib import CLASS_STRUCTURES
from .micro_tracer.syntax import MiniProgram
from .micro_tracer.tracer import locate_instance
from .object_graph import ObjectGraph

__all__ = ["PROBE_LINE_BUDGET", "PROBE_ROOT", "HarvestedExample",
           "synthesize_probe", "harvest_example", "build_adaptive_example"]

# Probes a replay must stay small: past this many source lines the shape is
# treated as unsupported rather than replayed.
PROBE_LINE_BUDGET = 12
PROBE_ROOT = "probe"
PROBE_FILE = "probe.mini"

_PRIMITIVE_TYPES = frozenset({"int", "bool", "string", "null"})
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT = re.compile(r"-?[0-9]+")


@dataclass(frozen=True)
class HarvestedExample:
    """An adaptive example plus how it was obtained."""

    example: PromptExample
    probe_source: str
    adapted_step_line: bool


# -- rendering parsers ---------------------------------------------------------


class _Scanner:
    """Reads scalars back out of the trace's rendered-content syntax."""

    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def skip_ws(self) -> None:
        while self.i < len(self.text) and self.text[self.i] in " \t":
            self.i += 1

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.i += 1
        return ch

    def expect(self, ch: str) -> None:
        if self.take() != ch:
            raise UnsupportedShape(
                f"expected {ch!r} at offset {self.i - 1} of {self.text!r}")

    def end(self) -> None:
        self.skip_ws()
        if self.i != len(self.text):
            raise UnsupportedShape(
                f"trailing text at offset {self.i} of {self.text!r}")

    def scalar(self):
        """One nested-position scalar: quoted string, int, true/false/null."""
        self.skip_ws()
        ch = self.peek()
        if ch == '"':
            return self._quoted()
        m = _INT.match(self.text, self.i)
        if m:
            self.i = m.end()
            return int(m.group())
        for word, value in (("true", True), ("false", False), ("null", None)):
            if self.text.startswith(word, self.i):
                self.i += len(word)
                return value
        raise UnsupportedShape(
            f"no scalar at offset {self.i} of {self.text!r}")

    def _quoted(self) -> str:
        self.expect('"')
        out = []
        while True:
            if self.i >= len(self.text):
                raise UnsupportedShape(f"unterminated string in {self.text!r}")
            ch = self.take()
            if ch == "\\":
                esc = self.take()
                try:
                    out.append({'"': '"', "\\": "\\", "n": "\n"}[esc])
                except KeyError:
                    raise UnsupportedShape(
                        f"unknown escape \\{esc} in {self.text!r}") from None
            elif ch == '"':
                return "".join(out)
            else:
                out.append(ch)


def _parse_bracket_items(rendered: str) -> list:
    """Elements of a flat ``[e1, e2]`` rendering (list or array)."""
    s = _Scanner(rendered)
    s.skip_ws()
    s.expect("[")
    s.skip_ws()
    items: list = []
    if s.peek() == "]":
        s.take()
        s.end()
        return items
    while True:
        items.append(s.scalar())
        s.skip_ws()
        ch = s.take()
        if ch == "]":
            break
        if ch != ",":
            raise UnsupportedShape(
                f"expected ',' or ']' in {rendered!r}")
    s.end()
    return items


def _parse_pair_items(rendered: str) -> list[tuple]:
    """Pairs of a flat ``{key=value, }`` rendering (map or plain object)."""
    s = _Scanner(rendered)
    s.skip_ws()
    s.expect("{")
    s.skip_ws()
    pairs: list[tuple] = []
    if s.peek() == "}":
        s.take()
        s.end()
        return pairs
    while True:
        eq = s.text.find("=", s.i)
        if eq < 0:
            raise UnsupportedShape(f"expected '=' in {rendered!r}")
        key_text = s.text[s.i:eq].strip()
        if not key_text or any(c in key_text for c in '"{}[],'):
            raise UnsupportedShape(f"unsupported key {key_text!r}")
        key = int(key_text) if _INT.fullmatch(key_text) else key_text
        s.i = eq + 1
        value = s.scalar()
        s.skip_ws()
        # Pair renderings always carry a trailing separator.
        s.expect(",")
        s.skip_ws()
        pairs.append((key, value))
        if s.peek() == "}":
            s.take()
            break
    s.end()
    return pairs


# -- probe source --------------------------------------------------------------


def _literal(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    escaped = (value.replace("\\", "\\\\").replace('"', '\\"')
               .replace("\n", "\\n"))
    return f'"{escaped}"'


def _rebuild_lines(type_name: str, rendered: str) -> list[str]:
    """Statements recreating a value whose rendering is `rendered`."""
    if type_name == "List":
        items = _parse_bracket_items(rendered)
        return ([f"var {PROBE_ROOT} = new List();"]
                + [f"{PROBE_ROOT}.add({_literal(v)});" for v in items])
    if type_name == "Array":
        items = _parse_bracket_items(rendered)
        return ([f"var {PROBE_ROOT} = new Array();"]
                + [f"{PROBE_ROOT}[{i}] = {_literal(v)};"
                   for i, v in enumerate(items)])
    if type_name == "StrBuf":
        # A StrBuf renders as its text.
        return [f"var {PROBE_ROOT} = new StrBuf({_literal(rendered)});"]
    if type_name == "Map":
        pairs = _parse_pair_items(rendered)
        return ([f"var {PROBE_ROOT} = new Map();"]
                + [f"{PROBE_ROOT}.put({_literal(k)}, {_literal(v)});"
                   for k, v in pairs])
    if _IDENT.fullmatch(type_name) and type_name not in _PRIMITIVE_TYPES:
        pairs = _parse_pair_items(rendered)
        if not all(isinstance(k, str) and _IDENT.fullmatch(k)
                   for k, _ in pairs):
            raise UnsupportedShape(
                f"{type_name} rendering has non-identifier field names")
        return ([f"var {PROBE_ROOT} = new {type_name}();"]
                + [f"{PROBE_ROOT}.{k} = {_literal(v)};" for k, v in pairs])
    raise UnsupportedShape(
        f"cannot rebuild a {type_name} value from its rendering")


def _adapt_step_line(step_code: Optional[str],
                     root_name: Optional[str]) -> Optional[str]:
    """The queried line with the root renamed, if it can stand alone."""
    if not step_code or not root_name:
        return None
    line = step_code.strip()
    adapted = re.sub(rf"\b{re.escape(root_name)}\b", PROBE_ROOT, line)
    if adapted == line or not adapted.endswith(";"):
        return None
    return adapted


def _assemble(body: Sequence[str]) -> str:
    lines = ["fn main() {"] + [f"  {stmt}" for stmt in body] + ["}"]
    return "\n".join(lines) + "\n"


def synthesize_probe(root_type: str, root_value: str,
                     step_code: Optional[str] = None,
                     root_name: Optional[str] = None,
                     budget: int = PROBE_LINE_BUDGET) -> list[tuple[str, bool]]:
    """Candidate probe sources, best first.

    Each candidate ends by reading the rebuilt value, so the final step of a
    replay always observes the root.  The first candidate also replays an
    adapted copy of the queried line when one can be derived; callers try
    candidates in order because the adapted line may fault at replay time.
    Returns ``(source, has_adapted_line)`` pairs; raises
    :class:`UnsupportedShape` when the rendering cannot be rebuilt or no
    candidate fits the line budget.
    """
    fills = _rebuild_lines(root_type, root_value)
    snapshot = f"var snapshot = str({PROBE_ROOT});"
    adapted = _adapt_step_line(step_code, root_name)
    candidates = []
    if adapted is not None:
        candidates.append((_assemble(fills + [adapted, snapshot]), True))
    candidates.append((_assemble(fills + [snapshot]), False))
    fitting = [(source, used) for source, used in candidates
               if source.count("\n") <= budget]
    if not fitting:
        raise UnsupportedShape(
            f"rebuilding this {root_type} needs more than "
            f"{budget} probe lines")
    return fitting


# -- harvesting ----------------------------------------------------------------


def _structures_for(graph: ObjectGraph) -> tuple[str, ...]:
    """Structure lines for every object type the graph mentions."""
    out: list[str] = []
    seen: set[str] = set()

    def visit(node) -> None:
        if not node.children:
            return
        t = node.type_name
        if t and t != "Array" and t not in seen:
            seen.add(t)
            if t in CLASS_STRUCTURES:
                out.append(CLASS_STRUCTURES[t])
            else:
                fields = "; ".join(f"{c.type_name or 'Object'} {c.name}"
                                   for c in node.children)
                out.append(f"{t}:{{{fields};}}")
        for child in node.children:
            visit(child)

    visit(graph.root)
    return tuple(out)


def harvest_example(probe_source: str,
                    focal_path: Optional[str] = None) -> PromptExample:
    """Replay a probe and package its final state as a worked example.

    Raises :class:`MiniSyntaxError` if the probe does not parse and
    :class:`ProbeFault` if the replay faults or never observes the root.
    """
    program = MiniProgram(files={PROBE_FILE: probe_source})
    full = run_full(program, seed=0)
    fault = full.runtime_index.fault
    if fault is not None:
        raise ProbeFault(f"probe replay faulted: {fault}")
    if not full.steps:
        raise ProbeFault("probe replay recorded no steps")
    last = full.steps[-1]
    try:
        root = locate_instance(full, last, PROBE_ROOT)
    except Exception as exc:
        raise ProbeFault(f"probe replay never observed the root: {exc}")
    request = RecoveryRequest(
        root_name=PROBE_ROOT, root_type=root.type_name,
        root_value=root.content, step_code=last.code,
        step_id=last.step_id, step_key=last.event_key)
    graph = OracleEstimator(full).recover_object_graph(request)
    return PromptExample(
        value=root.content, type_name=root.type_name,
        structures=_structures_for(graph), path=focal_path,
        output=graph.to_wire_json(indent=2))


def _reroot_path(path: Optional[str], root_name: str) -> Optional[str]:
    if path is None:
        return None
    if path == root_name:
        return PROBE_ROOT
    if path.startswith(root_name) and path[len(root_name)] in ".[":
        return PROBE_ROOT + path[len(root_name):]
    return None


def build_adaptive_example(request: RecoveryRequest,
                           budget: int = PROBE_LINE_BUDGET) -> HarvestedExample:
    """A worked example shaped like the variable in `request`.

    Raises :class:`UnsupportedShape` when the recorded rendering cannot be
    rebuilt within the probe budget, and :class:`ProbeFault` when every
    candidate probe fails to replay.
    """
    candidates = synthesize_probe(
        request.root_type, request.root_value,
        step_code=request.step_code, root_name=request.root_name,
        budget=budget)
    focal = _reroot_path(request.focal_path, request.root_name)
    last_error: Optional[Exception] = None
    for source, has_adapted_line in candidates:
        try:
            example = harvest_example(source, focal_path=focal)
        except (MiniSyntaxError, ProbeFault) as exc:
            last_error = exc
            continue
        return HarvestedExample(example=example, probe_source=source,
                                adapted_step_line=has_adapted_line)
    raise ProbeFault(f"no probe candidate replayed cleanly: {last_error}")
