"""Tree-walking MiniLang interpreter that records a full execution trace.

Recording model:

* Every executed statement (including each evaluation of an `if`/`while`
  condition) becomes one step.  Step ids are assigned when the statement
  starts, so a call site's step precedes its callee's steps.
* Reads and writes are variable *instances*: a fresh instance is minted on
  every write, while a read reuses the last instance of that slot/cell as
  long as both its rendered content and its location are unchanged.
* An instance's location is the referenced heap object for object values
  (`h<id>`), the frame slot for primitive locals (`s<frame>.<name>`), and
  the owning cell for primitive fields and array elements
  (`c<heap>.<label>`).  Two instances alias iff their locations are equal.
* Binding a callee's formal parameters is recorded as writes of the *call
  site's* step, which makes argument-passing visible as a location match
  between the argument read and the formal write.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from ..errors import MiniRuntimeFault, MiniSyntaxError, StepBudgetExceeded
from ..trace_model import (CalledRoutine, Instruction, MemoryLocation,
                           RuntimeIndex, Step, Trace, VariableInstance)
from . import syntax as ast
from .stdlib import BUILTIN_NAMES

__all__ = ["HeapObject", "NativeArray", "ExecutionRecorder", "execute",
           "render_value", "type_name_of"]

_MAX_ARRAY_INDEX = 100_000


class NativeArray:
    """The one native container: a growable, int-indexed sequence."""

    __slots__ = ("heap_id", "items")

    def __init__(self, heap_id: int):
        self.heap_id = heap_id
        self.items: list = []


class HeapObject:
    """A class instance; fields are created on first write."""

    __slots__ = ("heap_id", "type_name", "fields")

    def __init__(self, heap_id: int, type_name: str):
        self.heap_id = heap_id
        self.type_name = type_name
        self.fields: dict[str, object] = {}


def type_name_of(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, str):
        return "string"
    if isinstance(value, NativeArray):
        return "Array"
    if isinstance(value, HeapObject):
        return value.type_name
    raise AssertionError(f"unknown runtime value {value!r}")


def _escape(text: str) -> str:
    return (text.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n"))


def render_value(value, top_level: bool = True, _on_path: frozenset = frozenset()) -> str:
    """Render a runtime value the way traces and prompts display it.

    Strings are bare at top level and double-quoted inside containers; the
    bundled containers render logically (List as `[..]`, Map as `{k=v, }`,
    StrBuf as its text); other objects render as `{field=value, }`.  A cycle
    renders as `...` at the point of re-entry.
    """
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value if top_level else f'"{_escape(value)}"'
    if value.heap_id in _on_path:
        return "..."
    on_path = _on_path | {value.heap_id}
    if isinstance(value, NativeArray):
        return "[" + ", ".join(render_value(v, False, on_path)
                               for v in value.items) + "]"
    logical = _render_container(value, on_path)
    if logical is not None:
        if isinstance(value, HeapObject) and value.type_name == "StrBuf":
            return logical if top_level else f'"{_escape(logical)}"'
        return logical
    return "{" + "".join(
        f"{name}={render_value(v, False, on_path)}, "
        for name, v in value.fields.items()) + "}"


def _render_container(obj: HeapObject, on_path: frozenset) -> Optional[str]:
    """Logical rendering for well-formed bundled containers, else None."""
    fields = obj.fields

    def _prefix(name: str, count) -> Optional[list]:
        arr = fields.get(name)
        if not isinstance(arr, NativeArray) or not isinstance(count, int) \
                or isinstance(count, bool) or not 0 <= count <= len(arr.items):
            return None
        return arr.items[:count]

    if obj.type_name == "List":
        items = _prefix("elementData", fields.get("size"))
        if items is None:
            return None
        return "[" + ", ".join(render_value(v, False, on_path)
                               for v in items) + "]"
    if obj.type_name == "StrBuf":
        chars = _prefix("value", fields.get("length"))
        if chars is None or not all(isinstance(c, str) for c in chars):
            return None
        return "".join(chars)
    if obj.type_name == "Map":
        keys = _prefix("keys", fields.get("size"))
        vals = _prefix("vals", fields.get("size"))
        if keys is None or vals is None:
            return None
        return "{" + "".join(
            f"{render_value(k, True, on_path)}="
            f"{render_value(v, False, on_path)}, "
            for k, v in zip(keys, vals)) + "}"
    return None


@dataclass
class _Frame:
    uid: int
    routine: str
    file_id: str
    call_step: Optional[int]  # step id of the invoking statement
    vars: dict = field(default_factory=dict)


class _StepRec:
    __slots__ = ("step_id", "order", "stmt", "frame", "reads", "writes", "calls")

    def __init__(self, step_id: int, order: int, stmt: ast.Stmt, frame: _Frame):
        self.step_id = step_id
        self.order = order
        self.stmt = stmt
        self.frame = frame
        self.reads: list[str] = []
        self.writes: list[str] = []
        self.calls: list[CalledRoutine] = []


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class ExecutionRecorder:
    """Runs a parsed program and accumulates steps, instances, and indexes."""

    def __init__(self, parsed: ast.ParsedProgram, seed: int = 0,
                 step_budget: int = 1_000_000, max_call_depth: int = 200):
        self.parsed = parsed
        self.rng = random.Random(seed)
        self.step_budget = step_budget
        self.max_call_depth = max_call_depth
        self.stdout: list[str] = []
        self.steps: list[Step] = []
        self.instances: dict[str, VariableInstance] = {}
        self.index = RuntimeIndex(type_homes=dict(parsed.type_homes),
                                  routines=dict(parsed.routines))
        self._records: list[_StepRec] = []
        self._heap_seq = 0
        self._frame_seq = 0
        self._var_seq = 0
        self._step_seq = 0
        self._order: dict[tuple[str, int], int] = {}
        # slot/cell key -> (var_id, content, location token) of last instance
        self._cache: dict[str, tuple[str, str, str]] = {}
        self._depth = 0

    # -- driving --------------------------------------------------------------

    def run(self) -> None:
        entry = self.parsed.functions.get(self.parsed.entry)
        if entry is None:
            raise MiniSyntaxError(f"no entry function {self.parsed.entry!r}")
        if entry.params:
            raise MiniSyntaxError("entry function must take no parameters",
                                  entry.file_id, entry.line)
        frame = self._new_frame(entry, call_step=None)
        try:
            self._exec_block(entry.body, frame)
        except _ReturnSignal:
            pass
        except MiniRuntimeFault as fault:
            self.index.fault = str(fault)

    def build_trace(self) -> Trace:
        # Records finalize when their statement finishes, so a call site lands
        # after its callee's steps; restore statement-start order by id.
        builtins = sorted({c.name for calls in self.index.calls.values()
                           for c in calls if c.file_id is None})
        return Trace(completeness="full",
                     instrumented_files=list(self.parsed.lines),
                     uninstrumented_routines=builtins,
                     variables=list(self.instances.values()),
                     steps=sorted(self.steps, key=lambda s: s.step_id),
                     runtime_index=self.index)

    # -- step records ---------------------------------------------------------

    def _begin(self, stmt: ast.Stmt, frame: _Frame) -> _StepRec:
        if self._step_seq >= self.step_budget:
            raise StepBudgetExceeded(
                f"step budget of {self.step_budget} exceeded")
        self._step_seq += 1
        key = (frame.file_id, stmt.line)
        self._order[key] = self._order.get(key, 0) + 1
        rec = _StepRec(self._step_seq, self._order[key], stmt, frame)
        self._records.append(rec)
        self.index.frames[rec.step_id] = frame.uid
        self.index.callers[rec.step_id] = frame.call_step
        return rec

    def _finish(self, rec: _StepRec) -> None:
        popped = self._records.pop()
        assert popped is rec
        if rec.calls:
            self.index.calls[rec.step_id] = tuple(rec.calls)
        # In a full trace only builtins execute out of sight.
        is_call_site = any(c.file_id is None for c in rec.calls)
        instruction = Instruction(file_id=rec.frame.file_id,
                                  line=rec.stmt.line,
                                  code_text=rec.stmt.text.strip(),
                                  is_call_site=is_call_site,
                                  callee_source=None)
        self.steps.append(Step(step_id=rec.step_id, instruction=instruction,
                               order=rec.order, reads=tuple(rec.reads),
                               writes=tuple(rec.writes)))

    def _fault(self, message: str):
        if self._records:
            rec = self._records[-1]
            where = f"{rec.frame.file_id}:{rec.stmt.line}: "
        else:
            where = ""
        raise MiniRuntimeFault(where + message)

    # -- instances ------------------------------------------------------------

    def _materialize(self, key: str, name: str, value, fresh: bool,
                     scope: Optional[str],
                     on_path: frozenset = frozenset()) -> str:
        content = render_value(value)
        if isinstance(value, (HeapObject, NativeArray)):
            loc_token = f"h{value.heap_id}"
        else:
            loc_token = key
        cached = self._cache.get(key)
        if not fresh and cached and cached[1:] == (content, loc_token):
            return cached[0]
        self._var_seq += 1
        vid = f"v{self._var_seq}"
        children = self._children_of(value, on_path)
        self.instances[vid] = VariableInstance(
            var_id=vid, name=name, type_name=type_name_of(value),
            content=content, location=MemoryLocation("recorded", loc_token),
            children=children)
        self._cache[key] = (vid, content, loc_token)
        self.index.instance_scopes[vid] = scope
        return vid

    def _children_of(self, value, on_path: frozenset) -> tuple:
        if not isinstance(value, (HeapObject, NativeArray)):
            return ()
        if value.heap_id in on_path:
            return ()  # cycle: the edge where we re-entered is cut
        on_path = on_path | {value.heap_id}
        edges = []
        if isinstance(value, NativeArray):
            labeled = ((str(i), item) for i, item in enumerate(value.items))
        else:
            labeled = iter(value.fields.items())
        for label, item in labeled:
            key = f"c{value.heap_id}.{label}"
            vid = self._materialize(key, label, item, fresh=False, scope=None,
                                    on_path=on_path)
            edges.append((label, vid))
        return tuple(edges)

    def _note_read(self, vid: str) -> None:
        rec = self._records[-1]
        if vid not in rec.reads:
            rec.reads.append(vid)

    def _read_slot(self, frame: _Frame, name: str):
        if name not in frame.vars:
            self._fault(f"undefined variable '{name}'")
        value = frame.vars[name]
        vid = self._materialize(f"s{frame.uid}.{name}", name, value,
                                fresh=False, scope=frame.file_id)
        self._note_read(vid)
        return value

    def _write_slot(self, frame: _Frame, name: str, value) -> None:
        frame.vars[name] = value
        vid = self._materialize(f"s{frame.uid}.{name}", name, value,
                                fresh=True, scope=frame.file_id)
        self._records[-1].writes.append(vid)

    def _read_cell(self, heap_id: int, label: str, value):
        vid = self._materialize(f"c{heap_id}.{label}", label, value,
                                fresh=False, scope=None)
        self._note_read(vid)
        return value

    def _write_cell(self, heap_id: int, label: str, value) -> None:
        vid = self._materialize(f"c{heap_id}.{label}", label, value,
                                fresh=True, scope=None)
        self._records[-1].writes.append(vid)

    # -- statements -----------------------------------------------------------

    def _exec_block(self, stmts: list, frame: _Frame) -> None:
        for stmt in stmts:
            self._exec_stmt(stmt, frame)

    def _exec_stmt(self, stmt: ast.Stmt, frame: _Frame) -> None:
        if isinstance(stmt, ast.If):
            branch = stmt.then_body if self._cond(stmt, frame) else stmt.else_body
            self._exec_block(branch, frame)
            return
        if isinstance(stmt, ast.While):
            while self._cond(stmt, frame):
                self._exec_block(stmt.body, frame)
            return
        rec = self._begin(stmt, frame)
        try:
            if isinstance(stmt, ast.VarDecl):
                if stmt.name in frame.vars:
                    self._fault(f"redeclared variable '{stmt.name}'")
                self._write_slot(frame, stmt.name, self._eval(stmt.expr, frame))
            elif isinstance(stmt, ast.Assign):
                self._assign(stmt, frame)
            elif isinstance(stmt, ast.ExprStmt):
                self._eval(stmt.expr, frame)
            elif isinstance(stmt, ast.Return):
                value = None if stmt.expr is None else self._eval(stmt.expr, frame)
                raise _ReturnSignal(value)
            else:
                raise AssertionError(f"unexpected statement {stmt!r}")
        finally:
            self._finish(rec)

    def _cond(self, stmt, frame: _Frame) -> bool:
        rec = self._begin(stmt, frame)
        try:
            value = self._eval(stmt.cond, frame)
            if not isinstance(value, bool):
                self._fault(f"condition must be a bool, got {type_name_of(value)}")
        finally:
            self._finish(rec)
        return value

    def _assign(self, stmt: ast.Assign, frame: _Frame) -> None:
        target = stmt.target
        if isinstance(target, ast.VarRef):
            if target.name not in frame.vars:
                self._fault(f"assignment to undeclared variable '{target.name}'")
            self._write_slot(frame, target.name, self._eval(stmt.expr, frame))
            return
        if isinstance(target, ast.FieldAccess):
            obj = self._eval(target.obj, frame)
            if not isinstance(obj, HeapObject):
                self._fault(f"field assignment on {type_name_of(obj)}")
            value = self._eval(stmt.expr, frame)
            obj.fields[target.name] = value
            self._write_cell(obj.heap_id, target.name, value)
            return
        assert isinstance(target, ast.IndexAccess)
        arr = self._eval(target.obj, frame)
        if not isinstance(arr, NativeArray):
            self._fault(f"index assignment on {type_name_of(arr)}")
        idx = self._int_index(self._eval(target.index, frame))
        if idx > _MAX_ARRAY_INDEX:
            self._fault(f"array index {idx} too large")
        value = self._eval(stmt.expr, frame)
        if idx >= len(arr.items):
            arr.items.extend([None] * (idx + 1 - len(arr.items)))
        arr.items[idx] = value
        self._write_cell(arr.heap_id, str(idx), value)

    def _int_index(self, idx) -> int:
        if not isinstance(idx, int) or isinstance(idx, bool):
            self._fault(f"array index must be an int, got {type_name_of(idx)}")
        if idx < 0:
            self._fault(f"array index {idx} is negative")
        return idx

    # -- expressions ----------------------------------------------------------

    def _eval(self, node, frame: _Frame):
        if isinstance(node, ast.IntLit):
            return node.value
        if isinstance(node, ast.StrLit):
            return node.value
        if isinstance(node, ast.BoolLit):
            return node.value
        if isinstance(node, ast.NullLit):
            return None
        if isinstance(node, ast.VarRef):
            return self._read_slot(frame, node.name)
        if isinstance(node, ast.FieldAccess):
            obj = self._eval(node.obj, frame)
            if not isinstance(obj, HeapObject):
                self._fault(f"field access on {type_name_of(obj)}")
            if node.name not in obj.fields:
                self._fault(f"{obj.type_name} object has no field '{node.name}'")
            return self._read_cell(obj.heap_id, node.name, obj.fields[node.name])
        if isinstance(node, ast.IndexAccess):
            arr = self._eval(node.obj, frame)
            if not isinstance(arr, NativeArray):
                self._fault(f"index access on {type_name_of(arr)}")
            idx = self._int_index(self._eval(node.index, frame))
            if idx >= len(arr.items):
                self._fault(f"array index {idx} out of range")
            return self._read_cell(arr.heap_id, str(idx), arr.items[idx])
        if isinstance(node, ast.Unary):
            return self._unary(node, frame)
        if isinstance(node, ast.Binary):
            return self._binary(node, frame)
        if isinstance(node, ast.Call):
            return self._call(node, frame)
        if isinstance(node, ast.MethodCall):
            return self._method_call(node, frame)
        if isinstance(node, ast.New):
            return self._new(node, frame)
        raise AssertionError(f"unexpected expression {node!r}")

    def _unary(self, node: ast.Unary, frame: _Frame):
        value = self._eval(node.operand, frame)
        if node.op == "-":
            if isinstance(value, bool) or not isinstance(value, int):
                self._fault(f"unary '-' on {type_name_of(value)}")
            return -value
        if not isinstance(value, bool):
            self._fault(f"'!' on {type_name_of(value)}")
        return not value

    def _binary(self, node: ast.Binary, frame: _Frame):
        op = node.op
        if op in ("&&", "||"):
            left = self._require_bool(self._eval(node.left, frame), op)
            if op == "&&" and not left:
                return False
            if op == "||" and left:
                return True
            return self._require_bool(self._eval(node.right, frame), op)
        left = self._eval(node.left, frame)
        right = self._eval(node.right, frame)
        if op == "==":
            return self._equal(left, right)
        if op == "!=":
            return not self._equal(left, right)
        if op == "+" and isinstance(left, str) and isinstance(right, str):
            return left + right
        if op in ("+", "-", "*", "/", "%", "<", "<=", ">", ">="):
            if not self._both_ints(left, right):
                self._fault(f"'{op}' on {type_name_of(left)} and "
                            f"{type_name_of(right)}")
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if op in ("/", "%"):
                if right == 0:
                    self._fault("division by zero")
                quotient = abs(left) // abs(right)
                if (left < 0) != (right < 0):
                    quotient = -quotient
                return quotient if op == "/" else left - quotient * right
            return {"<": left < right, "<=": left <= right,
                    ">": left > right, ">=": left >= right}[op]
        raise AssertionError(f"unexpected operator {op!r}")

    def _require_bool(self, value, op: str) -> bool:
        if not isinstance(value, bool):
            self._fault(f"'{op}' on {type_name_of(value)}")
        return value

    @staticmethod
    def _both_ints(left, right) -> bool:
        return (isinstance(left, int) and not isinstance(left, bool) and
                isinstance(right, int) and not isinstance(right, bool))

    @staticmethod
    def _equal(left, right) -> bool:
        if isinstance(left, (HeapObject, NativeArray)) or \
                isinstance(right, (HeapObject, NativeArray)):
            return left is right
        if left is None or right is None:
            return left is None and right is None
        if isinstance(left, bool) != isinstance(right, bool) or \
                type(left) is not type(right):
            return False
        return left == right

    # -- calls ----------------------------------------------------------------

    def _call(self, node: ast.Call, frame: _Frame):
        fn = self.parsed.functions.get(node.name)
        if fn is None:
            if node.name in BUILTIN_NAMES:
                args = [self._eval(a, frame) for a in node.args]
                self._records[-1].calls.append(CalledRoutine(node.name))
                return self._builtin(node.name, args)
            self._fault(f"unknown function '{node.name}'")
        args = [self._eval(a, frame) for a in node.args]
        return self._invoke(fn, args)

    def _method_call(self, node: ast.MethodCall, frame: _Frame):
        recv = self._eval(node.recv, frame)
        if not isinstance(recv, HeapObject):
            self._fault(f"method call on {type_name_of(recv)}")
        fn = self.parsed.functions.get(f"{recv.type_name}.{node.name}")
        if fn is None:
            self._fault(f"{recv.type_name} has no method '{node.name}'")
        args = [recv] + [self._eval(a, frame) for a in node.args]
        return self._invoke(fn, args)

    def _new(self, node: ast.New, frame: _Frame):
        if node.type_name == "Array":
            if node.args:
                self._fault("Array takes no constructor arguments")
            self._heap_seq += 1
            return NativeArray(self._heap_seq)
        self._heap_seq += 1
        obj = HeapObject(self._heap_seq, node.type_name)
        init = self.parsed.functions.get(f"{node.type_name}.init")
        if init is not None:
            args = [obj] + [self._eval(a, frame) for a in node.args]
            self._invoke(init, args)
        elif node.args:
            self._fault(f"type {node.type_name} has no initializer")
        return obj

    def _invoke(self, fn: ast.Function, args: list):
        if len(args) != len(fn.params):
            self._fault(f"{fn.name} expects {len(fn.params)} argument(s), "
                        f"got {len(args)}")
        if self._depth >= self.max_call_depth:
            self._fault(f"call depth limit of {self.max_call_depth} exceeded")
        call_rec = self._records[-1]
        call_rec.calls.append(CalledRoutine(fn.name, fn.file_id, fn.source))
        callee = self._new_frame(fn, call_step=call_rec.step_id)
        # Formal bindings are writes of the call site's step: the argument
        # read and the formal write share a location, making the aliasing
        # introduced by the call visible in the trace.
        for param, value in zip(fn.params, args):
            self._write_slot(callee, param, value)
        self._depth += 1
        try:
            self._exec_block(fn.body, callee)
        except _ReturnSignal as signal:
            return signal.value
        finally:
            self._depth -= 1
        return None

    def _new_frame(self, fn: ast.Function, call_step: Optional[int]) -> _Frame:
        self._frame_seq += 1
        return _Frame(uid=self._frame_seq, routine=fn.name,
                      file_id=fn.file_id, call_step=call_step)

    # -- builtins -------------------------------------------------------------

    def _builtin(self, name: str, args: list):
        if name == "rand":
            self._expect_args("rand", args, 1)
            bound = args[0]
            if isinstance(bound, bool) or not isinstance(bound, int) or bound <= 0:
                self._fault("rand expects a positive int bound")
            return self.rng.randrange(bound)
        if name == "print":
            self.stdout.append(" ".join(render_value(a) for a in args) + "\n")
            return None
        if name == "str":
            self._expect_args("str", args, 1)
            return render_value(args[0])
        if name == "strlen":
            self._expect_args("strlen", args, 1)
            if not isinstance(args[0], str):
                self._fault(f"strlen on {type_name_of(args[0])}")
            return len(args[0])
        if name == "strget":
            self._expect_args("strget", args, 2)
            text, idx = args
            if not isinstance(text, str):
                self._fault(f"strget on {type_name_of(text)}")
            idx = self._int_index(idx)
            if idx >= len(text):
                self._fault(f"string index {idx} out of range")
            return text[idx]
        raise AssertionError(f"unexpected builtin {name!r}")

    def _expect_args(self, name: str, args: list, count: int) -> None:
        if len(args) != count:
            self._fault(f"{name} expects {count} argument(s), got {len(args)}")


def execute(parsed: ast.ParsedProgram, seed: int = 0,
            step_budget: int = 1_000_000) -> ExecutionRecorder:
    """Run a parsed program to completion (or fault) and return the recorder."""
    recorder = ExecutionRecorder(parsed, seed=seed, step_budget=step_budget)
    recorder.run()
    return recorder
