"""Access-path parsing, rendering, and graph resolution.

Grammar:

    Path  ::= Var | Path '.' Field | Path '[' Expr ']'
    Var, Field ::= [A-Za-z_][A-Za-z0-9_$]*
    Expr  ::= decimal integer | double-quoted string literal

Example: ``sharedList.elementData[0].value[1]``.  Rendering is canonical
(integer indices lose leading zeros, string keys are re-escaped), and
``parse_path(render_path(p))`` is the identity on parsed paths.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from .errors import PathSyntaxError, RootMismatch

if TYPE_CHECKING:
    from .object_graph import ObjectGraph, ObjectNode

__all__ = [
    "PathSegment",
    "ReferencePath",
    "parse_path",
    "render_path",
    "prefixes",
    "resolve_in_graph",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_DIGITS = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class PathSegment:
    """One hop: the root variable, a field access, or an indexing."""

    kind: str  # "root" | "field" | "index"
    name: str = ""  # root or field name; empty for index segments
    index_expr: Optional[str] = None  # canonical literal, e.g. '3' or '"k"'

    def __post_init__(self):
        if (self.index_expr is not None) != (self.kind == "index"):
            raise ValueError("index_expr present iff kind == 'index'")

    def index_value(self) -> int | str:
        """Decode an index literal to its int or string value."""
        assert self.kind == "index" and self.index_expr is not None
        if self.index_expr.startswith('"'):
            return _unescape(self.index_expr[1:-1])
        return int(self.index_expr)

    @property
    def selector(self) -> str:
        """Edge label this segment selects in an object graph."""
        if self.kind == "index":
            val = self.index_value()
            return val if isinstance(val, str) else str(val)
        return self.name


@dataclass(frozen=True)
class ReferencePath:
    """A parsed access path; ``segments[0]`` is always the root."""

    segments: tuple[PathSegment, ...]

    def __post_init__(self):
        if not self.segments or self.segments[0].kind != "root":
            raise ValueError("a path starts with a root segment")

    @property
    def root_name(self) -> str:
        return self.segments[0].name

    def __len__(self) -> int:
        return len(self.segments)

    def render(self) -> str:
        out = [self.segments[0].name]
        for seg in self.segments[1:]:
            if seg.kind == "field":
                out.append(f".{seg.name}")
            else:
                out.append(f"[{seg.index_expr}]")
        return "".join(out)

    def __str__(self) -> str:
        return self.render()

    def prefix(self, length: int) -> "ReferencePath":
        return ReferencePath(self.segments[:length])

    def child(self, segment: PathSegment) -> "ReferencePath":
        return ReferencePath(self.segments + (segment,))


def parse_path(text: str) -> ReferencePath:
    """Parse an access path, raising PathSyntaxError with a byte offset."""
    if not isinstance(text, str):
        raise PathSyntaxError("path must be a string", 0)
    pos = 0
    n = len(text)
    m = _IDENT.match(text, pos)
    if not m:
        raise PathSyntaxError("expected a root identifier", pos,
                              expected=("identifier",))
    segments = [PathSegment("root", m.group())]
    pos = m.end()
    while pos < n:
        ch = text[pos]
        if ch == ".":
            m = _IDENT.match(text, pos + 1)
            if not m:
                raise PathSyntaxError("expected a field name after '.'",
                                      pos + 1, expected=("identifier",))
            segments.append(PathSegment("field", m.group()))
            pos = m.end()
        elif ch == "[":
            expr, pos = _parse_index(text, pos + 1)
            segments.append(PathSegment("index", index_expr=expr))
        else:
            raise PathSyntaxError(f"unexpected character {ch!r}", pos,
                                  expected=(".", "["))
    return ReferencePath(tuple(segments))


def _parse_index(text: str, pos: int) -> tuple[str, int]:
    """Parse the Expr of 'Path [ Expr ]'; returns (canonical literal, pos)."""
    n = len(text)
    if pos >= n:
        raise PathSyntaxError("unterminated index", pos,
                              expected=("integer", "string"))
    if text[pos] == '"':
        chars = []
        i = pos + 1
        while i < n:
            c = text[i]
            if c == '"':
                i += 1
                break
            if c == "\\":
                if i + 1 >= n or text[i + 1] not in ('"', "\\"):
                    raise PathSyntaxError("bad escape in string index", i,
                                          expected=('\\"', "\\\\"))
                chars.append(text[i + 1])
                i += 2
            else:
                chars.append(c)
                i += 1
        else:
            raise PathSyntaxError("unterminated string index", n,
                                  expected=('"',))
        canonical = '"' + _escape("".join(chars)) + '"'
    else:
        m = _DIGITS.match(text, pos)
        if not m:
            raise PathSyntaxError("index must be an integer or a quoted "
                                  "string", pos, expected=("integer", "string"))
        canonical = str(int(m.group()))
        i = m.end()
    if i >= n or text[i] != "]":
        raise PathSyntaxError("expected ']' to close the index", i,
                              expected=("]",))
    return canonical, i + 1


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def _unescape(value: str) -> str:
    out = []
    i = 0
    while i < len(value):
        if value[i] == "\\":
            out.append(value[i + 1])
            i += 2
        else:
            out.append(value[i])
            i += 1
    return "".join(out)


def render_path(path: ReferencePath) -> str:
    """Canonical text for a parsed path."""
    return path.render()


def prefixes(path: ReferencePath) -> list[ReferencePath]:
    """Proper prefixes from the root to the parent of the leaf.

    ``a.b[0].c`` yields [a, a.b, a.b[0]]; a root-only path yields [].
    """
    return [path.prefix(k) for k in range(1, len(path.segments))]


def resolve_in_graph(path: ReferencePath,
                     graph: "ObjectGraph | ObjectNode") -> "ObjectNode | None":
    """Walk a recovered object graph along `path`.

    Returns None when some edge is missing; raises RootMismatch when the
    graph is rooted at a different variable name.
    """
    node = getattr(graph, "root", graph)
    if node.name != path.root_name:
        raise RootMismatch(
            f"graph rooted at {node.name!r}, path at {path.root_name!r}")
    for seg in path.segments[1:]:
        node = node.child(seg.selector)
        if node is None:
            return None
    return node
