"""Recovered object graphs and their JSON wire format.

The wire format mirrors the recovery response layout: the top-level object
has a single key naming the root variable, nested objects use
``"name|type"`` keys, and leaves are strings.  Non-leaf nodes carry no value
on the wire, so parsing assigns them an empty content string; graphs meant
for byte-stable round-trips should be in that "wire-normal" form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import MalformedGraph

__all__ = ["ObjectNode", "ObjectGraph", "node_from_wire", "ALL_FIELDS_TOKEN"]

# Focal-path sentinel asking for a complete expansion.
ALL_FIELDS_TOKEN = "#all_fields#"


@dataclass(eq=False)
class ObjectNode:
    """One recovered variable: name, type, rendered value, child fields."""

    name: str
    type_name: str = ""
    value: str = ""
    children: list["ObjectNode"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def child(self, label: str) -> Optional["ObjectNode"]:
        for node in self.children:
            if node.name == label:
                return node
        return None

    def add(self, node: "ObjectNode") -> "ObjectNode":
        self.children.append(node)
        return node

    def to_wire_value(self):
        if self.is_leaf:
            return self.value
        return {f"{c.name}|{c.type_name}": c.to_wire_value()
                for c in self.children}

    def structurally_equal(self, other: "ObjectNode") -> bool:
        if (self.name, self.type_name, self.value) != \
                (other.name, other.type_name, other.value):
            return False
        if len(self.children) != len(other.children):
            return False
        return all(a.structurally_equal(b)
                   for a, b in zip(self.children, other.children))


@dataclass(eq=False)
class ObjectGraph:
    """A graph rooted at a single variable."""

    root: ObjectNode

    @property
    def root_name(self) -> str:
        return self.root.name

    def to_wire_obj(self, typed_root: bool = False) -> dict:
        """A.1-shaped dict: bare root key by default, `name|type` if typed."""
        key = f"{self.root.name}|{self.root.type_name}" if typed_root \
            else self.root.name
        return {key: self.root.to_wire_value()}

    def to_wire_json(self, typed_root: bool = False, indent: int = 2) -> str:
        return json.dumps(self.to_wire_obj(typed_root=typed_root),
                          indent=indent, ensure_ascii=False)

    def to_compact_json(self, typed_root: bool = True) -> str:
        """One-line rendering used inside alias/definition prompts."""
        return json.dumps(self.to_wire_obj(typed_root=typed_root),
                          separators=(",", ":"), ensure_ascii=False)

    def structurally_equal(self, other: "ObjectGraph") -> bool:
        return self.root.structurally_equal(other.root)

    @classmethod
    def from_wire_obj(cls, obj) -> "ObjectGraph":
        if not isinstance(obj, dict) or len(obj) != 1:
            raise MalformedGraph("expected a single root key")
        (key, value), = obj.items()
        name, _, type_name = key.partition("|")
        if not name:
            raise MalformedGraph("root key must name the variable")
        return cls(root=node_from_wire(name, type_name, value))


def node_from_wire(name: str, type_name: str, value) -> ObjectNode:
    """Build a node from a wire value (string leaf, dict or list subtree)."""
    node = ObjectNode(name=name, type_name=type_name)
    if isinstance(value, dict):
        for key, sub in value.items():
            child_name, sep, child_type = key.partition("|")
            if not sep:
                raise MalformedGraph(
                    f"object key {key!r} is missing the '|' type separator")
            node.add(node_from_wire(child_name, child_type, sub))
    elif isinstance(value, list):
        # Lists arrive element-by-element; labels are decimal positions.
        for i, sub in enumerate(value):
            node.add(node_from_wire(str(i), "", sub))
    elif isinstance(value, str):
        node.value = value
    elif isinstance(value, (int, float, bool)) or value is None:
        node.value = json.dumps(value)
    else:
        raise MalformedGraph(f"unsupported wire value {value!r}")
    return node
