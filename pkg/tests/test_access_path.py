"""Access paths: grammar, canonical rendering, positioned errors, resolution."""

import random

import pytest

from conftest import random_path_text
from recovslice.access_path import (PathSegment, ReferencePath, parse_path,
                                    prefixes, render_path, resolve_in_graph)
from recovslice.errors import PathSyntaxError, RootMismatch
from recovslice.object_graph import ObjectGraph, ObjectNode


class TestParsing:
    def test_root_only(self):
        path = parse_path("x")
        assert len(path) == 1
        assert path.root_name == "x"
        assert path.segments[0].kind == "root"

    def test_motivating_path(self):
        path = parse_path("sharedList.elementData[0].value[1]")
        kinds = [s.kind for s in path.segments]
        assert kinds == ["root", "field", "index", "field", "index"]
        assert path.segments[1].name == "elementData"
        assert path.segments[2].index_value() == 0
        assert path.segments[4].index_value() == 1
        assert path.render() == "sharedList.elementData[0].value[1]"

    def test_map_key_path(self):
        path = parse_path('map.table[14].hash')
        assert path.segments[2].index_expr == "14"
        assert path.segments[2].selector == "14"
        string_key = parse_path('map.table["14"].hash')
        assert string_key.segments[2].index_expr == '"14"'
        assert string_key.segments[2].index_value() == "14"
        # Same selector label but distinct canonical spellings.
        assert string_key.render() != path.render()
        assert string_key.segments[2].selector == path.segments[2].selector

    def test_dollar_in_identifier(self):
        path = parse_path("a$1._x0")
        assert [s.name for s in path.segments] == ["a$1", "_x0"]


class TestCanonicalRendering:
    def test_leading_zeros_dropped(self):
        assert parse_path("a[007]").render() == "a[7]"
        assert parse_path("a[000]").render() == "a[0]"

    def test_string_keys_reescaped(self):
        path = parse_path('a["x\\"y\\\\z"]')
        assert path.segments[1].index_value() == 'x"y\\z'
        assert path.render() == 'a["x\\"y\\\\z"]'

    def test_render_path_matches_method(self):
        path = parse_path("a.b[2]")
        assert render_path(path) == path.render() == str(path)

    def test_random_round_trip(self):
        rng = random.Random(20260814)
        for _ in range(1000):
            text = random_path_text(rng)
            parsed = parse_path(text)
            assert parsed.render() == text
            assert parse_path(parsed.render()) == parsed


# (malformed text, expected byte offset, message fragment)
MALFORMED = [
    ("", 0, "root identifier"),
    ("1x", 0, "root identifier"),
    (".x", 0, "root identifier"),
    ("$a", 0, "root identifier"),
    ("[0]", 0, "root identifier"),
    ("a.", 2, "field name"),
    ("a..b", 2, "field name"),
    ("a.3", 2, "field name"),
    ("a.[0]", 2, "field name"),
    ("a b", 1, "unexpected character"),
    ("a,b", 1, "unexpected character"),
    ("a]", 1, "unexpected character"),
    ("a[3]]", 4, "unexpected character"),
    ("a[", 2, "unterminated index"),
    ("a.b[", 4, "unterminated index"),
    ("a[]", 2, "integer or a quoted string"),
    ("a[b]", 2, "integer or a quoted string"),
    ("a[-1]", 2, "integer or a quoted string"),
    ("a[3", 3, "expected ']'"),
    ("a[3.5]", 3, "expected ']'"),
    ("a[0x1]", 3, "expected ']'"),
    ('a["k"x]', 5, "expected ']'"),
    ('a["x', 4, "unterminated string"),
    ('a["x\\q"]', 4, "bad escape"),
]


class TestMalformed:
    @pytest.mark.parametrize("text,offset,fragment", MALFORMED,
                             ids=[repr(m[0]) for m in MALFORMED])
    def test_rejected_with_position(self, text, offset, fragment):
        with pytest.raises(PathSyntaxError) as err:
            parse_path(text)
        assert err.value.offset == offset
        assert fragment in str(err.value)
        assert f"at offset {offset}" in str(err.value)

    def test_non_string_input(self):
        with pytest.raises(PathSyntaxError, match="must be a string"):
            parse_path(42)

    def test_expected_tokens_reported(self):
        with pytest.raises(PathSyntaxError) as err:
            parse_path("a,b")
        assert set(err.value.expected) == {".", "["}


class TestPathAlgebra:
    def test_prefixes_are_proper(self):
        path = parse_path("a.b[0].c")
        assert [p.render() for p in prefixes(path)] == ["a", "a.b", "a.b[0]"]
        assert prefixes(parse_path("a")) == []

    def test_prefix_and_child(self):
        path = parse_path("a.b[0].c")
        assert path.prefix(2).render() == "a.b"
        grown = path.child(PathSegment("field", "d"))
        assert grown.render() == "a.b[0].c.d"
        assert len(grown) == 5

    def test_segment_invariant(self):
        with pytest.raises(ValueError):
            PathSegment("field", "x", index_expr="3")
        with pytest.raises(ValueError):
            PathSegment("index")

    def test_path_must_start_at_root(self):
        with pytest.raises(ValueError):
            ReferencePath(())
        with pytest.raises(ValueError):
            ReferencePath((PathSegment("field", "x"),))


class TestGraphResolution:
    @pytest.fixture()
    def graph(self):
        root = ObjectNode("sharedList", "List")
        data = root.add(ObjectNode("elementData", "array"))
        slot = data.add(ObjectNode("0", "StrBuf"))
        value = slot.add(ObjectNode("value", "array"))
        value.add(ObjectNode("1", "string", "0"))
        return ObjectGraph(root)

    def test_resolves_leaf(self, graph):
        node = resolve_in_graph(
            parse_path("sharedList.elementData[0].value[1]"), graph)
        assert node.value == "0" and node.is_leaf

    def test_accepts_bare_node(self, graph):
        node = resolve_in_graph(parse_path("sharedList.elementData"),
                                graph.root)
        assert node.name == "elementData"

    def test_missing_edge_is_none(self, graph):
        assert resolve_in_graph(
            parse_path("sharedList.elementData[3]"), graph) is None

    def test_root_mismatch(self, graph):
        with pytest.raises(RootMismatch):
            resolve_in_graph(parse_path("other.elementData"), graph)
