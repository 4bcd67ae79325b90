"""Adaptive recovery examples: probe synthesis, replay, and fallback edges."""

import pytest

from recovslice.context_gen import (PROBE_LINE_BUDGET, PROBE_ROOT,
                                    build_adaptive_example, harvest_example,
                                    synthesize_probe)
from recovslice.errors import ProbeFault, UnsupportedShape
from recovslice.estimator.base import RecoveryRequest


def _request(type_name, value, *, code="var out = thing.size();",
             root="thing", focal=None):
    return RecoveryRequest(root_name=root, root_type=type_name,
                           root_value=value, step_code=code, step_id=5,
                           step_key=("main.mini", 5, 1), focal_path=focal)


class TestProbeSynthesis:
    def test_list_of_strings(self):
        candidates = synthesize_probe("List", '["a", "b"]')
        source, adapted = candidates[-1]
        assert f"var {PROBE_ROOT} = new List();" in source
        assert f'{PROBE_ROOT}.add("a");' in source
        assert f'{PROBE_ROOT}.add("b");' in source
        assert not adapted

    def test_map_pairs(self):
        candidates = synthesize_probe("Map", '{k=1, n="two", }')
        source, _ = candidates[-1]
        assert f'{PROBE_ROOT}.put("k", 1);' in source
        assert f'{PROBE_ROOT}.put("n", "two");' in source

    def test_strbuf_uses_raw_text(self):
        candidates = synthesize_probe("StrBuf", "002")
        source, _ = candidates[-1]
        assert f'var {PROBE_ROOT} = new StrBuf("002");' in source

    def test_record_fields(self):
        candidates = synthesize_probe("Point", "{x=1, y=2, }")
        source, _ = candidates[-1]
        assert f"var {PROBE_ROOT} = new Point();" in source
        assert f"{PROBE_ROOT}.x = 1;" in source

    def test_adapted_line_candidate_comes_first(self):
        candidates = synthesize_probe("List", "[1]",
                                      step_code="var n = items.size();",
                                      root_name="items")
        assert candidates[0][1] is True
        assert f"var n = {PROBE_ROOT}.size();" in candidates[0][0]
        assert candidates[-1][1] is False

    def test_unadaptable_line_is_skipped(self):
        # The root never appears in the code, so only the bare probe remains.
        candidates = synthesize_probe("List", "[1]",
                                      step_code="var n = other.size();",
                                      root_name="items")
        assert [used for _, used in candidates] == [False]

    def test_bare_object_elements_unsupported(self):
        # Records render bare inside lists; nothing scalar to rebuild.
        with pytest.raises(UnsupportedShape):
            synthesize_probe("List", "[{q=1, }]")

    def test_nested_renderings_unsupported(self):
        with pytest.raises(UnsupportedShape):
            synthesize_probe("Point", "{inner={x=1, }, }")

    def test_primitive_roots_unsupported(self):
        with pytest.raises(UnsupportedShape):
            synthesize_probe("int", "3")

    def test_budget_overrun_unsupported(self):
        rendered = "[" + ", ".join(str(i) for i in range(50)) + "]"
        with pytest.raises(UnsupportedShape, match="probe lines"):
            synthesize_probe("List", rendered)
        # A raised budget admits the same shape.
        assert synthesize_probe("List", rendered, budget=60)


class TestHarvest:
    def test_example_reflects_replayed_state(self):
        source, _ = synthesize_probe("List", '["002"]')[-1]
        example = harvest_example(source, focal_path=f"{PROBE_ROOT}[0]")
        assert example.type_name == "List"
        assert example.value == '["002"]'
        assert example.path == f"{PROBE_ROOT}[0]"
        assert '"002"' in example.output
        assert any(s.startswith("List:") for s in example.structures)

    def test_faulting_probe_raises(self):
        with pytest.raises(ProbeFault, match="faulted"):
            harvest_example("fn main() {\n  var probe = ghost;\n}\n")

    def test_probe_must_observe_the_root(self):
        with pytest.raises(ProbeFault, match="never observed"):
            harvest_example("fn main() {\n  var other = 1;\n}\n")


class TestBuildAdaptiveExample:
    def test_list_request_harvests(self):
        harvested = build_adaptive_example(
            _request("List", '["002"]', code="var r = thing.get(0);",
                     focal="thing.elementData[0]"))
        assert harvested.adapted_step_line is True
        assert harvested.example.path == f"{PROBE_ROOT}.elementData[0]"
        assert f"var r = {PROBE_ROOT}.get(0);" in harvested.probe_source
        assert PROBE_ROOT in harvested.example.output

    def test_focal_path_rerooted_or_dropped(self):
        harvested = build_adaptive_example(
            _request("List", "[1]", focal="unrelated.x"))
        assert harvested.example.path is None
        rooted = build_adaptive_example(_request("List", "[1]",
                                                 focal="thing"))
        assert rooted.example.path == PROBE_ROOT

    def test_falls_back_past_faulting_adapted_line(self):
        # The adapted line `probe.pop();` calls a method List lacks, so the
        # first candidate faults and the bare probe must serve instead.
        harvested = build_adaptive_example(
            _request("List", "[1]", code="thing.pop();"))
        assert harvested.adapted_step_line is False

    def test_unsupported_shape_propagates(self):
        with pytest.raises(UnsupportedShape):
            build_adaptive_example(_request("List", "[{q=1, }]"))

    def test_budget_is_honored(self):
        rendered = "[" + ", ".join(str(i) for i in range(PROBE_LINE_BUDGET)) \
            + "]"
        with pytest.raises(UnsupportedShape):
            build_adaptive_example(_request("List", rendered))
