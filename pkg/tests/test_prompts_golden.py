"""Prompt templates are a pinned surface: reference inputs → exact bytes.

Prompts are cached by content hash, so any wording drift silently invalidates
every recorded cache.  These tests regenerate the three checked-in reference
prompts and parse their recorded responses.
"""

from pathlib import Path

import pytest

from recovslice.access_path import parse_path, resolve_in_graph
from recovslice.estimator.base import RecoveryRequest
from recovslice.llm_backend.parsing import (parse_alias_response,
                                            parse_graph_response,
                                            parse_verdict_response)
from recovslice.llm_backend.prompts import (STATIC_RECOVERY_EXAMPLE,
                                            PromptExample, build_alias_prompt,
                                            build_definition_prompt,
                                            build_recovery_prompt)
from recovslice.object_graph import ALL_FIELDS_TOKEN

GOLDEN = Path(__file__).parent / "golden"

ASR_TYPE = "java.util.concurrent.atomic.AtomicStampedReference"
ASR_STRUCTURE = (f"{ASR_TYPE}:{{{ASR_TYPE}$Pair pair;}}",)
ASR_GRAPH_42 = (f'{{"atomicRef|{ASR_TYPE}":'
                f'{{"pair|{ASR_TYPE}$Pair":{{"reference|String":"42"}}}}}}')
USAGE_LINE = "Integer value = atomicRef.getReference();"


def _golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


def reference_recovery_prompt() -> str:
    return build_recovery_prompt(
        name="atomicRef", type_name=ASR_TYPE, value="{pair={}, }",
        path="atomicRef.pair.reference", structures=ASR_STRUCTURE,
        code=USAGE_LINE)


def reference_alias_prompt() -> str:
    ctor = ("public AtomicStampedReference(V initialRef, int initialStamp) {\n"
            "    this.pair = Pair.of(initialRef, initialStamp);\n}")
    return build_alias_prompt(
        code=("AtomicStampedReference<Integer> atomicRef = "
              "new AtomicStampedReference<>(initialRef, initialStamp);"),
        callee_sources=[ctor],
        variables=[("initialRef", "java.lang.Integer"),
                   ("initialStamp", "int"),
                   ("AtomicStampedReference_instance", ASR_TYPE),
                   ("atomicRef", ASR_TYPE)],
        variable_fields=[("initialRef", {}),
                         ("AtomicStampedReference_instance",
                          {"pair": f"{ASR_TYPE}$Pair"})],
        root_name="atomicRef", graph_json=ASR_GRAPH_42,
        known_aliases=["AtomicStampedReference_instance", "atomicRef"],
        fields_of_interest=["atomicRef", "atomicRef.pair",
                            "atomicRef.pair.reference"])


def reference_definition_prompt() -> str:
    cas = ("public boolean compareAndSet(V expectedReference, V newReference,"
           " int expectedStamp, int newStamp) {\n"
           "    Pair<V> current = this.pair;\n"
           "    return expectedReference == current.reference &&"
           " expectedStamp == current.stamp && (newReference =="
           " current.reference && newStamp == current.stamp ||"
           " this.casPair(current, Pair.of(newReference, newStamp)));\n}")
    target = ("boolean updated = atomicRef.compareAndSet(expectedRef, newRef,"
              " expectedStamp, newStamp);")
    null_graph = ASR_GRAPH_42.replace('"42"', '"null"')
    return build_definition_prompt(
        target_code=target,
        callee_sources=[cas],
        variables=[("newRef", "java.lang.Integer", "200"),
                   ("newStamp", "int", "2"),
                   ("expectedRef", "java.lang.Integer", "100"),
                   ("expectedStamp", "int", "1"),
                   ("atomicRef", ASR_TYPE, null_graph)],
        root_name="atomicRef", graph_json=ASR_GRAPH_42,
        usage_code=USAGE_LINE, field_path="atomicRef.pair.reference")


class TestGoldenPrompts:
    def test_recovery_prompt_matches_bytes(self):
        assert reference_recovery_prompt() == _golden("recovery_atomicref.txt")

    def test_alias_prompt_matches_bytes(self):
        assert reference_alias_prompt() == _golden("alias_atomicref.txt")

    def test_definition_prompt_matches_bytes(self):
        assert reference_definition_prompt() == _golden("def_compareandset.txt")


class TestGoldenResponses:
    def test_recovery_response_parses_to_reference_42(self):
        graph = parse_graph_response(_golden("recovery_atomicref_response.txt"))
        assert graph.root_name == "atomicRef"
        leaf = resolve_in_graph(parse_path("atomicRef.pair.reference"), graph)
        assert leaf.value == "42"
        assert leaf.type_name == "java.lang.Integer"

    def test_alias_response_parses_to_three_pairs(self):
        pairs = parse_alias_response(_golden("alias_atomicref_response.txt"))
        assert pairs == {
            "atomicRef": "AtomicStampedReference_instance",
            "atomicRef.pair": "AtomicStampedReference_instance.pair",
            "atomicRef.pair.reference": "initialRef",
        }

    def test_in_prompt_example_response_parses_to_item_pair(self):
        # The worked example inside the alias template is itself parseable.
        prompt = _golden("alias_atomicref.txt")
        start = prompt.index("Your response should be:")
        end = prompt.index("<Question>")
        pairs = parse_alias_response(prompt[start:end])
        assert pairs == {"list.elementData.elementData[0]": "item"}

    def test_verdict_response_is_true(self):
        assert parse_verdict_response(
            _golden("def_compareandset_response.txt")) is True


class TestTemplateMechanics:
    def test_all_fields_sentinel(self):
        example = PromptExample(value="{}", type_name="T", structures=("T:{}",),
                                path=None, output="{}")
        prompt = build_recovery_prompt(
            name="v", type_name="T", value="{}", path=ALL_FIELDS_TOKEN,
            structures=("T:{}",), code="v;", example=example)
        assert prompt.count(f"`{ALL_FIELDS_TOKEN}`") == 2

    def test_focal_or_all_defaults_to_sentinel(self):
        request = RecoveryRequest(root_name="v", root_type="T", root_value="{}",
                                  step_code="v;", step_id=1,
                                  step_key=("f", 1, 1))
        assert request.focal_or_all == ALL_FIELDS_TOKEN
        focused = RecoveryRequest(root_name="v", root_type="T", root_value="{}",
                                  step_code="v;", step_id=1,
                                  step_key=("f", 1, 1), focal_path="v.x")
        assert focused.focal_or_all == "v.x"

    def test_static_example_is_the_default(self):
        prompt = build_recovery_prompt(
            name="v", type_name="T", value="{}", path="v.x",
            structures=("T:{}",), code="v;")
        assert STATIC_RECOVERY_EXAMPLE.output in prompt
        assert STATIC_RECOVERY_EXAMPLE.value in prompt

    @pytest.mark.parametrize("slot,replacement", [
        ("name", "otherVar"),
        ("value", "{pair={x}, }"),
        ("path", "atomicRef.pair.stamp"),
    ])
    def test_single_slot_changes_are_local(self, slot, replacement):
        base = dict(name="atomicRef", type_name=ASR_TYPE, value="{pair={}, }",
                    path="atomicRef.pair.reference", structures=ASR_STRUCTURE,
                    code=USAGE_LINE)
        changed = dict(base)
        changed[slot] = replacement
        before = build_recovery_prompt(**base).splitlines()
        after = build_recovery_prompt(**changed).splitlines()
        assert len(before) == len(after)
        diff = [i for i, (a, b) in enumerate(zip(before, after)) if a != b]
        assert len(diff) == 1
