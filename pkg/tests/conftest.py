"""Shared fixtures: the motivating scenario, corpus samples, fake transports."""

from __future__ import annotations

import json
import string

import pytest

from recovslice.errors import EstimatorError, RecoveryFailed
from recovslice.estimator.oracle import OracleEstimator
from recovslice.evalkit import LEVELS, generate_case
from recovslice.micro_tracer.examples import motivating_case
from recovslice.micro_tracer.stdlib import CLASS_STRUCTURES
from recovslice.slicer import recovery_request_for

STRUCTURES = tuple(CLASS_STRUCTURES.values())


class DeadEstimator:
    """Fails every question; exercises the degradation paths."""

    def __init__(self):
        self.calls = 0

    def recover_object_graph(self, request):
        self.calls += 1
        raise RecoveryFailed("estimator is down")

    def infer_alias(self, trace, step, known_root, known_graph,
                    fields_of_interest, known_aliases=()):
        self.calls += 1
        raise EstimatorError("estimator is down")

    def infer_is_def(self, trace, target_step, usage_step, queried_field,
                     known_graph):
        self.calls += 1
        raise EstimatorError("estimator is down")


class ScriptedTransport:
    """Plays back a fixed response list, recording every prompt it sees."""

    def __init__(self, script):
        self.script = list(script)
        self.prompts: list[str] = []

    def __call__(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if not self.script:
            raise AssertionError(
                f"scripted transport exhausted at call {len(self.prompts)}")
        return self.script.pop(0)


def motivating_llm_script(case) -> list[str]:
    """Responses that walk the llm estimator through the motivating query.

    Call order is fixed by the engine: one recovery at the query step, alias
    checks at the six call sites touching known aliases (steps 1, 3, 4, 7,
    10, 12), then definition checks walking backwards (steps 12, 10, 7).
    The step-4 alias claim is what links `originalRef` to the stored
    element; the later aliases then follow from recorded locations.
    """
    request = recovery_request_for(case.partial, case.query.step_id,
                                   case.query.path,
                                   class_structures=STRUCTURES)
    graph = OracleEstimator(case.full).recover_object_graph(request)
    claim = json.dumps({"sharedList.elementData[0]": "originalRef"})
    return ([f"```json\n{graph.to_wire_json(indent=2)}\n```"] +
            ["```json\n{}\n```"] * 2 +
            [f"```json\n{claim}\n```"] +
            ["```json\n{}\n```"] * 3 +
            ["- **Answer:** <F>  "] * 2 +
            ["- **Answer:** <T>  "])


def random_path_text(rng) -> str:
    """A random access path in canonical form (render∘parse is identity)."""
    def ident():
        first = rng.choice(string.ascii_letters + "_")
        rest = "".join(rng.choice(string.ascii_letters + string.digits + "_$")
                       for _ in range(rng.randrange(0, 8)))
        return first + rest

    parts = [ident()]
    for _ in range(rng.randrange(0, 6)):
        roll = rng.random()
        if roll < 0.5:
            parts.append("." + ident())
        elif roll < 0.8:
            parts.append(f"[{rng.randrange(0, 10_000)}]")
        else:
            key = "".join(rng.choice(string.printable[:95])
                          for _ in range(rng.randrange(0, 6)))
            escaped = key.replace("\\", "\\\\").replace('"', '\\"')
            parts.append(f'["{escaped}"]')
    return "".join(parts)


@pytest.fixture(scope="session")
def motivating():
    return motivating_case()


@pytest.fixture(scope="session")
def structures():
    return STRUCTURES


@pytest.fixture(scope="session")
def mini_corpus():
    """Three generated cases per level, shared across the unit tests."""
    return [generate_case(level, seed).as_corpus_case()
            for level in LEVELS for seed in range(3)]
