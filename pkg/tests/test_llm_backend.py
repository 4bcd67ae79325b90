"""Completion plumbing: cache keying, transport retries, response parsing."""

import json

import pytest
import requests

from conftest import ScriptedTransport
from recovslice.errors import (BackendUnavailable, CacheMissInOfflineMode,
                               MalformedGraph, NoJsonBlock, NoVerdict,
                               RecoveryFailed, TransportError)
from recovslice.estimator.base import RecoveryRequest
from recovslice.estimator.llm import LlmEstimator
from recovslice.llm_backend.cache import CompletionCache
from recovslice.llm_backend.parsing import (parse_alias_response,
                                            parse_graph_response,
                                            parse_verdict_response)
from recovslice.llm_backend.transport import CachedCompleter, HttpTransport


class TestCompletionCache:
    def test_round_trip(self, tmp_path):
        cache = CompletionCache(tmp_path / "c")
        assert cache.get("m", "p") is None
        key = cache.put("m", "p", "response body")
        assert cache.get("m", "p") == "response body"
        assert (tmp_path / "c" / key).is_file()
        meta = json.loads((tmp_path / "c" / f"{key}.meta.json").read_text())
        assert meta["model"] == "m"

    def test_key_is_sha256_of_model_and_prompt(self):
        import hashlib
        expected = hashlib.sha256(b"m\0p").hexdigest()
        assert CompletionCache.key("m", "p") == expected

    def test_distinct_models_use_distinct_keys(self, tmp_path):
        cache = CompletionCache(tmp_path)
        cache.put("model-a", "p", "A")
        cache.put("model-b", "p", "B")
        assert cache.get("model-a", "p") == "A"
        assert cache.get("model-b", "p") == "B"


class TestCachedCompleter:
    def test_populates_then_replays(self, tmp_path):
        transport = ScriptedTransport(["hello"])
        completer = CachedCompleter(CompletionCache(tmp_path),
                                    transport=transport, model="m")
        assert completer.complete("p") == "hello"
        assert completer.last_from_cache is False
        # Second call must not reach the transport.
        assert completer.complete("p") == "hello"
        assert completer.last_from_cache is True
        assert transport.prompts == ["p"]

    def test_offline_miss_raises(self, tmp_path):
        completer = CachedCompleter(CompletionCache(tmp_path),
                                    transport=ScriptedTransport(["x"]),
                                    model="m", offline=True)
        with pytest.raises(CacheMissInOfflineMode):
            completer.complete("p")

    def test_offline_hit_still_answers(self, tmp_path):
        CompletionCache(tmp_path).put("m", "p", "cached")
        completer = CachedCompleter(CompletionCache(tmp_path), model="m",
                                    offline=True)
        assert completer.complete("p") == "cached"

    def test_no_transport_behaves_offline(self, tmp_path):
        completer = CachedCompleter(CompletionCache(tmp_path), model="m")
        with pytest.raises(CacheMissInOfflineMode):
            completer.complete("p")

    def test_accepts_object_transports_too(self, tmp_path):
        class WithComplete:
            model = "obj-model"

            def complete(self, prompt):
                return f"echo:{prompt}"

        completer = CachedCompleter(CompletionCache(tmp_path),
                                    transport=WithComplete())
        assert completer.model == "obj-model"
        assert completer.complete("p") == "echo:p"


class _FakeResponse:
    def __init__(self, payload=None, fail=False):
        self._payload = payload
        self._fail = fail

    def raise_for_status(self):
        if self._fail:
            raise requests.HTTPError("boom")

    def json(self):
        return self._payload


class _FakeSession:
    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.posts = []

    def post(self, url, **kwargs):
        self.posts.append((url, kwargs))
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def _ok(content="fine"):
    return _FakeResponse({"choices": [{"message": {"content": content}}]})


class TestHttpTransport:
    def test_requires_endpoint(self, monkeypatch):
        monkeypatch.delenv("RECOVSLICE_LLM_ENDPOINT", raising=False)
        with pytest.raises(BackendUnavailable, match="RECOVSLICE_LLM_ENDPOINT"):
            HttpTransport().complete("p")

    def test_posts_deterministic_payload(self):
        session = _FakeSession([_ok("answer")])
        transport = HttpTransport(endpoint="http://x/v1", model="m",
                                  api_key="k", session=session)
        assert transport.complete("p") == "answer"
        url, kwargs = session.posts[0]
        assert url == "http://x/v1"
        assert kwargs["json"]["temperature"] == 0
        assert kwargs["json"]["messages"] == [{"role": "user", "content": "p"}]
        assert kwargs["headers"]["Authorization"] == "Bearer k"

    def test_retries_then_succeeds(self):
        session = _FakeSession([requests.ConnectionError("down"),
                                _FakeResponse(fail=True), _ok("ok")])
        transport = HttpTransport(endpoint="http://x", session=session,
                                  backoff=0.0)
        assert transport.complete("p") == "ok"
        assert len(session.posts) == 3

    def test_exhausted_retries_raise_transport_error(self):
        session = _FakeSession([requests.ConnectionError("down")] * 3)
        transport = HttpTransport(endpoint="http://x", session=session,
                                  backoff=0.0, max_retries=3)
        with pytest.raises(TransportError, match="after 3 attempt"):
            transport.complete("p")

    def test_malformed_body_counts_as_failure(self):
        session = _FakeSession([_FakeResponse({"nope": 1})] * 3)
        transport = HttpTransport(endpoint="http://x", session=session,
                                  backoff=0.0)
        with pytest.raises(TransportError):
            transport.complete("p")


class TestGraphParsing:
    def test_strips_thoughts_and_fence(self):
        text = ('<thought>um {"x": 1}</thought>\n```json\n{"v|T": "5"}\n```\n')
        graph = parse_graph_response(text)
        assert graph.root_name == "v" and graph.root.value == "5"

    def test_closing_fence_optional(self):
        graph = parse_graph_response('```json\n{"v": "5"}')
        assert graph.root.value == "5"

    def test_missing_block_raises(self):
        with pytest.raises(NoJsonBlock):
            parse_graph_response("no code here")

    def test_invalid_json_raises(self):
        with pytest.raises(MalformedGraph):
            parse_graph_response("```json\n{broken\n```")

    def test_multiple_roots_rejected(self):
        with pytest.raises(MalformedGraph, match="single root"):
            parse_graph_response('```json\n{"a": "1", "b": "2"}\n```')


class TestAliasParsing:
    def test_first_balanced_object_wins(self):
        text = 'Sure: {"a.b": "x"} and also {"c": "y"}'
        assert parse_alias_response(text) == {"a.b": "x"}

    def test_non_string_values_dropped(self):
        assert parse_alias_response('{"a": "x", "b": 3, "c": null}') == {"a": "x"}

    def test_skips_unparsable_candidates(self):
        text = "{oops} then {\"a\": \"x\"}"
        assert parse_alias_response(text) == {"a": "x"}

    def test_braces_inside_strings_ignored(self):
        assert parse_alias_response('{"a": "x{y}z"}') == {"a": "x{y}z"}

    def test_no_object_raises(self):
        with pytest.raises(NoJsonBlock):
            parse_alias_response("nothing here")


class TestVerdictParsing:
    def test_plain_verdicts(self):
        assert parse_verdict_response("- **Answer:** <T>") is True
        assert parse_verdict_response("- **Answer:** <F>") is False

    def test_first_marker_wins(self):
        assert parse_verdict_response("<T> but maybe <F>") is True
        assert parse_verdict_response("<F> though <T>") is False

    def test_no_marker_raises(self):
        with pytest.raises(NoVerdict):
            parse_verdict_response("it depends")


def _request():
    return RecoveryRequest(root_name="v", root_type="T", root_value="{x=1, }",
                           step_code="var y = v.x;", step_id=3,
                           step_key=("main.mini", 3, 1), focal_path="v.x",
                           class_structures=("T:{int x;}",))


class TestLlmEstimatorRecovery:
    def test_repair_round_fixes_malformed_first_answer(self, tmp_path):
        transport = ScriptedTransport(["{not a fence}",
                                       '```json\n{"v|T": {"x|int": "1"}}\n```'])
        estimator = LlmEstimator(cache_dir=tmp_path, transport=transport,
                                 adaptive_context=False)
        graph = estimator.recover_object_graph(_request())
        assert graph.root.child("x").value == "1"
        assert estimator.last_call_info["repaired"] is True
        assert estimator.last_call_info["example"] == "static"
        assert len(transport.prompts) == 2
        assert "could not be used" in transport.prompts[1]

    def test_wrong_root_triggers_repair(self, tmp_path):
        transport = ScriptedTransport(['```json\n{"other": "1"}\n```',
                                       '```json\n{"v": "1"}\n```'])
        estimator = LlmEstimator(cache_dir=tmp_path, transport=transport,
                                 adaptive_context=False)
        graph = estimator.recover_object_graph(_request())
        assert graph.root_name == "v"
        assert "root key was 'other'" in transport.prompts[1]

    def test_two_failures_raise_recovery_failed(self, tmp_path):
        transport = ScriptedTransport(["junk", "more junk"])
        estimator = LlmEstimator(cache_dir=tmp_path, transport=transport,
                                 adaptive_context=False)
        with pytest.raises(RecoveryFailed):
            estimator.recover_object_graph(_request())

    def test_offline_miss_surfaces_as_backend_unavailable(self, tmp_path):
        estimator = LlmEstimator(cache_dir=tmp_path, offline=True,
                                 adaptive_context=False)
        with pytest.raises(BackendUnavailable):
            estimator.recover_object_graph(_request())

    def test_requires_completer_or_cache_dir(self):
        with pytest.raises(ValueError):
            LlmEstimator()

    def test_last_call_info_reports_cache_state(self, tmp_path):
        response = '```json\n{"v|T": {"x|int": "1"}}\n```'
        transport = ScriptedTransport([response])
        estimator = LlmEstimator(cache_dir=tmp_path, transport=transport,
                                 adaptive_context=False)
        estimator.recover_object_graph(_request())
        first = dict(estimator.last_call_info)
        assert first["from_cache"] is False and first["cache_key"]

        replay = LlmEstimator(cache_dir=tmp_path, offline=True,
                              adaptive_context=False)
        replay.recover_object_graph(_request())
        second = dict(replay.last_call_info)
        assert second["from_cache"] is True
        assert second["cache_key"] == first["cache_key"]
