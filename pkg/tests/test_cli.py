"""Command-line interface: recording, slicing, benchmarks, exit codes."""

import json

import pytest

from recovslice.cli import manifest_path_for, run_cli
from recovslice.estimator.oracle import OracleEstimator
from recovslice.micro_tracer import MOTIVATING_SOURCE
from recovslice.micro_tracer.stdlib import CLASS_STRUCTURES
from recovslice.slicer import slice_dependency
from recovslice.trace_model import load_trace


@pytest.fixture()
def workdir(tmp_path):
    (tmp_path / "main.mini").write_text(MOTIVATING_SOURCE, encoding="utf-8")
    return tmp_path


@pytest.fixture()
def recorded(workdir):
    """A partial trace of the aliasing scenario plus its manifest."""
    trace_path = workdir / "trace.json"
    code = run_cli(["trace", "run", str(workdir / "main.mini"),
                    "--partial", "main.mini", "-o", str(trace_path)])
    assert code == 0
    return trace_path


class TestManifestNaming:
    def test_json_suffix_replaced(self, tmp_path):
        assert manifest_path_for(tmp_path / "t.json").name == "t.manifest.json"

    def test_other_names_get_suffix(self, tmp_path):
        assert manifest_path_for(tmp_path / "t.out").name == \
            "t.out.manifest.json"


class TestTraceRun:
    def test_partial_recording(self, recorded):
        trace = load_trace(recorded)
        assert trace.completeness == "partial"
        assert len(trace.steps) == 13
        manifest = json.loads(
            manifest_path_for(recorded).read_text(encoding="utf-8"))
        assert manifest["partition"] == ["main.mini"]
        assert manifest["seed"] == 0 and manifest["entry"] == "main"
        assert "fn main()" in manifest["files"]["main.mini"]

    def test_full_recording_of_directory(self, workdir):
        out = workdir / "full.json"
        assert run_cli(["trace", "run", str(workdir), "--full", "--seed", "3",
                        "-o", str(out)]) == 0
        trace = load_trace(out)
        assert trace.completeness == "full"
        assert json.loads(manifest_path_for(out).read_text())["seed"] == 3

    def test_stdout_mode_skips_manifest(self, workdir, capsys):
        assert run_cli(["trace", "run", str(workdir / "main.mini"),
                        "--partial", "main.mini", "-o", "-"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["completeness"] == "partial"
        assert not list(workdir.glob("*manifest*"))

    def test_unknown_partition_file(self, workdir, capsys):
        assert run_cli(["trace", "run", str(workdir / "main.mini"),
                        "--partial", "other.mini", "-o",
                        str(workdir / "t.json")]) == 1
        assert "names files not in the program" in capsys.readouterr().err

    def test_missing_program(self, tmp_path, capsys):
        assert run_cli(["trace", "run", str(tmp_path / "nope.mini"),
                        "-o", str(tmp_path / "t.json")]) == 1


class TestSlice:
    def test_output_matches_library_bytes(self, recorded, capsys):
        path = "sharedList.elementData[0].value[1]"
        assert run_cli(["slice", str(recorded), "--step", "13",
                        "--path", path]) == 0
        cli_text = capsys.readouterr().out

        from recovslice.cli import replay_from_manifest
        trace = load_trace(recorded)
        result = slice_dependency(
            trace, 13, path, OracleEstimator(replay_from_manifest(recorded)),
            class_structures=tuple(CLASS_STRUCTURES.values()))
        assert cli_text == result.serialize()
        obj = json.loads(cli_text)
        assert obj["def_step"] == 7
        assert obj["case_kind"] == "case2_call_site"

    def test_write_to_file(self, recorded, tmp_path):
        out = tmp_path / "result.json"
        assert run_cli(["slice", str(recorded), "--step", "13",
                        "--path", "sharedList", "-o", str(out)]) == 0
        assert json.loads(out.read_text())["query"]["path"] == "sharedList"

    def test_unknown_step_names_valid_range(self, recorded, capsys):
        assert run_cli(["slice", str(recorded), "--step", "99",
                        "--path", "sharedList"]) == 1
        assert "valid step ids: 1..13" in capsys.readouterr().err

    def test_bad_path_is_usage_error(self, recorded, capsys):
        assert run_cli(["slice", str(recorded), "--step", "13",
                        "--path", "shared..list"]) == 1
        err = capsys.readouterr().err
        assert "bad --path" in err and "offset" in err

    def test_missing_manifest_fails_oracle(self, recorded, capsys):
        manifest_path_for(recorded).unlink()
        assert run_cli(["slice", str(recorded), "--step", "13",
                        "--path", "sharedList"]) == 2
        assert "manifest" in capsys.readouterr().err

    def test_offline_llm_degrades_but_exits_zero(self, recorded, tmp_path,
                                                 capsys, monkeypatch):
        monkeypatch.delenv("RECOVSLICE_LLM_ENDPOINT", raising=False)
        assert run_cli(["slice", str(recorded), "--step", "13",
                        "--path", "sharedList.elementData[0].value[1]",
                        "--estimator", "llm",
                        "--cache-dir", str(tmp_path / "cache")]) == 0
        obj = json.loads(capsys.readouterr().out)
        assert obj["case_kind"] == "none"
        assert any(e["kind"] == "degraded" for e in obj["provenance"])


class TestRecover:
    def test_graph_written_as_wire_json(self, recorded, capsys):
        assert run_cli(["recover", str(recorded), "--step", "13",
                        "--path", "sharedList.elementData[0].value[1]"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert list(doc) == ["sharedList"]
        element = doc["sharedList"]["elementData|Array"]["0|StrBuf"]
        assert element["value|Array"]["1|string"] == "0"

    def test_unobserved_root_is_runtime_error(self, recorded, capsys):
        assert run_cli(["recover", str(recorded), "--step", "13",
                        "--path", "ghost.x"]) == 2
        assert "not read or written" in capsys.readouterr().err


class TestBench:
    def test_gen_then_score_round_trip(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        assert run_cli(["bench", "gen", "--level", "basic_operations",
                        "--count", "3", "-o", str(corpus)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary == {"written": 3, "corpus": str(corpus),
                           "levels": ["basic_operations"]}

        assert run_cli(["bench", "score", "--corpus", str(corpus),
                        "--recovery"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["dependency"]["exact"] == 3
        assert payload["dependency"]["precision"] == 1.0
        assert payload["levels"]["basic_operations"]["dispatched"] == 3
        assert payload["recovery"]["accuracy"] == 1.0

    def test_score_empty_corpus_is_usage_error(self, tmp_path, capsys):
        assert run_cli(["bench", "score", "--corpus", str(tmp_path)]) == 1
        assert "no cases" in capsys.readouterr().err


class TestInvocation:
    def test_help_exits_zero(self, capsys):
        assert run_cli(["--help"]) == 0
        assert "recovslice" in capsys.readouterr().out

    def test_unknown_command_is_usage_error(self, capsys):
        assert run_cli(["frobnicate"]) == 1

    def test_missing_required_flag_is_usage_error(self, recorded, capsys):
        assert run_cli(["slice", str(recorded), "--path", "x"]) == 1

    def test_console_script_installed(self):
        import shutil
        import subprocess
        exe = shutil.which("recovslice")
        assert exe, "console script should be on PATH after install"
        proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
