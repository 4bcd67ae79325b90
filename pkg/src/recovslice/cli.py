"""Command-line interface.

Subcommands::

    recovslice trace run PROGRAM [--full | --partial FILE...] [--seed N]
                         [--entry NAME] -o TRACE
    recovslice slice TRACE --step ID --path PATH [--estimator oracle|llm]
                     [--no-adaptive-context] [--cache-dir DIR] [-o OUT]
    recovslice recover TRACE --step ID --path PATH [--estimator ...] [-o OUT]
    recovslice bench gen --level LEVEL --count N --seed S -o DIR
    recovslice bench score --corpus DIR [--estimator ...] [-o OUT]
    recovslice serve TRACE [--port P] [--host H] [--estimator ...]

Exit codes: 0 success, 1 usage error, 2 runtime failure.  ``-o -`` writes
the machine-readable JSON result to stdout (the default for everything but
``trace run``).

``trace run`` writes a ``<name>.manifest.json`` sidecar next to the trace
recording the program sources, entry point, seed, and partition.  Commands
that need ground-truth execution state (the ``oracle`` estimator) replay
the program from that sidecar; the ``llm`` estimator needs only the trace
plus its completion cache.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import PathSyntaxError, RecovsliceError, UnknownStep
from .estimator.llm import LlmEstimator
from .estimator.oracle import OracleEstimator
from .evalkit import (LEVELS, evaluate_dependency, evaluate_recovery,
                      iter_corpus, write_corpus)
from .micro_tracer import make_partial, run_full
from .micro_tracer.stdlib import CLASS_STRUCTURES
from .micro_tracer.syntax import MiniProgram
from .slicer import recovery_request_for, slice_dependency
from .trace_model import Trace, load_trace

__all__ = ["run_cli", "main", "manifest_path_for"]

_STRUCTURES = tuple(CLASS_STRUCTURES.values())


class _UsageError(Exception):
    """Raised for bad invocations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: {message}")


def manifest_path_for(trace_path: Path) -> Path:
    """`foo.json` -> `foo.manifest.json`; other names get `.manifest.json`."""
    name = trace_path.name
    if name.endswith(".json"):
        return trace_path.with_name(name[:-5] + ".manifest.json")
    return trace_path.with_name(name + ".manifest.json")


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# -- trace run ------------------------------------------------------------------


def _collect_program(path: Path) -> dict[str, str]:
    if path.is_dir():
        files = {p.name: p.read_text(encoding="utf-8")
                 for p in sorted(path.glob("*.mini"))}
        if not files:
            raise _UsageError(f"no .mini files in {path}")
        return files
    if not path.exists():
        raise _UsageError(f"program not found: {path}")
    return {path.name: path.read_text(encoding="utf-8")}


def _cmd_trace_run(args: argparse.Namespace) -> int:
    files = _collect_program(Path(args.program))
    program = MiniProgram(files=files, entry=args.entry)
    full = run_full(program, seed=args.seed)
    if full.runtime_index.fault is not None:
        print(f"note: execution faulted: {full.runtime_index.fault}",
              file=sys.stderr)
    partition = args.partial
    if partition is not None:
        unknown = [f for f in partition if f not in files]
        if unknown:
            raise _UsageError(
                f"--partial names files not in the program: {unknown}; "
                f"have {sorted(files)}")
        trace = make_partial(full, partition)
    else:
        trace = full
    payload = trace.serialize().decode("utf-8")
    if args.out == "-":
        sys.stdout.write(payload)
        return 0
    out_path = Path(args.out)
    out_path.write_text(payload, encoding="utf-8")
    manifest = {
        "files": files,
        "entry": args.entry,
        "seed": args.seed,
        "partition": partition,
    }
    manifest_path_for(out_path).write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8")
    print(f"wrote {out_path} ({len(trace.steps)} steps) and "
          f"{manifest_path_for(out_path).name}", file=sys.stderr)
    return 0


# -- estimator construction -------------------------------------------------------


def replay_from_manifest(trace_path: Path):
    """Re-execute the recorded program; returns its full trace."""
    manifest_path = manifest_path_for(trace_path)
    if not manifest_path.exists():
        raise RecovsliceError(
            f"the oracle estimator needs the recording manifest "
            f"{manifest_path.name} next to the trace (written by "
            f"`trace run`); not found")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    program = MiniProgram(files=manifest["files"],
                          entry=manifest.get("entry", "main"))
    return run_full(program, seed=manifest.get("seed", 0))


def _build_estimator(args: argparse.Namespace, trace_path: Path):
    if args.estimator == "oracle":
        return OracleEstimator(replay_from_manifest(trace_path))
    cache_dir = args.cache_dir or str(trace_path) + ".llmcache"
    offline = not os.environ.get("RECOVSLICE_LLM_ENDPOINT")
    return LlmEstimator(
        cache_dir=cache_dir, offline=offline,
        adaptive_context=not getattr(args, "no_adaptive_context", False))


def _check_step(trace: Trace, step_id: int) -> None:
    if not trace.has_step(step_id):
        ids = [s.step_id for s in trace.steps]
        span = f"{ids[0]}..{ids[-1]}" if ids else "none (empty trace)"
        raise _UsageError(f"no step {step_id}; valid step ids: {span}")


# -- slice / recover ---------------------------------------------------------------


def _cmd_slice(args: argparse.Namespace) -> int:
    trace_path = Path(args.trace)
    trace = load_trace(trace_path)
    _check_step(trace, args.step)
    try:
        estimator = _build_estimator(args, trace_path)
        result = slice_dependency(trace, args.step, args.path, estimator,
                                  class_structures=_STRUCTURES)
    except PathSyntaxError as exc:
        raise _UsageError(f"bad --path: {exc}") from exc
    _emit(result.serialize(), args.out)
    return 0


def _cmd_recover(args: argparse.Namespace) -> int:
    trace_path = Path(args.trace)
    trace = load_trace(trace_path)
    _check_step(trace, args.step)
    try:
        request = recovery_request_for(trace, args.step, args.path,
                                       class_structures=_STRUCTURES)
    except PathSyntaxError as exc:
        raise _UsageError(f"bad --path: {exc}") from exc
    estimator = _build_estimator(args, trace_path)
    graph = estimator.recover_object_graph(request)
    _emit(graph.to_wire_json(indent=2) + "\n", args.out)
    return 0


# -- bench --------------------------------------------------------------------------


def _cmd_bench_gen(args: argparse.Namespace) -> int:
    levels = list(LEVELS) if args.level == "all" else [args.level]
    written = write_corpus(Path(args.out), per_level=args.count,
                           base_seed=args.seed, levels=levels)
    print(json.dumps({"written": written, "corpus": args.out,
                      "levels": levels}))
    return 0


def _cmd_bench_score(args: argparse.Namespace) -> int:
    cases = list(iter_corpus(Path(args.corpus)))
    if not cases:
        raise _UsageError(f"no cases under {args.corpus}")
    if args.estimator == "oracle":
        make_estimator = None
    else:
        cache_dir = args.cache_dir or str(Path(args.corpus)) + ".llmcache"
        offline = not os.environ.get("RECOVSLICE_LLM_ENDPOINT")
        shared = LlmEstimator(
            cache_dir=cache_dir, offline=offline,
            adaptive_context=not args.no_adaptive_context)
        make_estimator = lambda full: shared  # noqa: E731
    report, rows = evaluate_dependency(cases, make_estimator)
    levels: dict[str, dict] = {}
    for row in rows:
        bucket = levels.setdefault(
            row["level"], {"exact": 0, "answered": 0, "total_known": 0,
                           "dispatched": 0})
        bucket["dispatched"] += 1
        bucket["total_known"] += row["expected"][0] is not None
        bucket["answered"] += bool(row.get("got")) and \
            row["got"][0] is not None
        bucket["exact"] += row["match"]
    payload = {"dependency": report.to_json_obj(), "levels": levels}
    if args.recovery:
        payload["recovery"] = evaluate_recovery(
            cases, make_estimator).to_json_obj()
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


# -- serve --------------------------------------------------------------------------


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import build_app

    trace_path = Path(args.trace)
    trace = load_trace(trace_path)
    estimators = {}
    try:
        estimators["oracle"] = OracleEstimator(replay_from_manifest(trace_path))
    except RecovsliceError as exc:
        if args.estimator == "oracle":
            raise
        print(f"note: oracle estimator unavailable: {exc}", file=sys.stderr)
    if args.estimator == "llm" or args.cache_dir:
        estimators["llm"] = _build_estimator(
            argparse.Namespace(estimator="llm", cache_dir=args.cache_dir,
                               no_adaptive_context=False), trace_path)
    app = build_app(trace, estimators=estimators, default=args.estimator,
                    class_structures=_STRUCTURES)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# -- parser -------------------------------------------------------------------------


def _add_estimator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--estimator", choices=("oracle", "llm"),
                        default="oracle")
    parser.add_argument("--no-adaptive-context", action="store_true",
                        help="llm estimator: use only the built-in prompt "
                             "example, never a synthesized one")
    parser.add_argument("--cache-dir", metavar="DIR",
                        help="llm estimator: completion cache directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="recovslice",
                     description="Partial-trace dynamic data-dependency "
                                 "slicing with pluggable execution "
                                 "estimators.")
    sub = parser.add_subparsers(dest="command", required=True)

    trace = sub.add_parser("trace", help="record executions")
    trace_sub = trace.add_subparsers(dest="trace_command", required=True)
    run = trace_sub.add_parser("run", help="execute a program and record it")
    run.add_argument("program", help=".mini file or directory of .mini files")
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--full", action="store_true",
                      help="record every file (default)")
    mode.add_argument("--partial", nargs="+", metavar="FILE",
                      help="record only these files")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--entry", default="main")
    run.add_argument("-o", "--out", required=True, metavar="TRACE")
    run.set_defaults(func=_cmd_trace_run)

    slc = sub.add_parser("slice", help="answer one dependency query")
    slc.add_argument("trace")
    slc.add_argument("--step", type=int, required=True)
    slc.add_argument("--path", required=True)
    _add_estimator_flags(slc)
    slc.add_argument("-o", "--out", default="-")
    slc.set_defaults(func=_cmd_slice)

    rec = sub.add_parser("recover",
                         help="recover a variable's object graph only")
    rec.add_argument("trace")
    rec.add_argument("--step", type=int, required=True)
    rec.add_argument("--path", required=True)
    _add_estimator_flags(rec)
    rec.add_argument("-o", "--out", default="-")
    rec.set_defaults(func=_cmd_recover)

    bench = sub.add_parser("bench", help="benchmark corpus tools")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    gen = bench_sub.add_parser("gen", help="generate a corpus")
    gen.add_argument("--level", choices=tuple(LEVELS) + ("all",),
                     default="all")
    gen.add_argument("--count", type=int, default=50,
                     help="cases per level")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--out", required=True, metavar="DIR")
    gen.set_defaults(func=_cmd_bench_gen)
    score = bench_sub.add_parser("score", help="score an engine on a corpus")
    score.add_argument("--corpus", required=True, metavar="DIR")
    _add_estimator_flags(score)
    score.add_argument("--recovery", action="store_true",
                       help="also score object-graph recovery")
    score.add_argument("-o", "--out", default="-")
    score.set_defaults(func=_cmd_bench_score)

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("trace")
    serve.add_argument("--port", type=int, default=8571)
    serve.add_argument("--host", default="127.0.0.1")
    _add_estimator_flags(serve)
    serve.set_defaults(func=_cmd_serve)

    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UnknownStep as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RecovsliceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return code if isinstance(code, int) else 0


def main() -> None:
    sys.exit(run_cli())
