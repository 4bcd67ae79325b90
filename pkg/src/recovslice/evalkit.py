"""Benchmark corpus generation and scoring.

A corpus is a directory tree of generated slicing cases::

    corpus/<level>/<NNN>/
        main.mini ...      program files
        query.json         {"seed", "partition", "step", "path"}
        expected.json      {"def_step", "case_kind"}

Each case is a deterministic function of ``(level, seed)``: generation draws
from a seeded RNG and retries with a bumped attempt counter until the drawn
program runs clean and yields a query with a definite ground-truth answer.
Ground truth comes from replaying the program fully instrumented and reading
the answer out of the complete record, so scoring never depends on the
engine under test.

The five levels exercise the engine in increasing order of hidden state:

* ``basic_operations`` — one file, plain field writes, nothing hidden;
* ``noisy_context`` — the same queries buried in unrelated code;
* ``variable_aliasing`` — definitions through aliases and same-file calls;
* ``interprocedural`` — definitions inside routines of a hidden file;
* ``inter_file`` — container internals behind the bundled library files.

Queries always target primitive-valued leaves (or the root variable
itself); object-valued leaves are excluded because their "definition" is an
install-site convention rather than a value write.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import RecovsliceError
from .estimator.oracle import OracleEstimator
from .micro_tracer import make_partial, run_full
from .micro_tracer.stdlib import CLASS_STRUCTURES
from .micro_tracer.syntax import MiniProgram
from .micro_tracer.tracer import (GroundTruthAnswer, SliceQuery,
                                  locate_instance, oracle_dependency)
from .slicer import recovery_request_for, slice_dependency
from .trace_model import Trace

__all__ = ["LEVELS", "GeneratedCase", "CorpusCase", "ScoreReport",
           "RecoveryScore", "generate_case", "write_corpus", "iter_corpus",
           "evaluate_dependency", "evaluate_recovery", "score_recovery"]

_PRIMITIVES = frozenset({"int", "string", "bool"})


# -- scoring -------------------------------------------------------------------


@dataclass(frozen=True)
class ScoreReport:
    """Dependency-query scores over a batch.

    Counts: `exact` answers matching ground truth, `answered` queries where
    the engine named a defining step, `total_known` queries with a known
    ground truth, and `dispatched` queries attempted overall.
    """

    exact: int
    answered: int
    total_known: int
    dispatched: int

    @classmethod
    def from_counts(cls, exact: int, answered: int, total_known: int,
                    dispatched: int) -> "ScoreReport":
        return cls(exact=exact, answered=answered, total_known=total_known,
                   dispatched=dispatched)

    @property
    def precision(self) -> float:
        return self.exact / self.answered if self.answered else 0.0

    @property
    def recall(self) -> float:
        return self.exact / self.total_known if self.total_known else 0.0

    @property
    def success_rate(self) -> float:
        return self.exact / self.dispatched if self.dispatched else 0.0

    def to_json_obj(self) -> dict:
        return {
            "exact": self.exact,
            "answered": self.answered,
            "total_known": self.total_known,
            "dispatched": self.dispatched,
            "precision": self.precision,
            "recall": self.recall,
            "success_rate": self.success_rate,
        }


@dataclass(frozen=True)
class RecoveryScore:
    """Micro-averaged direct-children agreement for recovered graphs."""

    matched: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.matched / self.total if self.total else 0.0

    def to_json_obj(self) -> dict:
        return {"matched": self.matched, "total": self.total,
                "accuracy": self.accuracy}


def score_recovery(candidate, reference) -> RecoveryScore:
    """Compare direct children of two graph roots as (name, value) pairs.

    Wire-normal form is assumed: non-leaf nodes carry an empty value, so a
    pair matches when the child exists under the same name with the same
    leaf value (or both are non-leaves).
    """
    matched = 0
    for ref_child in reference.root.children:
        got = candidate.root.child(ref_child.name)
        if got is not None and got.value == ref_child.value:
            matched += 1
    return RecoveryScore(matched=matched,
                         total=len(reference.root.children))


# -- case model ------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratedCase:
    """One generated benchmark case, ready to write or run."""

    level: str
    seed: int
    files: dict[str, str]
    partition: tuple[str, ...]
    exec_seed: int
    query_step: int
    query_path: str
    expected: GroundTruthAnswer

    def as_corpus_case(self, name: Optional[str] = None) -> "CorpusCase":
        """The in-memory equivalent of writing and re-reading this case."""
        return CorpusCase(
            level=self.level, name=name or str(self.seed),
            files=dict(self.files), partition=self.partition,
            exec_seed=self.exec_seed, query_step=self.query_step,
            query_path=self.query_path,
            expected_def_step=self.expected.def_step,
            expected_case_kind=self.expected.case_kind)


@dataclass(frozen=True)
class CorpusCase:
    """A case loaded back from disk."""

    level: str
    name: str
    files: dict[str, str]
    partition: tuple[str, ...]
    exec_seed: int
    query_step: int
    query_path: str
    expected_def_step: Optional[int]
    expected_case_kind: str


@dataclass
class _Sketch:
    """A drawn program before validation."""

    files: dict[str, str]
    partition: tuple[str, ...]
    exec_seed: int
    root: str
    path: Optional[str] = None     # fixed path, or None to pick from the run
    min_segments: int = 2


def _main_fn(body: Sequence[str], extra_fns: Sequence[str] = ()) -> str:
    lines = ["fn main() {"] + [f"  {stmt}" for stmt in body] + ["}"]
    for fn in extra_fns:
        lines += ["", fn.rstrip()]
    return "\n".join(lines) + "\n"


# -- level generators ------------------------------------------------------------

_TYPE_POOL = ("Point", "Box", "Node", "Rec")
_ROOT_POOL = ("p", "obj", "item", "rec")
_FIELD_POOL = ("x", "y", "z", "w")


def _gen_basic(rng: random.Random) -> _Sketch:
    type_name = rng.choice(_TYPE_POOL)
    root = rng.choice(_ROOT_POOL)
    fields = rng.sample(_FIELD_POOL, k=rng.randint(2, 3))
    body = [f"var {root} = new {type_name}();"]
    for name in fields:
        body.append(f"{root}.{name} = {rng.randrange(100)};")
    for _ in range(rng.randint(2, 5)):
        target = rng.choice(fields)
        if rng.random() < 0.5:
            body.append(f"{root}.{target} = {rng.randrange(100)};")
        else:
            source = rng.choice(fields)
            body.append(
                f"{root}.{target} = {root}.{source} + {rng.randrange(10)};")
    queried = rng.choice(fields)
    body.append(f"var out = {root}.{queried} + {root}.{rng.choice(fields)};")
    path = root if rng.random() < 0.15 else f"{root}.{queried}"
    return _Sketch(files={"main.mini": _main_fn(body)},
                   partition=("main.mini",),
                   exec_seed=rng.randrange(1_000_000), root=root, path=path)


def _gen_noisy(rng: random.Random) -> _Sketch:
    core = _gen_basic(rng)
    root = core.root
    lines = core.files["main.mini"].splitlines()
    body = [line[2:] for line in lines[1:-1] if line.startswith("  ")]
    noise_groups = [
        ["var decoy = new Widget();",
         f"decoy.x = {rng.randrange(100)};",
         "decoy.x = decoy.x * 2;",
         (f"if (rand(10) < {rng.randint(3, 8)}) {{ "
          f"decoy.x = {rng.randrange(100)}; }}")],
        [f"var n0 = {rng.randrange(50)};",
         "n0 = n0 + 7;"],
        ["var junk = new List();",
         f"junk.add({rng.randrange(100)});",
         f"junk.add({rng.randrange(100)});"],
    ]
    picked = rng.sample(noise_groups, k=rng.randint(2, 3))
    # Random merge that keeps each stream's internal order, the root
    # construction first, and the query line last.
    streams = [body[1:-1]] + picked
    merged = []
    while any(streams):
        stream = rng.choice([s for s in streams if s])
        merged.append(stream.pop(0))
    body = [body[0]] + merged + [body[-1]]
    return _Sketch(files={"main.mini": _main_fn(body)},
                   partition=("main.mini",), exec_seed=core.exec_seed,
                   root=root, path=core.path)


def _gen_aliasing(rng: random.Random) -> _Sketch:
    type_name = rng.choice(_TYPE_POOL)
    root = rng.choice(_ROOT_POOL)
    fields = rng.sample(_FIELD_POOL, k=2)
    body = [f"var {root} = new {type_name}();"]
    for name in fields:
        body.append(f"{root}.{name} = {rng.randrange(100)};")
    handles = [root]
    for alias in rng.sample(("alias", "ref", "view", "handle"),
                            k=rng.randint(1, 2)):
        body.append(f"var {alias} = {rng.choice(handles)};")
        handles.append(alias)
    extra_fns = []
    if rng.random() < 0.5:
        poked = rng.choice(fields)
        extra_fns.append("fn poke(o) {\n"
                         f"  o.{poked} = {rng.randrange(100)};\n"
                         "}")
        body.append(f"poke({rng.choice(handles)});")
    for _ in range(rng.randint(2, 4)):
        body.append(f"{rng.choice(handles)}.{rng.choice(fields)}"
                    f" = {rng.randrange(100)};")
    queried = rng.choice(fields)
    body.append(f"var out = {root}.{queried};")
    return _Sketch(
        files={"main.mini": _main_fn(body, extra_fns)},
        partition=("main.mini",), exec_seed=rng.randrange(1_000_000),
        root=root, path=f"{root}.{queried}")


_UTIL_SOURCE = """\
fn bump(a, n) {
  a.{field} = a.{field} + n;
}

fn reset(a) {
  a.{field} = 0;
}

fn double(a) {
  a.{field} = a.{field} * 2;
}

fn peek(a) {
  var t = a.{field};
  return t;
}
"""


def _gen_interprocedural(rng: random.Random) -> _Sketch:
    field_name = rng.choice(("total", "value", "count"))
    type_name = rng.choice(("Acc", "Counter", "Cell"))
    util = _UTIL_SOURCE.replace("{field}", field_name)
    body = [f"var acc = new {type_name}();",
            f"acc.{field_name} = {rng.randrange(100)};"]
    ops = [
        lambda: f"bump(acc, {rng.randrange(1, 20)});",
        lambda: "reset(acc);",
        lambda: "double(acc);",
        lambda: "peek(acc);",
        lambda: f"var t{rng.randrange(100)} = acc.{field_name};",
        lambda: f"acc.{field_name} = {rng.randrange(100)};",
    ]
    for _ in range(rng.randint(2, 5)):
        body.append(rng.choice(ops)())
    body.append(f"var out = acc.{field_name};")
    return _Sketch(
        files={"main.mini": _main_fn(body), "util.mini": util},
        partition=("main.mini",), exec_seed=rng.randrange(1_000_000),
        root="acc", path=f"acc.{field_name}")


def _gen_inter_file(rng: random.Random) -> _Sketch:
    variant = rng.choice(("list", "map", "strbuf", "list_of_bufs"))
    body: list[str] = []
    if variant == "list":
        body.append("var names = new List();")
        for _ in range(rng.randint(2, 4)):
            body.append(f'names.add("{_word(rng)}");')
        if rng.random() < 0.6:
            body.append(f'names.set({rng.randrange(2)}, "{_word(rng)}");')
        body.append("var got = names.get(0);")
        body.append("var out = str(names);")
        root = "names"
    elif variant == "map":
        body.append("var table = new Map();")
        keys = rng.sample(("a", "b", "c", "d"), k=rng.randint(2, 3))
        for key in keys:
            body.append(f'table.put("{key}", {rng.randrange(100)});')
        body.append(f'table.put("{rng.choice(keys)}", {rng.randrange(100)});')
        body.append(f'var hit = table.get("{rng.choice(keys)}");')
        body.append("var out = str(table);")
        root = "table"
    elif variant == "strbuf":
        body.append(f'var buf = new StrBuf("{_word(rng)}");')
        handles = ["buf"]
        if rng.random() < 0.5:
            body.append("var copy = buf;")
            handles.append("copy")
        for _ in range(rng.randint(1, 3)):
            body.append(f'{rng.choice(handles)}.append("{_word(rng)}");')
        body.append("var out = buf.toString();")
        root = "buf"
    else:
        body.append("var bag = new List();")
        body.append(f'bag.add(new StrBuf("{_word(rng)}"));')
        body.append(f'bag.add(new StrBuf("{_word(rng)}"));')
        body.append(f"var one = bag.get({rng.randrange(2)});")
        body.append(f'one.append("{_word(rng)}");')
        body.append("var out = str(bag);")
        root = "bag"
    return _Sketch(files={"main.mini": _main_fn(body)},
                   partition=("main.mini",),
                   exec_seed=rng.randrange(1_000_000), root=root,
                   path=None, min_segments=2)


def _word(rng: random.Random) -> str:
    return "".join(rng.choice("abcdefgh") for _ in range(rng.randint(1, 3)))


@dataclass(frozen=True)
class LevelSpec:
    name: str
    description: str
    build: Callable[[random.Random], _Sketch]


LEVELS: dict[str, LevelSpec] = {
    spec.name: spec for spec in (
        LevelSpec("basic_operations",
                  "single-file field reads and writes", _gen_basic),
        LevelSpec("noisy_context",
                  "field queries buried in unrelated code", _gen_noisy),
        LevelSpec("variable_aliasing",
                  "definitions through aliases and same-file calls",
                  _gen_aliasing),
        LevelSpec("interprocedural",
                  "definitions inside routines of a hidden file",
                  _gen_interprocedural),
        LevelSpec("inter_file",
                  "container internals behind bundled library files",
                  _gen_inter_file),
    )
}


# -- generation -------------------------------------------------------------------


def _leaf_paths(full: Trace, q_full, root_name: str,
                max_depth: int = 5) -> list[str]:
    """Rendered paths of primitive leaves under the root at the query step."""
    try:
        root = locate_instance(full, q_full, root_name)
    except RecovsliceError:
        return []
    out: list[str] = []

    def walk(inst, rendered: str, on_path: frozenset) -> None:
        if inst.location.token in on_path or len(on_path) >= max_depth:
            return
        branded = on_path | {inst.location.token}
        for label, child_id in inst.children:
            child = full.variable(child_id)
            step = f"[{label}]" if label.isdigit() else f".{label}"
            if child.children:
                walk(child, rendered + step, branded)
            elif child.type_name in _PRIMITIVES:
                out.append(rendered + step)

    walk(root, root_name, frozenset())
    return out


def generate_case(level: str, seed: int,
                  max_attempts: int = 64) -> GeneratedCase:
    """Deterministically generate one valid case for (level, seed)."""
    spec = LEVELS[level]
    for attempt in range(max_attempts):
        rng = random.Random(f"{level}:{seed}:{attempt}")
        sketch = spec.build(rng)
        try:
            program = MiniProgram(files=dict(sketch.files))
            full = run_full(program, seed=sketch.exec_seed)
            if full.runtime_index.fault is not None:
                continue
            partial = make_partial(full, list(sketch.partition))
            if not partial.steps:
                continue
            query_step = partial.steps[-1]
            path = sketch.path
            if path is None:
                q_full = full.step_by_event(query_step.event_key)
                candidates = _leaf_paths(full, q_full, sketch.root)
                candidates = [p for p in candidates if _segments(p)
                              >= sketch.min_segments]
                if not candidates:
                    continue
                deep = [p for p in candidates if _segments(p) > 2]
                pool = deep if deep and rng.random() < 0.8 else candidates
                path = rng.choice(sorted(pool))
            query = SliceQuery.make(query_step.step_id, path)
            truth = oracle_dependency(full, partial, query)
        except RecovsliceError:
            continue
        if truth.def_step is None:
            continue
        return GeneratedCase(
            level=level, seed=seed, files=dict(sketch.files),
            partition=tuple(sketch.partition), exec_seed=sketch.exec_seed,
            query_step=query_step.step_id, query_path=path, expected=truth)
    raise RuntimeError(
        f"no usable {level} case for seed {seed} "
        f"after {max_attempts} attempts")


def _segments(path: str) -> int:
    return 1 + path.count(".") + path.count("[")


# -- corpus I/O -------------------------------------------------------------------


def write_corpus(root: Path, per_level: int = 50, base_seed: int = 0,
                 levels: Optional[Sequence[str]] = None) -> int:
    """Generate and write a corpus; returns the number of cases written."""
    root = Path(root)
    written = 0
    for level in levels or LEVELS:
        for i in range(per_level):
            case = generate_case(level, base_seed + i)
            case_dir = root / level / f"{i:03d}"
            case_dir.mkdir(parents=True, exist_ok=True)
            for file_id, source in case.files.items():
                (case_dir / file_id).write_text(source, encoding="utf-8")
            (case_dir / "query.json").write_text(json.dumps({
                "seed": case.exec_seed,
                "partition": list(case.partition),
                "step": case.query_step,
                "path": case.query_path,
            }, indent=2) + "\n", encoding="utf-8")
            (case_dir / "expected.json").write_text(json.dumps({
                "def_step": case.expected.def_step,
                "case_kind": case.expected.case_kind,
            }, indent=2) + "\n", encoding="utf-8")
            written += 1
    return written


def iter_corpus(root: Path) -> Iterator[CorpusCase]:
    root = Path(root)
    for query_file in sorted(root.glob("*/*/query.json")):
        case_dir = query_file.parent
        query = json.loads(query_file.read_text(encoding="utf-8"))
        expected = json.loads(
            (case_dir / "expected.json").read_text(encoding="utf-8"))
        files = {p.name: p.read_text(encoding="utf-8")
                 for p in sorted(case_dir.glob("*.mini"))}
        yield CorpusCase(
            level=case_dir.parent.name, name=case_dir.name, files=files,
            partition=tuple(query["partition"]), exec_seed=query["seed"],
            query_step=query["step"], query_path=query["path"],
            expected_def_step=expected["def_step"],
            expected_case_kind=expected["case_kind"])


# -- evaluation -------------------------------------------------------------------


def _replay(case: CorpusCase) -> tuple[Trace, Trace]:
    program = MiniProgram(files=dict(case.files))
    full = run_full(program, seed=case.exec_seed)
    partial = make_partial(full, list(case.partition))
    return full, partial


def evaluate_dependency(
        cases: Iterable[CorpusCase],
        make_estimator: Optional[Callable[[Trace], object]] = None,
) -> tuple[ScoreReport, list[dict]]:
    """Run the slicer over corpus cases and score against ground truth.

    `make_estimator` builds an estimator per case from the case's full
    reference trace; by default the reference-run estimator is used.
    Returns the aggregate report and one row per case.
    """
    if make_estimator is None:
        make_estimator = OracleEstimator
    structures = tuple(CLASS_STRUCTURES.values())
    exact = answered = known = dispatched = 0
    rows: list[dict] = []
    for case in cases:
        dispatched += 1
        if case.expected_def_step is not None:
            known += 1
        row = {"level": case.level, "case": case.name,
               "path": case.query_path,
               "expected": [case.expected_def_step,
                            case.expected_case_kind]}
        try:
            full, partial = _replay(case)
            result = slice_dependency(
                partial, case.query_step, case.query_path,
                make_estimator(full), class_structures=structures)
        except RecovsliceError as exc:
            row.update(got=None, error=str(exc), match=False)
            rows.append(row)
            continue
        if result.def_step is not None:
            answered += 1
        match = (result.def_step == case.expected_def_step
                 and result.case_kind == case.expected_case_kind)
        exact += match
        row.update(got=[result.def_step, result.case_kind], match=match)
        rows.append(row)
    report = ScoreReport.from_counts(exact, answered, known, dispatched)
    return report, rows


def evaluate_recovery(
        cases: Iterable[CorpusCase],
        make_estimator: Optional[Callable[[Trace], object]] = None,
) -> RecoveryScore:
    """Micro-averaged direct-children accuracy of graph recovery."""
    if make_estimator is None:
        make_estimator = OracleEstimator
    structures = tuple(CLASS_STRUCTURES.values())
    matched = total = 0
    for case in cases:
        full, partial = _replay(case)
        request = recovery_request_for(
            partial, case.query_step, case.query_path,
            class_structures=structures)
        reference = OracleEstimator(full).recover_object_graph(request)
        try:
            candidate = make_estimator(full).recover_object_graph(request)
        except RecovsliceError:
            total += len(reference.root.children)
            continue
        score = score_recovery(candidate, reference)
        matched += score.matched
        total += score.total
    return RecoveryScore(matched=matched, total=total)
