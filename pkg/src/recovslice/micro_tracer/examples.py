"""A small aliasing scenario used throughout the tests and docs.

`main` stores a string builder in a list, takes two aliases to it, appends
through one alias directly and once more through a helper function, then
reads the built string back out of the list.  With only `main.mini`
instrumented, the question "which step defined `sharedList.elementData[0]
.value[1]`?" (the middle character of the final "002") is answered by the
call site `aliasRef.append("0");` — a definition reached through an alias
and buried inside uninstrumented library code.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..trace_model import Trace
from .syntax import MiniProgram
from .tracer import (CASE_CALL_SITE, GroundTruthAnswer, SliceQuery,
                     make_partial, run_full)

__all__ = ["MOTIVATING_SOURCE", "MOTIVATING_QUERY_PATH", "MotivatingCase",
           "motivating_case"]

MOTIVATING_SOURCE = """\
fn main() {
  var sharedList = new List();
  var seed = new StrBuf("0");
  sharedList.add(seed);
  var originalRef = sharedList.get(0);
  var aliasRef = originalRef;
  if (rand(10) < 10) {
    aliasRef.append("0");
  }
  if (rand(10) < 10) {
    pad(sharedList);
  }
  var result = sharedList.get(0).toString();
}

fn pad(list) {
  var tail = list.get(0);
  var suffix = "2";
  tail.append(suffix);
}
"""

MOTIVATING_QUERY_PATH = "sharedList.elementData[0].value[1]"


@dataclass
class MotivatingCase:
    program: MiniProgram
    seed: int
    full: Trace
    partial: Trace
    query: SliceQuery
    expected: GroundTruthAnswer


def motivating_case(seed: int = 0) -> MotivatingCase:
    """Build the scenario: partial trace over `main.mini` only, query at the
    final read, expected answer step 7 (`aliasRef.append("0");`) as a call
    site.  The expected answer holds for every seed: both `rand` guards are
    always taken, so the executed steps never change."""
    program = MiniProgram(files={"main.mini": MOTIVATING_SOURCE})
    full = run_full(program, seed=seed)
    partial = make_partial(full, ["main.mini"])
    return MotivatingCase(
        program=program,
        seed=seed,
        full=full,
        partial=partial,
        query=SliceQuery.make(13, MOTIVATING_QUERY_PATH),
        expected=GroundTruthAnswer(def_step=7, case_kind=CASE_CALL_SITE),
    )
