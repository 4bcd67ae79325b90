"""Parsers for the three completion shapes the estimator expects back.

Models drift from instructions in predictable ways, so each parser accepts
the common deviations: thought tags before the payload, a missing closing
code fence, prose around a JSON object, or a verdict buried in explanation.
"""

from __future__ import annotations

import json
import re

from ..errors import MalformedGraph, NoJsonBlock, NoVerdict
from ..object_graph import ObjectGraph

__all__ = ["parse_graph_response", "parse_alias_response",
           "parse_verdict_response"]

_THOUGHT = re.compile(r"<thought>.*?</thought>", re.DOTALL)
# A ```json fence; the closing ``` is optional because responses are often
# truncated right after the payload.
_JSON_FENCE = re.compile(r"```json\s*\n(.*?)(?:\n?```|$)", re.DOTALL)


def parse_graph_response(text: str) -> ObjectGraph:
    """Extract the object graph from a recovery completion."""
    cleaned = _THOUGHT.sub("", text)
    match = _JSON_FENCE.search(cleaned)
    if match is None:
        raise NoJsonBlock("response contains no ```json code block")
    try:
        obj = json.loads(match.group(1).strip())
    except json.JSONDecodeError as exc:
        raise MalformedGraph(f"invalid JSON in code block: {exc}") from exc
    return ObjectGraph.from_wire_obj(obj)


def parse_alias_response(text: str) -> dict[str, str]:
    """Extract the first JSON object and keep its string-to-string pairs."""
    obj = _first_json_object(text)
    return {key: value for key, value in obj.items()
            if isinstance(value, str)}


def parse_verdict_response(text: str) -> bool:
    """True/False from whichever of <T>/<F> appears first."""
    t_at = text.find("<T>")
    f_at = text.find("<F>")
    if t_at == -1 and f_at == -1:
        raise NoVerdict("response contains neither <T> nor <F>")
    if f_at == -1:
        return True
    if t_at == -1:
        return False
    return t_at < f_at


def _first_json_object(text: str) -> dict:
    """First balanced, parsable `{...}` region of `text`."""
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            char = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif char == "\\":
                    escaped = True
                elif char == '"':
                    in_string = False
            elif char == '"':
                in_string = True
            elif char == "{":
                depth += 1
            elif char == "}":
                depth -= 1
                if depth == 0:
                    try:
                        return json.loads(text[start:i + 1])
                    except json.JSONDecodeError:
                        break
        start = text.find("{", start + 1)
    raise NoJsonBlock("response contains no JSON object")
