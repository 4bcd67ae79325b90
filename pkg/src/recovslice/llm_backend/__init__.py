"""Model-backed completion plumbing: prompts, parsing, caching, transport."""

from .cache import CompletionCache
from .parsing import (parse_alias_response, parse_graph_response,
                      parse_verdict_response)
from .prompts import (STATIC_RECOVERY_EXAMPLE, PromptExample,
                      build_alias_prompt, build_definition_prompt,
                      build_recovery_prompt)
from .transport import CachedCompleter, HttpTransport

__all__ = [
    "CompletionCache",
    "parse_alias_response",
    "parse_graph_response",
    "parse_verdict_response",
    "PromptExample",
    "STATIC_RECOVERY_EXAMPLE",
    "build_alias_prompt",
    "build_definition_prompt",
    "build_recovery_prompt",
    "CachedCompleter",
    "HttpTransport",
]
