"""Completion sources: an HTTP chat endpoint and a cache-through wrapper."""

from __future__ import annotations

import os
import time
from typing import Callable, Optional, Union

import requests

from ..errors import (BackendUnavailable, CacheMissInOfflineMode,
                      TransportError)
from .cache import CompletionCache

__all__ = ["HttpTransport", "CachedCompleter"]

ENDPOINT_ENV = "RECOVSLICE_LLM_ENDPOINT"
MODEL_ENV = "RECOVSLICE_LLM_MODEL"
KEY_ENV = "RECOVSLICE_LLM_KEY"


class HttpTransport:
    """Single-turn chat completion over an OpenAI-style HTTP endpoint."""

    def __init__(self, endpoint: Optional[str] = None,
                 model: Optional[str] = None, api_key: Optional[str] = None,
                 timeout: float = 120.0, max_retries: int = 3,
                 backoff: float = 0.5,
                 session: Optional[requests.Session] = None):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        self.model = model or os.environ.get(MODEL_ENV, "default")
        self.api_key = api_key or os.environ.get(KEY_ENV)
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._session = session or requests.Session()

    def complete(self, prompt: str) -> str:
        if not self.endpoint:
            raise BackendUnavailable(
                f"no completion endpoint configured (set {ENDPOINT_ENV})")
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        failure: Union[str, Exception] = "no attempts made"
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self._session.post(self.endpoint, json=payload,
                                              headers=headers,
                                              timeout=self.timeout)
                response.raise_for_status()
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError,
                    TypeError, ValueError) as exc:
                failure = exc
        raise TransportError(
            f"completion failed after {self.max_retries} attempt(s): {failure}")


class CachedCompleter:
    """Answers from the cache first; optionally refuses to go further.

    `transport` may be an HttpTransport or any `prompt -> response` callable
    (tests use scripted fakes).  With `offline=True`, or with no transport at
    all, a cache miss raises instead of making a request — replaying a cached
    session is guaranteed not to touch the network.
    """

    def __init__(self, cache: CompletionCache,
                 transport: Union[None, HttpTransport,
                                  Callable[[str], str]] = None,
                 model: Optional[str] = None, offline: bool = False):
        self.cache = cache
        self.transport = transport
        self.model = model or getattr(transport, "model", None) or "default"
        self.offline = offline
        self.last_cache_key: Optional[str] = None
        self.last_from_cache: Optional[bool] = None

    def complete(self, prompt: str) -> str:
        self.last_cache_key = self.cache.key(self.model, prompt)
        cached = self.cache.get(self.model, prompt)
        if cached is not None:
            self.last_from_cache = True
            return cached
        if self.offline or self.transport is None:
            raise CacheMissInOfflineMode(
                f"prompt {self.last_cache_key[:12]}... is not cached and "
                "transport is disabled")
        if callable(self.transport) and not hasattr(self.transport, "complete"):
            response = self.transport(prompt)
        else:
            response = self.transport.complete(prompt)
        self.cache.put(self.model, prompt, response)
        self.last_from_cache = False
        return response
