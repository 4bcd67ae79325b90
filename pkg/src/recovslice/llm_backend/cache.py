"""Content-addressed cache of raw completion responses.

Each entry is a file named by sha256(model NUL prompt) holding the response
bytes, next to a `.meta.json` sidecar recording where the entry came from.
Identical prompts against the same model always hit the same file, which is
what makes cache-only replay byte-stable.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

__all__ = ["CompletionCache"]


class CompletionCache:
    def __init__(self, directory):
        self.directory = Path(directory)

    @staticmethod
    def key(model: str, prompt: str) -> str:
        digest = hashlib.sha256(f"{model}\0{prompt}".encode("utf-8"))
        return digest.hexdigest()

    def path_for(self, key: str) -> Path:
        return self.directory / key

    def get(self, model: str, prompt: str) -> Optional[str]:
        path = self.path_for(self.key(model, prompt))
        if not path.is_file():
            return None
        return path.read_text(encoding="utf-8")

    def put(self, model: str, prompt: str, response: str) -> str:
        key = self.key(model, prompt)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path_for(key).write_text(response, encoding="utf-8")
        meta = {
            "model": model,
            "prompt_sha256": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        meta_path = self.path_for(key).with_name(key + ".meta.json")
        meta_path.write_text(json.dumps(meta, indent=2) + "\n",
                             encoding="utf-8")
        return key
