"""Pluggable text-generation backend: HTTP client, stub, and audit log.

Wire contract: POST ``{"system": text, "prompt": text, "max_tokens": int}``
to the configured endpoint, response ``{"text": string}``.
"""
from __future__ import annotations

import hashlib
import json
import threading
import time
from pathlib import Path
from typing import Callable, Mapping, Optional, Protocol

import httpx

from .errors import BackendUnavailableError, EmptyCompletionError


class TextBackend(Protocol):
    def generate(self, system: str, prompt: str, max_tokens: int = 512) -> str: ...


class TextGenBackend:
    """HTTP client for the text-generation wire contract, with retries."""

    def __init__(self, endpoint: str, timeout: float = 10.0, max_retries: int = 2,
                 retry_wait: float = 0.05,
                 transport: httpx.BaseTransport | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.max_retries = max_retries
        self.retry_wait = retry_wait
        self._client = httpx.Client(transport=transport, timeout=timeout)

    def generate(self, system: str, prompt: str, max_tokens: int = 512) -> str:
        payload = {"system": system, "prompt": prompt, "max_tokens": max_tokens}
        attempts = self.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                response = self._client.post(self.endpoint, json=payload)
            except httpx.TransportError as exc:
                last_error = exc
                if attempt + 1 < attempts:
                    time.sleep(self.retry_wait)
                continue
            if response.status_code >= 500:
                last_error = BackendUnavailableError(
                    f"server error {response.status_code}")
                if attempt + 1 < attempts:
                    time.sleep(self.retry_wait)
                continue
            if response.status_code != 200:
                raise BackendUnavailableError(
                    f"backend rejected request: HTTP {response.status_code}")
            try:
                return str(response.json()["text"])
            except (KeyError, ValueError) as exc:
                raise BackendUnavailableError(
                    f"malformed backend response: {exc}") from exc
        raise BackendUnavailableError(
            f"backend {self.endpoint} unreachable after {attempts} attempts: "
            f"{last_error}")

    def close(self):
        self._client.close()


class StubBackend:
    """Deterministic in-process backend for tests and dry runs.

    ``script`` maps exact prompts to recorded replies; anything else falls
    through to ``default`` (a string, or a callable on (system, prompt)).
    """

    def __init__(self, script: Mapping[str, str] | None = None,
                 default: str | Callable[[str, str], str] | None = None):
        self.script = dict(script or {})
        self.default = default
        self.calls: list[dict] = []

    def generate(self, system: str, prompt: str, max_tokens: int = 512) -> str:
        self.calls.append({"system": system, "prompt": prompt,
                           "max_tokens": max_tokens})
        if prompt in self.script:
            return self.script[prompt]
        if callable(self.default):
            return self.default(system, prompt)
        if self.default is not None:
            return self.default
        digest = hashlib.sha1(prompt.encode("utf-8")).hexdigest()[:8]
        return (f"The listed clues are mutually consistent and support the "
                f"stated emotion. [stub {digest}]")


class AuditLog:
    """Append-only request/response log; one entry per backend call.

    Entries get sequential ids so records can reference them
    deterministically. Appends are atomic per entry.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.entries: list[dict] = []
        self._lock = threading.Lock()

    def append(self, entry: dict) -> int:
        with self._lock:
            entry_id = len(self.entries)
            stamped = {"id": entry_id, **entry}
            self.entries.append(stamped)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(stamped, ensure_ascii=False) + "\n")
            return entry_id


def refine_annotation(backend: TextBackend, prompt: tuple[str, str],
                      audit: Optional[AuditLog] = None,
                      max_tokens: int = 512) -> str:
    """Run one refinement call; always appends exactly one audit entry."""
    system, question = prompt
    try:
        answer = backend.generate(system, question, max_tokens=max_tokens)
    except Exception as exc:
        if audit is not None:
            audit.append({"system": system, "prompt": question,
                          "error": str(exc)})
        raise
    if audit is not None:
        audit.append({"system": system, "prompt": question, "response": answer})
    if not answer.strip():
        raise EmptyCompletionError("backend returned a blank answer")
    return answer


def backend_from_url(url: str, timeout: float = 10.0,
                     max_retries: int = 2) -> TextBackend:
    """Build a backend from a URL; ``stub:`` selects the in-process stub."""
    if url.startswith("stub:"):
        return StubBackend()
    return TextGenBackend(url, timeout=timeout, max_retries=max_retries)
