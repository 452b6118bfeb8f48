"""Client side of the model-provider wire protocol.

One protocol serves every external model need (embedding, summarization,
tagging): newline-delimited JSON requests and responses, either over the
standard streams of a spawned subprocess or POSTed to a local HTTP
endpoint.  Requests that carry an ``id`` are answered with the same id;
responses may arrive out of order and are buffered until matched.
"""

from __future__ import annotations

import json
import select
import shlex
import subprocess
import urllib.error
import urllib.request
from dataclasses import dataclass


class ProviderError(Exception):
    """Provider unreachable, timed out, or failed to answer."""


class ProviderProtocolError(ProviderError):
    """Provider answered with something outside the wire protocol."""


@dataclass
class ProviderHandle:
    """Address of an embedding/summarization/tagging provider.

    kind is "builtin-hash" for the offline embedder or "external" for a
    sidecar; endpoint is a command line (subprocess mode) or an http(s) URL.
    """

    kind: str = "builtin-hash"
    endpoint: str = ""
    dim: int | None = None

    @property
    def is_builtin(self) -> bool:
        return self.kind == "builtin-hash"

    @property
    def provider_id(self) -> str:
        if self.is_builtin:
            return f"builtin-hash:{self.dim or 256}"
        return f"external:{self.endpoint}"


class ProviderClient:
    """Issues wire-protocol requests against one provider endpoint."""

    def __init__(self, handle: ProviderHandle, timeout: float = 60.0):
        if handle.is_builtin:
            raise ValueError("builtin provider needs no client")
        self.handle = handle
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._pending: dict[object, dict] = {}
        self._is_http = handle.endpoint.startswith(("http://", "https://"))

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    shlex.split(self.handle.endpoint),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise ProviderError(
                    f"cannot start provider {self.handle.endpoint!r}: {exc}"
                ) from exc
        return self._proc

    def _read_line(self, proc: subprocess.Popen) -> str:
        assert proc.stdout is not None
        ready, _, _ = select.select([proc.stdout], [], [], self.timeout)
        if not ready:
            raise ProviderError(f"provider timed out after {self.timeout}s")
        line = proc.stdout.readline()
        if not line:
            raise ProviderError("provider closed its output stream")
        return line

    def request(self, payload: dict) -> dict:
        if self._is_http:
            return self._request_http(payload)
        return self._request_stdio(payload)

    def _request_http(self, payload: dict) -> dict:
        req = urllib.request.Request(
            self.handle.endpoint,
            data=json.dumps(payload).encode("utf-8"),
            headers={"Content-Type": "application/json"},
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError) as exc:
            raise ProviderError(f"provider request failed: {exc}") from exc
        try:
            return json.loads(body)
        except json.JSONDecodeError as exc:
            raise ProviderProtocolError(f"provider sent invalid JSON: {body!r}") from exc

    def _request_stdio(self, payload: dict) -> dict:
        proc = self._ensure_proc()
        want_id = payload.get("id")
        if want_id is not None and want_id in self._pending:
            return self._pending.pop(want_id)
        assert proc.stdin is not None
        try:
            proc.stdin.write(json.dumps(payload) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProviderError(f"provider pipe broken: {exc}") from exc
        while True:
            line = self._read_line(proc)
            if not line.strip():
                continue
            try:
                resp = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProviderProtocolError(f"provider sent invalid JSON: {line!r}") from exc
            if not isinstance(resp, dict):
                raise ProviderProtocolError(f"provider sent non-object response: {line!r}")
            got_id = resp.get("id")
            if want_id is None or got_id == want_id:
                return resp
            if got_id is not None:
                self._pending[got_id] = resp
            # keep reading until our id shows up

    def dim(self) -> int:
        resp = self.request({"op": "dim"})
        dim = resp.get("dim")
        if not isinstance(dim, int) or dim <= 0:
            raise ProviderProtocolError(f"provider reported bad dim: {resp!r}")
        self.handle.dim = dim
        return dim

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                if self._proc.stdin:
                    self._proc.stdin.close()
                self._proc.terminate()
                self._proc.wait(timeout=5)
            except OSError:
                pass
        self._proc = None
