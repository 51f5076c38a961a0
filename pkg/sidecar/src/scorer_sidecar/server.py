"""HTTP server for the scorer wire protocol.

Endpoints (JSON bodies, UTF-8; all floats natural-log probabilities):

    GET  /v1/info
    POST /v1/tokenize  {"text": str}
    POST /v1/logprobs  {"prompt_ids": [int], "allowed_ids": [int]?}
    POST /v1/generate  {"prompt": str, "max_tokens": int, "stop": [str], "temperature": 0}
    POST /v1/embed     {"texts": [str]}
    GET  /healthz

Malformed bodies return 400 with {"error": ...}; backend faults return 500.
Requests are handled concurrently; model forward passes serialize inside the
backend so requests never interleave model state.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class BadRequest(ValueError):
    pass


def _require(body: dict, key: str, kind) -> object:
    if key not in body:
        raise BadRequest(f"missing field {key!r}")
    value = body[key]
    if kind is int and isinstance(value, bool):
        raise BadRequest(f"field {key!r} must be an integer")
    if not isinstance(value, kind):
        raise BadRequest(f"field {key!r} has wrong type")
    return value


class ProtocolHandler(BaseHTTPRequestHandler):
    server_version = "scorer-sidecar"
    protocol_version = "HTTP/1.1"

    # quiet by default; the CLI flips this on with --verbose
    def log_message(self, fmt, *args):
        if self.server.verbose:
            super().log_message(fmt, *args)

    def _send(self, status: int, payload: dict | str) -> None:
        if isinstance(payload, str):
            body = payload.encode("utf-8")
            content_type = "text/plain; charset=utf-8"
        else:
            body = json.dumps(payload).encode("utf-8")
            content_type = "application/json; charset=utf-8"
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _authorized(self) -> bool:
        token = self.server.auth_token
        if not token:
            return True
        return self.headers.get("Authorization") == f"Bearer {token}"

    def do_GET(self):  # noqa: N802 (http.server naming)
        if self.path == "/healthz":
            self._send(200, "ok")
            return
        if not self._authorized():
            self._send(401, {"error": "unauthorized"})
            return
        if self.path == "/v1/info":
            self._send(200, self.server.backend.info())
            return
        self._send(404, {"error": f"no such endpoint {self.path}"})

    def do_POST(self):  # noqa: N802
        if not self._authorized():
            self._send(401, {"error": "unauthorized"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            try:
                body = json.loads(raw.decode("utf-8")) if raw else {}
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise BadRequest(f"invalid JSON body: {exc}") from None
            if not isinstance(body, dict):
                raise BadRequest("body must be a JSON object")
            handler = {
                "/v1/tokenize": self._tokenize,
                "/v1/logprobs": self._logprobs,
                "/v1/generate": self._generate,
                "/v1/embed": self._embed,
            }.get(self.path)
            if handler is None:
                self._send(404, {"error": f"no such endpoint {self.path}"})
                return
            self._send(200, handler(body))
        except BadRequest as exc:
            self._send(400, {"error": str(exc)})
        except ValueError as exc:  # context overflow and friends
            self._send(400, {"error": str(exc)})
        except Exception as exc:  # model fault, OOM, ...
            self._send(500, {"error": f"{type(exc).__name__}: {exc}"})

    def _tokenize(self, body: dict) -> dict:
        text = _require(body, "text", str)
        ids, pieces = self.server.backend.tokenize(text)
        return {"ids": ids, "pieces": pieces}

    def _logprobs(self, body: dict) -> dict:
        prompt_ids = _require(body, "prompt_ids", list)
        if not all(isinstance(i, int) and not isinstance(i, bool) for i in prompt_ids):
            raise BadRequest("prompt_ids must be integers")
        allowed = body.get("allowed_ids")
        if allowed is not None:
            if not isinstance(allowed, list) or not all(isinstance(i, int) for i in allowed):
                raise BadRequest("allowed_ids must be a list of integers")
            vocab = self.server.backend.vocab_size
            if any(i < 0 or i >= vocab for i in allowed):
                raise BadRequest("allowed_ids out of vocabulary range")
        logprobs = self.server.backend.next_token_logprobs(prompt_ids, allowed)
        return {"logprobs": {str(k): v for k, v in logprobs.items()}}

    def _generate(self, body: dict) -> dict:
        prompt = _require(body, "prompt", str)
        max_tokens = body.get("max_tokens", 128)
        if not isinstance(max_tokens, int) or max_tokens < 1:
            raise BadRequest("max_tokens must be a positive integer")
        stop = body.get("stop", [])
        if not isinstance(stop, list) or not all(isinstance(s, str) for s in stop):
            raise BadRequest("stop must be a list of strings")
        if body.get("temperature", 0) != 0:
            raise BadRequest("only temperature 0 is supported")
        return {"text": self.server.backend.generate(prompt, max_tokens, stop)}

    def _embed(self, body: dict) -> dict:
        texts = _require(body, "texts", list)
        if not all(isinstance(t, str) for t in texts):
            raise BadRequest("texts must be strings")
        return {"vectors": self.server.backend.embed(texts)}


class SidecarServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, backend, auth_token: str | None = None, verbose: bool = False):
        super().__init__(address, ProtocolHandler)
        self.backend = backend
        self.auth_token = auth_token
        self.verbose = verbose


def serve_background(backend, host: str = "127.0.0.1", port: int = 0, auth_token: str | None = None):
    """Start a server on a daemon thread; returns (server, base_url)."""
    server = SidecarServer((host, port), backend, auth_token=auth_token)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://{host}:{server.server_address[1]}"
