"""Transports and CLI for the provider session: stdio loop or local HTTP."""

from __future__ import annotations

import argparse
import json
import sys
from http.server import BaseHTTPRequestHandler, HTTPServer

from .session import (
    DEFAULT_ENCODER,
    DEFAULT_SUMMARIZER,
    HashEncoder,
    LeadSummarizer,
    MeanPoolingEncoder,
    ModelLoadError,
    ProviderSession,
    Seq2SeqSummarizer,
)


def serve_streams(session: ProviderSession, stdin, stdout) -> int:
    """Answer newline-delimited JSON requests until EOF or a close op."""
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            stdout.write(json.dumps({"error": f"invalid JSON: {exc}"}) + "\n")
            stdout.flush()
            continue
        if isinstance(request, dict) and request.get("op") == "close":
            break
        response = session.handle(request)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
    return 0


def _http_handler(session: ProviderSession):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            body = self.rfile.read(length).decode("utf-8")
            try:
                request = json.loads(body)
                response = session.handle(request)
            except json.JSONDecodeError as exc:
                response = {"error": f"invalid JSON: {exc}"}
            payload = json.dumps(response).encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, fmt, *args):
            print(f"http: {fmt % args}", file=sys.stderr)

    return Handler


def build_session(encoder_spec: str, summarizer_spec: str | None) -> ProviderSession:
    """Resolve adapter specs.

    "test:<dim>" picks the deterministic stub pair, anything else is a
    transformers model name or local checkpoint path.
    """
    if encoder_spec.startswith("test:"):
        dim = int(encoder_spec.split(":", 1)[1] or "64")
        return ProviderSession(encoder=HashEncoder(dim=dim), summarizer=LeadSummarizer())
    encoder = MeanPoolingEncoder(encoder_spec)
    summarizer = None
    if summarizer_spec:
        summarizer = Seq2SeqSummarizer(summarizer_spec)
    return ProviderSession(encoder=encoder, summarizer=summarizer)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="litkg-provider",
        description="Serve sentence embeddings and summaries over the provider protocol",
    )
    parser.add_argument(
        "--encoder",
        default=DEFAULT_ENCODER,
        help="encoder model name/path, or test:<dim> for the protocol stub",
    )
    parser.add_argument(
        "--summarizer",
        default=DEFAULT_SUMMARIZER,
        help="summarizer model name/path; pass an empty string to disable",
    )
    parser.add_argument("--http", metavar="PORT", type=int, help="serve HTTP instead of stdio")
    args = parser.parse_args(argv)

    try:
        session = build_session(args.encoder, args.summarizer or None)
    except ModelLoadError as exc:
        print(f"startup failure: {exc}", file=sys.stderr)
        return 1

    print(f"provider ready, dim={session.encoder.dim}", file=sys.stderr)
    if args.http:
        server = HTTPServer(("127.0.0.1", args.http), _http_handler(session))
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        return 0
    return serve_streams(session, sys.stdin, sys.stdout)


if __name__ == "__main__":
    raise SystemExit(main())
