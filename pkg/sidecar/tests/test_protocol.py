import io
import json
import subprocess
import sys

import numpy as np
import pytest

from model_provider.serve import build_session, serve_streams
from model_provider.session import HashEncoder, LeadSummarizer, ProviderSession


class RecordingEncoder:
    """Fake model: fixed dim, deterministic vectors, fake truncation over 5 words."""

    dim = 16

    def encode(self, texts):
        vectors = []
        truncated = []
        for t in texts:
            words = t.split()
            truncated.append(len(words) > 5)
            vec = np.zeros(self.dim)
            for i, w in enumerate(words[:5]):
                vec[(len(w) + i) % self.dim] += 1.0
            vectors.append(vec.tolist())
        return vectors, truncated


class RecordingSummarizer:
    def summarize(self, texts):
        return f"summary of {len(texts)} sentences"


def make_session() -> ProviderSession:
    return ProviderSession(encoder=RecordingEncoder(), summarizer=RecordingSummarizer())


def golden_transcript() -> list[dict]:
    requests: list[dict] = [{"op": "dim"}]
    for i in range(12):
        requests.append({"op": "embed", "id": i, "text": f"sentence number {i} here"})
    requests.append({"op": "embed", "id": "long", "text": "a b c d e f g h i j"})
    for i in range(4):
        requests.append(
            {"op": "summarize", "id": 100 + i, "texts": [f"member {i}a", f"member {i}b"]}
        )
    requests.append({"op": "nonsense", "id": "bad-op"})
    requests.append({"op": "embed", "id": "final", "text": "closing sentence"})
    assert len(requests) == 20
    return requests


class TestGoldenTranscript:
    def test_twenty_requests_id_matched_dim_length(self):
        session = make_session()
        responses = [session.handle(r) for r in golden_transcript()]
        assert len(responses) == 20

        assert responses[0] == {"dim": 16}
        for req, resp in zip(golden_transcript()[1:], responses[1:]):
            assert resp.get("id") == req.get("id")
            if req["op"] == "embed":
                assert isinstance(resp["vector"], list)
                assert len(resp["vector"]) == 16
                assert "truncated" in resp
            elif req["op"] == "summarize":
                assert resp["summary"] == "summary of 2 sentences"
            else:
                assert "error" in resp

    def test_truncation_flagged(self):
        session = make_session()
        short = session.handle({"op": "embed", "id": 1, "text": "tiny one"})
        long = session.handle({"op": "embed", "id": 2, "text": "a b c d e f g h i j"})
        assert short["truncated"] is False
        assert long["truncated"] is True

    def test_deterministic_embeddings(self):
        session = make_session()
        a = session.handle({"op": "embed", "id": 1, "text": "same text"})
        b = session.handle({"op": "embed", "id": 2, "text": "same text"})
        assert a["vector"] == b["vector"]

    def test_summarize_of_single_sentence_nonempty(self):
        session = ProviderSession(encoder=HashEncoder(dim=32), summarizer=LeadSummarizer())
        resp = session.handle({"op": "summarize", "id": 0, "texts": ["only sentence"]})
        assert resp["summary"] == "only sentence"


class TestStreamServing:
    def run_lines(self, lines: list[str]) -> list[dict]:
        stdin = io.StringIO("\n".join(lines) + "\n")
        stdout = io.StringIO()
        serve_streams(make_session(), stdin, stdout)
        return [json.loads(l) for l in stdout.getvalue().splitlines()]

    def test_malformed_line_keeps_session_alive(self):
        out = self.run_lines(
            [
                json.dumps({"op": "dim"}),
                "{this is not json",
                json.dumps({"op": "embed", "id": 7, "text": "still works"}),
            ]
        )
        assert out[0] == {"dim": 16}
        assert "error" in out[1]
        assert out[2]["id"] == 7

    def test_close_op_terminates(self):
        out = self.run_lines(
            [
                json.dumps({"op": "dim"}),
                json.dumps({"op": "close"}),
                json.dumps({"op": "embed", "id": 1, "text": "never answered"}),
            ]
        )
        assert out == [{"dim": 16}]

    def test_embed_without_text_is_error_response(self):
        out = self.run_lines([json.dumps({"op": "embed", "id": 3})])
        assert out[0]["id"] == 3
        assert "error" in out[0]


class TestStubSession:
    def test_build_session_test_spec(self):
        session = build_session("test:48", None)
        assert session.encoder.dim == 48
        resp = session.handle({"op": "embed", "id": 0, "text": "hello world"})
        assert len(resp["vector"]) == 48

    def test_stub_vectors_unit_norm(self):
        session = build_session("test:32", None)
        resp = session.handle({"op": "embed", "id": 0, "text": "hello world"})
        assert abs(np.linalg.norm(resp["vector"]) - 1.0) < 1e-9


class TestSubprocessTransport:
    def test_stdio_round_trip(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "model_provider.serve", "--encoder", "test:24", "--summarizer", ""],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        try:
            requests = [
                {"op": "dim"},
                {"op": "embed", "id": 5, "text": "over the wire"},
                {"op": "summarize", "id": 6, "texts": ["first", "second"]},
            ]
            payload = "".join(json.dumps(r) + "\n" for r in requests)
            out, _ = proc.communicate(payload, timeout=30)
            lines = [json.loads(l) for l in out.splitlines()]
            assert lines[0] == {"dim": 24}
            assert lines[1]["id"] == 5 and len(lines[1]["vector"]) == 24
            assert lines[2] == {"id": 6, "summary": "first"}
        finally:
            proc.kill()
