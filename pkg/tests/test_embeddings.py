import json
import sys
import textwrap

import numpy as np
import pytest
from hypothesis import given, strategies as st

from litkg.embeddings import (
    DEFAULT_DIM,
    VectorCache,
    cosine_distance,
    embed_batch,
    euclidean_distance,
    hash_embed,
)
from litkg.provider import ProviderError, ProviderHandle, ProviderProtocolError

from .oracles import cosine_distance_oracle, euclidean_distance_oracle


class TestHashEmbed:
    def test_deterministic(self):
        t = "CHAR1 smiled at CHAR2 over breakfast."
        assert np.array_equal(hash_embed(t), hash_embed(t))

    def test_unit_norm(self):
        v = hash_embed("CHAR1 smiled at CHAR2.")
        assert abs(np.linalg.norm(v) - 1.0) < 1e-9

    def test_empty_input_zero_vector(self):
        v = hash_embed("...")
        assert np.linalg.norm(v) == 0.0

    def test_dim_validated(self):
        with pytest.raises(ValueError):
            hash_embed("text", dim=8)

    def test_char_masking_invariance(self):
        a = hash_embed("CHAR3 smiled at CHAR12.")
        b = hash_embed("CHAR7 smiled at CHAR0.")
        assert np.array_equal(a, b)

    def test_paraphrase_closer_than_unrelated(self):
        base = hash_embed("CHAR1 smiled at CHAR2 with a happy grin.")
        paraphrase = hash_embed("CHAR1 smiled at CHAR2 with a happy look.")
        unrelated = hash_embed("CHAR1 dragged the heavy cauldron past CHAR2.")
        assert cosine_distance(base, paraphrase) < cosine_distance(base, unrelated)

    def test_cosine_matches_dot_product_oracle(self):
        a = hash_embed("CHAR1 waved at CHAR2 across the lawn.")
        b = hash_embed("CHAR1 shouted toward CHAR2 from the gate.")
        assert cosine_distance(a, b) == pytest.approx(
            cosine_distance_oracle(a.tolist(), b.tolist()), abs=1e-12
        )


class TestDistances:
    def test_cosine_self_zero(self):
        v = hash_embed("CHAR1 met CHAR2.")
        assert cosine_distance(v, v) == pytest.approx(0.0, abs=1e-12)

    def test_cosine_orthogonal(self):
        assert cosine_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0)

    def test_cosine_45_degrees(self):
        d = cosine_distance(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert d == pytest.approx(1 - 1 / np.sqrt(2))

    def test_cosine_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            cosine_distance(np.zeros(4), np.ones(4))

    def test_cosine_dim_mismatch(self):
        with pytest.raises(ValueError):
            cosine_distance(np.ones(4), np.ones(5))

    def test_euclidean_pythagorean(self):
        assert euclidean_distance(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 5.0

    def test_euclidean_self_zero(self):
        v = np.array([1.0, 2.0, 3.0])
        assert euclidean_distance(v, v) == 0.0

    def test_euclidean_matches_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            u = rng.normal(size=8)
            v = rng.normal(size=8)
            assert euclidean_distance(u, v) == pytest.approx(
                euclidean_distance_oracle(u.tolist(), v.tolist()), abs=1e-12
            )

    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
    def test_symmetry(self, a, b):
        u, v = np.array(a), np.array(b)
        assert euclidean_distance(u, v) == euclidean_distance(v, u)
        if np.linalg.norm(u) > 1e-6 and np.linalg.norm(v) > 1e-6:
            assert cosine_distance(u, v) == pytest.approx(cosine_distance(v, u), abs=1e-12)


class TestEmbedBatch:
    def test_empty(self):
        assert embed_batch([]) == []

    def test_builtin_deterministic_duplicates(self):
        out = embed_batch(["CHAR1 met CHAR2."] * 2)
        assert np.array_equal(out[0], out[1])

    def test_batch_invariance(self):
        texts = [f"CHAR1 met CHAR2 on day {i}." for i in range(5)]
        whole = embed_batch(texts)
        split = embed_batch(texts[:2]) + embed_batch(texts[2:])
        for a, b in zip(whole, split):
            assert np.array_equal(a, b)

    def test_order_preserved(self):
        texts = ["CHAR1 met CHAR2.", "CHAR1 avoided CHAR2."]
        out = embed_batch(texts)
        assert np.array_equal(out[0], hash_embed(texts[0]))
        assert np.array_equal(out[1], hash_embed(texts[1]))


FAKE_PROVIDER = textwrap.dedent(
    """
    import json, sys, hashlib
    DIM = 32
    def vec(text):
        h = hashlib.sha256(text.encode()).digest()
        return [b / 255.0 for b in h[:DIM]]
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        if req["op"] == "dim":
            print(json.dumps({"dim": DIM}))
        elif req["op"] == "embed":
            print(json.dumps({"id": req["id"], "vector": vec(req["text"])}))
        else:
            print(json.dumps({"id": req.get("id"), "error": "bad op"}))
        sys.stdout.flush()
    """
)

BROKEN_PROVIDER = textwrap.dedent(
    """
    import json, sys
    for line in sys.stdin:
        req = json.loads(line)
        if req["op"] == "dim":
            print(json.dumps({"dim": 8}))
        else:
            print(json.dumps({"id": req["id"], "vector": [0.1, 0.2]}))
        sys.stdout.flush()
    """
)


def provider_handle(tmp_path, code: str) -> ProviderHandle:
    script = tmp_path / "provider.py"
    script.write_text(code, encoding="utf-8")
    return ProviderHandle(kind="external", endpoint=f"{sys.executable} -u {script}")


class TestExternalProvider:
    def test_round_trip_subprocess(self, tmp_path):
        handle = provider_handle(tmp_path, FAKE_PROVIDER)
        out = embed_batch(["one text", "another text"], handle)
        assert len(out) == 2
        assert all(v.shape == (32,) for v in out)
        again = embed_batch(["one text"], provider_handle(tmp_path, FAKE_PROVIDER))
        assert np.array_equal(out[0], again[0])

    def test_dimension_mismatch_is_hard_error(self, tmp_path):
        handle = provider_handle(tmp_path, BROKEN_PROVIDER)
        with pytest.raises(ProviderProtocolError, match="batch index 0"):
            embed_batch(["text"], handle)

    def test_unreachable_provider(self):
        handle = ProviderHandle(kind="external", endpoint="/nonexistent/binary-xyz")
        with pytest.raises(ProviderError):
            embed_batch(["text"], handle)

    def test_cache_round_trip(self, tmp_path):
        handle = provider_handle(tmp_path, FAKE_PROVIDER)
        cache = VectorCache(tmp_path / "cache", handle.provider_id)
        first = embed_batch(["cached text"], handle, cache)
        assert cache.get("cached text") is not None
        # a provider that now fails is never consulted for cached texts
        dead = ProviderHandle(kind="external", endpoint="/nonexistent/binary-xyz")
        dead.dim = 32
        second = embed_batch(["cached text"], dead, VectorCache(tmp_path / "cache", handle.provider_id))
        assert np.array_equal(first[0], second[0])


SLOW_PROVIDER = textwrap.dedent(
    """
    import json, sys, time
    for line in sys.stdin:
        req = json.loads(line)
        if req["op"] == "dim":
            print(json.dumps({"dim": 8})); sys.stdout.flush()
        else:
            time.sleep(5)
            print(json.dumps({"id": req["id"], "vector": [0.0] * 8})); sys.stdout.flush()
    """
)


class TestProviderTimeout:
    def test_timeout_names_batch_index(self, tmp_path):
        from litkg.provider import ProviderClient

        handle = provider_handle(tmp_path, SLOW_PROVIDER)
        client = ProviderClient(handle, timeout=0.3)
        try:
            assert client.dim() == 8
            with pytest.raises(ProviderError, match="timed out"):
                client.request({"op": "embed", "id": 0, "text": "never arrives"})
        finally:
            client.close()
