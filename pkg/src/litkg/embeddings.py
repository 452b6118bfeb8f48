"""Sentence vectors: pluggable provider plus a deterministic offline fallback.

The builtin fallback is a signed feature-hashing embedder over word
unigrams and bigrams with CHARn ids masked to a single CHAR token, so that
relation clusters form around predicates rather than around who appears.
External providers speak the wire protocol from the provider module and
their vectors are cached on disk keyed by (provider id, content hash).
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from pathlib import Path

import numpy as np

from .provider import ProviderClient, ProviderError, ProviderHandle, ProviderProtocolError

log = logging.getLogger(__name__)

DEFAULT_DIM = 256

_MASK = re.compile(r"CHAR\d+")
_TOKEN = re.compile(r"[a-z0-9']+")


def hash_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Deterministic L2-normalized bag-of-features vector.

    Features are lowercased word unigrams and bigrams with character ids
    masked to CHAR; each feature lands on a signed hashed coordinate.
    Featureless input yields the zero vector and a logged warning.
    """
    if dim < 16:
        raise ValueError(f"dim must be >= 16, got {dim}")
    tokens = _TOKEN.findall(_MASK.sub("CHAR", text).lower())
    features = [f"1:{t}" for t in tokens]
    features += [f"2:{a} {b}" for a, b in zip(tokens, tokens[1:])]
    vec = np.zeros(dim, dtype=np.float64)
    if not features:
        log.warning("hash_embed: no features in %r, returning zero vector", text[:60])
        return vec
    for feat in features:
        digest = hashlib.blake2b(feat.encode("utf-8"), digest_size=9).digest()
        index = int.from_bytes(digest[:8], "big") % dim
        vec[index] += 1.0 if digest[8] & 1 else -1.0
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        log.warning("hash_embed: feature signs cancelled for %r", text[:60])
        return vec
    return vec / norm


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cos(u, v), in [0, 2]; zero vectors are a domain error."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine distance undefined for zero vector")
    # clamp float noise so identical vectors report exactly 0
    return max(0.0, 1.0 - float(np.dot(u, v)) / (nu * nv))


def euclidean_distance(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.linalg.norm(u - v))


class VectorCache:
    """Disk cache of provider vectors keyed by (provider id, content hash)."""

    def __init__(self, root: str | Path, provider_id: str):
        self.root = Path(root)
        self.provider_id = provider_id

    def _path(self, text: str) -> Path:
        key = hashlib.sha256(f"{self.provider_id}\x00{text}".encode("utf-8")).hexdigest()
        return self.root / key[:2] / f"{key}.json"

    def get(self, text: str) -> np.ndarray | None:
        path = self._path(text)
        if not path.exists():
            return None
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return np.asarray(data["vector"], dtype=np.float64)
        except (json.JSONDecodeError, KeyError, OSError):
            return None

    def put(self, text: str, vector: np.ndarray) -> None:
        path = self._path(text)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps({"vector": [float(x) for x in vector]}), encoding="utf-8"
        )


def embed_batch(
    texts: list[str],
    provider: ProviderHandle | None = None,
    cache: VectorCache | None = None,
) -> list[np.ndarray]:
    """Embed texts in order; all output vectors share one dimension.

    The builtin provider is pure and deterministic.  External providers
    answering with a wrong-length vector or non-finite values abort the
    batch with the offending index named.
    """
    provider = provider or ProviderHandle()
    if provider.is_builtin:
        dim = provider.dim or DEFAULT_DIM
        return [hash_embed(t, dim) for t in texts]
    if not texts:
        return []

    client = ProviderClient(provider)
    try:
        dim = provider.dim or client.dim()
        vectors: list[np.ndarray] = []
        for i, text in enumerate(texts):
            if cache is not None:
                hit = cache.get(text)
                if hit is not None:
                    if hit.shape != (dim,):
                        raise ProviderProtocolError(
                            f"cached vector for batch index {i} has dim {hit.shape[0]}, expected {dim}"
                        )
                    vectors.append(hit)
                    continue
            try:
                resp = client.request({"op": "embed", "id": i, "text": text})
            except ProviderError as exc:
                raise ProviderError(f"embed failed at batch index {i}: {exc}") from exc
            values = resp.get("vector")
            if not isinstance(values, list):
                raise ProviderProtocolError(f"no vector in response at batch index {i}: {resp!r}")
            vec = np.asarray(values, dtype=np.float64)
            if vec.shape != (dim,):
                raise ProviderProtocolError(
                    f"vector at batch index {i} has dim {vec.shape[0]}, expected {dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise ProviderProtocolError(f"non-finite vector at batch index {i}")
            if cache is not None:
                cache.put(text, vec)
            vectors.append(vec)
        return vectors
    finally:
        client.close()
