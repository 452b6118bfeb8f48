"""Provider session: request handling and the model adapters behind it.

The session is transport-agnostic; serve.py moves its JSON objects over
stdio or HTTP.  Adapters are duck-typed: an encoder exposes ``dim`` and
``encode(texts) -> (vectors, truncated)``, a summarizer exposes
``summarize(texts) -> str``.  The heavyweight adapters import torch and
transformers lazily so the protocol layer stays testable without them.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

import numpy as np

DEFAULT_ENCODER = "sentence-transformers/bert-base-nli-mean-tokens"
DEFAULT_SUMMARIZER = "facebook/bart-large-cnn"


class ModelLoadError(Exception):
    """A model could not be loaded; the sidecar should exit with diagnostics."""


class HashEncoder:
    """Deterministic stub encoder for protocol tests and offline smoke runs."""

    def __init__(self, dim: int = 64, max_tokens: int = 128):
        self.dim = dim
        self.max_tokens = max_tokens

    def encode(self, texts: list[str]) -> tuple[list[list[float]], list[bool]]:
        vectors = []
        truncated = []
        for text in texts:
            tokens = re.findall(r"\w+", text.lower())
            truncated.append(len(tokens) > self.max_tokens)
            tokens = tokens[: self.max_tokens]
            vec = np.zeros(self.dim)
            for tok in tokens:
                digest = hashlib.blake2b(tok.encode("utf-8"), digest_size=9).digest()
                index = int.from_bytes(digest[:8], "big") % self.dim
                vec[index] += 1.0 if digest[8] & 1 else -1.0
            norm = np.linalg.norm(vec)
            vectors.append((vec / norm if norm else vec).tolist())
        return vectors, truncated


class MeanPoolingEncoder:
    """Transformer sentence encoder with mean pooling over token outputs.

    Pooling lives here, not in the core: the masked mean of the final
    hidden states is the sentence vector.  Inputs longer than the model
    maximum are tail-truncated and flagged in the response metadata.
    """

    def __init__(self, model_name: str = DEFAULT_ENCODER):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelLoadError(f"encoder needs torch and transformers: {exc}") from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name)
        except Exception as exc:
            raise ModelLoadError(f"cannot load encoder {model_name!r}: {exc}") from exc
        self.model.eval()
        self._torch = torch
        self.dim = int(self.model.config.hidden_size)
        self.max_tokens = int(self.tokenizer.model_max_length)

    def encode(self, texts: list[str]) -> tuple[list[list[float]], list[bool]]:
        torch = self._torch
        truncated = [
            len(self.tokenizer.encode(t, add_special_tokens=True)) > self.max_tokens
            for t in texts
        ]
        batch = self.tokenizer(
            texts, padding=True, truncation=True, return_tensors="pt"
        )
        with torch.no_grad():
            output = self.model(**batch)
        hidden = output.last_hidden_state
        mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        summed = (hidden * mask).sum(dim=1)
        counts = mask.sum(dim=1).clamp(min=1)
        pooled = summed / counts
        return [row.tolist() for row in pooled], truncated


class Seq2SeqSummarizer:
    """Sequence-to-sequence summarizer over the concatenated cluster text."""

    def __init__(self, model_name: str = DEFAULT_SUMMARIZER, max_new_tokens: int = 80):
        try:
            import torch
            from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
        except ImportError as exc:
            raise ModelLoadError(f"summarizer needs torch and transformers: {exc}") from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModelForSeq2SeqLM.from_pretrained(model_name)
        except Exception as exc:
            raise ModelLoadError(f"cannot load summarizer {model_name!r}: {exc}") from exc
        self.model.eval()
        self._torch = torch
        self.max_new_tokens = max_new_tokens

    def summarize(self, texts: list[str]) -> str:
        torch = self._torch
        joined = " ".join(texts)
        batch = self.tokenizer(joined, truncation=True, return_tensors="pt")
        with torch.no_grad():
            generated = self.model.generate(
                **batch, max_new_tokens=self.max_new_tokens, num_beams=4
            )
        return self.tokenizer.decode(generated[0], skip_special_tokens=True).strip()


class LeadSummarizer:
    """Extractive stub: the first sentence of the concatenated input."""

    def summarize(self, texts: list[str]) -> str:
        return texts[0] if texts else ""


@dataclass
class ProviderSession:
    """Answers one wire-protocol request at a time.

    Responses echo the request id; malformed requests produce an error
    response and the session keeps going.
    """

    encoder: object
    summarizer: object | None = None
    max_batch: int = 32
    requests_handled: int = field(default=0, init=False)

    def handle(self, request: object) -> dict:
        self.requests_handled += 1
        if not isinstance(request, dict):
            return {"error": "request must be a JSON object"}
        op = request.get("op")
        rid = request.get("id")
        if op == "dim":
            return {"dim": int(self.encoder.dim)}
        if op == "embed":
            text = request.get("text")
            if not isinstance(text, str):
                return {"id": rid, "error": "embed needs a text field"}
            vectors, truncated = self.encoder.encode([text])
            return {"id": rid, "vector": vectors[0], "truncated": bool(truncated[0])}
        if op == "summarize":
            texts = request.get("texts")
            if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                return {"id": rid, "error": "summarize needs a texts list"}
            if self.summarizer is None:
                return {"id": rid, "error": "no summarizer loaded"}
            return {"id": rid, "summary": self.summarizer.summarize(texts)}
        return {"id": rid, "error": f"unknown op {op!r}"}
