"""Encoder backends.

``resolve_encoder`` maps a model identifier onto an encoder with ``dim``
and ``encode(sentences) -> float32 array``:

- ``hash:<dim>`` — deterministic character-n-gram hashing featurizer with
  L2-normalized TF weights. No downloads, bitwise reproducible; lexically
  overlapping sentences score higher cosine. Meant for offline runs and CI.
- anything else — a sentence-transformers model id, loaded out of the box
  with its default output configuration and run in inference mode.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["ModelLoadError", "resolve_encoder", "HashNgramEncoder"]


class ModelLoadError(RuntimeError):
    pass


class HashNgramEncoder:
    """Character n-gram (1..3) hashing into a fixed-dimension TF vector."""

    backend = "hash"

    def __init__(self, dim: int = 256):
        if dim < 8:
            raise ModelLoadError(f"hash encoder dim must be >= 8, got {dim}")
        self.dim = dim
        self.identifier = f"hash:{dim}"

    def _bucket(self, gram: str) -> int:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def encode(self, sentences: list[str]) -> np.ndarray:
        out = np.zeros((len(sentences), self.dim), dtype=np.float32)
        for row, sentence in enumerate(sentences):
            text = sentence.lower()
            if not text.strip():
                raise ValueError("cannot encode an empty sentence")
            for n in (1, 2, 3):
                for i in range(len(text) - n + 1):
                    out[row, self._bucket(text[i:i + n])] += 1.0
            norm = float(np.linalg.norm(out[row]))
            out[row] /= norm
        return out


class SentenceTransformerEncoder:
    backend = "sentence-transformers"

    def __init__(self, model_id: str, device: str | None = None):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError(
                "sentence-transformers is not installed; install the "
                "'transformers' extra or use a hash:<dim> model id"
            ) from exc
        try:
            self._model = SentenceTransformer(model_id, device=device)
        except Exception as exc:
            raise ModelLoadError(f"cannot load model {model_id!r}: {exc}") from exc
        self._model.eval()
        self.identifier = model_id
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, sentences: list[str]) -> np.ndarray:
        vectors = self._model.encode(
            sentences, convert_to_numpy=True, show_progress_bar=False
        )
        return np.asarray(vectors, dtype=np.float32)


def resolve_encoder(model_id: str, device: str | None = None):
    if model_id.startswith("hash:"):
        try:
            dim = int(model_id.split(":", 1)[1])
        except ValueError:
            raise ModelLoadError(f"bad hash encoder id {model_id!r}") from None
        return HashNgramEncoder(dim)
    return SentenceTransformerEncoder(model_id, device=device)
