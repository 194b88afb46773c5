"""Vector-file writers (the toolkit's external interface).

JSONL: one object per line with "id" and "vector". Binary: magic
``ONOMVEC1``, little-endian u32 count and dim, then per record a u16 id
length, the UTF-8 id, and dim float32 values.
"""

from __future__ import annotations

import json
import struct

import numpy as np

BINARY_MAGIC = b"ONOMVEC1"

__all__ = ["write_vectors", "BINARY_MAGIC"]


def write_vectors(path, ids: list[str], vectors: np.ndarray,
                  format: str = "jsonl") -> None:
    vectors = np.asarray(vectors, dtype=np.float32)
    if len(ids) != vectors.shape[0]:
        raise ValueError("ids and vectors are not aligned")
    if format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for doc_id, vec in zip(ids, vectors):
                fh.write(json.dumps(
                    {"id": doc_id, "vector": [float(x) for x in vec]},
                    ensure_ascii=False,
                ) + "\n")
    elif format == "binary":
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<II", len(ids), vectors.shape[1]))
            for doc_id, vec in zip(ids, vectors):
                enc = doc_id.encode("utf-8")
                if len(enc) > 0xFFFF:
                    raise ValueError(f"id too long: {doc_id!r}")
                fh.write(struct.pack("<H", len(enc)))
                fh.write(enc)
                fh.write(vec.astype("<f4").tobytes())
    else:
        raise ValueError(f"unknown format {format!r}")
