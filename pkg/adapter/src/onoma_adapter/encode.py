"""Batch encoding of annotated sentence files into vector files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoders import resolve_encoder
from .io import write_vectors
from .lengths import LengthRule, standardize_length

__all__ = ["AdapterConfig", "encode_file"]


@dataclass
class AdapterConfig:
    model: str = "hash:256"
    batch_size: int = 32
    device: str | None = None
    format: str = "jsonl"
    lang: str | None = None
    length_rule: LengthRule | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.length_rule is not None and self.lang is None:
            raise ValueError("a length rule needs --lang to validate against")


def _read_lines(path) -> list[tuple[int, str, str]]:
    records = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ValueError(f"line {lineno}: expected 'id<TAB>sentence'")
        doc_id, sentence = line.split("\t", 1)
        if not doc_id:
            raise ValueError(f"line {lineno}: empty id")
        records.append((lineno, doc_id, sentence))
    if not records:
        raise ValueError("input file has no records")
    return records


def encode_file(input_path, output_path, config: AdapterConfig) -> dict:
    """Encode one sentence per input line and write the vector file.

    Returns the manifest, which is also written next to the output as
    <output>.manifest.json and records the resolved model identifier.
    """
    encoder = resolve_encoder(config.model, device=config.device)
    records = _read_lines(input_path)
    ids, sentences = [], []
    for lineno, doc_id, sentence in records:
        if config.length_rule is not None:
            sentence = standardize_length(sentence, config.lang,
                                          config.length_rule)
        ids.append(doc_id)
        sentences.append(sentence)

    chunks = []
    for start in range(0, len(sentences), config.batch_size):
        batch = sentences[start:start + config.batch_size]
        try:
            chunks.append(encoder.encode(batch))
        except Exception as exc:
            lineno = records[start][0]
            raise RuntimeError(
                f"encoding failed at line {lineno}: {exc}"
            ) from exc
    vectors = np.concatenate(chunks, axis=0)
    write_vectors(output_path, ids, vectors, format=config.format)

    manifest = {
        "model": encoder.identifier,
        "backend": encoder.backend,
        "dim": int(vectors.shape[1]),
        "count": len(ids),
        "format": config.format,
        "lang": config.lang,
        "length_rule": (
            {"lang": config.length_rule.lang, "unit": config.length_rule.unit,
             "limit": config.length_rule.limit}
            if config.length_rule else None
        ),
    }
    manifest_path = Path(str(output_path) + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return manifest
