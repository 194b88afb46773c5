"""Corpus ingestion, tokenization, target counting and keyword extraction.

A corpus is a list of documents (for this toolkit a "document" is usually a
single sentence) with one embedding vector per document. Two on-disk formats
are supported: JSONL (one object per line with "id" and "vector") and a
compact binary format (magic ``ONOMVEC1``).
"""

from __future__ import annotations

import json
import math
import re
import struct
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CorpusError",
    "Document",
    "EmbeddedCorpus",
    "TokenizedCorpus",
    "FrequencyTable",
    "load_corpus",
    "save_corpus",
    "load_token_file",
    "split_sentences",
    "tokenize",
    "count_targets",
    "extract_keywords",
]

BINARY_MAGIC = b"ONOMVEC1"


class CorpusError(ValueError):
    """Malformed corpus input (parse errors, contract violations)."""


@dataclass
class Document:
    id: str
    text: str | None = None
    lang: str | None = None
    tokens: list[str] | None = None

    def __post_init__(self):
        if not self.id:
            raise CorpusError("document id must be nonempty")
        if self.tokens is not None and any(t == "" for t in self.tokens):
            raise CorpusError(f"document {self.id!r} has empty token")


@dataclass
class EmbeddedCorpus:
    """Documents plus an aligned (n, dim) float32 embedding matrix."""

    dim: int
    docs: list[Document]
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if len(self.docs) == 0:
            raise CorpusError("empty corpus")
        if self.vectors.shape != (len(self.docs), self.dim):
            raise CorpusError(
                f"vector matrix shape {self.vectors.shape} does not match "
                f"({len(self.docs)}, {self.dim})"
            )
        if not np.all(np.isfinite(self.vectors)):
            bad = int(np.argwhere(~np.isfinite(self.vectors))[0, 0])
            raise CorpusError(f"non-finite vector component at record {bad + 1}")
        seen = {}
        for i, doc in enumerate(self.docs):
            if doc.id in seen:
                raise CorpusError(
                    f"duplicate id {doc.id!r} at record {i + 1} "
                    f"(first seen at record {seen[doc.id] + 1})"
                )
            seen[doc.id] = i

    def __len__(self):
        return len(self.docs)

    def records(self):
        """Iterate (Document, vector) pairs in input order."""
        return zip(self.docs, self.vectors)


@dataclass
class TokenizedCorpus:
    """Token lists per document with the induced vocabulary and doc counts."""

    docs: list[list[str]]
    vocabulary: dict[str, int] = field(default_factory=dict)
    doc_freq: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_docs(cls, docs: list[list[str]]) -> "TokenizedCorpus":
        vocab: dict[str, int] = {}
        doc_freq: Counter[str] = Counter()
        for toks in docs:
            for t in toks:
                if t not in vocab:
                    vocab[t] = len(vocab)
            doc_freq.update(set(toks))
        return cls(docs=list(docs), vocabulary=vocab, doc_freq=dict(doc_freq))

    def __len__(self):
        return len(self.docs)


@dataclass
class FrequencyTable:
    """Per-partition counts of named target-lemma sets."""

    rows: dict[str, dict[str, int]]

    def merged(self, other: "FrequencyTable") -> "FrequencyTable":
        rows = {k: dict(v) for k, v in self.rows.items()}
        for part, counts in other.rows.items():
            dst = rows.setdefault(part, {})
            for name, c in counts.items():
                dst[name] = dst.get(name, 0) + c
        return FrequencyTable(rows)


# ---------------------------------------------------------------------------
# Vector file I/O
# ---------------------------------------------------------------------------

def _parse_jsonl(path) -> tuple[list[Document], list[list[float]]]:
    docs, vecs = [], []
    with open(path, "r", encoding="utf-8") as fh:
        recno = 0
        for line in fh:
            if not line.strip():
                continue
            recno += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"bad JSON at record {recno}: {exc}") from exc
            if "id" not in obj or "vector" not in obj:
                raise CorpusError(f"missing id/vector at record {recno}")
            docs.append(
                Document(
                    id=str(obj["id"]),
                    text=obj.get("text"),
                    lang=obj.get("lang"),
                    tokens=list(obj["tokens"]) if obj.get("tokens") is not None else None,
                )
            )
            vecs.append([float(x) for x in obj["vector"]])
    return docs, vecs


def _parse_binary(path) -> tuple[list[Document], list[list[float]]]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:8] != BINARY_MAGIC:
        raise CorpusError("bad magic: not a vector file")
    count, dim = struct.unpack_from("<II", data, 8)
    off = 16
    docs, vecs = [], []
    for recno in range(1, count + 1):
        if off + 2 > len(data):
            raise CorpusError(f"truncated file at record {recno}")
        (idlen,) = struct.unpack_from("<H", data, off)
        off += 2
        end = off + idlen + 4 * dim
        if end > len(data):
            raise CorpusError(f"truncated file at record {recno}")
        doc_id = data[off:off + idlen].decode("utf-8")
        off += idlen
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=off)
        off += 4 * dim
        docs.append(Document(id=doc_id))
        vecs.append(vec)
    return docs, [list(map(float, v)) for v in vecs]


def load_corpus(path, format: str = "jsonl") -> EmbeddedCorpus:
    """Load and validate a vector file.

    Raises CorpusError on empty input, inconsistent dimensions, non-finite
    components or duplicate ids; messages carry the 1-based record index.
    """
    if format == "jsonl":
        docs, vecs = _parse_jsonl(path)
    elif format == "binary":
        docs, vecs = _parse_binary(path)
    else:
        raise CorpusError(f"unknown format {format!r}")
    if not docs:
        raise CorpusError("empty corpus")
    dim = len(vecs[0])
    for i, v in enumerate(vecs):
        if len(v) != dim:
            raise CorpusError(f"dimension mismatch at record {i + 1}")
        if not all(math.isfinite(x) for x in v):
            raise CorpusError(f"non-finite vector component at record {i + 1}")
    matrix = np.asarray(vecs, dtype=np.float32)
    return EmbeddedCorpus(dim=dim, docs=docs, vectors=matrix)


def save_corpus(corpus: EmbeddedCorpus, path, format: str = "jsonl") -> None:
    """Write a corpus; load_corpus(save_corpus(c)) round-trips bit-exactly."""
    if format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for doc, vec in corpus.records():
                obj: dict = {"id": doc.id}
                if doc.text is not None:
                    obj["text"] = doc.text
                if doc.lang is not None:
                    obj["lang"] = doc.lang
                if doc.tokens is not None:
                    obj["tokens"] = doc.tokens
                obj["vector"] = [float(x) for x in vec]
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    elif format == "binary":
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<II", len(corpus), corpus.dim))
            for doc, vec in corpus.records():
                enc = doc.id.encode("utf-8")
                if len(enc) > 0xFFFF:
                    raise CorpusError(f"id too long for binary format: {doc.id!r}")
                fh.write(struct.pack("<H", len(enc)))
                fh.write(enc)
                fh.write(np.asarray(vec, dtype="<f4").tobytes())
    else:
        raise CorpusError(f"unknown format {format!r}")


def load_token_file(path) -> TokenizedCorpus:
    """Read a JSONL file keeping only the "tokens" field of each record."""
    docs = []
    with open(path, "r", encoding="utf-8") as fh:
        recno = 0
        for line in fh:
            if not line.strip():
                continue
            recno += 1
            obj = json.loads(line)
            toks = obj.get("tokens")
            if toks is None:
                raise CorpusError(f"missing tokens at record {recno}")
            docs.append([str(t) for t in toks])
    if not docs:
        raise CorpusError("empty corpus")
    return TokenizedCorpus.from_docs(docs)


# ---------------------------------------------------------------------------
# Sentence splitting and tokenization
# ---------------------------------------------------------------------------

# Latin-script terminators split only when followed by whitespace or EOL;
# fullwidth CJK terminators split unconditionally.
_LATIN_TERMINATORS = frozenset(".!?")
_CJK_TERMINATORS = frozenset("。！？")  # 。 ！ ？


def split_sentences(text: str, lang: str | None = None, parent_id: str = "doc") -> list[Document]:
    """Split text into sentence documents by a deterministic terminator table.

    The terminator stays attached to its sentence; ids are the parent id plus
    a running index. Text without any terminator yields a single document.
    """
    if not text:
        raise CorpusError("text must be nonempty")
    pieces: list[str] = []
    buf: list[str] = []
    n = len(text)
    for i, ch in enumerate(text):
        buf.append(ch)
        if ch in _CJK_TERMINATORS:
            pieces.append("".join(buf))
            buf = []
        elif ch in _LATIN_TERMINATORS:
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt == "" or nxt.isspace():
                pieces.append("".join(buf))
                buf = []
    if buf:
        pieces.append("".join(buf))
    out = []
    for piece in pieces:
        stripped = piece.strip()
        if stripped:
            out.append(Document(id=f"{parent_id}-{len(out)}", text=stripped, lang=lang))
    return out


_WORD_RE = re.compile(r"\w+", re.UNICODE)


def tokenize(
    doc: Document,
    stopwords: frozenset[str] | set[str] = frozenset(),
    lemma_map: dict[str, str] | None = None,
) -> list[str]:
    """Lowercase lemma tokens of a document, stopwords and punctuation removed."""
    if doc.text is None:
        raise CorpusError(f"document {doc.id!r} has no text")
    lemma_map = lemma_map or {}
    out = []
    for surface in _WORD_RE.findall(doc.text.lower()):
        if surface in stopwords:
            continue
        lemma = lemma_map.get(surface, surface)
        if lemma in stopwords:
            continue
        out.append(lemma)
    return out


# ---------------------------------------------------------------------------
# Target counting and keyword extraction
# ---------------------------------------------------------------------------

def count_targets(
    corpus: TokenizedCorpus,
    targets: dict[str, set[str]],
    partition: str = "all",
) -> FrequencyTable:
    """Total occurrences of each named lemma set across all documents."""
    for name, lemmas in targets.items():
        if not lemmas:
            raise CorpusError(f"target set {name!r} is empty")
    counts = {name: 0 for name in targets}
    for toks in corpus.docs:
        tok_counts = Counter(toks)
        for name, lemmas in targets.items():
            counts[name] += sum(tok_counts[lem] for lem in lemmas)
    return FrequencyTable(rows={partition: counts})


def _g2(k1: int, n1: int, k2: int, n2: int) -> float:
    """Signed log-likelihood ratio for document frequencies k1/n1 vs k2/n2."""
    total = n1 + n2
    observed = (k1, n1 - k1, k2, n2 - k2)
    col = (k1 + k2, total - k1 - k2)
    expected = (
        n1 * col[0] / total,
        n1 * col[1] / total,
        n2 * col[0] / total,
        n2 * col[1] / total,
    )
    g2 = 0.0
    for o, e in zip(observed, expected):
        if o > 0 and e > 0:
            g2 += o * math.log(o / e)
    g2 *= 2.0
    ratio_diff = k1 / n1 - k2 / n2
    if ratio_diff == 0:
        return 0.0
    return math.copysign(g2, ratio_diff)


def extract_keywords(
    target: TokenizedCorpus,
    reference: TokenizedCorpus,
    min_doc_ratio: float = 0.0,
) -> list[tuple[str, float]]:
    """Rank target-corpus terms by document-frequency G2 keyness.

    Document frequency rather than raw frequency keeps the measure
    dispersion-aware: a term must recur across documents to score. Terms
    whose target document ratio falls below min_doc_ratio are dropped.
    Descending keyness, ties broken lexicographically.
    """
    if not target.docs or not reference.docs:
        raise CorpusError("both corpora must be nonempty")
    if not 0.0 <= min_doc_ratio <= 1.0:
        raise CorpusError("min_doc_ratio must be within [0, 1]")
    n1, n2 = len(target.docs), len(reference.docs)
    scored = []
    for term, k1 in target.doc_freq.items():
        if k1 / n1 < min_doc_ratio:
            continue
        k2 = reference.doc_freq.get(term, 0)
        scored.append((term, _g2(k1, n1, k2, n2)))
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return scored
