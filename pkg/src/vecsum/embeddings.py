"""Sentence and document vectors from word vectors.

Native vector functions: SIF-weighted averaging (smooth inverse frequency,
weight a/(a+p(w))) and the same with common-component removal. Neural
sentence vectors (paragraph vectors, skip-thought and the like) are
ingested from TSV files, never trained here. Every produced vector is
unit-normalized.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import islice
from pathlib import Path

import numpy as np

from .corpus import DocumentCluster, Sentence, SentenceId, Token, tokenize
from .errors import (
    DegenerateSample,
    DimensionMismatch,
    EmptyEmbedding,
    IncompleteVectors,
    ParseError,
    ZeroVector,
)

DEFAULT_SIF_A = 1e-3
_NORM_EPS = 1e-12

NATIVE_FUNCTIONS = ("sif-average", "arora")


def _unit(v: np.ndarray, context: str) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm <= _NORM_EPS:
        raise ZeroVector(f"cannot normalize zero vector ({context})")
    return v / norm


@dataclass(frozen=True)
class WordVectorTable:
    dim: int
    entries: dict[str, np.ndarray]
    duplicates: int = 0

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __getitem__(self, word: str) -> np.ndarray:
        return self.entries[word]


@dataclass(frozen=True)
class FrequencyTable:
    counts: dict[str, int]
    total: int

    def probability(self, word: str) -> float:
        return self.counts.get(word, 0) / self.total


@dataclass(frozen=True)
class VectorFunctionConfig:
    kind: str  # sif-average | arora | external
    sif_a: float = DEFAULT_SIF_A
    common_component: np.ndarray | None = None
    external_path: str | None = None

    def __post_init__(self):
        if self.sif_a <= 0:
            raise ValueError("sif_a must be positive")
        if self.kind == "arora" and self.common_component is None:
            raise ValueError("arora requires a fitted common_component")
        if self.common_component is not None:
            norm = float(np.linalg.norm(self.common_component))
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(f"common_component must be unit norm, got {norm}")


@dataclass(frozen=True)
class SentenceVector:
    sentence_id: SentenceId
    v: np.ndarray
    oov: int = 0  # tokens skipped for lack of word-vector coverage


@dataclass(frozen=True)
class DocumentVector:
    cluster_id: str
    v: np.ndarray
    strategy: str  # simple | docvec-avg


def load_word_vectors(path) -> WordVectorTable:
    """GloVe-style text file: `word f1 ... fd` per line, UTF-8.

    Duplicate words keep the last occurrence; a warning is emitted and the
    duplicate count is recorded on the table.
    """
    path = Path(path)
    entries: dict[str, np.ndarray] = {}
    dim = None
    duplicates = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            word, raw = parts[0], parts[1:]
            if dim is None:
                dim = len(raw)
                if dim == 0:
                    raise ParseError("first record has no vector values", path=path, line=lineno)
            elif len(raw) != dim:
                raise DimensionMismatch(
                    f"{path}:{lineno}: expected {dim} values for {word!r}, got {len(raw)}"
                )
            try:
                vec = np.array([float(x) for x in raw], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"unparsable float for {word!r}: {exc}", path=path, line=lineno) from exc
            if word in entries:
                duplicates += 1
            entries[word] = vec
    if not entries:
        raise ParseError("word-vector file is empty", path=path)
    if duplicates:
        warnings.warn(f"{path}: {duplicates} duplicate words, last occurrence wins")
    return WordVectorTable(dim=dim, entries=entries, duplicates=duplicates)


def load_frequencies(path) -> FrequencyTable:
    """TSV `word<TAB>count` per line."""
    path = Path(path)
    counts: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                word, raw_count = line.split("\t")
                count = int(raw_count)
            except ValueError as exc:
                raise ParseError(f"bad frequency record: {exc}", path=path, line=lineno) from exc
            if count <= 0:
                raise ParseError(f"count for {word!r} must be positive", path=path, line=lineno)
            counts[word] = counts.get(word, 0) + count
    if not counts:
        raise ParseError("frequency file is empty", path=path)
    return FrequencyTable(counts=counts, total=sum(counts.values()))


def sif_weight(word: str, freq: FrequencyTable, a: float = DEFAULT_SIF_A) -> float:
    """Smooth inverse frequency a/(a + p(word)); unseen words weigh 1."""
    if a <= 0:
        raise ValueError("a must be positive")
    return a / (a + freq.probability(word))


def _weighted_average(
    tokens: list[Token], table: WordVectorTable, freq: FrequencyTable, a: float, context: str
) -> tuple[np.ndarray, int]:
    total = np.zeros(table.dim)
    known = 0
    oov = 0
    for token in tokens:
        word = token.lowercased
        vec = table.entries.get(word)
        if vec is None:
            oov += 1
            continue
        total += sif_weight(word, freq, a) * vec
        known += 1
    if known == 0:
        raise EmptyEmbedding(f"no known tokens in {context}")
    return _unit(total / known, context), oov


def sif_sentence_vector(
    sentence: Sentence,
    table: WordVectorTable,
    freq: FrequencyTable,
    a: float = DEFAULT_SIF_A,
) -> SentenceVector:
    """Unit-normalized SIF-weighted average of the sentence's word vectors.

    Out-of-vocabulary tokens are skipped; the skip count is recorded on the
    result. The average divides by the known-token count, which cancels
    under normalization.
    """
    v, oov = _weighted_average(list(sentence.tokens), table, freq, a, f"sentence {sentence.id}")
    return SentenceVector(sentence_id=sentence.id, v=v, oov=oov)


def _start_vector(d: int, k: int, components: list[np.ndarray]) -> np.ndarray | None:
    """Deterministic start for the k-th power iteration: the normalized
    all-ones vector, deflated; basis vectors as fallback when it lies in
    the span already found."""
    candidates = [np.ones(d) / math.sqrt(d)]
    for j in range(d):
        e = np.zeros(d)
        e[(k + j) % d] = 1.0
        candidates.append(e)
    for v in candidates:
        v = v.copy()
        for u in components:
            v -= (v @ u) * u
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            return v / norm
    return None


def principal_component_stream(sample: np.ndarray, tol: float = 1e-10, max_iter: int = 1000):
    """Yield leading right-singular directions of an uncentered sample.

    Power iteration on X^T X with deflation by projection against the
    components already yielded; deterministic all-ones start vector. Signs
    are fixed so each component's largest-magnitude coordinate is positive.
    The stream ends when the residual rank is exhausted.
    """
    X = np.asarray(sample, dtype=np.float64)
    n, d = X.shape
    scale = float(np.abs(X).max(initial=0.0))
    if scale <= _NORM_EPS:
        return
    floor = _NORM_EPS * scale * scale * max(n, 1)
    components: list[np.ndarray] = []
    for k in range(d):
        v = _start_vector(d, k, components)
        if v is None:
            return
        exhausted = False
        for _ in range(max_iter):
            w = X.T @ (X @ v)
            for u in components:
                w -= (w @ u) * u
            wnorm = np.linalg.norm(w)
            if wnorm <= floor:
                exhausted = True
                break
            w /= wnorm
            if np.linalg.norm(w - v) <= tol:
                v = w
                break
            v = w
        if exhausted:
            return
        peak = int(np.argmax(np.abs(v)))
        if v[peak] < 0:
            v = -v
        components.append(v)
        yield v


def principal_components(
    sample: np.ndarray,
    n_components: int,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> list[np.ndarray]:
    """First `n_components` uncentered principal directions (or fewer when
    the sample rank is exhausted)."""
    stream = principal_component_stream(sample, tol=tol, max_iter=max_iter)
    return list(islice(stream, n_components))


def fit_common_component(sample: list[SentenceVector]) -> np.ndarray:
    """First principal component of raw (uncentered) sentence vectors."""
    if len(sample) < 2:
        raise ValueError("common-component sample needs at least 2 vectors")
    dims = {sv.v.shape[0] for sv in sample}
    if len(dims) != 1:
        raise DimensionMismatch(f"sample mixes dimensions {sorted(dims)}")
    X = np.stack([sv.v for sv in sample])
    components = principal_components(X, 1)
    if not components:
        raise DegenerateSample("common-component sample is all zeros")
    return components[0]


def remove_common_component(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Project out direction `u` and renormalize."""
    if v.shape != u.shape:
        raise DimensionMismatch(f"shape {v.shape} vs {u.shape}")
    residual = v - (v @ u) * u
    return _unit(residual, "common-component residual")


def arora_sentence_vector(
    sentence: Sentence,
    table: WordVectorTable,
    freq: FrequencyTable,
    config: VectorFunctionConfig,
) -> SentenceVector:
    """SIF average followed by common-component removal."""
    if config.common_component is None:
        raise ValueError("config.common_component is required")
    base = sif_sentence_vector(sentence, table, freq, config.sif_a)
    v = remove_common_component(base.v, config.common_component)
    return SentenceVector(sentence_id=base.sentence_id, v=v, oov=base.oov)


def _parse_external_id(raw: str, path, lineno: int):
    parts = raw.split("/")
    if len(parts) == 2 and parts[1] == "doc":
        return ("doc", parts[0])
    if len(parts) == 3:
        try:
            return ("sentence", (parts[0], int(parts[1]), int(parts[2])))
        except ValueError:
            pass
    raise ParseError(f"bad external vector id {raw!r}", path=path, line=lineno)


def load_external_sentence_vectors(
    path, cluster: DocumentCluster
) -> tuple[dict[SentenceId, SentenceVector], dict[str, np.ndarray]]:
    """Ingest precomputed sentence vectors for one cluster.

    TSV rows `cluster-id/doc-index/sentence-index<TAB>f1 f2 ...`;
    document-level rows use id `cluster-id/doc`. Vectors are renormalized
    to unit length on load. Every sentence id of the cluster must be
    covered.
    """
    path = Path(path)
    sentence_vectors: dict[SentenceId, SentenceVector] = {}
    doc_vectors: dict[str, np.ndarray] = {}
    dim = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                raw_id, raw_values = line.split("\t")
            except ValueError as exc:
                raise ParseError(f"expected two TSV fields: {exc}", path=path, line=lineno) from exc
            kind, key = _parse_external_id(raw_id, path, lineno)
            try:
                vec = np.array([float(x) for x in raw_values.split()], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"unparsable float: {exc}", path=path, line=lineno) from exc
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DimensionMismatch(
                    f"{path}:{lineno}: expected dim {dim}, got {vec.shape[0]}"
                )
            unit = _unit(vec, f"external vector {raw_id}")
            if kind == "doc":
                doc_vectors[key] = unit
            else:
                sentence_vectors[key] = SentenceVector(sentence_id=key, v=unit)
    missing = [s.id for s in cluster.sentences if s.id not in sentence_vectors]
    if missing:
        raise IncompleteVectors(
            f"{path} misses {len(missing)} sentence id(s), first: {missing[0]}"
        )
    return sentence_vectors, doc_vectors


@dataclass
class BoundVectorFunction:
    """A vector-function config bound to the resources it needs.

    For native kinds this is the word-vector table plus frequencies; for
    external kinds it is the per-cluster ingested vectors.
    """

    name: str
    config: VectorFunctionConfig
    table: WordVectorTable | None = None
    freq: FrequencyTable | None = None
    external_sentences: dict[SentenceId, SentenceVector] = field(default_factory=dict)
    external_documents: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def is_native(self) -> bool:
        return self.config.kind in NATIVE_FUNCTIONS

    def sentence_vector(self, sentence: Sentence) -> SentenceVector:
        kind = self.config.kind
        if kind == "sif-average":
            return sif_sentence_vector(sentence, self.table, self.freq, self.config.sif_a)
        if kind == "arora":
            return arora_sentence_vector(sentence, self.table, self.freq, self.config)
        try:
            return self.external_sentences[sentence.id]
        except KeyError:
            raise IncompleteVectors(f"no external vector for {sentence.id}") from None

    def text_vector(self, text: str) -> np.ndarray:
        """Apply the native pipeline to a raw text treated as one unit."""
        if not self.is_native:
            raise ValueError("text_vector requires a native vector function")
        v, _ = _weighted_average(tokenize(text), self.table, self.freq, self.config.sif_a, "text")
        if self.config.kind == "arora":
            v = remove_common_component(v, self.config.common_component)
        return v


def document_vector(
    cluster: DocumentCluster,
    sentence_vectors: dict[SentenceId, SentenceVector],
    strategy: str,
    vector_function: BoundVectorFunction,
) -> DocumentVector:
    """Cluster-level vector under one of the two strategies.

    "simple" feeds the cluster's full text through the vector function
    (or uses an ingested document-level vector for external functions);
    "docvec-avg" is the normalized mean of the unit sentence vectors.
    """
    if strategy == "simple":
        if vector_function.is_native:
            v = vector_function.text_vector(cluster.full_text)
        else:
            doc = vector_function.external_documents.get(cluster.cluster_id)
            if doc is None:
                raise IncompleteVectors(
                    f"external function {vector_function.name!r} has no document-level "
                    f"vector for cluster {cluster.cluster_id!r}"
                )
            v = doc
    elif strategy == "docvec-avg":
        if not sentence_vectors:
            raise ValueError("docvec-avg needs at least one sentence vector")
        stacked = np.stack([sv.v for sv in sentence_vectors.values()])
        v = _unit(stacked.mean(axis=0), f"docvec-avg for {cluster.cluster_id}")
    else:
        raise ValueError(f"unknown document-vector strategy {strategy!r}")
    return DocumentVector(cluster_id=cluster.cluster_id, v=v, strategy=strategy)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; equals the dot product for unit vectors."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na <= _NORM_EPS or nb <= _NORM_EPS:
        raise ZeroVector("cosine of a zero vector is undefined")
    return float(a @ b) / (na * nb)


def save_vector(v: np.ndarray, path) -> None:
    """Single-line vector file (common-component cache format)."""
    Path(path).write_text(" ".join(repr(float(x)) for x in v) + "\n", "utf-8")


def load_vector(path) -> np.ndarray:
    path = Path(path)
    line = path.read_text("utf-8").strip()
    try:
        return np.array([float(x) for x in line.split()], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"unparsable vector file: {exc}", path=path) from exc
