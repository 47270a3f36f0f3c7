"""Document-cluster ingestion: sentence splitting, tokenization, word counts.

A cluster is either a single JSON file (see `load_cluster`) or a directory
with `docs/*.txt` and `refs/*.txt`. All values are immutable after load and
safe to share across threads.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import MissingReference, ParseError

SentenceId = tuple[str, int, int]

# Stripped from token edges only; internal punctuation ("u.s.-led") survives.
_EDGE_PUNCT = string.punctuation + "“”‘’«»–—…"

_BOUNDARY = re.compile(r"([.!?])([\"'”’)\]]*)(\s+)(?=[\"'“‘(\[]?[A-Z0-9])")
_LAST_WORD = re.compile(r"(\S+)$")


def _load_abbreviations() -> frozenset[str]:
    text = resources.files("vecsum").joinpath("data/abbreviations.txt").read_text("utf-8")
    abbr = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            abbr.add(line)
    return frozenset(abbr)


ABBREVIATIONS = _load_abbreviations()


@dataclass(frozen=True)
class Token:
    surface: str
    lowercased: str


@dataclass(frozen=True)
class Sentence:
    id: SentenceId
    text: str
    tokens: tuple[Token, ...]

    @property
    def word_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class DocumentCluster:
    cluster_id: str
    documents: tuple[tuple[Sentence, ...], ...]
    references: tuple[str, ...]

    @property
    def sentences(self) -> list[Sentence]:
        """All sentences in document order."""
        return [s for doc in self.documents for s in doc]

    @property
    def full_text(self) -> str:
        """Concatenation of all document texts in order."""
        return "\n".join(" ".join(s.text for s in doc) for doc in self.documents)

    @property
    def total_words(self) -> int:
        return sum(s.word_count for s in self.sentences)


def tokenize(text: str) -> list[Token]:
    """Split on whitespace, strip edge punctuation, lowercase.

    Tokens that are pure punctuation are dropped, so `word_count` never
    counts them toward the summary budget.
    """
    tokens = []
    for chunk in text.split():
        stripped = chunk.strip(_EDGE_PUNCT)
        if stripped:
            tokens.append(Token(surface=stripped, lowercased=stripped.lower()))
    return tokens


def _is_abbreviation(word: str) -> bool:
    # `word` is the token preceding a candidate boundary, final period removed.
    bare = word.strip(_EDGE_PUNCT)
    if not bare:
        return False
    if len(bare) == 1 and bare.isupper():
        return True  # middle initial, "John F. Kennedy"
    return bare.lower() in ABBREVIATIONS


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence splitter.

    Cuts at sentence-final punctuation followed by whitespace and an
    uppercase/digit/quote opener, unless the preceding token is a known
    abbreviation or a single-letter initial. Joining the output with single
    spaces reproduces the input modulo inter-sentence whitespace.
    """
    cuts = []
    for m in _BOUNDARY.finditer(text):
        if m.group(1) == ".":
            before = _LAST_WORD.search(text, 0, m.start(1))
            if before is not None and _is_abbreviation(before.group(1)):
                continue
        cuts.append((m.end(2), m.end(3)))
    sentences = []
    start = 0
    for cut_at, resume_at in cuts:
        piece = text[start:cut_at].strip()
        if piece:
            sentences.append(piece)
        start = resume_at
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def _make_sentence(cluster_id: str, doc_index: int, sent_index: int, text: str) -> Sentence:
    return Sentence(
        id=(cluster_id, doc_index, sent_index),
        text=text,
        tokens=tuple(tokenize(text)),
    )


def _build_cluster(cluster_id: str, raw_documents, references, path) -> DocumentCluster:
    if not raw_documents:
        raise ParseError("cluster has an empty documents list", path=path)
    if not references:
        raise MissingReference(f"cluster {cluster_id!r} has no reference summaries")
    documents = []
    for d, doc in enumerate(raw_documents):
        texts = split_sentences(doc) if isinstance(doc, str) else list(doc)
        documents.append(tuple(_make_sentence(cluster_id, d, i, t) for i, t in enumerate(texts)))
    return DocumentCluster(
        cluster_id=cluster_id,
        documents=tuple(documents),
        references=tuple(references),
    )


def _load_json_cluster(path: Path) -> DocumentCluster:
    try:
        payload = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (column {exc.colno})", path=path, line=exc.lineno) from exc
    if not isinstance(payload, dict):
        raise ParseError("cluster file must contain a JSON object", path=path)
    try:
        cluster_id = payload["cluster_id"]
        documents = payload["documents"]
        references = payload["references"]
    except KeyError as exc:
        raise ParseError(f"cluster file missing key {exc.args[0]!r}", path=path) from exc
    if not isinstance(documents, list):
        raise ParseError("'documents' must be a list", path=path)
    if not isinstance(references, list) or not all(isinstance(r, str) for r in references):
        raise ParseError("'references' must be a list of strings", path=path)
    return _build_cluster(str(cluster_id), documents, references, path)


def _load_plaintext_cluster(path: Path) -> DocumentCluster:
    docs_dir = path / "docs"
    refs_dir = path / "refs"
    if not docs_dir.is_dir():
        raise ParseError("plaintext cluster needs a docs/ subdirectory", path=path)
    doc_files = sorted(docs_dir.glob("*.txt"))
    ref_files = sorted(refs_dir.glob("*.txt")) if refs_dir.is_dir() else []
    if not ref_files:
        raise MissingReference(f"no refs/*.txt found under {path}")
    documents = [f.read_text("utf-8") for f in doc_files]
    references = [f.read_text("utf-8").strip() for f in ref_files]
    return _build_cluster(path.name, documents, references, path)


def load_cluster(path, format: str = "json-cluster") -> DocumentCluster:
    """Load one document cluster.

    format "json-cluster": a JSON object {cluster_id, documents, references}
    where each document is either a list of sentence strings or one raw
    string (split with `split_sentences`).
    format "plaintext-dir": `<path>/docs/*.txt` and `<path>/refs/*.txt`.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError("no such file or directory", path=path)
    if format == "json-cluster":
        return _load_json_cluster(path)
    if format == "plaintext-dir":
        return _load_plaintext_cluster(path)
    raise ValueError(f"unknown cluster format {format!r}")


def load_corpus(corpus_dir) -> list[DocumentCluster]:
    """Load every cluster under a directory, sorted by cluster id.

    JSON files are json-cluster files; subdirectories holding a docs/
    folder are plaintext clusters.
    """
    corpus_dir = Path(corpus_dir)
    clusters = []
    for entry in sorted(corpus_dir.iterdir()):
        if entry.is_file() and entry.suffix == ".json":
            clusters.append(load_cluster(entry, "json-cluster"))
        elif entry.is_dir() and (entry / "docs").is_dir():
            clusters.append(load_cluster(entry, "plaintext-dir"))
    clusters.sort(key=lambda c: c.cluster_id)
    return clusters


def cluster_to_dict(cluster: DocumentCluster) -> dict:
    """JSON-serializable form; `load_cluster` of the result round-trips."""
    return {
        "cluster_id": cluster.cluster_id,
        "documents": [[s.text for s in doc] for doc in cluster.documents],
        "references": list(cluster.references),
    }


def save_cluster(cluster: DocumentCluster, path) -> None:
    Path(path).write_text(json.dumps(cluster_to_dict(cluster), indent=2) + "\n", "utf-8")
