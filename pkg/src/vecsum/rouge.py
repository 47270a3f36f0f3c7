"""ROUGE-1/ROUGE-2 recall with stemming, truncation, and clipping.

Candidate and reference texts run through the corpus tokenizer, are
truncated to a word limit (the budget, 100 by default), lowercased and
Porter-stemmed. Per reference, the score is the clipped n-gram match count
over the reference n-gram count; multi-reference scores are the plain
average. Scores are computed in exact rational arithmetic and converted to
float once.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .corpus import tokenize
from .stemmer import porter_stem

DEFAULT_WORD_LIMIT = 100


@dataclass(frozen=True)
class NgramMultiset:
    n: int
    counts: Counter

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class RougeScore:
    rouge1: float
    rouge2: float
    refs_used: int


def preprocess(text: str, word_limit: int | None = DEFAULT_WORD_LIMIT) -> list[str]:
    """Tokenize, truncate to the first `word_limit` tokens, stem.

    `word_limit=None` disables truncation (used for isolated per-sentence
    scoring, where the candidate keeps its full length).
    """
    tokens = [t.lowercased for t in tokenize(text)]
    if word_limit is not None:
        tokens = tokens[:word_limit]
    return [porter_stem(t) for t in tokens]


def ngram_multiset(tokens: list[str], n: int) -> NgramMultiset:
    counts = Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return NgramMultiset(n=n, counts=counts)


def _recall(candidate: NgramMultiset, reference: NgramMultiset) -> Fraction:
    total = reference.total
    if total == 0:
        return Fraction(0)
    matched = sum(
        min(count, candidate.counts.get(gram, 0))
        for gram, count in reference.counts.items()
    )
    return Fraction(matched, total)


def rouge_n(
    candidate: str,
    references: list[str],
    n: int,
    candidate_limit: int | None = DEFAULT_WORD_LIMIT,
    reference_limit: int | None = DEFAULT_WORD_LIMIT,
) -> float:
    """Average clipped n-gram recall of `candidate` against each reference."""
    if not references:
        raise ValueError("references must be non-empty")
    cand = ngram_multiset(preprocess(candidate, candidate_limit), n)
    scores = [
        _recall(cand, ngram_multiset(preprocess(ref, reference_limit), n))
        for ref in references
    ]
    return float(sum(scores, Fraction(0)) / len(scores))


def score_summary(
    candidate: str, references: list[str], word_limit: int = DEFAULT_WORD_LIMIT
) -> RougeScore:
    """ROUGE-1 and ROUGE-2 recall of a summary, truncated at `word_limit`."""
    return RougeScore(
        rouge1=rouge_n(candidate, references, 1, word_limit, word_limit),
        rouge2=rouge_n(candidate, references, 2, word_limit, word_limit),
        refs_used=len(references),
    )


def isolated_sentence_rouge(sentence: str, references: list[str], n: int = 1) -> float:
    """Standalone ROUGE of one sentence; the sentence is never truncated."""
    return rouge_n(sentence, references, n, candidate_limit=None)
