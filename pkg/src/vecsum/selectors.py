"""Nine budgeted sentence selectors over precomputed sentence/document vectors.

All selectors are pure functions of (input, seed, hyperparameters). Streaming
selectors stop at the first word-count overshoot of the budget; subset
selectors (brute force, near-then-redundancy) enumerate maximal feasible
subsets that never exceed it; the hard 100-word limit is enforced later by
ROUGE truncation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .corpus import Sentence, SentenceId
from .embeddings import DocumentVector, SentenceVector, principal_component_stream
from .errors import DegenerateFit, IncompleteVectors, NoFeasibleSummary, ZeroVector

DEFAULT_BUDGET = 100
DEFAULT_BRUTE_POOL = 20
DEFAULT_REDUNDANCY_POOL = 15
DEFAULT_DAMPING = 0.85
DEFAULT_PAGERANK_TOL = 1e-10

SHORT_SUMMARY = "short-summary"
COMPONENT_EXHAUSTION = "component-exhaustion"


@dataclass(frozen=True)
class SelectorInput:
    sentences: tuple[Sentence, ...]
    vectors: dict[SentenceId, SentenceVector]
    doc_vector: DocumentVector
    budget: int = DEFAULT_BUDGET
    rng_seed: int = 0

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        missing = [s.id for s in self.sentences if s.id not in self.vectors]
        if missing:
            raise IncompleteVectors(f"no vector for sentence(s) {missing[:3]}")

    def vector_of(self, sentence: Sentence) -> np.ndarray:
        return self.vectors[sentence.id].v


@dataclass(frozen=True)
class SummaryCandidate:
    selected: tuple[SentenceId, ...]
    total_words: int
    objective: float | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("duplicate sentence ids in summary")


@dataclass
class GreedyState:
    """Running state of the greedy selector.

    `partial_sum` is the unnormalized sum of the selected unit sentence
    vectors; its normalization is the current summary direction.
    """

    partial_sum: np.ndarray
    i: int = 0
    remaining: set[SentenceId] = field(default_factory=set)

    @property
    def s_p(self) -> np.ndarray | None:
        if self.i == 0:
            return None
        norm = float(np.linalg.norm(self.partial_sum))
        if norm == 0.0:
            return None
        return self.partial_sum / norm


@dataclass(frozen=True)
class GreedyStep:
    step: int
    sentence_id: SentenceId
    standalone_cosine: float
    objective_before: float | None
    objective_after: float
    sp_dot_s: float | None


def objective_cosine(
    candidate: SummaryCandidate | tuple[SentenceId, ...],
    vectors: dict[SentenceId, SentenceVector],
    doc_vector: DocumentVector,
) -> float:
    """Cosine between the renormalized sum of selected vectors and the doc."""
    ids = candidate.selected if isinstance(candidate, SummaryCandidate) else tuple(candidate)
    if not ids:
        raise ValueError("candidate is empty")
    total = np.sum([vectors[i].v for i in ids], axis=0)
    norm = float(np.linalg.norm(total))
    if norm <= 1e-12:
        raise ZeroVector("selected sentence vectors cancel to zero")
    return float(total @ doc_vector.v) / norm


def greedy_closed_form(i: float, d_dot_sp: float, d_dot_s: float, sp_dot_s: float) -> float:
    """Score of appending a sentence to a running summary of weight `i`.

    (i*(d.s_p) + d.s) / sqrt(i^2 + 1 + 2*i*(s_p.s)). With `i` equal to the
    norm of the unnormalized partial sum this is exactly the cosine of the
    renormalized augmented summary to the document; with `i` equal to the
    integer selection count it is the idealization analyzed by
    `analysis.denominator_surface`.
    """
    return (i * d_dot_sp + d_dot_s) / math.sqrt(i * i + 1.0 + 2.0 * i * sp_dot_s)


def greedy_step_score(partial_sum: np.ndarray, doc_v: np.ndarray, v: np.ndarray) -> float:
    """Exact cosine-to-document of the summary after adding unit vector `v`."""
    r = float(np.linalg.norm(partial_sum))
    if r <= 1e-12:
        return float(doc_v @ v)
    s_p = partial_sum / r
    return greedy_closed_form(r, float(doc_v @ s_p), float(doc_v @ v), float(s_p @ v))


def _candidate(
    input: SelectorInput, picked: list[Sentence], flags: tuple[str, ...] = ()
) -> SummaryCandidate:
    ids = tuple(s.id for s in picked)
    try:
        objective = objective_cosine(ids, input.vectors, input.doc_vector) if ids else None
    except ZeroVector:
        objective = None
    return SummaryCandidate(
        selected=ids,
        total_words=sum(s.word_count for s in picked),
        objective=objective,
        flags=flags,
    )


def _take_until_budget(ordered: list[Sentence], budget: int) -> list[Sentence]:
    picked: list[Sentence] = []
    total = 0
    for s in ordered:
        if total >= budget:
            break
        picked.append(s)
        total += s.word_count
    return picked


def select_random(input: SelectorInput) -> SummaryCandidate:
    """Uniform sampling without replacement until the budget is reached."""
    order = list(input.sentences)
    random.Random(input.rng_seed).shuffle(order)
    return _candidate(input, _take_until_budget(order, input.budget))


def select_near(input: SelectorInput) -> SummaryCandidate:
    """Sentences with the highest cosine to the document vector."""
    d = input.doc_vector.v
    ranked = sorted(
        range(len(input.sentences)),
        key=lambda i: (-float(input.vector_of(input.sentences[i]) @ d), i),
    )
    ordered = [input.sentences[i] for i in ranked]
    return _candidate(input, _take_until_budget(ordered, input.budget))


@dataclass(frozen=True)
class RedundancyRegression:
    """Quadratic fit of redundancy against cosine-to-document."""

    c0: float
    c1: float
    c2: float

    def predict(self, x: float) -> float:
        return self.c0 + self.c1 * x + self.c2 * x * x

    def residual(self, x: float, y: float) -> float:
        return y - self.predict(x)


def fit_redundancy_regression(training_pairs: list[tuple[float, float]]) -> RedundancyRegression:
    """Least-squares quadratic of redundancy on cosine-to-document."""
    if len(set(x for x, _ in training_pairs)) < 3:
        raise DegenerateFit("need at least 3 distinct cosine values")
    x = np.array([p[0] for p in training_pairs])
    y = np.array([p[1] for p in training_pairs])
    design = np.column_stack([np.ones_like(x), x, x * x])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise DegenerateFit("rank-deficient quadratic design")
    return RedundancyRegression(c0=float(coef[0]), c1=float(coef[1]), c2=float(coef[2]))


def select_near_nonredundant(
    input: SelectorInput, regression: RedundancyRegression
) -> SummaryCandidate:
    """Near with scores corrected by the redundancy-regression residual.

    At each step a candidate's redundancy is its mean cosine to the
    sentences selected so far; the score is cosine-to-document minus the
    residual of that redundancy on the fitted curve. The first pick carries
    no redundancy observation, so its score is the raw cosine.
    """
    d = input.doc_vector.v
    remaining = list(input.sentences)
    picked: list[Sentence] = []
    picked_vecs: list[np.ndarray] = []
    total = 0
    while remaining and total < input.budget:
        best_idx = None
        best_score = -math.inf
        for idx, s in enumerate(remaining):
            v = input.vector_of(s)
            x = float(v @ d)
            if picked_vecs:
                redundancy = float(np.mean([float(v @ p) for p in picked_vecs]))
                score = x - regression.residual(x, redundancy)
            else:
                score = x
            if score > best_score:
                best_score = score
                best_idx = idx
        chosen = remaining.pop(best_idx)
        picked.append(chosen)
        picked_vecs.append(input.vector_of(chosen))
        total += chosen.word_count
    return _candidate(input, picked)


def select_greedy(
    input: SelectorInput, trace: list[GreedyStep] | None = None
) -> SummaryCandidate:
    """At each step, add the sentence maximizing the new summary's cosine.

    The step score is the closed-form cosine of the renormalized augmented
    summary, so it equals `objective_cosine` of the selection-so-far plus
    the candidate. Ties break by document order.
    """
    d = input.doc_vector.v
    dim = d.shape[0]
    state = GreedyState(
        partial_sum=np.zeros(dim),
        i=0,
        remaining={s.id for s in input.sentences},
    )
    picked: list[Sentence] = []
    objective_before: float | None = None
    total = 0
    while state.remaining and total < input.budget:
        best: Sentence | None = None
        best_score = -math.inf
        for s in input.sentences:  # document order makes ties deterministic
            if s.id not in state.remaining:
                continue
            score = greedy_step_score(state.partial_sum, d, input.vector_of(s))
            if score > best_score:
                best_score = score
                best = s
        v = input.vector_of(best)
        if trace is not None:
            s_p = state.s_p
            trace.append(
                GreedyStep(
                    step=state.i + 1,
                    sentence_id=best.id,
                    standalone_cosine=float(d @ v),
                    objective_before=objective_before,
                    objective_after=best_score,
                    sp_dot_s=None if s_p is None else float(s_p @ v),
                )
            )
        state.partial_sum = state.partial_sum + v
        state.i += 1
        state.remaining.discard(best.id)
        picked.append(best)
        total += best.word_count
        objective_before = best_score
    return _candidate(input, picked)


def _maximal_feasible_subsets(pool: list[Sentence], budget: int) -> list[tuple[int, ...]]:
    """All nonempty index subsets with total words <= budget to which no
    pool sentence can be added without exceeding it."""
    words = [s.word_count for s in pool]
    n = len(pool)
    out: list[tuple[int, ...]] = []
    chosen: list[int] = []

    def recurse(idx: int, total: int, min_excluded: float) -> None:
        if idx == n:
            if chosen and min_excluded > budget - total:
                out.append(tuple(chosen))
            return
        w = words[idx]
        if total + w <= budget:
            chosen.append(idx)
            recurse(idx + 1, total + w, min_excluded)
            chosen.pop()
        recurse(idx + 1, total, min(min_excluded, w))

    recurse(0, 0, math.inf)
    return out


def _cosine_pool(input: SelectorInput, pool_size: int) -> list[Sentence]:
    """Top `pool_size` sentences by cosine-to-document, in document order."""
    d = input.doc_vector.v
    ranked = sorted(
        range(len(input.sentences)),
        key=lambda i: (-float(input.vector_of(input.sentences[i]) @ d), i),
    )
    keep = sorted(ranked[:pool_size])
    return [input.sentences[i] for i in keep]


def select_brute_force(input: SelectorInput, pool_size: int = DEFAULT_BRUTE_POOL) -> SummaryCandidate:
    """Exhaustive maximization of the summary-to-document cosine.

    Enumerates every maximal feasible subset of the cosine pool; ties on
    the objective break by lexicographic id order.
    """
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    pool = _cosine_pool(input, pool_size)
    subsets = _maximal_feasible_subsets(pool, input.budget)
    if not subsets:
        raise NoFeasibleSummary("every pool sentence alone exceeds the budget")
    best_ids: tuple[SentenceId, ...] | None = None
    best_obj = -math.inf
    best_subset: tuple[int, ...] | None = None
    for subset in subsets:
        ids = tuple(pool[i].id for i in subset)  # pool in doc order -> ids sorted
        obj = objective_cosine(ids, input.vectors, input.doc_vector)
        if obj > best_obj or (obj == best_obj and ids < best_ids):
            best_obj = obj
            best_ids = ids
            best_subset = subset
    picked = [pool[i] for i in best_subset]
    return _candidate(input, picked)


def select_near_then_redundancy(
    input: SelectorInput, pool_size: int = DEFAULT_REDUNDANCY_POOL
) -> SummaryCandidate:
    """Brute-force minimization of mean pairwise cosine over the pool.

    Singleton subsets have redundancy 0; ties break by lexicographic id
    order.
    """
    if pool_size < 2:
        raise ValueError("pool_size must be >= 2")
    pool = _cosine_pool(input, pool_size)
    subsets = _maximal_feasible_subsets(pool, input.budget)
    if not subsets:
        raise NoFeasibleSummary("every pool sentence alone exceeds the budget")
    V = np.stack([input.vector_of(s) for s in pool])
    sim = V @ V.T
    best_ids: tuple[SentenceId, ...] | None = None
    best_red = math.inf
    best_subset: tuple[int, ...] | None = None
    for subset in subsets:
        k = len(subset)
        if k == 1:
            redundancy = 0.0
        else:
            idx = np.array(subset)
            block = sim[np.ix_(idx, idx)]
            redundancy = float((block.sum() - np.trace(block)) / (k * (k - 1)))
        ids = tuple(pool[i].id for i in subset)
        if redundancy < best_red or (redundancy == best_red and ids < best_ids):
            best_red = redundancy
            best_ids = ids
            best_subset = subset
    picked = [pool[i] for i in best_subset]
    return _candidate(input, picked)


def select_max_similarity(input: SelectorInput) -> SummaryCandidate:
    """The better of greedy and brute force by summary-to-document cosine."""
    greedy_err = brute_err = None
    greedy = brute = None
    try:
        greedy = select_greedy(input)
    except NoFeasibleSummary as exc:
        greedy_err = exc
    try:
        brute = select_brute_force(input)
    except NoFeasibleSummary as exc:
        brute_err = exc
    if greedy is None and brute is None:
        raise brute_err or greedy_err
    if greedy is None:
        return brute
    if brute is None:
        return greedy
    g = greedy.objective if greedy.objective is not None else -math.inf
    b = brute.objective if brute.objective is not None else -math.inf
    return greedy if g >= b else brute


def average_linkage_merges(
    vectors: np.ndarray,
) -> list[tuple[frozenset[int], frozenset[int], float]]:
    """Agglomerative merge sequence under average linkage, distance 1-cosine.

    Clusters are numbered by creation order (singletons first); each merge
    joins the pair with the smallest mean pairwise distance, ties broken by
    the smaller creation-index pair. Distances update by the Lance-Williams
    size-weighted rule.
    """
    V = np.asarray(vectors, dtype=np.float64)
    n = V.shape[0]
    if n <= 1:
        return []
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    if np.any(norms <= 1e-12):
        raise ZeroVector("cannot cluster zero vectors")
    U = V / norms
    total = 2 * n - 1
    dist = np.full((total, total), np.inf)
    dist[:n, :n] = 1.0 - U @ U.T
    np.fill_diagonal(dist, np.inf)
    active = list(range(n))
    sizes = {i: 1 for i in range(n)}
    members = {i: frozenset([i]) for i in range(n)}
    merges = []
    next_id = n
    while len(active) > 1:
        sub = dist[np.ix_(active, active)]
        rows, cols = np.triu_indices(len(active), k=1)
        flat = int(np.argmin(sub[rows, cols]))  # first min = smallest (a, b)
        a = active[rows[flat]]
        b = active[cols[flat]]
        d = float(sub[rows[flat], cols[flat]])
        merges.append((members[a], members[b], d))
        sizes[next_id] = sizes[a] + sizes[b]
        members[next_id] = members[a] | members[b]
        active = [c for c in active if c not in (a, b)]
        if active:
            rest = np.array(active)
            updated = (sizes[a] * dist[a, rest] + sizes[b] * dist[b, rest]) / sizes[next_id]
            dist[next_id, rest] = updated
            dist[rest, next_id] = updated
        active.append(next_id)
        next_id += 1
    return merges


def cut_at_k_clusters(n: int, merges, k: int) -> list[list[int]]:
    """Replay merges until `k` clusters remain; members sorted, clusters
    ordered by smallest member."""
    clusters: list[set[int]] = [{i} for i in range(n)]
    for members_a, members_b, _ in merges:
        if len(clusters) <= k:
            break
        merged = set(members_a) | set(members_b)
        clusters = [c for c in clusters if not (c <= merged)]
        clusters.append(merged)
    return sorted((sorted(c) for c in clusters), key=lambda c: c[0])


def select_cluster(input: SelectorInput) -> SummaryCandidate:
    """Representatives of agglomerative clusters, growing k to fill the budget.

    For each k the sentence closest (by cosine) to each cluster's
    normalized mean is chosen; the first k whose representatives reach the
    budget wins. If the whole corpus is shorter than the budget, all
    sentences are returned with a short-summary flag.
    """
    sentences = list(input.sentences)
    if not sentences:
        raise ValueError("cluster selector needs at least one sentence")
    X = np.stack([input.vector_of(s) for s in sentences])
    n = len(sentences)
    merges = average_linkage_merges(X)
    for k in range(1, n + 1):
        chosen_idx = []
        for group in cut_at_k_clusters(n, merges, k):
            mean = X[group].mean(axis=0)
            norm = float(np.linalg.norm(mean))
            if norm <= 1e-12:
                rep = group[0]  # degenerate centroid; fall back to document order
            else:
                centroid = mean / norm
                sims = X[group] @ centroid
                rep = group[int(np.argmax(sims))]
            chosen_idx.append(rep)
        chosen_idx = sorted(set(chosen_idx))
        picked = [sentences[i] for i in chosen_idx]
        if sum(s.word_count for s in picked) >= input.budget:
            return _candidate(input, picked)
    return _candidate(input, sentences, flags=(SHORT_SUMMARY,))


def select_pca(input: SelectorInput) -> SummaryCandidate:
    """One sentence per principal component of the sentence-vector set.

    Components are extracted from the uncentered vectors in order; each
    pick maximizes |cosine| to its component among unselected sentences.
    When components run out before the budget is met, remaining picks reuse
    the last component and the result is flagged.
    """
    sentences = list(input.sentences)
    if not sentences:
        raise ValueError("pca selector needs at least one sentence")
    X = np.stack([input.vector_of(s) for s in sentences])
    stream = principal_component_stream(X)
    component = None
    exhausted = False
    remaining = list(range(len(sentences)))
    picked: list[Sentence] = []
    total = 0
    while remaining and total < input.budget:
        if not exhausted:
            nxt = next(stream, None)
            if nxt is None:
                exhausted = True
            else:
                component = nxt
        scores = np.abs(X[remaining] @ component)
        best = remaining[int(np.argmax(scores))]
        remaining.remove(best)
        picked.append(sentences[best])
        total += sentences[best].word_count
    flags = (COMPONENT_EXHAUSTION,) if exhausted else ()
    return _candidate(input, picked, flags=flags)


def lexrank_scores(
    vectors: np.ndarray,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_PAGERANK_TOL,
    max_iter: int = 100000,
) -> np.ndarray:
    """PageRank over the cosine-similarity graph.

    Edge weights are max(cosine, 0) with zero self-loops; rows with no
    outgoing weight become uniform. Power iteration runs to an L1 fixed
    point within `tol`; scores sum to 1.
    """
    V = np.asarray(vectors, dtype=np.float64)
    n = V.shape[0]
    if n == 0:
        return np.zeros(0)
    sim = np.clip(V @ V.T, 0.0, None)
    np.fill_diagonal(sim, 0.0)
    row_sums = sim.sum(axis=1)
    safe = np.where(row_sums > 0.0, row_sums, 1.0)
    W = sim / safe[:, None]
    W[row_sums == 0.0] = 1.0 / n
    p = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    for _ in range(max_iter):
        p_next = damping * (W.T @ p) + teleport
        if float(np.abs(p_next - p).sum()) <= tol:
            return p_next
        p = p_next
    return p


def select_lexrank(
    input: SelectorInput,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_PAGERANK_TOL,
) -> SummaryCandidate:
    """Sentences ranked by PageRank centrality on the cosine graph."""
    sentences = list(input.sentences)
    if not sentences:
        raise ValueError("lexrank selector needs at least one sentence")
    X = np.stack([input.vector_of(s) for s in sentences])
    scores = lexrank_scores(X, damping=damping, tol=tol)
    ranked = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
    ordered = [sentences[i] for i in ranked]
    return _candidate(input, _take_until_budget(ordered, input.budget))
