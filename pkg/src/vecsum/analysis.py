"""Vector-space and score analyses: cosine distributions, optimal-sentence
separation, per-dimension regressions with Bonferroni correction, greedy
diagnostics, document-vector comparisons, and paired significance tests.

The Student-t CDF is computed natively via a continued-fraction regularized
incomplete beta (target accuracy well below 1e-12) so that p-values are
deterministic and dependency-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .corpus import DocumentCluster, Sentence, SentenceId
from .embeddings import DocumentVector, SentenceVector
from .errors import DegenerateDistribution, IncompleteResults, SingularDesign
from .rouge import rouge_n
from .selectors import GreedyStep, SelectorInput, select_greedy

_NORMAL = NormalDist()


# ----------------------------------------------------------------------
# Student-t machinery
# ----------------------------------------------------------------------

def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    max_iter = 500
    eps = 1e-15
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for x in [0, 1], a, b > 0."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 0.5
    tail = 0.5 * regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5)
    return 1.0 - tail if t > 0 else tail


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)."""
    if df <= 0:
        raise ValueError("df must be positive")
    return regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5)


# ----------------------------------------------------------------------
# Result types
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DistributionStats:
    mean: float
    stddev: float
    normality_r2: float
    n: int


@dataclass(frozen=True)
class RegressionReport:
    coefficients: np.ndarray  # per-dimension slopes, intercept excluded
    p_values: np.ndarray
    alpha: float
    bonferroni_threshold: float
    significant_dims: tuple[int, ...]
    ridge: bool = False


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    p_value: float
    df: int
    mean_diff: float


# ----------------------------------------------------------------------
# Distribution of cosine scores (Fig. 1 family)
# ----------------------------------------------------------------------

def _filliben_quantiles(n: int) -> np.ndarray:
    """Normal order-statistic medians (Filliben's probability-plot positions)."""
    m = np.empty(n)
    m[-1] = 0.5 ** (1.0 / n)
    m[0] = 1.0 - m[-1]
    if n > 2:
        i = np.arange(2, n)
        m[1:-1] = (i - 0.3175) / (n + 0.365)
    return np.array([_NORMAL.inv_cdf(p) for p in m])


def probability_plot_r2(values) -> float:
    """Squared correlation of sorted values against normal quantiles."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size < 2 or float(x.std()) == 0.0:
        raise DegenerateDistribution("normality diagnostic needs spread-out data")
    q = _filliben_quantiles(x.size)
    r = float(np.corrcoef(x, q)[0, 1])
    return r * r


def cosine_distribution(
    sentence_vectors: list[SentenceVector], doc_vector: DocumentVector
) -> DistributionStats:
    """Mean/stddev and probability-plot normality of sentence-to-document
    cosines."""
    if len(sentence_vectors) < 2:
        raise ValueError("need at least two sentence vectors")
    cosines = np.array([float(sv.v @ doc_vector.v) for sv in sentence_vectors])
    if float(cosines.std()) == 0.0:
        raise DegenerateDistribution("all cosines identical")
    return DistributionStats(
        mean=float(cosines.mean()),
        stddev=float(cosines.std(ddof=1)),
        normality_r2=probability_plot_r2(cosines),
        n=int(cosines.size),
    )


# ----------------------------------------------------------------------
# Optimal vs non-optimal sentences (Fig. 2 family)
# ----------------------------------------------------------------------

def greedy_rouge_oracle(
    sentences: list[Sentence], references: list[str], budget: int
) -> list[SentenceId]:
    """Sentences chosen by greedily maximizing summary ROUGE-1 until the
    budget is met."""
    remaining = list(sentences)
    chosen: list[Sentence] = []
    total = 0
    while remaining and total < budget:
        best = None
        best_score = -1.0
        for s in remaining:
            candidate_text = " ".join(c.text for c in chosen + [s])
            score = rouge_n(candidate_text, references, 1, budget, budget)
            if score > best_score:
                best_score = score
                best = s
        remaining.remove(best)
        chosen.append(best)
        total += best.word_count
    return [s.id for s in chosen]


def _length_residuals(cosines: np.ndarray, word_counts: np.ndarray) -> np.ndarray:
    design = np.column_stack([np.ones_like(word_counts), word_counts])
    coef, _, _, _ = np.linalg.lstsq(design, cosines, rcond=None)
    return cosines - design @ coef


def optimal_sentence_split(
    cluster: DocumentCluster,
    vectors: dict[SentenceId, SentenceVector],
    doc_vector: DocumentVector,
    references: list[str],
    budget: int = 100,
    adjust_for_length: bool = False,
) -> tuple[list[float], list[float]]:
    """Cosine samples for oracle-optimal and non-optimal sentences.

    The oracle greedily maximizes summary ROUGE-1 against the references.
    With `adjust_for_length`, cosines are replaced by their residual after
    a linear regression on sentence word count.
    """
    sentences = [s for s in cluster.sentences if s.id in vectors]
    optimal_ids = set(greedy_rouge_oracle(sentences, references, budget))
    cosines = np.array([float(vectors[s.id].v @ doc_vector.v) for s in sentences])
    if adjust_for_length:
        counts = np.array([float(s.word_count) for s in sentences])
        cosines = _length_residuals(cosines, counts)
    optimal = [float(c) for s, c in zip(sentences, cosines) if s.id in optimal_ids]
    other = [float(c) for s, c in zip(sentences, cosines) if s.id not in optimal_ids]
    return optimal, other


# ----------------------------------------------------------------------
# ROUGE-cosine correlation (Fig. 3 family)
# ----------------------------------------------------------------------

def rouge_cosine_correlation(per_sentence: list[tuple[float, float]]) -> float:
    """Pearson correlation of log(1 + rouge) against cosine."""
    if len(per_sentence) < 3:
        raise ValueError("need at least three (rouge, cosine) pairs")
    rouge = np.log1p(np.array([p[0] for p in per_sentence]))
    cosines = np.array([p[1] for p in per_sentence])
    if float(rouge.std()) == 0.0 or float(cosines.std()) == 0.0:
        raise DegenerateDistribution("zero variance in correlation input")
    return float(np.corrcoef(rouge, cosines)[0, 1])


def regression_leverage(x) -> np.ndarray:
    """Hat-matrix diagonal of a simple linear regression on x."""
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean()
    ssx = float((centered**2).sum())
    if ssx == 0.0:
        return np.full(x.size, 1.0 / x.size)
    return 1.0 / x.size + centered**2 / ssx


# ----------------------------------------------------------------------
# Per-dimension regression (Bonferroni) -- Table/paragraph (c)
# ----------------------------------------------------------------------

def dimension_regression(
    sentence_deltas: np.ndarray,
    isolated_rouge: np.ndarray,
    alpha: float = 0.05,
    ridge: float | None = None,
) -> RegressionReport:
    """OLS of isolated ROUGE on (sentence - document) vector coordinates.

    Adds an intercept; per-coefficient two-sided p-values come from the
    native t CDF. The Bonferroni threshold is alpha divided by the vector
    dimension count. When the sample is smaller than the dimension count a
    ridge fallback (flagged) keeps the report usable for diagnostics.
    """
    X = np.asarray(sentence_deltas, dtype=np.float64)
    y = np.asarray(isolated_rouge, dtype=np.float64)
    n, d = X.shape
    design = np.column_stack([np.ones(n), X])
    p = d + 1
    use_ridge = ridge is not None or n <= p
    gram = design.T @ design
    if use_ridge:
        lam = ridge if ridge is not None else 1e-6 * max(float(np.trace(gram)) / p, 1.0)
        gram = gram + lam * np.eye(p)
    elif np.linalg.matrix_rank(design) < p:
        raise SingularDesign("design matrix is rank deficient; pass ridge=")
    try:
        gram_inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularDesign("design matrix is singular; pass ridge=") from exc
    coef = gram_inv @ (design.T @ y)
    residuals = y - design @ coef
    dof = max(n - p, 1)
    sigma2 = float(residuals @ residuals) / dof
    se = np.sqrt(np.clip(sigma2 * np.diag(gram_inv), 0.0, None))
    with np.errstate(divide="ignore"):
        t_stats = np.where(se > 0, coef / np.where(se == 0, 1.0, se), np.inf)
    p_values = np.array([student_t_two_sided_p(float(t), dof) for t in t_stats[1:]])
    threshold = alpha / d
    significant = tuple(int(j) for j in np.nonzero(p_values < threshold)[0])
    return RegressionReport(
        coefficients=coef[1:],
        p_values=p_values,
        alpha=alpha,
        bonferroni_threshold=threshold,
        significant_dims=significant,
        ridge=use_ridge,
    )


def bonferroni_threshold(alpha: float, dims: int) -> float:
    return alpha / dims


# ----------------------------------------------------------------------
# Greedy diagnostics (Figs. 4-5 family)
# ----------------------------------------------------------------------

def greedy_trace(input: SelectorInput) -> list[GreedyStep]:
    """Per-step records of a traced greedy run."""
    steps: list[GreedyStep] = []
    select_greedy(input, trace=steps)
    return steps


def denominator_surface(i: int, sp_dot_s_grid) -> np.ndarray:
    """sqrt(i^2 + 1 + 2*i*x) evaluated elementwise over the grid."""
    if i < 1:
        raise ValueError("i must be >= 1")
    x = np.asarray(sp_dot_s_grid, dtype=np.float64)
    if np.any(x < -1.0 - 1e-12) or np.any(x > 1.0 + 1e-12):
        raise ValueError("grid values must lie in [-1, 1]")
    radicand = i * i + 1.0 + 2.0 * i * x
    assert np.all(radicand >= 0.0)
    return np.sqrt(radicand)


# ----------------------------------------------------------------------
# Significance and document-vector comparison
# ----------------------------------------------------------------------

def paired_t_test(scores_a, scores_b) -> TTestResult:
    """Two-sided paired t-test on per-cluster score pairs.

    All-zero differences give t=0, p=1; nonzero constant differences have
    no defined t statistic and raise.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("score lists must be 1-D of equal length")
    if a.size < 2:
        raise ValueError("need at least two pairs")
    diff = a - b
    mean = float(diff.mean())
    sd = float(diff.std(ddof=1))
    df = int(a.size - 1)
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(t_stat=0.0, p_value=1.0, df=df, mean_diff=0.0)
        raise DegenerateDistribution("differences are a nonzero constant")
    t = mean / (sd / math.sqrt(a.size))
    return TTestResult(
        t_stat=t,
        p_value=student_t_two_sided_p(t, df),
        df=df,
        mean_diff=mean,
    )


def docvec_comparison(
    results_simple: dict[tuple, float], results_avg: dict[tuple, float]
) -> dict[tuple[str, str], float]:
    """ROUGE-1 gain of docvec-avg over simple, per (selector, function).

    Inputs map (cluster_id, selector, function) -> ROUGE-1 in [0, 1]; the
    output delta is on the x100 percentage scale.
    """
    if set(results_simple) != set(results_avg):
        only_a = sorted(set(results_simple) - set(results_avg))
        only_b = sorted(set(results_avg) - set(results_simple))
        raise IncompleteResults(
            f"result sets disagree; simple-only={only_a[:3]} avg-only={only_b[:3]}"
        )
    groups: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for key, simple_score in results_simple.items():
        _, selector, function = key
        groups.setdefault((selector, function), []).append(
            (simple_score, results_avg[key])
        )
    deltas = {}
    for group_key, pairs in sorted(groups.items()):
        simple_mean = sum(p[0] for p in pairs) / len(pairs)
        avg_mean = sum(p[1] for p in pairs) / len(pairs)
        deltas[group_key] = 100.0 * (avg_mean - simple_mean)
    return deltas
