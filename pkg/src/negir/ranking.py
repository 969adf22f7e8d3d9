"""The four ranking strategies over a query bundle and an index.

baseline            score = S(q_full, D)                     on the plain field
filtering           score = S(q_pos, D)                      on the plain field
score_combination   score = S(q_full, D) - beta * S(q_neg, D)
negation_tagging    score = S(q_tagged, D) + S(q_neg @ w, D) on the tagged field,
                    falling back to the baseline when the query has no
                    negations (exact score equality, not just ranking)

For score_combination, beta defaults to a quadratic in the query length:

    beta(n) = -0.0001638 * n^2 + 0.04631 * n - 1.207

The value is applied verbatim and deliberately not clamped: negative
beta boosts negated content, which helps some queries. The polynomial is
negative below n ~= 29.1, positive up to n ~= 253.7, and negative again
beyond that; overrides are available for sweeps.

The tagging expansion adds the untagged form of each negated term with
per-term weight 0.3 (equivalent, by weight linearity, to adding 0.3
times the plain expansion score), so a document mentioning a negated
query term in positive form still earns partial credit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .index import (
    PLAIN,
    TAGGED,
    Index,
    ScoredDoc,
    WeightedQuery,
    bm25_score,
    matching_doc_ids,
)
from .querygen import QueryBundle

BASELINE = "baseline"
FILTERING = "filtering"
SCORE_COMBINATION = "score_combination"
NEGATION_TAGGING = "negation_tagging"
STRATEGY_KINDS = (BASELINE, FILTERING, SCORE_COMBINATION, NEGATION_TAGGING)

DEFAULT_EXPANSION_WEIGHT = 0.3


@dataclass(frozen=True)
class BetaPolynomial:
    a: float = -0.0001638
    b: float = 0.04631
    c: float = -1.207

    def __call__(self, n_full: int) -> float:
        return self.a * n_full * n_full + self.b * n_full + self.c


DEFAULT_BETA = BetaPolynomial()


def beta_adaptive(n_full: int, polynomial: BetaPolynomial = DEFAULT_BETA) -> float:
    """Query-length-adaptive combination weight; may be negative."""
    if n_full < 0:
        raise ValueError("n_full must be >= 0")
    return polynomial(n_full)


@dataclass(frozen=True)
class Strategy:
    kind: str
    beta_override: float | None = None
    expansion_weight: float = DEFAULT_EXPANSION_WEIGHT

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy: {self.kind!r}")
        if self.expansion_weight < 0:
            raise ValueError("expansion_weight must be >= 0")


def score_baseline(bundle: QueryBundle, index: Index, doc_id: str) -> float:
    return bm25_score(index, PLAIN, bundle.q_full, doc_id)


def score_filtering(bundle: QueryBundle, index: Index, doc_id: str) -> float:
    return bm25_score(index, PLAIN, bundle.q_pos, doc_id)


def score_combination(
    bundle: QueryBundle,
    index: Index,
    doc_id: str,
    beta_override: float | None = None,
) -> float:
    beta = beta_override if beta_override is not None else beta_adaptive(bundle.n_full)
    full = bm25_score(index, PLAIN, bundle.q_full, doc_id)
    neg = bm25_score(index, PLAIN, bundle.q_neg, doc_id)
    return full - beta * neg


def _expansion_query(bundle: QueryBundle, weight: float) -> WeightedQuery:
    return WeightedQuery(
        terms=[(term, base * weight) for term, base in bundle.q_neg.terms],
        field=TAGGED,
    )


def score_tagging(
    bundle: QueryBundle,
    index: Index,
    doc_id: str,
    expansion_weight: float = DEFAULT_EXPANSION_WEIGHT,
) -> float:
    if not bundle.q_neg.terms:
        return score_baseline(bundle, index, doc_id)
    score = bm25_score(index, TAGGED, bundle.q_tagged, doc_id)
    if expansion_weight > 0:
        score += bm25_score(index, TAGGED, _expansion_query(bundle, expansion_weight), doc_id)
    return score


def run_strategy(
    strategy: Strategy, bundle: QueryBundle, index: Index, k: int
) -> list[ScoredDoc]:
    """Rank candidate documents for one topic under one strategy.

    Candidates are documents matching any scored query: for the
    combination strategy that is the union of q_full and q_neg matches,
    because a document touching only negated content must be rankable
    (with a negative score when beta > 0). Results are sorted by
    descending score with ascending doc_id breaking ties.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    kind = strategy.kind
    if kind == BASELINE:
        candidates = matching_doc_ids(index, PLAIN, bundle.q_full)
        scorer = lambda d: score_baseline(bundle, index, d)
    elif kind == FILTERING:
        candidates = matching_doc_ids(index, PLAIN, bundle.q_pos)
        scorer = lambda d: score_filtering(bundle, index, d)
    elif kind == SCORE_COMBINATION:
        candidates = matching_doc_ids(index, PLAIN, bundle.q_full) | matching_doc_ids(
            index, PLAIN, bundle.q_neg
        )
        scorer = lambda d: score_combination(bundle, index, d, strategy.beta_override)
    else:
        if not bundle.q_neg.terms:
            candidates = matching_doc_ids(index, PLAIN, bundle.q_full)
            scorer = lambda d: score_baseline(bundle, index, d)
        else:
            candidates = matching_doc_ids(index, TAGGED, bundle.q_tagged)
            if strategy.expansion_weight > 0:
                candidates |= matching_doc_ids(
                    index, TAGGED, _expansion_query(bundle, strategy.expansion_weight)
                )
            scorer = lambda d: score_tagging(bundle, index, d, strategy.expansion_weight)
    ranked = [ScoredDoc(doc_id, scorer(doc_id)) for doc_id in candidates]
    ranked.sort(key=lambda sd: (-sd.score, sd.doc_id))
    return ranked[:k]
