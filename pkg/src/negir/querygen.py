"""Builds the four query representations of a topic description.

From one description we derive:

  * ``q_full``   - every content term, negated or not
  * ``q_pos``    - content terms outside any negation scope
  * ``q_neg``    - content terms inside negation scopes, plain surfaces
  * ``q_tagged`` - the full term sequence with "[nx]" prefixes, for the
                   tagged index field

Cue tokens that survive stopword removal (e.g. "denies") are dropped
from all four variants, so q_pos and q_neg always partition q_full.
Every term carries base weight 1.0; repeated terms stay repeated and
accumulate at scoring time. ``n_full`` and ``n_neg`` count term tokens
(duplicates included) and drive the adaptive combination weight.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Topic
from .index import PLAIN, TAGGED, WeightedQuery
from .negation import TriggerLexicon, analyze_text, split_query_terms


@dataclass(frozen=True)
class QueryBundle:
    topic_id: str
    q_full: WeightedQuery
    q_pos: WeightedQuery
    q_neg: WeightedQuery
    q_tagged: WeightedQuery
    n_full: int
    n_neg: int

    @property
    def has_negations(self) -> bool:
        return self.n_neg > 0


def build_bundle(
    topic: Topic,
    lexicon: TriggerLexicon,
    stopwords: frozenset[str],
    scope_window: int | None = None,
    pre_stopword_counts: bool = False,
) -> QueryBundle:
    """Run the full query pipeline for one topic.

    ``pre_stopword_counts`` switches n_full/n_neg to counts taken before
    stopword removal (cue tokens still excluded); by default they count
    the terms that actually appear in the query variants.
    """
    if not topic.description.strip():
        raise ValueError(f"topic {topic.topic_id!r} has an empty description")
    analysis = analyze_text(topic.description, stopwords, lexicon, scope_window)
    positive, negated = split_query_terms(analysis.stream, analysis.scopes)

    trigger_positions: set[int] = set()
    scope_positions: set[int] = set()
    for scope in analysis.scopes:
        trigger_positions.update(range(*scope.trigger_span))
        scope_positions.update(range(*scope.scope_span))

    # q_full preserves description order rather than grouping by polarity.
    full_in_order = [
        t.surface for t in analysis.stream if t.position not in trigger_positions
    ]
    tagged_in_order = [
        t.surface for t in analysis.tagged if t.position not in trigger_positions
    ]

    n_full = len(full_in_order)
    n_neg = len(negated)
    if pre_stopword_counts:
        raw_tokens = [t for s in analysis.sentences for t in s.tokens]
        n_full = sum(1 for t in raw_tokens if t.position not in trigger_positions)
        n_neg = sum(1 for t in raw_tokens if t.position in scope_positions)

    return QueryBundle(
        topic_id=topic.topic_id,
        q_full=_query(full_in_order, PLAIN),
        q_pos=_query(positive, PLAIN),
        q_neg=_query(negated, PLAIN),
        q_tagged=_query(tagged_in_order, TAGGED),
        n_full=n_full,
        n_neg=n_neg,
    )


def _query(terms: list[str], field: str) -> WeightedQuery:
    return WeightedQuery(terms=[(term, 1.0) for term in terms], field=field)


def bundle_summary(bundle: QueryBundle) -> dict:
    """JSON-friendly view of a bundle for inspection tooling."""
    return {
        "topic_id": bundle.topic_id,
        "n_full": bundle.n_full,
        "n_neg": bundle.n_neg,
        "q_full": [t for t, _ in bundle.q_full.terms],
        "q_pos": [t for t, _ in bundle.q_pos.terms],
        "q_neg": [t for t, _ in bundle.q_neg.terms],
        "q_tagged": [t for t, _ in bundle.q_tagged.terms],
    }
