"""Strategy scoring: adaptive beta, the four strategies, and run_strategy."""

import random

import pytest

from negir.corpus import RawDocument, Topic
from negir.index import PLAIN, TAGGED, WeightedQuery, bm25_score, build_index
from negir.negation import analyze_text
from negir.querygen import build_bundle
from negir.ranking import (
    BetaPolynomial,
    Strategy,
    beta_adaptive,
    run_strategy,
    score_baseline,
    score_combination,
    score_filtering,
    score_tagging,
)


def corpus_index(docs, stopwords, lexicon, **kwargs):
    """Index raw texts through the real analysis pipeline."""
    analyzed = []
    for doc_id, text in docs:
        doc = RawDocument(doc_id, body=text)
        analysis = analyze_text(doc.text(), stopwords, lexicon)
        analyzed.append((doc, analysis.stream, analysis.tagged))
    return build_index(analyzed, **kwargs)


def bundle_for(description, stopwords, lexicon, topic_id="t"):
    return build_bundle(Topic(topic_id, description), lexicon, stopwords)


# ---------------------------------------------------------------------------
# beta_adaptive
# ---------------------------------------------------------------------------


def test_beta_at_57():
    assert beta_adaptive(57) == pytest.approx(0.90048, abs=1e-5)


def test_beta_at_zero_is_constant_term():
    assert beta_adaptive(0) == -1.207


def test_beta_at_10_is_negative():
    assert beta_adaptive(10) == pytest.approx(-0.76028, abs=1e-5)


def test_beta_not_clamped():
    assert beta_adaptive(5) < 0
    assert beta_adaptive(100) > 0
    assert beta_adaptive(400) < 0  # beyond the upper root


def test_beta_matches_polynomial_everywhere():
    poly = BetaPolynomial()
    for n in range(0, 1001):
        expected = poly.a * n * n + poly.b * n + poly.c
        assert beta_adaptive(n) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_beta_rejects_negative_counts():
    with pytest.raises(ValueError):
        beta_adaptive(-1)


def test_beta_custom_coefficients():
    flat = BetaPolynomial(a=0.0, b=0.0, c=0.5)
    assert beta_adaptive(123, flat) == 0.5


# ---------------------------------------------------------------------------
# strategy scores
# ---------------------------------------------------------------------------

DOCS = [
    ("d-pos", "persistent chest pain with dyspnea"),
    ("d-neg", "smoking diabetes obesity noted"),
    ("d-mix", "chest pain but also smoking habit"),
]

QUERY = "persistent chest pain. denies smoking diabetes."


def test_baseline_is_full_query_bm25(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    for doc_id, _ in DOCS:
        assert score_baseline(bundle, index, doc_id) == bm25_score(
            index, PLAIN, bundle.q_full, doc_id
        )


def test_filtering_is_positive_query_bm25(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    for doc_id, _ in DOCS:
        assert score_filtering(bundle, index, doc_id) == bm25_score(
            index, PLAIN, bundle.q_pos, doc_id
        )


def test_filtering_zero_for_doc_with_only_negated_terms(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    assert score_filtering(bundle, index, "d-neg") == 0.0
    assert score_baseline(bundle, index, "d-neg") > 0.0


def test_fully_negated_query_filtering_scores_nothing(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for("denies smoking diabetes", stopwords, lexicon)
    assert all(score_filtering(bundle, index, d) == 0.0 for d, _ in DOCS)
    # Same holds for a description that is one whole negated sub-sentence.
    fully = bundle_for(
        "She denies smoking, diabetes, hypercholesterolemia, "
        "or a family history of heart disease.",
        stopwords,
        lexicon,
    )
    assert fully.q_pos.terms == []
    assert all(score_filtering(fully, index, d) == 0.0 for d, _ in DOCS)


def test_negation_free_bundle_all_strategies_equal(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for("persistent chest pain dyspnea", stopwords, lexicon)
    for doc_id, _ in DOCS:
        base = score_baseline(bundle, index, doc_id)
        assert score_filtering(bundle, index, doc_id) == base
        assert score_combination(bundle, index, doc_id) == base
        assert score_tagging(bundle, index, doc_id) == base


def test_combination_beta_zero_equals_baseline(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    for doc_id, _ in DOCS:
        assert score_combination(bundle, index, doc_id, beta_override=0.0) == (
            score_baseline(bundle, index, doc_id)
        )


def test_combination_negated_only_doc_boundary(stopwords, lexicon):
    # A doc matching only negated terms scores (1 - beta) * S(q_neg):
    # q_full contains the negated terms too, so beta = 1 cancels exactly
    # and only beta > 1 drives the score negative.
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    neg_part = bm25_score(index, PLAIN, bundle.q_neg, "d-neg")
    assert neg_part > 0
    assert score_combination(bundle, index, "d-neg", beta_override=1.0) == pytest.approx(
        0.0, abs=1e-12
    )
    for beta in (1.5, 2.0):
        assert score_combination(bundle, index, "d-neg", beta_override=beta) == (
            pytest.approx((1 - beta) * neg_part, rel=1e-9)
        )
    assert score_combination(bundle, index, "d-neg", beta_override=1.5) < 0
    assert score_combination(bundle, index, "d-neg", beta_override=-2.0) > 0


def test_combination_sign_property(stopwords, lexicon):
    # score < 0 exactly when beta * S(q_neg, D) exceeds S(q_full, D).
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    for doc_id, _ in DOCS:
        full = bm25_score(index, PLAIN, bundle.q_full, doc_id)
        neg = bm25_score(index, PLAIN, bundle.q_neg, doc_id)
        for beta in (-2.0, -0.5, 0.0, 0.5, 1.0, 1.5, 3.0):
            score = score_combination(bundle, index, doc_id, beta_override=beta)
            assert (score < 0) == (beta * neg > full)


def test_combination_affine_in_beta(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    for doc_id, _ in DOCS:
        at = {
            beta: score_combination(bundle, index, doc_id, beta_override=beta)
            for beta in (-1.0, 0.0, 1.0)
        }
        # Three-point collinearity: midpoint value is the mean of endpoints.
        assert at[0.0] == pytest.approx((at[-1.0] + at[1.0]) / 2, rel=1e-9, abs=1e-12)


def test_combination_sign_flips_with_beta(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    assert score_combination(bundle, index, "d-neg", beta_override=2.0) < 0
    assert score_combination(bundle, index, "d-neg", beta_override=-2.0) > 0


def test_tagging_credits_negated_match(stopwords, lexicon):
    # The document's only "smoking" is inside a negation scope.
    index = corpus_index([("d", "no smoking")], stopwords, lexicon)
    bundle = bundle_for("denies smoking", stopwords, lexicon)
    tagged_term = WeightedQuery([("[nx]smoking", 1.0)], field=TAGGED)
    expected = bm25_score(index, TAGGED, tagged_term, "d")
    assert expected > 0
    assert score_tagging(bundle, index, "d") == pytest.approx(expected, rel=1e-12)


def test_tagging_expansion_credits_plain_match(stopwords, lexicon):
    # The document asserts "smoking"; credit flows only through the
    # 0.3-weighted untagged expansion.
    index = corpus_index([("d", "smoking")], stopwords, lexicon)
    bundle = bundle_for("denies smoking", stopwords, lexicon)
    plain_term = WeightedQuery([("smoking", 1.0)], field=TAGGED)
    reference = bm25_score(index, TAGGED, plain_term, "d")
    assert reference > 0
    assert score_tagging(bundle, index, "d") == pytest.approx(0.3 * reference, rel=1e-9)


def test_tagging_expansion_weight_zero(stopwords, lexicon):
    index = corpus_index([("d", "smoking")], stopwords, lexicon)
    bundle = bundle_for("denies smoking", stopwords, lexicon)
    assert score_tagging(bundle, index, "d", expansion_weight=0.0) == 0.0


# ---------------------------------------------------------------------------
# run_strategy
# ---------------------------------------------------------------------------


def all_strategies():
    return [
        Strategy("baseline"),
        Strategy("filtering"),
        Strategy("score_combination"),
        Strategy("negation_tagging"),
    ]


def test_negation_free_topic_identical_rankings_and_scores(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for("persistent chest pain dyspnea smoking", stopwords, lexicon)
    rankings = [run_strategy(s, bundle, index, 10) for s in all_strategies()]
    for other in rankings[1:]:
        assert other == rankings[0]


def test_run_strategy_k1_returns_argmax(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    top = run_strategy(Strategy("baseline"), bundle, index, 1)
    full = run_strategy(Strategy("baseline"), bundle, index, 10)
    assert top == full[:1]


def test_combination_ranks_negated_only_doc_last(stopwords, lexicon):
    index = corpus_index(DOCS, stopwords, lexicon)
    bundle = bundle_for(QUERY, stopwords, lexicon)
    ranked = run_strategy(
        Strategy("score_combination", beta_override=1.5), bundle, index, 10
    )
    ids = [r.doc_id for r in ranked]
    assert "d-neg" in ids  # candidate set includes q_neg-only matches
    assert ids[-1] == "d-neg"
    assert ranked[-1].score < 0
    assert all(r.score > ranked[-1].score for r in ranked[:-1])


def test_strategy_validation():
    with pytest.raises(ValueError):
        Strategy("bogus")
    with pytest.raises(ValueError):
        Strategy("negation_tagging", expansion_weight=-0.1)


def test_run_strategy_matches_exhaustive_scoring(stopwords, lexicon):
    rng = random.Random(11)
    vocab = ["fever", "cough", "rash", "pain", "edema", "chest", "nausea", "chills"]
    docs = []
    for i in range(60):
        words = [rng.choice(vocab) for _ in range(rng.randint(2, 12))]
        if rng.random() < 0.3:
            words.insert(rng.randrange(len(words)), "no")
        docs.append((f"d{i:02d}", " ".join(words)))
    index = corpus_index(docs, stopwords, lexicon)
    bundle = bundle_for("chest pain edema. denies fever cough.", stopwords, lexicon)
    scorers = {
        "baseline": lambda d: score_baseline(bundle, index, d),
        "filtering": lambda d: score_filtering(bundle, index, d),
        "score_combination": lambda d: score_combination(bundle, index, d, 0.7),
        "negation_tagging": lambda d: score_tagging(bundle, index, d),
    }
    params = {"score_combination": Strategy("score_combination", beta_override=0.7)}
    for kind, scorer in scorers.items():
        strategy = params.get(kind, Strategy(kind))
        got = run_strategy(strategy, bundle, index, k=100)
        returned = {r.doc_id for r in got}
        # Returned docs come back in exhaustive-sort order with exact scores.
        expected = sorted(
            ((d, scorer(d)) for d, _ in docs if d in returned),
            key=lambda item: (-item[1], item[0]),
        )
        assert [r.doc_id for r in got] == [d for d, _ in expected]
        for result, (_, expected_score) in zip(got, expected):
            assert result.score == pytest.approx(expected_score, rel=1e-12, abs=1e-12)
        # Docs outside the candidate set truly match nothing the strategy scores.
        for doc_id, _ in docs:
            if doc_id in returned:
                continue
            if kind == "score_combination":
                assert bm25_score(index, PLAIN, bundle.q_full, doc_id) == 0.0
                assert bm25_score(index, PLAIN, bundle.q_neg, doc_id) == 0.0
            else:
                assert scorer(doc_id) == 0.0
