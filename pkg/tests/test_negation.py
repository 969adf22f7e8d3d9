"""Negation scope detection, tagging, and query-term splitting."""

import random

import pytest
from hypothesis import given, strategies as st

from negir.corpus import TokenizerConfig, split_sentences, tokenize
from negir.errors import ParseError
from negir.negation import (
    NX_PREFIX,
    TriggerLexicon,
    analyze_text,
    detect_all,
    detect_negations,
    load_lexicon,
    scope_text,
    split_query_terms,
    tag_tokens,
)

EXAMPLE = (
    "She denies smoking, diabetes, hypercholesterolemia, "
    "or a family history of heart disease."
)


def detect_in(text, lexicon, window=None):
    sentences = split_sentences(text)
    return sentences, detect_all(sentences, lexicon, window)


# ---------------------------------------------------------------------------
# detect_negations
# ---------------------------------------------------------------------------


def test_example_sentence_single_scope_to_end(lexicon):
    sentences, scopes = detect_in(EXAMPLE, lexicon)
    assert len(scopes) == 1
    scope = scopes[0]
    assert scope.trigger == "denies"
    assert scope.kind == "pre"
    assert scope_text(sentences[0], scope) == (
        "smoking diabetes hypercholesterolemia or a family history of heart disease"
    )
    # Scope runs to the sentence end.
    assert scope.scope_span[1] == sentences[0].tokens[-1].position + 1


def test_no_trigger_no_scope(lexicon):
    _, scopes = detect_in("The patient has a fever.", lexicon)
    assert scopes == []


def test_terminator_ends_scope(lexicon):
    sentences, scopes = detect_in("no fever but productive cough", lexicon)
    assert len(scopes) == 1
    assert scopes[0].trigger == "no"
    assert scope_text(sentences[0], scopes[0]) == "fever"


def test_next_trigger_ends_scope(lexicon):
    sentences, scopes = detect_in("no fever not hypertensive", lexicon)
    assert [s.trigger for s in scopes] == ["no", "not"]
    assert scope_text(sentences[0], scopes[0]) == "fever"
    assert scope_text(sentences[0], scopes[1]) == "hypertensive"


def test_pseudo_trigger_produces_no_scope(lexicon):
    _, scopes = detect_in("no increase in appetite", lexicon)
    assert scopes == []


def test_pseudo_preferred_over_shorter_trigger(lexicon):
    # "not certain if" must win over plain "not".
    _, scopes = detect_in("not certain if pneumonia developed", lexicon)
    assert scopes == []


def test_multiword_pre_trigger(lexicon):
    sentences, scopes = detect_in("tests negative for influenza", lexicon)
    assert len(scopes) == 1
    assert scopes[0].trigger == "negative for"
    assert scope_text(sentences[0], scopes[0]) == "influenza"


def test_post_trigger_scope_runs_backward(lexicon):
    sentences, scopes = detect_in("pneumonia was ruled out", lexicon)
    assert len(scopes) == 1
    assert scopes[0].kind == "post"
    assert scopes[0].trigger == "was ruled out"
    assert scope_text(sentences[0], scopes[0]) == "pneumonia"


def test_post_trigger_stops_at_terminator(lexicon):
    sentences, scopes = detect_in("fever persists but pneumonia was ruled out", lexicon)
    assert len(scopes) == 1
    assert scope_text(sentences[0], scopes[0]) == "pneumonia"


def test_trigger_at_sentence_end_yields_nothing(lexicon):
    _, scopes = detect_in("symptoms she denies", lexicon)
    assert scopes == []


def test_scopes_are_per_sentence(lexicon):
    _, scopes = detect_in("No fever. No cough.", lexicon)
    assert len(scopes) == 2
    assert [s.sentence_index for s in scopes] == [0, 1]


def test_scope_window_caps_extent(lexicon):
    text = "denies alpha beta gamma delta epsilon zeta eta"
    sentences, scopes = detect_in(text, lexicon, window=5)
    assert scope_text(sentences[0], scopes[0]) == "alpha beta gamma delta epsilon"
    _, unbounded = detect_in(text, lexicon)
    assert unbounded[0].scope_span[1] - unbounded[0].scope_span[0] == 7


def test_detection_deterministic(lexicon):
    text = "no fever, no cough, but denies chest pain; dyspnea was ruled out"
    assert detect_in(text, lexicon)[1] == detect_in(text, lexicon)[1]


VOCAB = (
    ["fever", "cough", "pain", "nausea", "rash", "edema", "chest", "acute"]
    + ["no", "not", "denies", "without", "negative", "for", "ruled", "out", "was"]
    + ["but", "however", "although", "and", "or", "the", "increase"]
)


def random_text(rng, n_tokens=40):
    parts = []
    for _ in range(n_tokens):
        parts.append(rng.choice(VOCAB))
        if rng.random() < 0.12:
            parts.append(rng.choice([".", ";", "?", "!", ","]))
    return " ".join(parts)


def test_fuzz_scopes_never_overlap_and_exclude_triggers(lexicon):
    rng = random.Random(1234)
    for _ in range(300):
        sentences = split_sentences(random_text(rng))
        for sentence in sentences:
            scopes = detect_negations(sentence, lexicon)
            spans = sorted(s.scope_span for s in scopes)
            for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                assert e1 <= s2, f"overlap in {sentence.text!r}"
            for scope in scopes:
                assert scope.scope_span[0] < scope.scope_span[1]
                ts, te = scope.trigger_span
                ss, se = scope.scope_span
                assert te <= ss or se <= ts  # trigger outside its scope


# ---------------------------------------------------------------------------
# tag_tokens / split_query_terms
# ---------------------------------------------------------------------------


def test_tag_tokens_prefixes_in_scope(stopwords, lexicon):
    analysis = analyze_text("She denies smoking daily.", stopwords, lexicon)
    assert analysis.tagged.surfaces() == ["denies", "[nx]smoking", "[nx]daily"]
    negated = [t.negated for t in analysis.tagged]
    assert negated == [False, True, True]


def test_tag_tokens_empty_scopes_is_identity(tokenizer_config):
    stream = tokenize("persistent chest pain", tokenizer_config)
    assert tag_tokens(stream, []).strip() == stream
    assert tag_tokens(stream, []).surfaces() == stream.surfaces()


def test_tag_strip_round_trip(stopwords, lexicon):
    analysis = analyze_text(EXAMPLE, stopwords, lexicon)
    assert analysis.tagged.strip() == analysis.stream


def test_tag_tokens_rejects_bad_spans(tokenizer_config, lexicon):
    from negir.negation import NegationScope

    stream = tokenize("fever and cough", tokenizer_config)
    bad = NegationScope(0, "no", (0, 1), (-2, 1), "pre")
    with pytest.raises(ValueError, match="out of range"):
        tag_tokens(stream, [bad])
    inverted = NegationScope(0, "no", (0, 1), (3, 3), "pre")
    with pytest.raises(ValueError):
        tag_tokens(stream, [inverted])


def test_tag_tokens_tolerates_scope_past_stream_tail(stopwords, lexicon):
    # "it" is a stopword, so the scope extends past the last kept token.
    analysis = analyze_text("denies it", stopwords, lexicon)
    assert analysis.tagged.surfaces() == ["denies"]


def test_split_query_terms_example(stopwords, lexicon):
    analysis = analyze_text(EXAMPLE, stopwords, lexicon)
    positive, negated = split_query_terms(analysis.stream, analysis.scopes)
    assert positive == []
    assert negated == [
        "smoking",
        "diabetes",
        "hypercholesterolemia",
        "family",
        "history",
        "heart",
        "disease",
    ]


def test_split_negation_free_keeps_everything(stopwords, lexicon):
    analysis = analyze_text("Persistent chest pain radiating left.", stopwords, lexicon)
    positive, negated = split_query_terms(analysis.stream, analysis.scopes)
    assert negated == []
    assert positive == analysis.stream.surfaces()


def test_split_fully_negated_text(stopwords, lexicon):
    analysis = analyze_text("without fever cough rash", stopwords, lexicon)
    positive, negated = split_query_terms(analysis.stream, analysis.scopes)
    assert positive == []
    assert negated == ["fever", "cough", "rash"]


def test_split_partition_preserves_tokens(stopwords, lexicon):
    rng = random.Random(99)
    for _ in range(100):
        analysis = analyze_text(random_text(rng), stopwords, lexicon)
        positive, negated = split_query_terms(analysis.stream, analysis.scopes)
        trigger_positions = set()
        for scope in analysis.scopes:
            trigger_positions.update(range(*scope.trigger_span))
        triggers = [t.surface for t in analysis.stream if t.position in trigger_positions]
        assert sorted(positive + negated + triggers) == sorted(analysis.stream.surfaces())


@given(st.lists(st.sampled_from(VOCAB), min_size=0, max_size=60))
def test_round_trip_on_generated_token_text(tokens):
    from negir.corpus import default_stopwords
    from negir.negation import default_lexicon

    analysis = analyze_text(" ".join(tokens), default_stopwords(), default_lexicon())
    assert analysis.tagged.strip() == analysis.stream
    for token in analysis.tagged:
        assert token.surface.startswith(NX_PREFIX) == token.negated


# ---------------------------------------------------------------------------
# lexicon files
# ---------------------------------------------------------------------------


def test_load_lexicon_sections(tmp_path):
    path = tmp_path / "lex.txt"
    path.write_text(
        "# comment\n[pre]\nno\nabsence of\n[post]\nwas ruled out\n"
        "[pseudo]\nno increase\n[term]\nbut\n",
        encoding="utf-8",
    )
    lexicon = load_lexicon(path)
    assert ("absence", "of") in lexicon.pre_triggers
    assert ("was", "ruled", "out") in lexicon.post_triggers
    assert ("no", "increase") in lexicon.pseudo_triggers
    assert ("but",) in lexicon.terminators


def test_load_lexicon_requires_section_header(tmp_path):
    path = tmp_path / "lex.txt"
    path.write_text("no\n[pre]\nnot\n", encoding="utf-8")
    with pytest.raises(ParseError, match="section"):
        load_lexicon(path)


def test_lexicon_rejects_phrase_in_two_lists():
    with pytest.raises(ValueError, match="both"):
        TriggerLexicon(pre_triggers=["no"], pseudo_triggers=["no"], terminators=["but"])


def test_lexicon_requires_pre_and_terminators():
    with pytest.raises(ValueError):
        TriggerLexicon(pre_triggers=[], terminators=["but"])
    with pytest.raises(ValueError):
        TriggerLexicon(pre_triggers=["no"], terminators=[])


def test_shipped_lexicon_phrases_disjoint(lexicon):
    all_phrases = (
        list(lexicon.pre_triggers)
        + list(lexicon.post_triggers)
        + list(lexicon.pseudo_triggers)
        + list(lexicon.terminators)
    )
    assert len(all_phrases) == len(set(all_phrases))
