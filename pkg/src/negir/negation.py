"""Rule-based negation cue and scope detection, and token tagging.

Detection runs on raw (pre-stopword) sentence tokens because most cues
("no", "not", "without") would otherwise be removed before they can be
seen. A left-to-right scan matches cue phrases greedily (longest first):

  * a pre-cue opens a scope covering the tokens after it, up to the next
    cue/terminator phrase or the sentence end;
  * a post-cue covers tokens backwards to the previous terminator or the
    sentence start;
  * pseudo-cues ("no increase", "gram negative") consume their tokens and
    produce no scope.

Cue and terminator phrase spans are barriers: a scope never contains one,
so scopes within a sentence are pairwise disjoint and never contain their
own trigger. Tokens inside a scope are marked by prepending "[nx]" to the
surface, which survives indexing untouched because the tokenizer would
never produce a bracket.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

from .corpus import (
    TOKEN_RE,
    Sentence,
    Token,
    TokenStream,
    packaged_data_path,
    split_sentences,
)
from .errors import ParseError

NX_PREFIX = "[nx]"

PRE, POST, PSEUDO, TERMINATOR = "pre", "post", "pseudo", "term"
_SECTIONS = {"[pre]": PRE, "[post]": POST, "[pseudo]": PSEUDO, "[term]": TERMINATOR}


@dataclass(frozen=True)
class NegationScope:
    """A detected cue with the token span it negates.

    Spans are half-open (start, end) document-wide token positions on the
    raw token sequence; both lie within a single sentence.
    """

    sentence_index: int
    trigger: str
    trigger_span: tuple[int, int]
    scope_span: tuple[int, int]
    kind: str  # PRE or POST


class TaggedToken(NamedTuple):
    surface: str
    sentence_index: int
    position: int
    negated: bool


@dataclass(frozen=True)
class TaggedTokenStream:
    """A token stream where in-scope tokens carry the "[nx]" prefix."""

    tokens: tuple[TaggedToken, ...]

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def strip(self) -> TokenStream:
        """Remove prefixes, recovering the original stream exactly."""
        return TokenStream(
            tuple(
                Token(
                    t.surface[len(NX_PREFIX) :] if t.negated else t.surface,
                    t.sentence_index,
                    t.position,
                )
                for t in self.tokens
            )
        )

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[TaggedToken]:
        return iter(self.tokens)


class TriggerLexicon:
    """Immutable cue phrase lists, tokenized with the standard pattern."""

    def __init__(
        self,
        pre_triggers: Iterable[str],
        post_triggers: Iterable[str] = (),
        pseudo_triggers: Iterable[str] = (),
        terminators: Iterable[str] = (),
    ):
        self.pre_triggers = _tokenize_phrases(pre_triggers)
        self.post_triggers = _tokenize_phrases(post_triggers)
        self.pseudo_triggers = _tokenize_phrases(pseudo_triggers)
        self.terminators = _tokenize_phrases(terminators)
        self._validate()
        # first token -> [(phrase, kind)], longest phrase first
        self._by_first: dict[str, list[tuple[tuple[str, ...], str]]] = {}
        for phrases, kind in (
            (self.pseudo_triggers, PSEUDO),
            (self.pre_triggers, PRE),
            (self.post_triggers, POST),
            (self.terminators, TERMINATOR),
        ):
            for phrase in phrases:
                self._by_first.setdefault(phrase[0], []).append((phrase, kind))
        for candidates in self._by_first.values():
            candidates.sort(key=lambda item: len(item[0]), reverse=True)

    def _validate(self) -> None:
        if not self.pre_triggers:
            raise ValueError("lexicon must define at least one pre-trigger")
        if not self.terminators:
            raise ValueError("lexicon must define at least one terminator")
        seen: dict[tuple[str, ...], str] = {}
        for phrases, name in (
            (self.pre_triggers, "pre"),
            (self.post_triggers, "post"),
            (self.pseudo_triggers, "pseudo"),
            (self.terminators, "term"),
        ):
            for phrase in phrases:
                if phrase in seen:
                    raise ValueError(
                        f"phrase {' '.join(phrase)!r} appears in both "
                        f"{seen[phrase]} and {name} lists"
                    )
                seen[phrase] = name

    def match_at(self, surfaces: Sequence[str], i: int) -> tuple[tuple[str, ...], str] | None:
        """Longest cue/terminator phrase starting at token i, if any."""
        for phrase, kind in self._by_first.get(surfaces[i], ()):
            if tuple(surfaces[i : i + len(phrase)]) == phrase:
                return phrase, kind
        return None


def _tokenize_phrases(phrases: Iterable[str]) -> tuple[tuple[str, ...], ...]:
    tokenized = []
    for phrase in phrases:
        tokens = tuple(TOKEN_RE.findall(phrase.lower()))
        if tokens:
            tokenized.append(tokens)
    return tuple(tokenized)


def load_lexicon(path: str | Path) -> TriggerLexicon:
    """Parse a sectioned lexicon file ([pre]/[post]/[pseudo]/[term])."""
    sections: dict[str, list[str]] = {PRE: [], POST: [], PSEUDO: [], TERMINATOR: []}
    current: str | None = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower() in _SECTIONS:
            current = _SECTIONS[line.lower()]
            continue
        if current is None:
            raise ParseError("phrase before any section header", str(path), lineno)
        sections[current].append(line.lower())
    return TriggerLexicon(
        pre_triggers=sections[PRE],
        post_triggers=sections[POST],
        pseudo_triggers=sections[PSEUDO],
        terminators=sections[TERMINATOR],
    )


def default_lexicon() -> TriggerLexicon:
    """The trigger lexicon shipped with the package."""
    return load_lexicon(packaged_data_path("lexicon.txt"))


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------


def detect_negations(
    sentence: Sentence,
    lexicon: TriggerLexicon,
    scope_window: int | None = None,
) -> list[NegationScope]:
    """Scan one sentence for negation scopes.

    ``scope_window`` optionally caps the scope at that many tokens from
    the cue (a fixed-window mode for comparison runs); by default scopes
    extend to the sub-sentence boundary.
    """
    tokens = sentence.tokens
    if not tokens:
        return []
    surfaces = [t.surface for t in tokens]
    n = len(surfaces)
    base = tokens[0].position

    events: list[tuple[str, int, int, str]] = []  # (kind, start, end, phrase)
    i = 0
    while i < n:
        match = lexicon.match_at(surfaces, i)
        if match is None:
            i += 1
            continue
        phrase, kind = match
        events.append((kind, i, i + len(phrase), " ".join(phrase)))
        i += len(phrase)

    scopes: list[NegationScope] = []
    claimed_end = 0  # rightmost local index claimed by any event span or scope
    for idx, (kind, start, end, phrase) in enumerate(events):
        if kind == PRE:
            scope_start = end
            scope_end = events[idx + 1][1] if idx + 1 < len(events) else n
            if scope_window is not None:
                scope_end = min(scope_end, end + scope_window)
            if scope_start < scope_end:
                scopes.append(
                    NegationScope(
                        sentence_index=sentence.sentence_index,
                        trigger=phrase,
                        trigger_span=(base + start, base + end),
                        scope_span=(base + scope_start, base + scope_end),
                        kind=PRE,
                    )
                )
                claimed_end = max(claimed_end, scope_end)
        elif kind == POST:
            # Run backwards to whatever was last claimed: the previous
            # terminator, cue phrase, or scope, else the sentence start.
            scope_start = claimed_end
            if scope_window is not None:
                scope_start = max(scope_start, start - scope_window)
            if scope_start < start:
                scopes.append(
                    NegationScope(
                        sentence_index=sentence.sentence_index,
                        trigger=phrase,
                        trigger_span=(base + start, base + end),
                        scope_span=(base + scope_start, base + start),
                        kind=POST,
                    )
                )
        claimed_end = max(claimed_end, end)
    return scopes


def detect_all(
    sentences: Iterable[Sentence],
    lexicon: TriggerLexicon,
    scope_window: int | None = None,
) -> list[NegationScope]:
    scopes: list[NegationScope] = []
    for sentence in sentences:
        scopes.extend(detect_negations(sentence, lexicon, scope_window))
    return scopes


# ---------------------------------------------------------------------------
# Tagging and query-term splitting
# ---------------------------------------------------------------------------


def _validate_scopes(scopes: Iterable[NegationScope]) -> None:
    for scope in scopes:
        start, end = scope.scope_span
        if start < 0 or end <= start:
            raise ValueError(f"scope span out of range: {scope.scope_span}")


def _scope_positions(scopes: Iterable[NegationScope]) -> set[int]:
    positions: set[int] = set()
    for scope in scopes:
        positions.update(range(scope.scope_span[0], scope.scope_span[1]))
    return positions


def tag_tokens(stream: TokenStream, scopes: Sequence[NegationScope]) -> TaggedTokenStream:
    """Prefix every token whose position falls inside a scope with "[nx]".

    Cue tokens themselves are never inside a scope span and stay plain.
    Spans may extend past the last kept token (stopword removal can strip
    the tail of a scope); negative or inverted spans are rejected.
    """
    _validate_scopes(scopes)
    negated = _scope_positions(scopes)
    tagged = tuple(
        TaggedToken(
            NX_PREFIX + t.surface if t.position in negated else t.surface,
            t.sentence_index,
            t.position,
            t.position in negated,
        )
        for t in stream
    )
    return TaggedTokenStream(tagged)


def split_query_terms(
    stream: TokenStream, scopes: Sequence[NegationScope]
) -> tuple[list[str], list[str]]:
    """Partition a stream into (positive, negated) term lists.

    Negated terms are the in-scope tokens with their plain surfaces;
    positive terms are everything else except cue tokens. Together with
    the cue tokens they reconstruct the stream exactly.
    """
    _validate_scopes(scopes)
    negated_positions = _scope_positions(scopes)
    trigger_positions: set[int] = set()
    for scope in scopes:
        trigger_positions.update(range(scope.trigger_span[0], scope.trigger_span[1]))
    positive: list[str] = []
    negated: list[str] = []
    for token in stream:
        if token.position in negated_positions:
            negated.append(token.surface)
        elif token.position not in trigger_positions:
            positive.append(token.surface)
    return positive, negated


# ---------------------------------------------------------------------------
# Whole-text analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TextAnalysis:
    """Everything the indexer and query builder need for one text."""

    sentences: list[Sentence]
    scopes: list[NegationScope]
    stream: TokenStream
    tagged: TaggedTokenStream


def analyze_text(
    text: str,
    stopwords: frozenset[str],
    lexicon: TriggerLexicon,
    scope_window: int | None = None,
) -> TextAnalysis:
    """Sentence-split, detect scopes, remove stopwords, and tag."""
    sentences = split_sentences(text)
    scopes = detect_all(sentences, lexicon, scope_window)
    kept = tuple(
        token
        for sentence in sentences
        for token in sentence.tokens
        if token.surface not in stopwords
    )
    stream = TokenStream(kept)
    return TextAnalysis(sentences, scopes, stream, tag_tokens(stream, scopes))


def scope_text(sentence: Sentence, scope: NegationScope) -> str:
    """The raw surfaces covered by a scope, joined with spaces."""
    start, end = scope.scope_span
    return " ".join(t.surface for t in sentence.tokens if start <= t.position < end)
