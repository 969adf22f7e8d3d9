"""TREC-style evaluation: qrels/run I/O, metrics, and group analysis.

Metrics follow trec_eval conventions: unjudged retrieved documents count
as non-relevant, short rankings leave missing ranks non-relevant, and
aggregates are unweighted arithmetic means over the topics present in
the qrels (topics absent from a run contribute zero).

Inferred average precision is the sampled-judgment estimator of Yilmaz
and Aslam. Without sampling metadata, judgments are treated as complete
and the value is exact average precision; with a sampling sidecar (per
topic, the pooled document ids grouped into strata, of which the judged
documents are a uniform sample per stratum) the estimator extrapolates
from the sample, weighting each sampled relevant document by the inverse
of its stratum's sampling rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ParseError
from .querygen import QueryBundle

INFAP_EPSILON = 1e-5

METRIC_NAMES = ("p_at_10", "ndcg", "inf_ap", "r_prec")


class Qrels:
    """Relevance judgments: one integer grade per (topic, doc) pair."""

    def __init__(self, judgments: Mapping[str, Mapping[str, int]] | None = None):
        self.judgments: dict[str, dict[str, int]] = {}
        if judgments:
            for topic_id, docs in judgments.items():
                for doc_id, grade in docs.items():
                    self.add(topic_id, doc_id, grade)

    def add(self, topic_id: str, doc_id: str, grade: int) -> None:
        if grade < 0:
            raise ValueError(f"negative relevance grade for {topic_id}/{doc_id}")
        topic = self.judgments.setdefault(topic_id, {})
        if doc_id in topic:
            raise ValueError(f"duplicate judgment for {topic_id}/{doc_id}")
        topic[doc_id] = grade

    def grade(self, topic_id: str, doc_id: str) -> int:
        return self.judgments.get(topic_id, {}).get(doc_id, 0)

    def relevant_docs(self, topic_id: str) -> set[str]:
        return {d for d, g in self.judgments.get(topic_id, {}).items() if g >= 1}

    def topic_ids(self) -> list[str]:
        return list(self.judgments.keys())


@dataclass
class RunResult:
    """Ranked lists per topic, TREC run conventions.

    Per topic, entries are (doc_id, score) in rank order: ranks are dense
    from 1, scores non-increasing, no document repeated.
    """

    run_tag: str
    topics: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    def add_topic(self, topic_id: str, ranked: Sequence[tuple[str, float]]) -> None:
        if topic_id in self.topics:
            raise ValueError(f"duplicate topic in run: {topic_id}")
        seen = set()
        previous = math.inf
        for doc_id, score in ranked:
            if doc_id in seen:
                raise ValueError(f"duplicate document {doc_id!r} in topic {topic_id}")
            if score > previous:
                raise ValueError(f"scores increase with rank in topic {topic_id}")
            seen.add(doc_id)
            previous = score
        self.topics[topic_id] = list(ranked)

    def ranking(self, topic_id: str) -> list[str]:
        return [doc_id for doc_id, _ in self.topics.get(topic_id, [])]


# ---------------------------------------------------------------------------
# Individual metrics. ``ranking`` is a list of doc_ids in rank order.
# ---------------------------------------------------------------------------


def p_at_k(ranking: Sequence[str], qrels: Qrels, topic_id: str, k: int = 10) -> float:
    """Fraction of the top k that is relevant; missing ranks count as not."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for doc_id in ranking[:k] if qrels.grade(topic_id, doc_id) >= 1)
    return hits / k


def ndcg(ranking: Sequence[str], qrels: Qrels, topic_id: str, cutoff: int = 1000) -> float:
    """Normalized DCG with graded gains and a 1/log2(rank+1) discount.

    Topics without any relevant document yield 0.0 (callers flag them).
    """
    grades = qrels.judgments.get(topic_id, {})
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)[:cutoff]
    if not ideal:
        return 0.0
    dcg = 0.0
    for rank, doc_id in enumerate(ranking[:cutoff], start=1):
        grade = grades.get(doc_id, 0)
        if grade > 0:
            dcg += grade / math.log2(rank + 1)
    idcg = sum(g / math.log2(r + 1) for r, g in enumerate(ideal, start=1))
    return dcg / idcg


def average_precision(ranking: Sequence[str], qrels: Qrels, topic_id: str) -> float:
    relevant = qrels.relevant_docs(topic_id)
    if not relevant:
        return 0.0
    hits = 0
    total = 0.0
    for rank, doc_id in enumerate(ranking, start=1):
        if doc_id in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


@dataclass(frozen=True)
class SamplingInfo:
    """Pool strata for one topic; judged docs are the per-stratum sample."""

    strata: tuple[frozenset[str], ...]

    def stratum_of(self, doc_id: str) -> int | None:
        for i, stratum in enumerate(self.strata):
            if doc_id in stratum:
                return i
        return None


def inf_ap(
    ranking: Sequence[str],
    qrels: Qrels,
    topic_id: str,
    sampling: SamplingInfo | None = None,
    epsilon: float = INFAP_EPSILON,
) -> float:
    """Inferred average precision.

    With ``sampling`` absent the judgments are complete and this is exact
    average precision. Otherwise, for each sampled relevant document at
    rank k the expected precision is estimated as

        E[P@k] = 1/k + (k-1)/k * sum over strata s of
                 (|pool_s above k| / (k-1)) *
                 (rel_s + eps) / (rel_s + nonrel_s + 2 eps)

    where rel_s/nonrel_s count judged documents of stratum s above rank
    k and documents outside every stratum are assumed non-relevant. The
    estimate averages E[P@k] over sampled relevant documents (zero when
    not retrieved), each weighted by the inverse of its stratum's
    sampling rate.
    """
    if sampling is None:
        return average_precision(ranking, qrels, topic_id)
    grades = qrels.judgments.get(topic_id, {})
    judged = set(grades)
    rates = []
    for stratum in sampling.strata:
        if not stratum:
            raise ValueError("empty stratum in sampling metadata")
        sampled = len(stratum & judged)
        if sampled == 0:
            raise ValueError("stratum with no judged documents")
        rates.append(sampled / len(stratum))

    rank_of = {doc_id: rank for rank, doc_id in enumerate(ranking, start=1)}
    numerator = 0.0
    denominator = 0.0
    for doc_id, grade in grades.items():
        if grade < 1:
            continue
        stratum_index = sampling.stratum_of(doc_id)
        if stratum_index is None:
            raise ValueError(f"judged document {doc_id!r} missing from all strata")
        weight = 1.0 / rates[stratum_index]
        denominator += weight
        rank = rank_of.get(doc_id)
        if rank is None:
            continue
        numerator += weight * _expected_precision(
            ranking, grades, sampling, rank, epsilon
        )
    if denominator == 0.0:
        return 0.0
    return numerator / denominator


def _expected_precision(
    ranking: Sequence[str],
    grades: Mapping[str, int],
    sampling: SamplingInfo,
    rank: int,
    epsilon: float,
) -> float:
    if rank == 1:
        return 1.0
    above = ranking[: rank - 1]
    expected = 1.0 / rank
    for stratum in sampling.strata:
        in_stratum = [doc_id for doc_id in above if doc_id in stratum]
        if not in_stratum:
            continue
        rel = sum(1 for d in in_stratum if grades.get(d, -1) >= 1)
        nonrel = sum(1 for d in in_stratum if grades.get(d, -1) == 0)
        expected += (
            ((rank - 1) / rank)
            * (len(in_stratum) / (rank - 1))
            * ((rel + epsilon) / (rel + nonrel + 2 * epsilon))
        )
    return expected


def r_prec(ranking: Sequence[str], qrels: Qrels, topic_id: str) -> float:
    """Precision at rank R, where R is the topic's relevant-doc count."""
    relevant = qrels.relevant_docs(topic_id)
    if not relevant:
        return 0.0
    r = len(relevant)
    hits = sum(1 for doc_id in ranking[:r] if doc_id in relevant)
    return hits / r


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TopicMetrics:
    p_at_10: float
    ndcg: float
    inf_ap: float
    r_prec: float
    no_relevant: bool = False

    def values(self) -> tuple[float, float, float, float]:
        return (self.p_at_10, self.ndcg, self.inf_ap, self.r_prec)


@dataclass
class MetricsReport:
    run_tag: str
    per_topic: dict[str, TopicMetrics]

    @property
    def num_topics(self) -> int:
        return len(self.per_topic)

    def aggregate(self) -> TopicMetrics:
        if not self.per_topic:
            return TopicMetrics(0.0, 0.0, 0.0, 0.0)
        columns = list(zip(*(m.values() for m in self.per_topic.values())))
        means = [sum(column) / len(column) for column in columns]
        return TopicMetrics(*means)


def evaluate(
    run: RunResult,
    qrels: Qrels,
    ndcg_cutoff: int = 1000,
    sampling: Mapping[str, SamplingInfo] | None = None,
) -> MetricsReport:
    """Score a run against qrels, topic by topic.

    Every topic present in the qrels is scored; topics missing from the
    run receive zeros.
    """
    per_topic: dict[str, TopicMetrics] = {}
    for topic_id in qrels.topic_ids():
        ranking = run.ranking(topic_id)
        info = sampling.get(topic_id) if sampling else None
        per_topic[topic_id] = TopicMetrics(
            p_at_10=p_at_k(ranking, qrels, topic_id, 10),
            ndcg=ndcg(ranking, qrels, topic_id, ndcg_cutoff),
            inf_ap=inf_ap(ranking, qrels, topic_id, info),
            r_prec=r_prec(ranking, qrels, topic_id),
            no_relevant=not qrels.relevant_docs(topic_id),
        )
    return MetricsReport(run_tag=run.run_tag, per_topic=per_topic)


# ---------------------------------------------------------------------------
# Group analysis
# ---------------------------------------------------------------------------


@dataclass
class GroupReport:
    """Metrics split by negation-bearing vs negation-free topics."""

    d_plus_topics: set[str]
    d_minus_topics: set[str]
    baseline_name: str
    reports: dict[str, dict[str, MetricsReport]]  # strategy -> group -> report
    gap_reduction_p10: dict[str, float | None]
    d_minus_improvement_p10: dict[str, float | None]


def gap_reduction(base_d_plus: float, base_d_minus: float, strategy_d_minus: float) -> float | None:
    """Fraction of the baseline group gap recovered by a strategy.

    Returns None when the baseline gap is zero (undefined).
    """
    gap = base_d_plus - base_d_minus
    if gap == 0.0:
        return None
    return (strategy_d_minus - base_d_minus) / gap


def relative_improvement(strategy_value: float, baseline_value: float) -> float | None:
    if baseline_value == 0.0:
        return None
    return strategy_value / baseline_value - 1.0


def split_topics(bundles: Iterable[QueryBundle]) -> tuple[set[str], set[str]]:
    """Partition topic ids into (negation-free, negation-bearing) sets."""
    d_plus: set[str] = set()
    d_minus: set[str] = set()
    for bundle in bundles:
        (d_minus if bundle.n_neg > 0 else d_plus).add(bundle.topic_id)
    return d_plus, d_minus


def _restrict(qrels: Qrels, topic_ids: set[str]) -> Qrels:
    return Qrels({t: dict(docs) for t, docs in qrels.judgments.items() if t in topic_ids})


def group_analysis(
    bundles: Iterable[QueryBundle],
    runs_by_strategy: Mapping[str, RunResult],
    qrels: Qrels,
    baseline: str = "baseline",
    ndcg_cutoff: int = 1000,
) -> GroupReport:
    """Compare strategies on the negation-bearing group against the
    negation-free baseline, reporting the early-precision gap recovered.
    """
    if baseline not in runs_by_strategy:
        raise ValueError(f"baseline run {baseline!r} not among runs")
    d_plus, d_minus = split_topics(bundles)
    qrels_plus = _restrict(qrels, d_plus)
    qrels_minus = _restrict(qrels, d_minus)

    reports: dict[str, dict[str, MetricsReport]] = {}
    for name, run in runs_by_strategy.items():
        reports[name] = {
            "d_plus": evaluate(run, qrels_plus, ndcg_cutoff),
            "d_minus": evaluate(run, qrels_minus, ndcg_cutoff),
        }

    base_plus = reports[baseline]["d_plus"].aggregate().p_at_10
    base_minus = reports[baseline]["d_minus"].aggregate().p_at_10
    reductions: dict[str, float | None] = {}
    improvements: dict[str, float | None] = {}
    for name in runs_by_strategy:
        if name == baseline:
            continue
        strategy_minus = reports[name]["d_minus"].aggregate().p_at_10
        reductions[name] = gap_reduction(base_plus, base_minus, strategy_minus)
        improvements[name] = relative_improvement(strategy_minus, base_minus)
    return GroupReport(
        d_plus_topics=d_plus,
        d_minus_topics=d_minus,
        baseline_name=baseline,
        reports=reports,
        gap_reduction_p10=reductions,
        d_minus_improvement_p10=improvements,
    )


# ---------------------------------------------------------------------------
# TREC file formats
# ---------------------------------------------------------------------------


def read_qrels(path: str | Path) -> Qrels:
    """Read whitespace-separated qrels: topic 0 docid grade."""
    qrels = Qrels()
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(
                    f"expected 4 fields in qrels line, got {len(parts)}", str(path), lineno
                )
            topic_id, _, doc_id, grade_text = parts
            try:
                grade = int(grade_text)
            except ValueError:
                raise ParseError(f"bad relevance grade {grade_text!r}", str(path), lineno)
            try:
                qrels.add(topic_id, doc_id, grade)
            except ValueError as exc:
                raise ParseError(str(exc), str(path), lineno)
    return qrels


def write_qrels(qrels: Qrels, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as out:
        for topic_id, docs in qrels.judgments.items():
            for doc_id, grade in docs.items():
                out.write(f"{topic_id} 0 {doc_id} {grade}\n")


def read_run(path: str | Path) -> RunResult:
    """Read a TREC run file: topic Q0 docid rank score tag."""
    path = Path(path)
    run_tag = ""
    per_topic: dict[str, list[tuple[str, float]]] = {}
    expected_rank: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ParseError(
                    f"expected 6 fields in run line, got {len(parts)}", str(path), lineno
                )
            topic_id, _, doc_id, rank_text, score_text, tag = parts
            try:
                rank = int(rank_text)
                score = float(score_text)
            except ValueError:
                raise ParseError("bad rank or score field", str(path), lineno)
            run_tag = run_tag or tag
            expected = expected_rank.get(topic_id, 0) + 1
            if rank != expected:
                raise ParseError(
                    f"rank {rank} out of order for topic {topic_id} (expected {expected})",
                    str(path),
                    lineno,
                )
            expected_rank[topic_id] = rank
            per_topic.setdefault(topic_id, []).append((doc_id, score))
    run = RunResult(run_tag=run_tag)
    for topic_id, ranked in per_topic.items():
        run.add_topic(topic_id, ranked)
    return run


def write_run(run: RunResult, path: str | Path) -> None:
    """Write a run in TREC format; round-trips through read_run exactly."""
    with open(path, "w", encoding="utf-8") as out:
        for topic_id in sorted(run.topics, key=_topic_sort_key):
            for rank, (doc_id, score) in enumerate(run.topics[topic_id], start=1):
                out.write(f"{topic_id} Q0 {doc_id} {rank} {score!r} {run.run_tag}\n")


def _topic_sort_key(topic_id: str) -> tuple:
    return (0, int(topic_id)) if topic_id.isdigit() else (1, topic_id)


# ---------------------------------------------------------------------------
# Sampling sidecar and report rendering
# ---------------------------------------------------------------------------


def read_sampling_sidecar(path: str | Path) -> dict[str, SamplingInfo]:
    """JSON sidecar: {topic_id: [[pooled doc ids of stratum 1], ...]}."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", str(path)) from exc
    sampling: dict[str, SamplingInfo] = {}
    for topic_id, strata in data.items():
        if not isinstance(strata, list) or not all(isinstance(s, list) for s in strata):
            raise ParseError(f"topic {topic_id}: strata must be lists of doc ids", str(path))
        sampling[str(topic_id)] = SamplingInfo(
            strata=tuple(frozenset(str(d) for d in stratum) for stratum in strata)
        )
    return sampling


def report_to_dict(report: MetricsReport) -> dict:
    aggregate = report.aggregate()
    return {
        "run_tag": report.run_tag,
        "num_topics": report.num_topics,
        "aggregate": dict(zip(METRIC_NAMES, aggregate.values())),
        "per_topic": {
            topic_id: dict(zip(METRIC_NAMES, metrics.values()))
            | ({"no_relevant": True} if metrics.no_relevant else {})
            for topic_id, metrics in sorted(report.per_topic.items())
        },
    }


def format_table(rows: Sequence[tuple[str, TopicMetrics]], header: str = "") -> str:
    """Aligned-column text table: one row per run, four metric columns."""
    lines = []
    if header:
        lines.append(header)
    name_width = max([len(name) for name, _ in rows] + [8])
    lines.append(f"{'':<{name_width}}  {'P@10':>8}  {'NDCG':>8}  {'infAP':>8}  {'RPrec':>8}")
    for name, metrics in rows:
        values = "  ".join(f"{v:>8.4f}" for v in metrics.values())
        lines.append(f"{name:<{name_width}}  {values}")
    return "\n".join(lines)
