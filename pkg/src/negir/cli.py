"""Command-line entry point.

Subcommands cover the whole experiment pipeline: ``index`` a collection,
``detect`` negation scopes in text, ``bundle`` the query variants of a
topic file, ``run`` a ranking strategy into a TREC run file, ``eval`` a
run against qrels, and ``compare-groups`` to split topics by negation
content and report the early-precision gap.

A config file of ``key = value`` lines may set any numeric option; flags
win over the file, and the effective configuration is echoed in every
report header. All outputs are deterministic for fixed inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields as dataclass_fields, replace
from pathlib import Path

from . import __version__
from .corpus import (
    COLLECTION_FORMATS,
    data_file_version,
    default_stopwords,
    load_collection,
    load_stopwords,
    load_topics,
    packaged_data_path,
    split_sentences,
)
from .errors import NegirError
from .evalkit import (
    evaluate,
    format_table,
    group_analysis,
    read_qrels,
    read_run,
    read_sampling_sidecar,
    report_to_dict,
    write_run,
    RunResult,
)
from .index import DEFAULT_B, DEFAULT_K1, build_index, load_index, save_index
from .negation import (
    analyze_text,
    default_lexicon,
    detect_negations,
    load_lexicon,
    scope_text,
)
from .querygen import build_bundle, bundle_summary
from .ranking import (
    DEFAULT_EXPANSION_WEIGHT,
    STRATEGY_KINDS,
    Strategy,
    run_strategy,
)


@dataclass
class Config:
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    expansion_weight: float = DEFAULT_EXPANSION_WEIGHT
    beta: float | None = None
    k: int = 1000
    ndcg_cutoff: int = 1000
    threads: int = 4

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclass_fields(self)}


def load_config(path: str | Path) -> dict:
    """Parse a key = value config file; '#' starts a comment line."""
    values: dict[str, object] = {}
    valid = {f.name: f for f in dataclass_fields(Config)}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise NegirError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in valid:
            raise NegirError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = int(value) if key in ("k", "ndcg_cutoff", "threads") else float(value)
        except ValueError:
            raise NegirError(f"{path}:{lineno}: bad value for {key!r}")
    return values


def resolve_config(args: argparse.Namespace) -> Config:
    config = Config()
    if getattr(args, "config", None):
        config = replace(config, **load_config(args.config))
    for name in ("k1", "b", "expansion_weight", "beta", "k", "ndcg_cutoff", "threads"):
        value = getattr(args, name.replace("-", "_"), None)
        if value is not None:
            config = replace(config, **{name: value})
    return config


def _stopwords(args: argparse.Namespace) -> frozenset[str]:
    return load_stopwords(args.stopwords) if args.stopwords else default_stopwords()


def _lexicon(args: argparse.Namespace):
    return load_lexicon(args.lexicon) if args.lexicon else default_lexicon()


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def cmd_index(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    stopwords = _stopwords(args)
    lexicon = _lexicon(args)

    def analyzed():
        for doc in load_collection(args.collection, args.format):
            analysis = analyze_text(doc.text(), stopwords, lexicon)
            yield doc, analysis.stream, analysis.tagged

    index = build_index(analyzed(), k1=config.k1, b=config.b)
    save_index(index, args.out)
    summary = {
        "documents": index.doc_count,
        "plain_terms": len(index.field("plain").postings),
        "tagged_terms": len(index.field("tagged").postings),
        "k1": index.k1,
        "b": index.b,
        "snapshot": str(args.out),
    }
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"indexed {summary['documents']} documents -> {args.out}")
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    if args.text is not None:
        text = args.text
    elif args.input:
        text = Path(args.input).read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    lexicon = _lexicon(args)
    output = []
    for sentence in split_sentences(text):
        scopes = []
        for scope in detect_negations(sentence, lexicon, args.scope_window):
            scopes.append(
                {
                    "trigger": scope.trigger,
                    "kind": scope.kind,
                    "scope_text": scope_text(sentence, scope),
                }
            )
        output.append(
            {
                "sentence_index": sentence.sentence_index,
                "text": sentence.text.strip(),
                "scopes": scopes,
            }
        )
    print(json.dumps(output, indent=2))
    return 0


def cmd_bundle(args: argparse.Namespace) -> int:
    stopwords = _stopwords(args)
    lexicon = _lexicon(args)
    summaries = [
        bundle_summary(build_bundle(topic, lexicon, stopwords))
        for topic in load_topics(args.topics)
    ]
    print(json.dumps(summaries, indent=2))
    return 0


def _build_bundles(args: argparse.Namespace):
    stopwords = _stopwords(args)
    lexicon = _lexicon(args)
    return [
        build_bundle(topic, lexicon, stopwords) for topic in load_topics(args.topics)
    ]


def cmd_run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    index = load_index(args.index)
    bundles = _build_bundles(args)
    strategy = Strategy(
        kind=args.strategy,
        beta_override=config.beta,
        expansion_weight=config.expansion_weight,
    )

    def rank(bundle):
        return bundle.topic_id, run_strategy(strategy, bundle, index, config.k)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            ranked = list(pool.map(rank, bundles))
    else:
        ranked = [rank(bundle) for bundle in bundles]

    run = RunResult(run_tag=args.tag)
    for topic_id, scored in sorted(ranked, key=lambda item: item[0]):
        run.add_topic(topic_id, [(sd.doc_id, sd.score) for sd in scored])
    write_run(run, args.out)
    if args.json:
        print(
            json.dumps(
                {
                    "strategy": args.strategy,
                    "topics": len(run.topics),
                    "out": str(args.out),
                    "config": config.as_dict(),
                },
                sort_keys=True,
            )
        )
    else:
        print(f"wrote {len(run.topics)} topics -> {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    run = read_run(args.run)
    qrels = read_qrels(args.qrels)
    sampling = read_sampling_sidecar(args.sampling) if args.sampling else None
    report = evaluate(run, qrels, ndcg_cutoff=config.ndcg_cutoff, sampling=sampling)
    if args.json:
        payload = report_to_dict(report)
        payload["config"] = config.as_dict()
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(_config_header(config))
        print(format_table([(report.run_tag, report.aggregate())]))
        if args.per_topic:
            for topic_id, metrics in sorted(report.per_topic.items()):
                flag = "  (no relevant docs)" if metrics.no_relevant else ""
                values = "  ".join(f"{v:.4f}" for v in metrics.values())
                print(f"{topic_id:>8}  {values}{flag}")
    return 0


def cmd_compare_groups(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    bundles = _build_bundles(args)
    runs: dict[str, RunResult] = {"baseline": read_run(args.baseline)}
    for entry in args.run or []:
        if "=" not in entry:
            raise NegirError(f"--run expects name=path, got {entry!r}")
        name, _, path = entry.partition("=")
        runs[name.strip()] = read_run(path.strip())
    qrels = read_qrels(args.qrels)
    report = group_analysis(bundles, runs, qrels, ndcg_cutoff=config.ndcg_cutoff)

    if args.json:
        payload = {
            "config": config.as_dict(),
            "d_plus_topics": sorted(report.d_plus_topics),
            "d_minus_topics": sorted(report.d_minus_topics),
            "groups": {
                name: {
                    group: report_to_dict(group_report)
                    for group, group_report in by_group.items()
                }
                for name, by_group in report.reports.items()
            },
            "gap_reduction_p10": report.gap_reduction_p10,
            "d_minus_improvement_p10": report.d_minus_improvement_p10,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0

    print(_config_header(config))
    print(
        f"groups: {len(report.d_plus_topics)} without negations, "
        f"{len(report.d_minus_topics)} with negations"
    )
    rows = []
    for name, by_group in report.reports.items():
        if name == report.baseline_name:
            rows.append((f"{name} D+", by_group["d_plus"].aggregate()))
        rows.append((f"{name} D-", by_group["d_minus"].aggregate()))
    print(format_table(rows))
    for name, value in report.gap_reduction_p10.items():
        shown = "undefined (no baseline gap)" if value is None else f"{value * 100:.1f}%"
        improvement = report.d_minus_improvement_p10[name]
        extra = "" if improvement is None else f" (D- P@10 {improvement * 100:+.1f}%)"
        print(f"gap reduction P@10 [{name}]: {shown}{extra}")
    return 0


def _config_header(config: Config) -> str:
    pairs = " ".join(f"{key}={value}" for key, value in config.as_dict().items())
    return f"# config: {pairs}"


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _version_string() -> str:
    stopword_version = data_file_version(packaged_data_path("stopwords.txt"))
    lexicon_version = data_file_version(packaged_data_path("lexicon.txt"))
    return f"negir {__version__} ({stopword_version}; {lexicon_version})"


def _add_common(parser: argparse.ArgumentParser, *, data_files: bool = False) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    if data_files:
        parser.add_argument("--stopwords", help="stopword file (default: shipped list)")
        parser.add_argument("--lexicon", help="trigger lexicon file (default: shipped list)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="negir", description="Negation-aware BM25 retrieval and evaluation."
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build an index snapshot from a collection")
    p_index.add_argument("--collection", required=True)
    p_index.add_argument("--format", choices=COLLECTION_FORMATS, default="jsonl")
    p_index.add_argument("--out", required=True)
    p_index.add_argument("--k1", type=float)
    p_index.add_argument("--b", type=float)
    _add_common(p_index, data_files=True)
    p_index.set_defaults(handler=cmd_index)

    p_detect = sub.add_parser("detect", help="show negation scopes in text")
    p_detect.add_argument("--text", help="text to analyze (default: stdin)")
    p_detect.add_argument("--input", help="file to analyze")
    p_detect.add_argument("--scope-window", type=int, dest="scope_window")
    _add_common(p_detect, data_files=True)
    p_detect.set_defaults(handler=cmd_detect)

    p_bundle = sub.add_parser("bundle", help="print the four query variants per topic")
    p_bundle.add_argument("--topics", required=True)
    _add_common(p_bundle, data_files=True)
    p_bundle.set_defaults(handler=cmd_bundle)

    p_run = sub.add_parser("run", help="rank topics with one strategy")
    p_run.add_argument("--index", required=True)
    p_run.add_argument("--topics", required=True)
    p_run.add_argument("--strategy", choices=STRATEGY_KINDS, required=True)
    p_run.add_argument("--beta", type=float, help="override the adaptive combination weight")
    p_run.add_argument("--expansion-weight", type=float, dest="expansion_weight")
    p_run.add_argument("--k", type=int)
    p_run.add_argument("--threads", type=int)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--tag", default="negir")
    _add_common(p_run, data_files=True)
    p_run.set_defaults(handler=cmd_run)

    p_eval = sub.add_parser("eval", help="score a run file against qrels")
    p_eval.add_argument("--run", required=True)
    p_eval.add_argument("--qrels", required=True)
    p_eval.add_argument("--sampling", help="sampling sidecar JSON for inferred AP")
    p_eval.add_argument("--ndcg-cutoff", type=int, dest="ndcg_cutoff")
    p_eval.add_argument("--per-topic", action="store_true", dest="per_topic")
    _add_common(p_eval)
    p_eval.set_defaults(handler=cmd_eval)

    p_groups = sub.add_parser(
        "compare-groups", help="split topics by negation content and compare runs"
    )
    p_groups.add_argument("--topics", required=True)
    p_groups.add_argument("--qrels", required=True)
    p_groups.add_argument("--baseline", required=True, help="baseline run file")
    p_groups.add_argument(
        "--run",
        action="append",
        metavar="NAME=PATH",
        help="strategy run file; repeatable",
    )
    p_groups.add_argument("--ndcg-cutoff", type=int, dest="ndcg_cutoff")
    _add_common(p_groups, data_files=True)
    p_groups.set_defaults(handler=cmd_compare_groups)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except NegirError as exc:
        print(f"negir: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"negir: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
