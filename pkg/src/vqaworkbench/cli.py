"""Command-line interface: run the whole pipeline without the service.

Subcommands: prioritize, agreement, eval-clusters, metrics, stats, decode,
serve, export. Every run writes a machine-readable JSON result whose header
records the fully resolved configuration, prints a short human summary, and
is byte-identical across repeated runs with the same inputs and seed.
Tables additionally support --csv, and report-style subcommands render
matplotlib figures next to the delimited output when --figures is given.

Exit codes: 0 success, 1 validation error, 2 I/O error, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import constrained_decode as cdec
from .clustering import ClusterResult, PriorityItem, PrioritizeConfig, prioritize
from .corpus import (
    DatasetSplit,
    ParseError,
    ReferentialIntegrityError,
    ValidationError,
    filter_ambiguous_subset,
    filter_answers_by_confidence,
    import_jsonl,
    load_disagreement_labels,
    load_vqa,
    read_records,
    validate_splits,
)
from .embeddings import load_embedding_table
from .evalharness import (
    PairedOutcomes,
    bootstrap_ci,
    category_stats,
    cider,
    eval_items_from_records,
    evaluate_clustering,
    load_representations,
    make_method,
    mcnemar,
    rouge_l,
    tokenize,
)
from .evalharness.textmetrics import bleu as bleu_metric
from .evalharness.stats import why_crosstab
from .service import EventStore, Workbench, WorkbenchConfig, agreement_summaries, build_app, summarize_records

DATA_DIR_ENV = "VQAW_DATA_DIR"

METHOD_CHOICES = ["random", "perfect-precision", "perfect-recall", "glove-initial", "representations"]


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _data_path(value: str) -> Path:
    """Resolve relative paths against $VQAW_DATA_DIR when set."""
    path = Path(value)
    base = os.environ.get(DATA_DIR_ENV)
    if base and not path.is_absolute() and not path.exists():
        candidate = Path(base) / path
        if candidate.exists():
            return candidate
    return path


def _resolved_config(args: argparse.Namespace) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key == "func" or callable(value):
            continue
        if isinstance(value, Path):
            value = str(value)
        out[key] = value
    return out


def _write_json(path, config: dict, result) -> None:
    payload = {"config": config, "result": result}
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_csv(path, config: dict, header: list[str], rows: list[list]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _clustering_config(args) -> PrioritizeConfig:
    """Merge clustering knobs: explicit flags win over the --config file,
    which wins over the defaults."""
    file_cfg = {}
    if getattr(args, "config", None):
        file_cfg = json.loads(Path(_data_path(args.config)).read_text(encoding="utf-8"))

    def pick(flag, key, default):
        value = getattr(args, flag)
        return value if value is not None else file_cfg.get(key, default)

    return PrioritizeConfig(
        penalty=pick("penalty", "penalty", None),
        k_max=int(pick("k_max", "k_max", 5)),
        restarts=int(pick("restarts", "restarts", 8)),
        seed=int(pick("seed", "seed", 0)),
        sort_policy=str(pick("sort", "sort_policy", "score_balance")),
    )


# --- prioritize ---------------------------------------------------------------


def cmd_prioritize(args) -> int:
    examples = load_vqa(_data_path(args.questions), _data_path(args.annotations))
    n_loaded = len(examples)
    n_unlabeled = 0
    if args.labels:
        labels = load_disagreement_labels(_data_path(args.labels))
        examples, report = filter_ambiguous_subset(examples, labels, args.ambiguity_flag)
        n_unlabeled = report.n_unlabeled
    kept = []
    n_empty = 0
    for ex in examples:
        filtered, _ = filter_answers_by_confidence(ex)
        if filtered is None:
            n_empty += 1
        else:
            kept.append(filtered)
    table = load_embedding_table(_data_path(args.embeddings), expected_dim=args.dim)
    config = _clustering_config(args)
    result = prioritize(kept, table, config, jobs=args.jobs)
    resolved = _resolved_config(args)
    resolved.update(
        penalty=config.penalty,
        k_max=config.k_max,
        restarts=config.restarts,
        seed=config.seed,
        sort=config.sort_policy,
    )
    with Path(args.out).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"config": resolved}, sort_keys=True) + "\n")
        for rank, item in enumerate(result.items):
            fh.write(
                json.dumps(
                    {
                        "rank": rank,
                        "question_id": item.question_id,
                        "k": item.cluster_result.k,
                        "score": item.cluster_result.score,
                        "inertia": item.cluster_result.inertia,
                        "balance": item.cluster_result.balance,
                        "assignments": list(item.cluster_result.assignments),
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    print(
        f"prioritize: {n_loaded} loaded, {n_unlabeled} unlabeled, "
        f"{len(result.dropped_yes_no_ids)} yes/no-only dropped, "
        f"{len(result.quarantined_ids)} quarantined, {n_empty} empty after confidence filter, "
        f"{len(result.items)} queued -> {args.out}"
    )
    return 0


# --- agreement ----------------------------------------------------------------


def cmd_agreement(args) -> int:
    groupings = import_jsonl(_data_path(args.annotations))
    per_annotator: dict[str, dict] = {}
    for g in groupings:
        per_annotator.setdefault(g.annotator_id, {})[g.question_id] = g
    summary = agreement_summaries(per_annotator)
    resolved = _resolved_config(args)
    _write_json(args.out, resolved, summary)
    if args.csv and summary.get("ok"):
        rows = []
        for metric in ("ambiguity_agreement", "cluster_f1"):
            block = summary.get(metric)
            if block:
                rows.append(
                    [metric, f"{block['mean']:.1f}", f"{block['std']:.1f}", f"{block['min']:.1f}", f"{block['max']:.1f}", block["n_pairs"]]
                )
        _write_csv(args.csv, resolved, ["metric", "mean", "std", "min", "max", "n_pairs"], rows)
    if summary.get("ok"):
        amb = summary["ambiguity_agreement"]
        print(f"agreement: {summary['n_annotators']} annotators, ambiguity mean {amb['mean']:.1f}")
    else:
        print("agreement: insufficient overlap between annotators")
    return 0


# --- eval-clusters ------------------------------------------------------------


def cmd_eval_clusters(args) -> int:
    records = read_records(_data_path(args.gold))
    items = eval_items_from_records(records)
    if not items:
        raise ValidationError("no-gold", "gold file contains no ambiguous groupings")
    table = load_embedding_table(_data_path(args.embeddings), expected_dim=args.dim) if args.embeddings else None
    reps = load_representations(_data_path(args.representations)) if args.representations else None
    config = PrioritizeConfig(
        penalty=args.penalty, k_max=args.k_max, restarts=args.restarts, seed=args.seed
    )
    rows = []
    for name in args.method:
        if name == "random" and args.seeds > 1:
            per_seed = []
            for offset in range(args.seeds):
                method = make_method(name, seed=args.seed + offset, table=table, reps=reps, config=config)
                per_seed.append(evaluate_clustering({name: method}, items)[0])
            rows.append(
                {
                    "method": name,
                    "avg_p": float(np.mean([r.avg_p for r in per_seed])),
                    "avg_r": float(np.mean([r.avg_r for r in per_seed])),
                    "avg_f1": float(np.mean([r.avg_f1 for r in per_seed])),
                    "f1_std": float(np.std([r.avg_f1 for r in per_seed])),
                    "n_examples": per_seed[0].n_examples,
                    "n_seeds": args.seeds,
                }
            )
        else:
            method = make_method(name, seed=args.seed, table=table, reps=reps, config=config)
            row = evaluate_clustering({name: method}, items)[0]
            rows.append(
                {
                    "method": name,
                    "avg_p": row.avg_p,
                    "avg_r": row.avg_r,
                    "avg_f1": row.avg_f1,
                    "n_examples": row.n_examples,
                    "n_seeds": 1,
                }
            )
    resolved = _resolved_config(args)
    _write_json(args.out, resolved, {"rows": rows})
    if args.csv:
        _write_csv(
            args.csv,
            resolved,
            ["Method", "Avg. P", "Avg. R", "Avg. F1"],
            [[r["method"], f"{r['avg_p']:.1f}", f"{r['avg_r']:.1f}", f"{r['avg_f1']:.1f}"] for r in rows],
        )
    if args.figures:
        from .figures import clustering_table_figure

        clustering_table_figure(rows, Path(args.figures) / "clustering_methods.png")
    for r in rows:
        print(f"eval-clusters: {r['method']}: P {r['avg_p']:.1f} R {r['avg_r']:.1f} F1 {r['avg_f1']:.1f} (n={r['n_examples']})")
    return 0


# --- metrics ------------------------------------------------------------------


def cmd_metrics(args) -> int:
    pairs = []
    with Path(_data_path(args.pairs)).open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pairs.append(json.loads(line))
    if not pairs:
        raise ValidationError("no-pairs", "pairs file is empty")
    candidates = [tokenize(p["candidate"]) for p in pairs]
    references = [[tokenize(r) for r in p["references"]] for p in pairs]
    per_item = []
    for cand, refs in zip(candidates, references):
        b = bleu_metric(cand, refs, max_n=args.max_n, smooth=args.smooth)
        rl = max((rouge_l(cand, ref) for ref in refs), key=lambda t: t.f)
        per_item.append({"bleu": b, "rouge_l_p": rl.precision, "rouge_l_r": rl.recall, "rouge_l_f": rl.f})
    cider_result = cider(candidates, references) if len(pairs) >= 2 else None
    if cider_result:
        for row, c in zip(per_item, cider_result.per_item):
            row["cider"] = c
    means = {
        f"bleu_{args.max_n}": float(np.mean([r["bleu"] for r in per_item])),
        "rouge_l": float(np.mean([r["rouge_l_f"] for r in per_item])),
        "cider": cider_result.mean if cider_result else None,
    }
    resolved = _resolved_config(args)
    _write_json(args.out, resolved, {"means": means, "per_item": per_item})
    if args.csv:
        _write_csv(
            args.csv,
            resolved,
            [f"BLEU-{args.max_n}", "CIDEr", "ROUGE-L"],
            [[f"{means[f'bleu_{args.max_n}']:.2f}", "" if means["cider"] is None else f"{means['cider']:.2f}", f"{means['rouge_l']:.2f}"]],
        )
    print(
        f"metrics: BLEU-{args.max_n} {means[f'bleu_{args.max_n}']:.4f}, "
        f"ROUGE-L {means['rouge_l']:.4f}, CIDEr "
        + ("n/a" if means["cider"] is None else f"{means['cider']:.4f}")
        + f" over {len(per_item)} items"
    )
    return 0


# --- stats --------------------------------------------------------------------


def cmd_stats(args) -> int:
    result: dict = {}
    resolved = _resolved_config(args)
    csv_rows: list[list] = []
    figures_dir = Path(args.figures) if args.figures else None
    stats_obj = None
    if args.gold:
        groupings = import_jsonl(_data_path(args.gold))
        stats_obj = category_stats([g for g in groupings if g.ambiguous])
        result["categories"] = {
            "frequency": {lab.value: n for lab, n in sorted(stats_obj.frequency.items(), key=lambda kv: kv[0].value)},
            "cooccurrence_report": [
                {"labels": [a.value, b.value], "count": n}
                for (a, b), n in sorted(stats_obj.cooccurrence_report().items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))
            ],
            "top": [lab.value for lab in stats_obj.top_labels(3)],
        }
        csv_rows += [["frequency", lab.value, n] for lab, n in sorted(stats_obj.frequency.items(), key=lambda kv: (-kv[1], kv[0].value))]
    if args.human_eval:
        rows = []
        with Path(_data_path(args.human_eval)).open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append(json.loads(line))
        by_cell: dict[tuple[str, str], list[bool]] = {}
        by_item: dict[tuple[str, str], dict[str, bool]] = {}
        for row in rows:
            key = (row["condition"], row["answer_type"])
            by_cell.setdefault(key, []).append(bool(row["acceptable"]))
            by_item.setdefault((row["condition"], str(row["item_id"])), {})[row["answer_type"]] = bool(row["acceptable"])
        cells = []
        for (condition, answer_type), outcomes in sorted(by_cell.items()):
            lo, hi = bootstrap_ci(outcomes, resamples=args.resamples, level=args.level, seed=args.seed)
            cells.append(
                {
                    "condition": condition,
                    "answer_type": answer_type,
                    "n": len(outcomes),
                    "pct": 100.0 * sum(outcomes) / len(outcomes),
                    "lo": 100.0 * lo,
                    "hi": 100.0 * hi,
                }
            )
        tests = []
        for condition in sorted({c for c, _ in by_cell}):
            paired = [
                (vals["actual"], vals["distractor"])
                for (cond, _), vals in sorted(by_item.items())
                if cond == condition and "actual" in vals and "distractor" in vals
            ]
            if paired:
                res = mcnemar(PairedOutcomes.from_pairs(paired))
                tests.append(
                    {"condition": condition, "b": res.b, "c": res.c, "p_value": res.p_value, "method": res.method}
                )
        result["human_eval"] = {"cells": cells, "mcnemar": tests}
        csv_rows += [["acceptability", f"{c['condition']}/{c['answer_type']}", f"{c['pct']:.1f}"] for c in cells]
        if figures_dir:
            from .figures import acceptability_figure

            acceptability_figure(cells, figures_dir / "acceptability.png")
    if args.why:
        records = []
        with Path(_data_path(args.why)).open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    records.append(json.loads(line))
        crosstab = why_crosstab(records)
        result["why_crosstab"] = {
            "total": crosstab.total,
            "cells": [
                {"dynamic": d, "agentive": a, "ambiguous": m, "count": crosstab.cell(d, a, m)}
                for d in (True, False)
                for a in (True, False)
                for m in (True, False)
            ],
        }
        if figures_dir:
            from .figures import why_counts_figure

            why_counts_figure(crosstab, figures_dir / "why_counts.png")
    if not result:
        raise ValidationError("no-input", "stats needs at least one of --gold/--human-eval/--why")
    if figures_dir and stats_obj is not None:
        from .figures import category_frequency_figure, cooccurrence_figure

        category_frequency_figure(stats_obj, figures_dir / "category_frequency.png")
        cooccurrence_figure(stats_obj, figures_dir / "category_cooccurrence.png")
    _write_json(args.out, resolved, result)
    if args.csv:
        _write_csv(args.csv, resolved, ["section", "key", "value"], csv_rows)
    if "categories" in result:
        print(f"stats: top categories {result['categories']['top']}")
    if "human_eval" in result:
        print(f"stats: {len(result['human_eval']['cells'])} acceptability cells, {len(result['human_eval']['mcnemar'])} McNemar tests")
    if "why_crosstab" in result:
        print(f"stats: why crosstab over {result['why_crosstab']['total']} questions")
    return 0


# --- decode -------------------------------------------------------------------


def _parse_constraint_arg(arg: str, scorer_tokenize) -> list[cdec.ConstraintSet]:
    sets = []
    for set_part in arg.split(";"):
        set_part = set_part.strip()
        if not set_part:
            continue
        alternatives = []
        for alt in set_part.split(","):
            alt = alt.strip()
            if alt:
                alternatives.append(tuple(scorer_tokenize(alt)))
        if alternatives:
            sets.append(cdec.ConstraintSet(alternatives=tuple(alternatives)))
    return sets


def cmd_decode(args) -> int:
    scorer = cdec.NgramFileScorer(_data_path(args.scorer))
    if args.constraints is not None:
        sets = _parse_constraint_arg(args.constraints, scorer.tokenize)
    elif args.text is not None:
        tokens = args.text.split()
        if args.pos_file:
            sentences = cdec.read_pos_file(_data_path(args.pos_file))
            for sent_tokens, sent_tags in sentences:
                if sent_tokens == tokens:
                    tags = sent_tags
                    break
            else:
                raise ValidationError("pos-missing", "--text not found in --pos-file")
        elif args.nouns:
            noun_words = {
                w.strip().lower()
                for w in Path(_data_path(args.nouns)).read_text(encoding="utf-8").splitlines()
                if w.strip()
            }
            tags = cdec.lexicon_pos_tags(tokens, noun_words)
        else:
            raise ValidationError("pos-source", "--text needs --pos-file or --nouns")
        spans = cdec.extract_noun_spans(tokens, tags)
        sets = cdec.compile_constraints(spans, scorer.tokenize)
    else:
        sets = []
    resolved = _resolved_config(args)
    try:
        decoded = cdec.constrained_beam_search(scorer, sets, beam_size=args.beam, max_len=args.max_len)
    except cdec.SearchExhausted as e:
        partial = None
        if e.best_partial is not None:
            partial = {
                "tokens": scorer.decode(e.best_partial.tokens),
                "log_score": e.best_partial.log_score,
                "bank": e.best_partial.bank,
            }
        _write_json(args.out, resolved, {"exhausted": True, "best_partial": partial})
        print("decode: search exhausted without satisfying constraints", file=sys.stderr)
        return 1
    words = scorer.decode(decoded.tokens)
    result = {
        "tokens": words,
        "text": " ".join(w for w in words if w != cdec.END_WORD),
        "log_score": decoded.log_score,
        "finished": decoded.finished,
        "bank": decoded.bank,
        "satisfied": cdec.satisfies(decoded.tokens, sets),
    }
    _write_json(args.out, resolved, result)
    print(f"decode: {result['text']!r} (log score {decoded.log_score:.4f}, finished={decoded.finished})")
    return 0


# --- serve --------------------------------------------------------------------


def _load_queue_file(path) -> list[PriorityItem]:
    items = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            if "question_id" not in row:
                continue  # config header
            assignments = tuple(row["assignments"])
            items.append(
                PriorityItem(
                    question_id=str(row["question_id"]),
                    cluster_result=ClusterResult(
                        k=row["k"],
                        assignments=assignments,
                        centroids=None,
                        inertia=row["inertia"],
                        score=row["score"],
                        balance=row["balance"],
                    ),
                    rank_key=(row["rank"],),
                )
            )
    items.sort(key=lambda it: it.rank_key)
    return items


def _build_workbench(args) -> Workbench:
    examples = load_vqa(_data_path(args.questions), _data_path(args.annotations))
    if args.labels:
        labels = load_disagreement_labels(_data_path(args.labels))
        examples, _ = filter_ambiguous_subset(examples, labels, args.ambiguity_flag)
    kept = []
    for ex in examples:
        filtered, _ = filter_answers_by_confidence(ex)
        if filtered is not None:
            kept.append(filtered)
    if args.queue:
        items = _load_queue_file(_data_path(args.queue))
    else:
        if not args.embeddings:
            raise ValidationError("queue-source", "serve needs --queue or --embeddings")
        table = load_embedding_table(_data_path(args.embeddings), expected_dim=args.dim)
        items = list(prioritize(kept, table, _clustering_config(args), jobs=args.jobs).items)
    store_dir = Path(args.store)
    store_dir.mkdir(parents=True, exist_ok=True)
    store = EventStore(store_dir / "events.jsonl")
    config = WorkbenchConfig(
        lease_ttl=args.lease_ttl,
        redundancy=args.redundancy,
        admin_tokens=frozenset(args.admin_token or []),
    )
    return Workbench(kept, items, store=store, config=config)


def cmd_serve(args) -> int:
    workbench = _build_workbench(args)
    resolved = _resolved_config(args)
    if args.dry_run:
        print(json.dumps({"config": resolved, "queue_length": len(workbench.queue)}, sort_keys=True, indent=2))
        return 0
    import uvicorn

    app = build_app(workbench, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --- export -------------------------------------------------------------------


def cmd_export(args) -> int:
    store_path = Path(args.store)
    events_path = store_path / "events.jsonl" if store_path.is_dir() else store_path
    if not events_path.exists():
        raise FileNotFoundError(f"no event log at {events_path}")
    store = EventStore(events_path)
    latest: dict[tuple[str, str], object] = {}
    for event in store.events:
        latest[(str(event.payload["question_id"]), str(event.payload["annotator_id"]))] = event
    splits = None
    if args.splits_file:
        raw = json.loads(Path(_data_path(args.splits_file)).read_text(encoding="utf-8"))
        splits = {name: frozenset(str(q) for q in qids) for name, qids in raw.items()}
        if "dev" in splits and "test" in splits:
            validate_splits(
                DatasetSplit("dev", splits["dev"]), DatasetSplit("test", splits["test"])
            )
    selected = []
    for key in sorted(latest):
        event = latest[key]
        if args.vetted_only and event.type != "vet":
            continue
        if args.split:
            if not splits or args.split not in splits:
                raise ValidationError("split-unknown", f"--split {args.split!r} needs --splits-file defining it")
            if key[0] not in splits[args.split]:
                continue
        selected.append(event.payload)
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for record in selected:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    summary = summarize_records(selected, splits=splits)
    resolved = _resolved_config(args)
    if args.summary:
        _write_json(args.summary, resolved, summary)
    print(
        f"export: {summary['n_examples']} examples, {summary['n_rewritten_questions']} rewritten questions, "
        f"mean answers/question {summary['mean_answers_per_question']:.2f}"
        + (f", splits {summary['splits']}" if "splits" in summary else "")
    )
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> Parser:
    parser = Parser(prog="vqaw", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prioritize", help="rank examples by likely ambiguity")
    p.add_argument("--questions", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--labels", help="disagreement reason-flag JSON")
    p.add_argument("--ambiguity-flag", default="ambiguous")
    p.add_argument("--embeddings", required=True, help="GloVe-format text file")
    p.add_argument("--dim", type=int)
    p.add_argument("--config", help="JSON file with penalty/k_max/restarts/seed/sort_policy")
    p.add_argument("--penalty", type=float, help="per-cluster penalty; default is scale-aware")
    p.add_argument("--k-max", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sort", choices=["score_balance", "balance_score"])
    p.add_argument("--jobs", type=int, default=1, help="per-example worker threads; output is order-identical")
    p.add_argument("--out", required=True, help="output queue JSONL")
    p.set_defaults(func=cmd_prioritize)

    p = sub.add_parser("agreement", help="pairwise inter-annotator agreement")
    p.add_argument("--annotations", required=True, help="workbench JSONL with >=2 annotators")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("eval-clusters", help="clustering methods vs gold groupings")
    p.add_argument("--gold", required=True, help="workbench JSONL with gold groupings")
    p.add_argument("--method", action="append", required=True, choices=METHOD_CHOICES)
    p.add_argument("--embeddings", help="needed by glove-initial")
    p.add_argument("--dim", type=int)
    p.add_argument("--representations", help="manifest for the representations method")
    p.add_argument("--seeds", type=int, default=1, help="average the random baseline over this many seeds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--penalty", type=float)
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--figures", help="directory for figure output")
    p.set_defaults(func=cmd_eval_clusters)

    p = sub.add_parser("metrics", help="BLEU / ROUGE-L / CIDEr over candidate/reference pairs")
    p.add_argument("--pairs", required=True, help='JSONL of {"candidate", "references"}')
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--smooth", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("stats", help="ontology, human-eval and why-question statistics")
    p.add_argument("--gold", help="workbench JSONL for category stats")
    p.add_argument("--human-eval", help='JSONL of {"item_id","condition","answer_type","acceptable"}')
    p.add_argument("--why", help='JSONL of {"ambiguous","dynamic","agentive"}')
    p.add_argument("--resamples", type=int, default=10000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--figures", help="directory for figure output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("decode", help="lexically constrained beam search")
    p.add_argument("--scorer", required=True, help="n-gram counts file")
    p.add_argument("--constraints", help='phrase sets: "a b,c; d" = {a b | c} AND {d}')
    p.add_argument("--text", help="source question; noun spans become one disjunctive set")
    p.add_argument("--pos-file", help="token<TAB>tag file containing --text")
    p.add_argument("--nouns", help="noun word list for the fallback tagger")
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--max-len", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("serve", help="run the annotation backend")
    p.add_argument("--questions", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--labels")
    p.add_argument("--ambiguity-flag", default="ambiguous")
    p.add_argument("--embeddings")
    p.add_argument("--dim", type=int)
    p.add_argument("--queue", help="precomputed queue JSONL (skips clustering)")
    p.add_argument("--config", help="JSON file with penalty/k_max/restarts/seed/sort_policy")
    p.add_argument("--penalty", type=float)
    p.add_argument("--k-max", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sort", choices=["score_balance", "balance_score"])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--store", required=True, help="directory for the event log")
    p.add_argument("--lease-ttl", type=float, default=1800.0)
    p.add_argument("--redundancy", type=int, default=1)
    p.add_argument("--admin-token", action="append")
    p.add_argument("--static", help="directory with the UI bundle")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--dry-run", action="store_true", help="print resolved config and exit")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="export the dataset from an event log")
    p.add_argument("--store", required=True, help="store directory or events.jsonl path")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="write the summary JSON here too")
    p.add_argument("--vetted-only", action="store_true")
    p.add_argument("--split", help="restrict to one split (needs --splits-file)")
    p.add_argument("--splits-file", help='JSON {"dev": [...], "test": [...]}')
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 64
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except (ValidationError, ReferentialIntegrityError) as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
