"""Quantitative evaluation harness: clustering baselines, text-similarity
metrics, and human-eval / ontology statistics."""

from .clustereval import (
    EvalItem,
    MethodRow,
    RepresentationTable,
    cluster_representations,
    eval_items_from_records,
    evaluate_clustering,
    load_representations,
    make_method,
    partition_random,
    partition_single_cluster,
    partition_singletons,
    save_representations,
)
from .stats import (
    CategoryStats,
    McNemarResult,
    PairedOutcomes,
    WhyCrosstab,
    bootstrap_ci,
    category_stats,
    mcnemar,
    mcnemar_counts,
    why_crosstab,
)
from .textmetrics import CiderResult, TextPRF, bleu, cider, rouge_l, tokenize

__all__ = [
    "EvalItem",
    "MethodRow",
    "RepresentationTable",
    "cluster_representations",
    "eval_items_from_records",
    "evaluate_clustering",
    "load_representations",
    "make_method",
    "partition_random",
    "partition_single_cluster",
    "partition_singletons",
    "save_representations",
    "CategoryStats",
    "McNemarResult",
    "PairedOutcomes",
    "WhyCrosstab",
    "bootstrap_ci",
    "category_stats",
    "mcnemar",
    "mcnemar_counts",
    "why_crosstab",
    "CiderResult",
    "TextPRF",
    "bleu",
    "cider",
    "rouge_l",
    "tokenize",
]
