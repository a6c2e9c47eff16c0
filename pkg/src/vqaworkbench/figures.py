"""Matplotlib renderers for the report path.

Every CLI table has a figure twin: label frequency and co-occurrence
charts, acceptability bars with bootstrap CIs, the why-question cross-tab,
and the clustering-method comparison. Files are written deterministically
(no timestamps or software metadata) so repeated runs are byte-identical.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evalharness.stats import CategoryStats, WhyCrosstab

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def category_frequency_figure(stats: CategoryStats, path) -> Path:
    labels = [lab for lab, _ in sorted(stats.frequency.items(), key=lambda kv: (-kv[1], kv[0].value))]
    counts = [stats.frequency[lab] for lab in labels]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(range(len(labels)), counts, color="#4878d0")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels([lab.value for lab in labels], rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("examples")
    ax.set_title("Ambiguity category frequency")
    fig.tight_layout()
    return _save(fig, path)


def cooccurrence_figure(stats: CategoryStats, path, min_count: int = 2) -> Path:
    report = stats.cooccurrence_report(min_count=min_count)
    labels = sorted({lab for pair in report for lab in pair}, key=lambda l: l.value)
    index = {lab: i for i, lab in enumerate(labels)}
    grid = np.zeros((len(labels), len(labels)))
    for (a, b), n in report.items():
        grid[index[a], index[b]] = n
        grid[index[b], index[a]] = n
    fig, ax = plt.subplots(figsize=(6, 5))
    if labels:
        im = ax.imshow(grid, cmap="Blues")
        fig.colorbar(im, ax=ax, label="co-occurring examples")
        ax.set_xticks(range(len(labels)))
        ax.set_yticks(range(len(labels)))
        ax.set_xticklabels([lab.value for lab in labels], rotation=45, ha="right", fontsize=8)
        ax.set_yticklabels([lab.value for lab in labels], fontsize=8)
    else:
        ax.text(0.5, 0.5, f"no pairs with count >= {min_count}", ha="center", va="center")
        ax.set_axis_off()
    ax.set_title(f"Category co-occurrence (count >= {min_count})")
    fig.tight_layout()
    return _save(fig, path)


def acceptability_figure(rows: Sequence[Mapping], path) -> Path:
    """Grouped bars of percent-acceptable with CI whiskers.

    Rows: {"condition", "answer_type", "pct", "lo", "hi"}; bars are grouped
    by condition with actual/distractor side by side.
    """
    conditions = sorted({r["condition"] for r in rows})
    answer_types = sorted({r["answer_type"] for r in rows})
    by_key = {(r["condition"], r["answer_type"]): r for r in rows}
    width = 0.8 / max(1, len(answer_types))
    fig, ax = plt.subplots(figsize=(7, 4))
    for j, at in enumerate(answer_types):
        xs, ys, errs = [], [], []
        for i, cond in enumerate(conditions):
            row = by_key.get((cond, at))
            if row is None:
                continue
            xs.append(i + j * width)
            ys.append(row["pct"])
            errs.append([row["pct"] - row["lo"], row["hi"] - row["pct"]])
        ax.bar(xs, ys, width=width, label=at)
        if errs:
            ax.errorbar(
                xs, ys, yerr=np.array(errs).T, fmt="none", ecolor="black", capsize=3, lw=1
            )
    ax.set_xticks([i + width * (len(answer_types) - 1) / 2 for i in range(len(conditions))])
    ax.set_xticklabels(conditions)
    ax.set_ylabel("% rated acceptable")
    ax.set_ylim(0, 105)
    ax.legend()
    ax.set_title("Acceptability with bootstrap 95% CIs")
    fig.tight_layout()
    return _save(fig, path)


def why_counts_figure(crosstab: WhyCrosstab, path) -> Path:
    combos = [(d, a) for d in (True, False) for a in (True, False)]
    names = ["+d +a", "+d -a", "-d +a", "-d -a"]
    ambiguous = [crosstab.cell(d, a, True) for d, a in combos]
    unambiguous = [crosstab.cell(d, a, False) for d, a in combos]
    x = np.arange(len(combos))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(x - 0.2, ambiguous, width=0.4, label="ambiguous")
    ax.bar(x + 0.2, unambiguous, width=0.4, label="not ambiguous")
    ax.set_xticks(x)
    ax.set_xticklabels(names)
    ax.set_ylabel("questions")
    ax.set_title("Why-questions by dynamicity (+d) and agency (+a)")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def clustering_table_figure(rows: Sequence[Mapping], path) -> Path:
    """Bar chart of Avg P/R/F1 per clustering method."""
    methods = [r["method"] for r in rows]
    x = np.arange(len(methods))
    fig, ax = plt.subplots(figsize=(7, 4))
    for offset, key, label in ((-0.25, "avg_p", "Avg P"), (0.0, "avg_r", "Avg R"), (0.25, "avg_f1", "Avg F1")):
        ax.bar(x + offset, [r[key] for r in rows], width=0.25, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(methods, rotation=20, ha="right")
    ax.set_ylim(0, 105)
    ax.set_ylabel("%")
    ax.set_title("Clustering vs gold groupings")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
