"""Statistics for the human evaluation and the ontology analysis:
McNemar's paired test, bootstrap confidence intervals, label frequency /
co-occurrence counts, and the why-question dynamicity/agency cross-tab.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import chi2

from ..corpus import AnswerGrouping, OntologyLabel

# below this discordant-pair total the exact binomial test is used
EXACT_THRESHOLD = 25


@dataclass(frozen=True)
class PairedOutcomes:
    """Per-item (condition_a, condition_b) boolean outcomes."""

    pairs: tuple[tuple[bool, bool], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[bool, bool]]) -> "PairedOutcomes":
        return cls(tuple((bool(a), bool(b)) for a, b in pairs))

    @classmethod
    def from_counts(cls, a_only: int, b_only: int, both: int = 0, neither: int = 0) -> "PairedOutcomes":
        pairs = (
            [(True, False)] * a_only
            + [(False, True)] * b_only
            + [(True, True)] * both
            + [(False, False)] * neither
        )
        return cls(tuple(pairs))

    @property
    def a_only(self) -> int:
        return sum(1 for a, b in self.pairs if a and not b)

    @property
    def b_only(self) -> int:
        return sum(1 for a, b in self.pairs if b and not a)

    @property
    def both(self) -> int:
        return sum(1 for a, b in self.pairs if a and b)

    @property
    def neither(self) -> int:
        return sum(1 for a, b in self.pairs if not a and not b)


@dataclass(frozen=True)
class McNemarResult:
    b: int  # a-only count
    c: int  # b-only count
    p_value: float
    method: str  # "exact" | "chi2" | "degenerate"
    statistic: float | None = None


def mcnemar(outcomes: PairedOutcomes) -> McNemarResult:
    return mcnemar_counts(outcomes.a_only, outcomes.b_only)


def mcnemar_counts(b: int, c: int) -> McNemarResult:
    """Exact binomial test when b + c < 25, chi-square with continuity
    correction otherwise. b = c = 0 degenerates to p = 1."""
    if b < 0 or c < 0:
        raise ValueError("counts must be nonnegative")
    n = b + c
    if n == 0:
        return McNemarResult(b=b, c=c, p_value=1.0, method="degenerate")
    if n < EXACT_THRESHOLD:
        m = min(b, c)
        tail = sum(math.comb(n, i) for i in range(m + 1)) / 2**n
        return McNemarResult(b=b, c=c, p_value=min(1.0, 2.0 * tail), method="exact")
    stat = (abs(b - c) - 1) ** 2 / n
    return McNemarResult(
        b=b, c=c, p_value=float(chi2.sf(stat, df=1)), method="chi2", statistic=float(stat)
    )


def bootstrap_ci(
    outcomes: Sequence[bool],
    resamples: int = 10000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of binary outcomes."""
    if len(outcomes) == 0:
        raise ValueError("outcomes must be non-empty")
    if not (0 < level < 1):
        raise ValueError("level must be in (0, 1)")
    arr = np.asarray(outcomes, dtype=np.float64)
    rng = np.random.default_rng(seed)
    n = len(arr)
    means = np.empty(resamples)
    chunk = max(1, min(resamples, 2_000_000 // max(1, n)))
    done = 0
    while done < resamples:
        m = min(chunk, resamples - done)
        idx = rng.integers(0, n, size=(m, n))
        means[done : done + m] = arr[idx].mean(axis=1)
        done += m
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


LabelPair = tuple[OntologyLabel, OntologyLabel]


@dataclass(frozen=True)
class CategoryStats:
    """Example-level ontology label counts.

    ``frequency`` counts examples whose label set (union over groups)
    contains each label; ``cooccurrence`` counts examples containing both
    labels of an unordered pair (keys sorted by label name).
    """

    frequency: Mapping[OntologyLabel, int]
    cooccurrence: Mapping[LabelPair, int]

    def cooccurrence_report(self, min_count: int = 2) -> dict[LabelPair, int]:
        """Pairs seen fewer than ``min_count`` times are excluded (the
        published co-occurrence chart drops counts <= 1)."""
        return {pair: n for pair, n in self.cooccurrence.items() if n >= min_count}

    def top_labels(self, n: int = 3) -> list[OntologyLabel]:
        ranked = sorted(self.frequency.items(), key=lambda kv: (-kv[1], kv[0].value))
        return [label for label, _ in ranked[:n]]


def category_stats(groupings: Sequence[AnswerGrouping]) -> CategoryStats:
    frequency: Counter = Counter()
    cooccurrence: Counter = Counter()
    for grouping in groupings:
        labels: set[OntologyLabel] = set()
        for g in grouping.groups:
            labels |= g.labels
        for lab in labels:
            frequency[lab] += 1
        for a, b in combinations(sorted(labels, key=lambda l: l.value), 2):
            cooccurrence[(a, b)] += 1
    return CategoryStats(frequency=dict(frequency), cooccurrence=dict(cooccurrence))


@dataclass(frozen=True)
class WhyCrosstab:
    """2x2x2 counts keyed (dynamic, agentive, ambiguous)."""

    counts: Mapping[tuple[bool, bool, bool], int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def cell(self, dynamic: bool, agentive: bool, ambiguous: bool) -> int:
        return self.counts.get((dynamic, agentive, ambiguous), 0)


def why_crosstab(records: Iterable[Mapping]) -> WhyCrosstab:
    """Cross-tabulate why-question records by predicate dynamicity,
    subject agency and ambiguity verdict."""
    counts: Counter = Counter()
    for rec in records:
        key = (bool(rec["dynamic"]), bool(rec["agentive"]), bool(rec["ambiguous"]))
        counts[key] += 1
    full = {
        (d, a, m): counts.get((d, a, m), 0)
        for d in (False, True)
        for a in (False, True)
        for m in (False, True)
    }
    return WhyCrosstab(counts=full)
