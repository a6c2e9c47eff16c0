"""Inter-annotator agreement: binary ambiguity agreement and cluster F1
after maximum-overlap bipartite alignment."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Collection, Hashable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class Matching:
    """A one-to-one row/column matching; rectangular inputs produce
    min(#rows, #cols) pairs."""

    pairs: tuple[tuple[int, int], ...]
    total_overlap: float


@dataclass(frozen=True)
class PRF:
    """Precision/recall/F1 as percentages in [0, 100]."""

    precision: float
    recall: float
    f1: float


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _solve_max(weights: list[list[int]]) -> list[tuple[int, int]]:
    """Maximum-weight assignment via the potentials form of Kuhn-Munkres.

    Exact for Python integer weights of any magnitude (which is why this is
    not scipy: the canonical cluster-F1 tie-break below needs arbitrarily
    large banded integer weights). Rectangular input is padded square with
    zero-weight dummies on the deficient side; dummy pairs are dropped, so
    exactly min(#rows, #cols) pairs come back.
    """
    n_rows, n_cols = len(weights), len(weights[0])
    n = max(n_rows, n_cols)
    # minimization on negated weights, 1-indexed
    a = [[0] * (n + 1)]
    for i in range(n):
        row = [0] * (n + 1)
        if i < n_rows:
            for j in range(n_cols):
                row[j + 1] = -weights[i][j]
        a.append(row)
    inf = math.inf
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)  # p[j] = row matched to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0, delta, j1 = p[j0], inf, 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = a[i0][j] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    pairs = []
    for j in range(1, n + 1):
        i = p[j]
        if 1 <= i <= n_rows and j <= n_cols:
            pairs.append((i - 1, j - 1))
    return sorted(pairs)


def _validate_matrix(weight_matrix) -> list[list[int]]:
    rows = [list(r) for r in weight_matrix]
    if len(rows) == 0 or len(rows[0]) == 0:
        raise ValueError("weight matrix must be non-empty")
    width = len(rows[0])
    out = []
    for r in rows:
        if len(r) != width:
            raise ValueError("ragged weight matrix")
        converted = []
        for x in r:
            if x < 0:
                raise ValueError("weights must be nonnegative")
            as_int = int(x)
            if as_int != x:
                raise ValueError("weights must be integers")
            converted.append(as_int)
        out.append(converted)
    return out


def hungarian_max(weight_matrix: Sequence[Sequence[int]]) -> Matching:
    """Maximum-weight assignment over a nonnegative integer weight matrix.

    Rectangular matrices are fine; dummy pairings are never reported.
    """
    w = _validate_matrix(weight_matrix)
    pairs = _solve_max(w)
    total = sum(w[i][j] for i, j in pairs)
    return Matching(pairs=tuple(pairs), total_overlap=total)


def _check_partition(clusters: Sequence[Collection[Hashable]], side: str) -> list[frozenset]:
    if not clusters:
        raise ValueError(f"{side} partition is empty")
    out = []
    seen: set = set()
    for c in clusters:
        fs = frozenset(c)
        if not fs:
            raise ValueError(f"{side} partition contains an empty cluster")
        if seen & fs:
            raise ValueError(f"{side} clusters overlap on {sorted(seen & fs)[:5]}")
        seen |= fs
        out.append(fs)
    return out


def cluster_f1(
    pred: Sequence[Collection[Hashable]],
    gold: Sequence[Collection[Hashable]],
    aggregate: str = "macro",
) -> PRF:
    """F1 between two answer partitions after Hungarian alignment of their
    overlap matrix.

    P/R/F1 are computed per aligned pair and macro-averaged over aligned
    pairs only; clusters left unmatched on the larger side are ignored,
    which is what makes all-singletons score P = 100 and the single-cluster
    partition score R = 100. Among equally overlap-maximal matchings the
    alignment canonically prefers higher summed pair F1, then precision,
    then recall (computed in exact integer arithmetic), so the result is a
    pure function of the two partitions: invariant to cluster order and to
    item renaming. ``aggregate="micro"`` pools overlap counts across
    aligned pairs instead (sensitivity analysis only).
    """
    pred_sets = _check_partition(pred, "pred")
    gold_sets = _check_partition(gold, "gold")
    overlap = [[len(p & g) for g in gold_sets] for p in pred_sets]
    n_pairs = min(len(pred_sets), len(gold_sets))

    # banded integer weights: overlap first, then f1 = 2o/(|p|+|g|),
    # then p = o/|p|, then r = o/|g|, each scaled to integers
    f1_scale = math.lcm(*(len(p) + len(g) for p in pred_sets for g in gold_sets))
    p_scale = math.lcm(*(len(p) for p in pred_sets))
    r_scale = math.lcm(*(len(g) for g in gold_sets))
    max_o = max(max(row) for row in overlap)
    c1 = n_pairs * max_o * r_scale + 1
    c2 = c1 * (n_pairs * max_o * p_scale + 1)
    c3 = c2 * (n_pairs * 2 * max_o * f1_scale + 1)
    weights = []
    for i, pset in enumerate(pred_sets):
        row = []
        for j, gset in enumerate(gold_sets):
            o = overlap[i][j]
            s = len(pset) + len(gset)
            row.append(
                o * c3
                + (2 * o * (f1_scale // s)) * c2
                + (o * (p_scale // len(pset))) * c1
                + o * (r_scale // len(gset))
            )
        weights.append(row)
    pairs = _solve_max(weights)

    if aggregate == "macro":
        psum = rsum = fsum = Fraction(0)
        for i, j in pairs:
            p = Fraction(overlap[i][j], len(pred_sets[i]))
            r = Fraction(overlap[i][j], len(gold_sets[j]))
            psum += p
            rsum += r
            fsum += Fraction(0) if p + r == 0 else 2 * p * r / (p + r)
        n = len(pairs)
        return PRF(
            float(100 * psum / n), float(100 * rsum / n), float(100 * fsum / n)
        )
    if aggregate == "micro":
        inter = sum(overlap[i][j] for i, j in pairs)
        pred_total = sum(len(pred_sets[i]) for i, _ in pairs)
        gold_total = sum(len(gold_sets[j]) for _, j in pairs)
        p = 100.0 * inter / pred_total
        r = 100.0 * inter / gold_total
        return PRF(p, r, _f1(p, r))
    raise ValueError(f"unknown aggregate {aggregate!r}")


def ambiguity_agreement(a: Mapping[Hashable, bool], b: Mapping[Hashable, bool]) -> float:
    """Percentage of shared examples both annotators marked ambiguous."""
    shared = set(a) & set(b)
    if not shared:
        raise ValueError("annotators share no examples")
    both = sum(1 for qid in shared if a[qid] and b[qid])
    return 100.0 * both / len(shared)


def observed_agreement(a: Mapping[Hashable, bool], b: Mapping[Hashable, bool]) -> float:
    """Variant counting both-ambiguous and both-unambiguous verdicts."""
    shared = set(a) & set(b)
    if not shared:
        raise ValueError("annotators share no examples")
    same = sum(1 for qid in shared if a[qid] == b[qid])
    return 100.0 * same / len(shared)


@dataclass(frozen=True)
class PairSummary:
    mean: float
    std: float  # population std over pairs
    min: float
    max: float
    n_pairs: int
    values: tuple[float, ...] = ()


def pairwise_summary(annotators: Sequence, metric: Callable) -> PairSummary:
    """Apply ``metric`` to every unordered annotator pair and summarize.

    ``metric(a, b)`` may return None to exclude a pair (e.g. no overlap
    for that metric); at least one pair value must remain.
    """
    if len(annotators) < 2:
        raise ValueError("pairwise summary needs at least 2 annotators")
    values = []
    for a, b in combinations(annotators, 2):
        v = metric(a, b)
        if v is not None:
            values.append(float(v))
    if not values:
        raise ValueError("no annotator pair produced a value")
    arr = np.asarray(values)
    return PairSummary(
        mean=float(arr.mean()),
        std=float(arr.std()),
        min=float(arr.min()),
        max=float(arr.max()),
        n_pairs=len(values),
        values=tuple(values),
    )
