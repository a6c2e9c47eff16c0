"""Seeded k-means, penalized model selection over k, and the ambiguity
prioritization queue.

Examples are scored by k-means inertia plus a per-cluster penalty and then
ordered so that low-score, well-balanced examples (the ones most likely to
be genuinely ambiguous) come first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .corpus import VqaExample, normalize_answer
from .embeddings import EmbeddingTable, embed_answer

MAX_LLOYD_ITERATIONS = 300


@dataclass(frozen=True)
class ClusterResult:
    k: int
    assignments: tuple[int, ...]
    # None when rehydrated from a queue file; kmeans always fills it
    centroids: np.ndarray | None = field(compare=False)
    inertia: float
    score: float
    balance: float
    # inertia after each Lloyd iteration of the winning restart; the
    # sequence is non-increasing
    inertia_trace: tuple[float, ...] = field(default=(), compare=False)

    def sizes(self) -> list[int]:
        counts = [0] * self.k
        for a in self.assignments:
            counts[a] += 1
        return counts

    def partition(self) -> list[frozenset[int]]:
        """Point indices grouped by cluster, empty clusters dropped."""
        groups: dict[int, set[int]] = {}
        for i, a in enumerate(self.assignments):
            groups.setdefault(a, set()).add(i)
        return [frozenset(groups[c]) for c in sorted(groups)]


@dataclass(frozen=True)
class PriorityItem:
    question_id: str
    cluster_result: ClusterResult
    rank_key: tuple


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _repair_empty(assign: np.ndarray, d2_to_own: np.ndarray, k: int) -> np.ndarray:
    """Move the farthest-from-centroid point into each empty cluster,
    never emptying a donor."""
    sizes = np.bincount(assign, minlength=k)
    for cid in range(k):
        if sizes[cid] > 0:
            continue
        eligible = sizes[assign] >= 2
        if not eligible.any():
            continue
        dist = np.where(eligible, d2_to_own, -np.inf)
        donor = int(np.argmax(dist))
        sizes[assign[donor]] -= 1
        assign[donor] = cid
        sizes[cid] += 1
    return assign


def _lloyd(points: np.ndarray, init_idx: Sequence[int], k: int):
    centroids = points[list(init_idx)].astype(np.float64).copy()
    assign = None
    trace: list[float] = []
    for _ in range(MAX_LLOYD_ITERATIONS):
        d2 = _squared_distances(points, centroids)
        new_assign = d2.argmin(axis=1)
        d2_own = d2[np.arange(len(points)), new_assign]
        new_assign = _repair_empty(new_assign, d2_own, k)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = points[assign == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
        inertia = float(((points - centroids[assign]) ** 2).sum())
        trace.append(inertia)
    return assign, centroids, trace[-1], trace


def _initializations(points: np.ndarray, k: int, restarts: int, seed: int, plus_plus: bool):
    """Yield `restarts` index tuples. When all k-subsets of the distinct
    points fit within the restart budget they are enumerated exhaustively,
    which makes small instances match the brute-force partition optimum."""
    n = len(points)
    _, unique_idx = np.unique(points, axis=0, return_index=True)
    unique_idx = sorted(int(i) for i in unique_idx)
    if k <= len(unique_idx) and math.comb(len(unique_idx), k) <= restarts:
        yield from combinations(unique_idx, k)
        return
    rng = np.random.default_rng(seed)
    if plus_plus:
        for _ in range(restarts):
            chosen = [int(rng.integers(n))]
            while len(chosen) < k:
                d2 = _squared_distances(points, points[chosen]).min(axis=1)
                total = d2.sum()
                if total <= 0:
                    remaining = [i for i in range(n) if i not in chosen]
                    chosen.append(int(rng.choice(remaining)))
                    continue
                chosen.append(int(rng.choice(n, p=d2 / total)))
            yield tuple(chosen)
    else:
        for _ in range(restarts):
            yield tuple(int(i) for i in rng.choice(n, size=k, replace=False))


def kmeans(
    points: Sequence[Sequence[float]],
    k: int,
    restarts: int = 10,
    seed: int = 0,
    plus_plus: bool = False,
) -> ClusterResult:
    """Lloyd's algorithm, best of `restarts` seeded initializations by
    inertia. Deterministic for fixed (points, k, restarts, seed)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError("points must share one dimensionality")
    n = len(pts)
    if n == 0:
        raise ValueError("kmeans needs at least one point")
    if k < 1 or k > n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    if restarts < 1:
        raise ValueError("restarts must be positive")

    best = None
    for init in _initializations(pts, k, restarts, seed, plus_plus):
        assign, centroids, inertia, trace = _lloyd(pts, init, k)
        if best is None or inertia < best[2]:
            best = (assign, centroids, inertia, trace)
    assign, centroids, inertia, trace = best
    assignments = tuple(int(a) for a in assign)
    return ClusterResult(
        k=k,
        assignments=assignments,
        centroids=centroids,
        inertia=inertia,
        score=inertia,
        balance=_normalized_entropy(np.bincount(assign, minlength=k), k),
        inertia_trace=tuple(trace),
    )


def _normalized_entropy(sizes: np.ndarray, k: int) -> float:
    if k <= 1:
        return 1.0
    total = sizes.sum()
    probs = sizes[sizes > 0] / total
    entropy = float(-(probs * np.log(probs)).sum())
    return entropy / math.log(k)


def balance_score(result: ClusterResult) -> float:
    """Normalized entropy of cluster sizes in [0, 1]; 1.0 when k = 1."""
    return _normalized_entropy(np.asarray(result.sizes()), result.k)


def default_penalty(points: Sequence[Sequence[float]]) -> float:
    """Scale-aware per-cluster penalty: mean squared distance to the
    global centroid, divided by 4."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    center = pts.mean(axis=0)
    return float(((pts - center) ** 2).sum(axis=1).mean()) / 4.0


def select_k(
    points: Sequence[Sequence[float]],
    k_max: int,
    penalty: float,
    restarts: int = 10,
    seed: int = 0,
) -> ClusterResult:
    """Sweep k = 1..k_max and keep the k minimizing inertia + penalty*k.

    Ties break toward smaller k.
    """
    n = len(points)
    if k_max < 1 or k_max > n:
        raise ValueError(f"k_max={k_max} out of range [1, {n}]")
    if penalty < 0:
        raise ValueError("penalty must be nonnegative")
    best: ClusterResult | None = None
    for k in range(1, k_max + 1):
        result = kmeans(points, k, restarts=restarts, seed=seed)
        score = result.inertia + penalty * k
        if best is None or score < best.score:
            best = ClusterResult(
                k=result.k,
                assignments=result.assignments,
                centroids=result.centroids,
                inertia=result.inertia,
                score=score,
                balance=result.balance,
                inertia_trace=result.inertia_trace,
            )
    return best


def is_yes_no_only(example: VqaExample) -> bool:
    """True iff every answer normalizes (with punctuation stripped) to
    exactly "yes" or "no"."""
    return all(
        normalize_answer(a.text, strip_punct=True) in ("yes", "no") for a in example.answers
    )


@dataclass(frozen=True)
class PrioritizeConfig:
    penalty: float | None = None  # None -> per-example default_penalty
    k_max: int = 5
    restarts: int = 8
    seed: int = 0
    sort_policy: str = "score_balance"  # or "balance_score"


@dataclass(frozen=True)
class PrioritizeResult:
    items: tuple[PriorityItem, ...]
    quarantined_ids: tuple[str, ...]  # every answer empty or fully OOV
    dropped_yes_no_ids: tuple[str, ...]
    normalized_before_filter: bool = True


def _rank_key(policy: str, score: float, balance: float, question_id: str) -> tuple:
    if policy == "score_balance":
        return (score, -balance, question_id)
    if policy == "balance_score":
        return (-balance, score, question_id)
    raise ValueError(f"unknown sort policy {policy!r}")


def _prioritize_one(example: VqaExample, table: EmbeddingTable, config: PrioritizeConfig):
    """Classify one example: ("item", PriorityItem) | ("yes_no", qid) |
    ("quarantined", qid)."""
    if is_yes_no_only(example):
        return ("yes_no", example.question_id)
    vectors = []
    any_in_vocab = False
    for answer in example.answers:
        text = normalize_answer(answer.text, strip_punct=True)
        if not text:
            vectors.append(np.zeros(table.dim))
            continue
        av = embed_answer(table, text)
        vectors.append(av.vector)
        if av.oov_fraction < 1.0:
            any_in_vocab = True
    if not any_in_vocab:
        return ("quarantined", example.question_id)
    penalty = config.penalty if config.penalty is not None else default_penalty(vectors)
    k_max = min(config.k_max, len(vectors))
    result = select_k(
        vectors, k_max=k_max, penalty=penalty, restarts=config.restarts, seed=config.seed
    )
    item = PriorityItem(
        question_id=example.question_id,
        cluster_result=result,
        rank_key=_rank_key(config.sort_policy, result.score, result.balance, example.question_id),
    )
    return ("item", item)


def prioritize(
    examples: Sequence[VqaExample],
    table: EmbeddingTable,
    config: PrioritizeConfig = PrioritizeConfig(),
    jobs: int = 1,
) -> PrioritizeResult:
    """Build the annotation priority queue.

    Yes/no-only examples are dropped; surviving answers are normalized,
    embedded and clustered with select_k; items are ordered by the
    configured rank key (ascending score, then descending balance, then
    question id under the default policy). Examples whose answers are all
    empty or out-of-vocabulary are quarantined rather than ranked.

    ``jobs`` fans per-example work across threads; the reduce is ordered,
    so the result is identical to sequential execution.
    """
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda ex: _prioritize_one(ex, table, config), examples))
    else:
        outcomes = [_prioritize_one(ex, table, config) for ex in examples]
    items: list[PriorityItem] = []
    quarantined: list[str] = []
    dropped: list[str] = []
    for kind, value in outcomes:
        if kind == "item":
            items.append(value)
        elif kind == "quarantined":
            quarantined.append(value)
        else:
            dropped.append(value)
    items.sort(key=lambda it: it.rank_key)
    return PrioritizeResult(
        items=tuple(items),
        quarantined_ids=tuple(quarantined),
        dropped_yes_no_ids=tuple(dropped),
    )
