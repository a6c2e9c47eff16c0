"""Model-as-annotator clustering harness.

Evaluates answer partitions against gold groupings with Hungarian-aligned
cluster F1, for the simple baselines (random / all-singletons / one-cluster),
the embedding-initialized clustering, and externally produced answer
representation vectors.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from ..agreement import PRF, cluster_f1
from ..clustering import PrioritizeConfig, default_penalty, kmeans, select_k
from ..corpus import ParseError, normalize_answer
from ..embeddings import EmbeddingTable, embed_answer

Partition = list[frozenset]


@dataclass(frozen=True)
class EvalItem:
    """One gold-annotated example: the gold partition of answer indices and
    the answer texts those indices refer to."""

    question_id: str
    gold: tuple[frozenset[int], ...]
    answer_texts: Mapping[int, str]

    @property
    def universe(self) -> tuple[int, ...]:
        out: set[int] = set()
        for g in self.gold:
            out |= g
        return tuple(sorted(out))


def eval_items_from_records(records: Sequence[Mapping]) -> list[EvalItem]:
    """Build eval items from workbench JSONL records; skips and records
    without groups are ignored (they carry no gold partition)."""
    items = []
    for rec in records:
        if not rec.get("ambiguous") or not rec.get("groups"):
            continue
        gold = []
        texts: dict[int, str] = {}
        for g in rec["groups"]:
            indices = list(g["answer_indices"])
            gold.append(frozenset(indices))
            answer_texts = g.get("answer_texts")
            for pos, idx in enumerate(indices):
                if answer_texts:
                    texts[idx] = answer_texts[pos]
        items.append(
            EvalItem(question_id=str(rec["question_id"]), gold=tuple(gold), answer_texts=texts)
        )
    return items


def partition_random(items: Sequence[Hashable], k: int, seed: int) -> Partition:
    """Assign each item independently and uniformly to one of k clusters;
    empty clusters are dropped."""
    if k < 1 or k > len(items):
        raise ValueError(f"k={k} out of range [1, {len(items)}]")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k, size=len(items))
    clusters: dict[int, set] = {}
    for item, lab in zip(items, labels):
        clusters.setdefault(int(lab), set()).add(item)
    return [frozenset(clusters[c]) for c in sorted(clusters)]


def partition_singletons(items: Sequence[Hashable]) -> Partition:
    """Perfect-precision baseline: every answer in its own cluster."""
    return [frozenset([item]) for item in items]


def partition_single_cluster(items: Sequence[Hashable]) -> Partition:
    """Perfect-recall baseline: all answers together."""
    if not items:
        raise ValueError("no items")
    return [frozenset(items)]


class RepresentationTable:
    """Per (question_id, answer_index) dense vectors produced externally."""

    def __init__(self, vectors: Mapping[tuple[str, int], np.ndarray], dim: int, source: str = ""):
        self.dim = int(dim)
        self.source = source
        self._vectors = {}
        for key, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise ValueError(f"vector for {key} has shape {arr.shape}, expected ({self.dim},)")
            self._vectors[(str(key[0]), int(key[1]))] = arr

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, key) -> bool:
        return (str(key[0]), int(key[1])) in self._vectors

    def __getitem__(self, key) -> np.ndarray:
        k = (str(key[0]), int(key[1]))
        if k not in self._vectors:
            raise LookupError(f"no representation for question_id={k[0]!r} answer_index={k[1]}")
        return self._vectors[k]


def load_representations(manifest_path) -> RepresentationTable:
    """Load a representation file via its manifest.

    Manifest: {"source", "dim", "count", "data", "format": "jsonl"|"npz"}.
    jsonl rows are {"question_id", "answer_index", "vector"}; npz keys are
    "<question_id>::<answer_index>".
    """
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    for field in ("dim", "count", "data", "format"):
        if field not in manifest:
            raise ParseError(manifest_path, None, f"manifest missing {field!r}")
    data_path = manifest_path.parent / manifest["data"]
    fmt = manifest["format"]
    vectors: dict[tuple[str, int], np.ndarray] = {}
    if fmt == "jsonl":
        with data_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                vectors[(str(row["question_id"]), int(row["answer_index"]))] = np.asarray(
                    row["vector"], dtype=np.float64
                )
    elif fmt == "npz":
        with np.load(data_path) as npz:
            for key in npz.files:
                qid, _, idx = key.rpartition("::")
                vectors[(qid, int(idx))] = npz[key]
    else:
        raise ParseError(manifest_path, None, f"unknown representation format {fmt!r}")
    if len(vectors) != manifest["count"]:
        raise ParseError(
            manifest_path, None, f"manifest count {manifest['count']} != {len(vectors)} vectors"
        )
    return RepresentationTable(vectors, dim=manifest["dim"], source=manifest.get("source", ""))


def save_representations(manifest_path, table_rows: Mapping[tuple[str, int], np.ndarray], dim: int, source: str = "") -> None:
    """Write the jsonl-format representation file plus its manifest."""
    manifest_path = Path(manifest_path)
    data_name = manifest_path.stem + ".data.jsonl"
    with (manifest_path.parent / data_name).open("w", encoding="utf-8") as fh:
        for (qid, idx), vec in sorted(table_rows.items()):
            fh.write(
                json.dumps(
                    {"question_id": qid, "answer_index": idx, "vector": [float(x) for x in vec]}
                )
            )
            fh.write("\n")
    manifest = {
        "schema_version": 1,
        "source": source,
        "dim": int(dim),
        "count": len(table_rows),
        "data": data_name,
        "format": "jsonl",
    }
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2), encoding="utf-8")


def cluster_representations(
    reps: RepresentationTable,
    question_id: str,
    items: Sequence[int],
    k: int,
    seed: int = 0,
    restarts: int = 8,
) -> Partition:
    """k-means over external answer representations, k taken from gold."""
    if k < 1 or k > len(items):
        raise ValueError(f"k={k} out of range [1, {len(items)}]")
    vectors = [reps[(question_id, idx)] for idx in items]
    result = kmeans(vectors, k, restarts=restarts, seed=seed)
    clusters: dict[int, set[int]] = {}
    for item, assignment in zip(items, result.assignments):
        clusters.setdefault(assignment, set()).add(item)
    return [frozenset(clusters[c]) for c in sorted(clusters)]


def _item_seed(seed: int, question_id: str) -> int:
    # stable across processes, unlike hash()
    return (seed * 2654435761 + zlib.crc32(question_id.encode("utf-8"))) % (2**32)


MethodFn = Callable[[EvalItem], Partition]


def make_method(
    name: str,
    seed: int = 0,
    table: EmbeddingTable | None = None,
    reps: RepresentationTable | None = None,
    config: PrioritizeConfig = PrioritizeConfig(),
) -> MethodFn:
    """Resolve a method name to a partition function over eval items.

    Names: random, perfect-precision, perfect-recall, glove-initial,
    representations.
    """
    if name == "random":

        def method(item: EvalItem) -> Partition:
            k = min(len(item.gold), len(item.universe))
            return partition_random(item.universe, k, _item_seed(seed, item.question_id))

    elif name == "perfect-precision":

        def method(item: EvalItem) -> Partition:
            return partition_singletons(item.universe)

    elif name == "perfect-recall":

        def method(item: EvalItem) -> Partition:
            return partition_single_cluster(item.universe)

    elif name == "glove-initial":
        if table is None:
            raise ValueError("glove-initial needs an embedding table")

        def method(item: EvalItem) -> Partition:
            universe = item.universe
            vectors = []
            for idx in universe:
                text = normalize_answer(item.answer_texts.get(idx, ""), strip_punct=True)
                if not text:
                    vectors.append(np.zeros(table.dim))
                else:
                    vectors.append(embed_answer(table, text).vector)
            penalty = config.penalty if config.penalty is not None else default_penalty(vectors)
            k_max = min(config.k_max, len(vectors))
            result = select_k(
                vectors, k_max=k_max, penalty=penalty, restarts=config.restarts, seed=config.seed
            )
            clusters: dict[int, set[int]] = {}
            for item_idx, assignment in zip(universe, result.assignments):
                clusters.setdefault(assignment, set()).add(item_idx)
            return [frozenset(clusters[c]) for c in sorted(clusters)]

    elif name == "representations":
        if reps is None:
            raise ValueError("representations method needs a representation table")

        def method(item: EvalItem) -> Partition:
            k = min(len(item.gold), len(item.universe))
            return cluster_representations(
                reps, item.question_id, item.universe, k, seed=_item_seed(seed, item.question_id)
            )

    else:
        raise ValueError(f"unknown method {name!r}")
    return method


@dataclass(frozen=True)
class MethodRow:
    method: str
    avg_p: float
    avg_r: float
    avg_f1: float
    n_examples: int
    n_skipped: int


def evaluate_clustering(
    methods: Mapping[str, MethodFn],
    items: Sequence[EvalItem],
    aggregate: str = "macro",
) -> list[MethodRow]:
    """Per-example cluster F1 against gold, arithmetic-averaged across
    examples; one row per method. Items without gold are skipped and
    counted."""
    rows = []
    for name, method in methods.items():
        scores: list[PRF] = []
        skipped = 0
        for item in items:
            if not item.gold:
                skipped += 1
                continue
            pred = method(item)
            scores.append(cluster_f1(pred, list(item.gold), aggregate=aggregate))
        if not scores:
            raise ValueError(f"method {name!r} evaluated on zero examples")
        rows.append(
            MethodRow(
                method=name,
                avg_p=float(np.mean([s.precision for s in scores])),
                avg_r=float(np.mean([s.recall for s in scores])),
                avg_f1=float(np.mean([s.f1 for s in scores])),
                n_examples=len(scores),
                n_skipped=skipped,
            )
        )
    return rows
