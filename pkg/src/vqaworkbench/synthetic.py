"""Seeded synthetic datasets for benchmarks, demos and acceptance checks.

Two generators: a planted-groups corpus whose answers cluster cleanly in a
matching synthetic embedding table, and a "released-like" annotated
dataset engineered to the published dataset's headline statistics
(241 examples, 629 rewritten questions, ~2.9 unique answers per rewritten
question, 30/211 dev/test split, Location/Kind/MultipleOptions as the
most frequent ambiguity labels).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import (
    AnswerGroup,
    AnswerGrouping,
    AnswerRecord,
    Confidence,
    OntologyLabel,
    VqaExample,
    grouping_to_record,
)
from .embeddings import EmbeddingTable


@dataclass(frozen=True)
class SyntheticDataset:
    examples: list[VqaExample]
    groupings: list[AnswerGrouping]
    records: list[dict]
    table: EmbeddingTable
    splits: dict[str, frozenset[str]] | None = None


def make_embedding_table(
    n_topics: int = 16,
    words_per_topic: int = 12,
    seed: int = 0,
    scale: float = 10.0,
    noise: float = 0.3,
) -> EmbeddingTable:
    """Topic-structured vocabulary: word "t<i>w<j>" sits near topic i's
    center, far from every other topic's words."""
    rng = np.random.default_rng(seed)
    dim = n_topics
    vectors = {}
    for t in range(n_topics):
        center = np.zeros(dim)
        center[t] = scale
        for j in range(words_per_topic):
            vectors[f"t{t}w{j}"] = center + rng.normal(0.0, noise, size=dim)
    return EmbeddingTable(vectors, dim=dim)


def _example(qid: str, question: str, group_words: list[list[str]]) -> tuple[VqaExample, list[frozenset[int]]]:
    answers = []
    gold: list[frozenset[int]] = []
    idx = 0
    for words in group_words:
        members = set()
        for w in words:
            answers.append(AnswerRecord(text=w, confidence=Confidence.YES, source_id=str(idx)))
            members.add(idx)
            idx += 1
        gold.append(frozenset(members))
    image_id = f"img_{qid}"
    example = VqaExample(
        question_id=qid,
        image_id=image_id,
        image_uri=f"images/{image_id}.jpg",
        question=question,
        answers=tuple(answers),
    )
    return example, gold


def make_planted_dataset(
    n_examples: int = 50,
    seed: int = 0,
    n_topics: int = 16,
    words_per_topic: int = 12,
) -> SyntheticDataset:
    """Examples whose answers come from well-separated topic pools, with
    the gold grouping equal to the topic split."""
    rng = np.random.default_rng(seed)
    table = make_embedding_table(n_topics, words_per_topic, seed=seed)
    examples, groupings, records = [], [], []
    for i in range(n_examples):
        qid = f"p{i:04d}"
        n_groups = int(rng.integers(2, 5))
        topics = rng.choice(n_topics, size=n_groups, replace=False)
        group_words = []
        for t in topics:
            size = int(rng.integers(1, 4))
            start = int(rng.integers(0, words_per_topic - size))
            group_words.append([f"t{t}w{start + j}" for j in range(size)])
        example, gold = _example(qid, f"What is shown in picture {i}?", group_words)
        groups = tuple(
            AnswerGroup(
                rewritten_question=f"Planted question {i}.{gi}?",
                member_indices=members,
            )
            for gi, members in enumerate(gold)
        )
        grouping = AnswerGrouping(
            question_id=qid, annotator_id="gold", ambiguous=True, groups=groups
        )
        examples.append(example)
        groupings.append(grouping)
        records.append(grouping_to_record(grouping, example))
    return SyntheticDataset(examples=examples, groupings=groupings, records=records, table=table)


# label -> half-open example-index range; overlaps create co-occurrences and
# the range lengths pin the frequency ordering
_RELEASED_LABEL_RANGES: list[tuple[OntologyLabel, int, int]] = [
    (OntologyLabel.LOCATION, 0, 150),
    (OntologyLabel.KIND, 40, 160),
    (OntologyLabel.MULTIPLE_OPTIONS, 90, 180),
    (OntologyLabel.TIME, 150, 205),
    (OntologyLabel.CAUSE, 170, 215),
    (OntologyLabel.PURPOSE, 180, 220),
    (OntologyLabel.GROUPING, 200, 232),
    (OntologyLabel.UNCERTAINTY, 205, 235),
    (OntologyLabel.MANNER, 215, 237),
    (OntologyLabel.GOAL, 222, 239),
    (OntologyLabel.DIRECTION, 228, 240),
    (OntologyLabel.ANNOTATOR_MISTAKE, 233, 241),
    (OntologyLabel.BAD_QUESTION_OR_IMAGE, 237, 241),
]

RELEASED_N_EXAMPLES = 241
RELEASED_N_QUESTIONS = 629
RELEASED_N_ANSWERS = 1820
RELEASED_N_DEV = 30


def make_released_like_dataset(seed: int = 0, n_topics: int = 16, words_per_topic: int = 12) -> SyntheticDataset:
    """A 241-example dataset matching the released dataset's summary
    statistics, for exercising the export/summary/stats pipeline when the
    real files are not on disk."""
    rng = np.random.default_rng(seed)
    table = make_embedding_table(n_topics, words_per_topic, seed=seed)

    # 147 three-group + 94 two-group examples = 629 groups
    groups_per_example = [3] * 147 + [2] * 94
    assert sum(groups_per_example) == RELEASED_N_QUESTIONS

    # start every group at one answer, then hand out the remaining answers
    # round-robin in a seeded order, respecting <=10 answers per example
    # and <=9 per group
    sizes = [[1] * g for g in groups_per_example]
    remaining = RELEASED_N_ANSWERS - RELEASED_N_QUESTIONS
    slots = [(e, g) for e, n in enumerate(groups_per_example) for g in range(n)]
    order = rng.permutation(len(slots))
    while remaining > 0:
        placed = False
        for pos in order:
            e, g = slots[pos]
            if sizes[e][g] >= 9 or sum(sizes[e]) >= 10:
                continue
            sizes[e][g] += 1
            remaining -= 1
            placed = True
            if remaining == 0:
                break
        if not placed:
            raise RuntimeError("could not place all answers within size caps")

    labels_per_example: list[set[OntologyLabel]] = [set() for _ in range(RELEASED_N_EXAMPLES)]
    for label, lo, hi in _RELEASED_LABEL_RANGES:
        for e in range(lo, hi):
            labels_per_example[e].add(label)

    examples, groupings, records = [], [], []
    word_cursor = 0
    for e in range(RELEASED_N_EXAMPLES):
        qid = f"r{e:04d}"
        group_words = []
        for g, size in enumerate(sizes[e]):
            topic = (e * 3 + g) % n_topics
            start = word_cursor % (words_per_topic - size + 1) if size < words_per_topic else 0
            group_words.append([f"t{topic}w{(start + j) % words_per_topic}" for j in range(size)])
            word_cursor += 1
        example, gold = _example(qid, f"What kind of scene is image {e}?", group_words)
        example_labels = sorted(labels_per_example[e], key=lambda l: l.value)
        groups = []
        for gi, members in enumerate(gold):
            group_labels = frozenset(example_labels) if gi == 0 else frozenset()
            groups.append(
                AnswerGroup(
                    rewritten_question=f"Rewritten question {e}.{gi}?",
                    member_indices=members,
                    labels=group_labels,
                )
            )
        grouping = AnswerGrouping(
            question_id=qid, annotator_id="gold", ambiguous=True, groups=tuple(groups)
        )
        examples.append(example)
        groupings.append(grouping)
        records.append(grouping_to_record(grouping, example))

    qids = [ex.question_id for ex in examples]
    shuffled = list(rng.permutation(qids))
    splits = {
        "dev": frozenset(shuffled[:RELEASED_N_DEV]),
        "test": frozenset(shuffled[RELEASED_N_DEV:]),
    }
    return SyntheticDataset(
        examples=examples, groupings=groupings, records=records, table=table, splits=splits
    )


# --- file writers for CLI fixtures and demos ---------------------------------


def write_vqa_files(examples, questions_path, annotations_path) -> None:
    """Emit VQAv2-layout question/annotation JSON for a list of examples."""
    questions = {
        "questions": [
            {"question_id": ex.question_id, "image_id": ex.image_id, "question": ex.question}
            for ex in examples
        ]
    }
    annotations = {
        "annotations": [
            {
                "question_id": ex.question_id,
                "image_id": ex.image_id,
                "answers": [
                    {
                        "answer": a.text,
                        "answer_confidence": a.confidence.value,
                        "answer_id": a.source_id,
                    }
                    for a in ex.answers
                ],
            }
            for ex in examples
        ]
    }
    Path(questions_path).write_text(json.dumps(questions, sort_keys=True), encoding="utf-8")
    Path(annotations_path).write_text(json.dumps(annotations, sort_keys=True), encoding="utf-8")


def write_glove(table: EmbeddingTable, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for word in sorted(table.words()):
            vec = " ".join(f"{x:.6f}" for x in table[word])
            fh.write(f"{word} {vec}\n")


def write_records_jsonl(records, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True))
            fh.write("\n")


def write_splits(splits, path) -> None:
    payload = {name: sorted(ids) for name, ids in splits.items()}
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2), encoding="utf-8")
