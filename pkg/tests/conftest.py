import json

import numpy as np
import pytest

from vqaworkbench.corpus import AnswerGroup, AnswerGrouping, AnswerRecord, Confidence, VqaExample
from vqaworkbench.embeddings import EmbeddingTable


def make_example(qid="q1", answers=("daisy", "rose", "purple"), question="What kind of flowers are these?"):
    return VqaExample(
        question_id=qid,
        image_id=f"img_{qid}",
        image_uri=f"images/img_{qid}.jpg",
        question=question,
        answers=tuple(
            AnswerRecord(text=a, confidence=Confidence.YES, source_id=str(i))
            for i, a in enumerate(answers)
        ),
    )


@pytest.fixture
def flowers_example():
    """The flowers example: two species answers plus one color answer."""
    return make_example(qid="flowers", answers=("daisy", "tulip", "purple"))


@pytest.fixture
def flowers_grouping(flowers_example):
    return AnswerGrouping(
        question_id=flowers_example.question_id,
        annotator_id="ann1",
        ambiguous=True,
        groups=(
            AnswerGroup(rewritten_question="What species of flowers are these?", member_indices=frozenset({0, 1})),
            AnswerGroup(rewritten_question="What color are these flowers?", member_indices=frozenset({2})),
        ),
    )


@pytest.fixture
def tiny_table():
    vecs = {
        "cat": np.array([1.0, 0.0, 0.0, 0.0]),
        "black": np.array([0.0, 1.0, 0.0, 0.0]),
        "dog": np.array([0.0, 0.0, 1.0, 0.0]),
        "park": np.array([0.0, 0.0, 0.0, 1.0]),
    }
    return EmbeddingTable(vecs, dim=4)


def write_vqa_fixture(tmp_path, n_questions=2, n_answers=10, drop_annotation_for=None):
    questions = {
        "questions": [
            {"question_id": i, "image_id": 100 + i, "question": f"What is object {i}?"}
            for i in range(n_questions)
        ]
    }
    annotations = {
        "annotations": [
            {
                "question_id": i,
                "image_id": 100 + i,
                "answers": [
                    {"answer": f"answer {j}", "answer_confidence": "yes", "answer_id": j}
                    for j in range(n_answers)
                ],
            }
            for i in range(n_questions)
            if i != drop_annotation_for
        ]
    }
    qpath = tmp_path / "questions.json"
    apath = tmp_path / "annotations.json"
    qpath.write_text(json.dumps(questions))
    apath.write_text(json.dumps(annotations))
    return qpath, apath
