"""Domain types and I/O for VQA answer-grouping data.

Covers VQAv2 ingestion, the disagreement-label filter, answer
normalization, and the JSONL exchange format used by the annotation
workflow. All types are immutable values; operations are pure.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

SCHEMA_VERSION = 1

DEFAULT_SKIP_REASON = "All answers to the same question"

_ARTICLES = frozenset({"a", "an", "the"})
_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)


class ParseError(ValueError):
    """A file could not be parsed; carries the path and byte offset."""

    def __init__(self, path, offset: int | None, message: str):
        self.path = str(path)
        self.offset = offset
        where = f"{self.path}" if offset is None else f"{self.path} @ byte {offset}"
        super().__init__(f"{where}: {message}")


class ReferentialIntegrityError(ValueError):
    """Question ids present on one side of a join but not the other."""

    def __init__(self, missing_questions: Sequence[str], missing_annotations: Sequence[str]):
        self.missing_questions = tuple(missing_questions)
        self.missing_annotations = tuple(missing_annotations)
        parts = []
        if self.missing_questions:
            parts.append(f"ids in annotations but not questions: {list(self.missing_questions)}")
        if self.missing_annotations:
            parts.append(f"ids in questions but not annotations: {list(self.missing_annotations)}")
        super().__init__("; ".join(parts))


class ValidationError(ValueError):
    """A record violates a named invariant.

    ``invariant`` is a stable machine-readable name (e.g. "groups-disjoint")
    used by the annotation service's 422 responses and by JSONL import
    errors, which also carry the offending line number.
    """

    def __init__(self, invariant: str, message: str, line: int | None = None):
        self.invariant = invariant
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message} [{invariant}]")


class Confidence(str, Enum):
    YES = "yes"
    MAYBE = "maybe"
    NO = "no"


class OntologyLabel(str, Enum):
    """Reasons a question can be ambiguous.

    Thirteen stable values; serialized by name. Mistakes are split into
    answer-side mistakes and bad questions/images.
    """

    LOCATION = "Location"
    TIME = "Time"
    KIND = "Kind"
    CAUSE = "Cause"
    PURPOSE = "Purpose"
    GOAL = "Goal"
    DIRECTION = "Direction"
    MANNER = "Manner"
    MULTIPLE_OPTIONS = "MultipleOptions"
    GROUPING = "Grouping"
    UNCERTAINTY = "Uncertainty"
    ANNOTATOR_MISTAKE = "AnnotatorMistake"
    BAD_QUESTION_OR_IMAGE = "BadQuestionOrImage"


@dataclass(frozen=True)
class AnswerRecord:
    """One raw answer with its annotator confidence rating."""

    text: str
    confidence: Confidence
    source_id: str = ""

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError("answer-text-nonempty", "answer text empty after trimming")
        if not isinstance(self.confidence, Confidence):
            object.__setattr__(self, "confidence", Confidence(self.confidence))


@dataclass(frozen=True)
class VqaExample:
    """One image/question pair with its redundant answers."""

    question_id: str
    image_id: str
    image_uri: str
    question: str
    answers: tuple[AnswerRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "answers", tuple(self.answers))
        if len(self.answers) < 1:
            raise ValidationError("answers-nonempty", f"example {self.question_id} has no answers")


@dataclass(frozen=True)
class AnswerGroup:
    """A set of answers all addressing one underlying question."""

    rewritten_question: str
    member_indices: frozenset[int]
    labels: frozenset[OntologyLabel] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "member_indices", frozenset(self.member_indices))
        object.__setattr__(self, "labels", frozenset(OntologyLabel(v) for v in self.labels))
        if not self.member_indices:
            raise ValidationError("group-members-nonempty", "group has no members")
        if not self.rewritten_question.strip():
            raise ValidationError("rewrite-nonempty", "rewritten question is empty")


@dataclass(frozen=True)
class AnswerGrouping:
    """An annotator's verdict on one example: ambiguous + groups, or a skip."""

    question_id: str
    annotator_id: str
    ambiguous: bool
    groups: tuple[AnswerGroup, ...] = ()
    skip_reason: str | None = None
    deleted_indices: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "deleted_indices", frozenset(self.deleted_indices))
        validate_grouping(self)


@dataclass(frozen=True)
class DatasetSplit:
    name: str  # "dev" or "test"
    question_ids: frozenset[str]

    def __post_init__(self):
        if self.name not in ("dev", "test"):
            raise ValidationError("split-name", f"unknown split name {self.name!r}")
        object.__setattr__(self, "question_ids", frozenset(str(q) for q in self.question_ids))


def validate_splits(dev: DatasetSplit, test: DatasetSplit) -> None:
    overlap = dev.question_ids & test.question_ids
    if overlap:
        raise ValidationError("splits-disjoint", f"dev/test overlap on {sorted(overlap)[:5]}")


def validate_grouping(grouping: AnswerGrouping, n_answers: int | None = None) -> None:
    """Check every AnswerGrouping invariant; raise ValidationError on the
    first violation. Bounds are checked only when ``n_answers`` is known.
    """
    if grouping.ambiguous:
        if len(grouping.groups) < 2:
            raise ValidationError(
                "ambiguous-min-groups",
                f"ambiguous grouping for {grouping.question_id} has {len(grouping.groups)} group(s), needs >= 2",
            )
    else:
        if grouping.groups:
            raise ValidationError(
                "unambiguous-no-groups",
                f"unambiguous grouping for {grouping.question_id} must have no groups",
            )
        if not (grouping.skip_reason and grouping.skip_reason.strip()):
            raise ValidationError(
                "unambiguous-skip-reason",
                f"unambiguous grouping for {grouping.question_id} needs a skip reason",
            )
    seen: set[int] = set()
    for g in grouping.groups:
        dup = seen & g.member_indices
        if dup:
            raise ValidationError(
                "groups-disjoint",
                f"answer indices {sorted(dup)} appear in more than one group",
            )
        seen |= g.member_indices
    if seen & grouping.deleted_indices:
        raise ValidationError(
            "deleted-disjoint",
            f"indices {sorted(seen & grouping.deleted_indices)} both grouped and deleted",
        )
    if n_answers is not None:
        out = {i for i in seen | grouping.deleted_indices if i < 0 or i >= n_answers}
        if out:
            raise ValidationError(
                "indices-in-bounds",
                f"indices {sorted(out)} outside [0, {n_answers})",
            )


def normalize_answer(text: str, strip_punct: bool = False) -> str:
    """Lowercase, trim, collapse whitespace, drop leading articles.

    ``strip_punct`` additionally removes punctuation before tokenizing;
    the yes/no-only filter uses that variant so "Yes." does not escape it.
    Returns "" when nothing survives.
    """
    text = text.lower()
    if strip_punct:
        text = _PUNCT_RE.sub(" ", text)
    words = text.split()
    while words and words[0] in _ARTICLES:
        words = words[1:]
    return " ".join(words)


def _read_json(path) -> dict:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError:
        raise
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.pos, e.msg) from e


def load_vqa(
    questions_path,
    annotations_path,
    image_uri_template: str = "images/{image_id}.jpg",
) -> list[VqaExample]:
    """Join VQAv2-style question and annotation files into examples.

    One example per question id, answers in their original file order.
    Ids present on only one side raise ReferentialIntegrityError (an
    example cannot be built without both its question and its answers).
    """
    qdoc = _read_json(questions_path)
    adoc = _read_json(annotations_path)
    if "questions" not in qdoc:
        raise ParseError(questions_path, None, "missing top-level 'questions' array")
    if "annotations" not in adoc:
        raise ParseError(annotations_path, None, "missing top-level 'annotations' array")

    ann_by_qid: dict[str, dict] = {}
    for ann in adoc["annotations"]:
        ann_by_qid[str(ann["question_id"])] = ann
    q_ids = [str(q["question_id"]) for q in qdoc["questions"]]
    q_id_set = set(q_ids)
    missing_questions = sorted(set(ann_by_qid) - q_id_set)
    missing_annotations = sorted(q_id_set - set(ann_by_qid))
    if missing_questions or missing_annotations:
        raise ReferentialIntegrityError(missing_questions, missing_annotations)

    examples = []
    for q in qdoc["questions"]:
        qid = str(q["question_id"])
        ann = ann_by_qid[qid]
        answers = tuple(
            AnswerRecord(
                text=a["answer"],
                confidence=Confidence(a.get("answer_confidence", "yes")),
                source_id=str(a.get("answer_id", i)),
            )
            for i, a in enumerate(ann["answers"])
        )
        image_id = str(q.get("image_id", ann.get("image_id", "")))
        examples.append(
            VqaExample(
                question_id=qid,
                image_id=image_id,
                image_uri=image_uri_template.format(image_id=image_id),
                question=q["question"],
                answers=answers,
            )
        )
    return examples


def load_disagreement_labels(path) -> dict[str, frozenset[str]]:
    """Read a per-question reason-flag file.

    Accepts either ``{"<qid>": ["flag", ...]}`` or a list of
    ``{"question_id": ..., "labels": [...]}`` records.
    """
    doc = _read_json(path)
    if isinstance(doc, dict):
        return {str(k): frozenset(v) for k, v in doc.items()}
    out = {}
    for row in doc:
        out[str(row["question_id"])] = frozenset(row.get("labels", row.get("flags", [])))
    return out


@dataclass(frozen=True)
class AmbiguityFilterReport:
    """Bookkeeping from filter_ambiguous_subset; unlabeled ids are excluded
    but reported rather than raised."""

    unlabeled_ids: tuple[str, ...]
    unflagged_ids: tuple[str, ...]

    @property
    def n_unlabeled(self) -> int:
        return len(self.unlabeled_ids)


def filter_ambiguous_subset(
    examples: Sequence[VqaExample],
    labels: Mapping[str, Iterable[str]],
    ambiguity_flag: str = "ambiguous",
) -> tuple[list[VqaExample], AmbiguityFilterReport]:
    """Keep examples whose reason flags include the ambiguity flag.

    Order is preserved; examples without a label entry are excluded and
    counted in the report.
    """
    selected, unlabeled, unflagged = [], [], []
    for ex in examples:
        flags = labels.get(ex.question_id)
        if flags is None:
            unlabeled.append(ex.question_id)
        elif ambiguity_flag in flags:
            selected.append(ex)
        else:
            unflagged.append(ex.question_id)
    return selected, AmbiguityFilterReport(tuple(unlabeled), tuple(unflagged))


def filter_answers_by_confidence(example: VqaExample) -> tuple[VqaExample | None, dict[int, int]]:
    """Keep answers rated yes or maybe.

    Returns the filtered copy plus an old-index -> new-index remap for the
    survivors. Returns (None, {}) when nothing survives; the caller decides
    whether to drop the example.
    """
    kept = [(i, a) for i, a in enumerate(example.answers) if a.confidence in (Confidence.YES, Confidence.MAYBE)]
    if not kept:
        return None, {}
    remap = {old: new for new, (old, _) in enumerate(kept)}
    filtered = VqaExample(
        question_id=example.question_id,
        image_id=example.image_id,
        image_uri=example.image_uri,
        question=example.question,
        answers=tuple(a for _, a in kept),
    )
    return filtered, remap


# --- workbench JSONL exchange format ---------------------------------------
#
# One JSON object per line:
#   {schema_version, question_id, image_id, image_uri, original_question,
#    ambiguous, annotator_id, skip_reason?, deleted_indices,
#    groups: [{rewritten_question, answer_texts, answer_indices, labels}]}
# Example-level fields are denormalized for downstream consumers; when the
# source example is unknown they are null.


def grouping_to_record(grouping: AnswerGrouping, example: VqaExample | None = None) -> dict:
    groups = []
    for g in grouping.groups:
        indices = sorted(g.member_indices)
        groups.append(
            {
                "rewritten_question": g.rewritten_question,
                "answer_indices": indices,
                "answer_texts": [example.answers[i].text for i in indices] if example else None,
                "labels": sorted(lab.value for lab in g.labels),
            }
        )
    record = {
        "schema_version": SCHEMA_VERSION,
        "question_id": grouping.question_id,
        "image_id": example.image_id if example else None,
        "image_uri": example.image_uri if example else None,
        "original_question": example.question if example else None,
        "ambiguous": grouping.ambiguous,
        "annotator_id": grouping.annotator_id,
        "deleted_indices": sorted(grouping.deleted_indices),
        "groups": groups,
    }
    if grouping.skip_reason is not None:
        record["skip_reason"] = grouping.skip_reason
    return record


def grouping_from_record(record: Mapping, line: int | None = None) -> AnswerGrouping:
    try:
        groups = tuple(
            AnswerGroup(
                rewritten_question=g["rewritten_question"],
                member_indices=frozenset(g["answer_indices"]),
                labels=frozenset(OntologyLabel(v) for v in g.get("labels", [])),
            )
            for g in record.get("groups", [])
        )
        return AnswerGrouping(
            question_id=str(record["question_id"]),
            annotator_id=str(record["annotator_id"]),
            ambiguous=bool(record["ambiguous"]),
            groups=groups,
            skip_reason=record.get("skip_reason"),
            deleted_indices=frozenset(record.get("deleted_indices", [])),
        )
    except ValidationError as e:
        raise ValidationError(e.invariant, str(e), line=line) from e
    except KeyError as e:
        raise ValidationError("record-missing-field", f"missing field {e}", line=line) from e
    except (ValueError, TypeError) as e:
        # e.g. a label outside the ontology or a non-integer index
        raise ValidationError("record-field-invalid", str(e), line=line) from e


def export_jsonl(
    groupings: Sequence[AnswerGrouping],
    path,
    examples: Mapping[str, VqaExample] | None = None,
) -> int:
    """Write one record per grouping; returns the number written."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for grouping in groupings:
            example = examples.get(grouping.question_id) if examples else None
            fh.write(json.dumps(grouping_to_record(grouping, example), sort_keys=True))
            fh.write("\n")
    return len(groupings)


def read_records(path) -> list[dict]:
    """Parse + validate workbench JSONL, returning the raw records."""
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(path, e.pos, f"line {lineno}: {e.msg}") from e
            grouping_from_record(record, line=lineno)  # validation side effect
            records.append(record)
    return records


def import_jsonl(path) -> list[AnswerGrouping]:
    """Inverse of export_jsonl: import(export(x)) is structurally x."""
    return [grouping_from_record(r) for r in read_records(path)]
