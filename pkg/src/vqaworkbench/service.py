"""HTTP annotation backend.

Annotators lease examples off the priority queue, submit groupings or
skips, and the dataset is exported from an append-only event log. The log
is the source of truth: every mutation is an event, vetting included, and
export replays the log so provenance is never lost.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .agreement import ambiguity_agreement, cluster_f1, pairwise_summary
from .clustering import PriorityItem
from .corpus import (
    DEFAULT_SKIP_REASON,
    AnswerGrouping,
    ValidationError,
    VqaExample,
    grouping_from_record,
    grouping_to_record,
    validate_grouping,
)
from .evalharness.stats import category_stats


@dataclass(frozen=True)
class Lease:
    question_id: str
    annotator_id: str
    issued_at: float
    expires_at: float

    def active(self, now: float) -> bool:
        return now < self.expires_at


@dataclass(frozen=True)
class AnnotationEvent:
    seq: int
    type: str  # "annotation" | "skip" | "vet"
    annotator_id: str
    timestamp: float
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "type": self.type,
                "annotator_id": self.annotator_id,
                "timestamp": self.timestamp,
                "payload": self.payload,
            },
            sort_keys=True,
        )


class EventStore:
    """Append-only JSONL event log with dense sequence numbers."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self.events: list[AnnotationEvent] = []
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                raw = json.loads(line)
                self.events.append(
                    AnnotationEvent(
                        seq=raw["seq"],
                        type=raw["type"],
                        annotator_id=raw["annotator_id"],
                        timestamp=raw["timestamp"],
                        payload=raw["payload"],
                    )
                )

    def append(self, type: str, annotator_id: str, payload: dict, timestamp: float) -> int:
        event = AnnotationEvent(
            seq=len(self.events) + 1,
            type=type,
            annotator_id=annotator_id,
            timestamp=timestamp,
            payload=payload,
        )
        self.events.append(event)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(event.to_json())
                fh.write("\n")
        return event.seq


@dataclass
class WorkbenchConfig:
    lease_ttl: float = 1800.0  # seconds
    redundancy: int = 1  # max distinct annotators per example
    admin_tokens: frozenset[str] = frozenset()
    token_map: Mapping[str, str] | None = None  # bearer token -> annotator id
    default_skip_reason: str = DEFAULT_SKIP_REASON


class LeaseConflict(Exception):
    pass


class Workbench:
    """Queue, leases and event log behind one lock.

    All mutations are serialized; reads take consistent snapshots.
    """

    def __init__(
        self,
        examples: Sequence[VqaExample],
        queue: Sequence[PriorityItem],
        store: EventStore | None = None,
        config: WorkbenchConfig | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.examples = {ex.question_id: ex for ex in examples}
        self.queue = [item for item in queue if item.question_id in self.examples]
        self.store = store if store is not None else EventStore(None)
        self.config = config or WorkbenchConfig()
        self.clock = clock
        self._leases: dict[str, Lease] = {}
        self._lock = threading.Lock()

    # -- internal views -------------------------------------------------

    def _latest(self) -> dict[tuple[str, str], AnnotationEvent]:
        latest: dict[tuple[str, str], AnnotationEvent] = {}
        for event in self.store.events:
            key = (str(event.payload["question_id"]), str(event.payload["annotator_id"]))
            latest[key] = event
        return latest

    def _eligible(self, annotator_id: str, latest) -> list[PriorityItem]:
        now = self.clock()
        done_by_me = {qid for qid, ann in latest if ann == annotator_id}
        annotators_per_qid: dict[str, set[str]] = {}
        for qid, ann in latest:
            annotators_per_qid.setdefault(qid, set()).add(ann)
        out = []
        for item in self.queue:
            qid = item.question_id
            if qid in done_by_me:
                continue
            lease = self._leases.get(qid)
            if lease is not None and lease.active(now):
                continue
            if len(annotators_per_qid.get(qid, ())) >= self.config.redundancy:
                continue
            out.append(item)
        return out

    def _prefill(self, item: PriorityItem) -> list[dict]:
        example = self.examples[item.question_id]
        groups = item.cluster_result.partition()
        groups.sort(key=lambda g: (-len(g), min(g)))  # big groups first
        return [
            {
                "question": example.question,
                "answer_indices": sorted(g),
                "answer_texts": [example.answers[i].text for i in sorted(g)],
            }
            for g in groups
        ]

    # -- operations ------------------------------------------------------

    def next_example(self, annotator_id: str) -> dict:
        """Lease and return the highest-priority eligible item, answers
        pre-grouped by the clustering result and every group's question box
        initialized to the original question."""
        with self._lock:
            eligible = self._eligible(annotator_id, self._latest())
            if not eligible:
                return {"example": None, "prefill": [], "remaining": 0, "lease_expires_at": None}
            item = eligible[0]
            now = self.clock()
            lease = Lease(
                question_id=item.question_id,
                annotator_id=annotator_id,
                issued_at=now,
                expires_at=now + self.config.lease_ttl,
            )
            self._leases[item.question_id] = lease
            example = self.examples[item.question_id]
            return {
                "example": {
                    "question_id": example.question_id,
                    "image_id": example.image_id,
                    "image_uri": example.image_uri,
                    "question": example.question,
                    "answers": [
                        {"text": a.text, "confidence": a.confidence.value, "source_id": a.source_id}
                        for a in example.answers
                    ],
                },
                "prefill": self._prefill(item),
                "remaining": len(eligible) - 1,
                "lease_expires_at": lease.expires_at,
            }

    def _require_lease(self, annotator_id: str, question_id: str) -> None:
        lease = self._leases.get(question_id)
        if lease is None or not lease.active(self.clock()) or lease.annotator_id != annotator_id:
            raise LeaseConflict(f"annotator {annotator_id!r} holds no active lease on {question_id!r}")

    def submit_annotation(self, annotator_id: str, grouping: AnswerGrouping) -> int:
        """Validate and append a grouping; releases the lease."""
        with self._lock:
            if grouping.question_id not in self.examples:
                raise ValidationError("unknown-example", f"no example {grouping.question_id!r}")
            if grouping.annotator_id != annotator_id:
                raise ValidationError(
                    "annotator-mismatch",
                    f"payload annotator {grouping.annotator_id!r} != caller {annotator_id!r}",
                )
            self._require_lease(annotator_id, grouping.question_id)
            example = self.examples[grouping.question_id]
            validate_grouping(grouping, n_answers=len(example.answers))
            rewrites = [g.rewritten_question.strip() for g in grouping.groups]
            if len(set(rewrites)) != len(rewrites):
                raise ValidationError(
                    "duplicate-rewrites", "every group needs a distinct rewritten question"
                )
            seq = self.store.append(
                "annotation",
                annotator_id,
                grouping_to_record(grouping, example),
                timestamp=self.clock(),
            )
            del self._leases[grouping.question_id]
            return seq

    def skip_example(self, annotator_id: str, question_id: str, reason: str | None = None) -> int:
        with self._lock:
            if question_id not in self.examples:
                raise ValidationError("unknown-example", f"no example {question_id!r}")
            self._require_lease(annotator_id, question_id)
            grouping = AnswerGrouping(
                question_id=question_id,
                annotator_id=annotator_id,
                ambiguous=False,
                skip_reason=reason or self.config.default_skip_reason,
            )
            example = self.examples[question_id]
            seq = self.store.append(
                "skip", annotator_id, grouping_to_record(grouping, example), timestamp=self.clock()
            )
            del self._leases[question_id]
            return seq

    def vet(self, author_id: str, grouping: AnswerGrouping) -> int:
        """Privileged edit: a new event version of an existing annotation."""
        with self._lock:
            example = self.examples.get(grouping.question_id)
            if example is None:
                raise ValidationError("unknown-example", f"no example {grouping.question_id!r}")
            validate_grouping(grouping, n_answers=len(example.answers))
            return self.store.append(
                "vet", author_id, grouping_to_record(grouping, example), timestamp=self.clock()
            )

    def export_dataset(
        self,
        vetted_only: bool = False,
        split: frozenset[str] | None = None,
    ) -> tuple[list[dict], dict]:
        """Latest event per (question_id, annotator_id) wins; returns the
        records plus the dataset summary."""
        with self._lock:
            latest = self._latest()
        records = []
        for key in sorted(latest):
            event = latest[key]
            if vetted_only and event.type != "vet":
                continue
            if split is not None and key[0] not in split:
                continue
            records.append(event.payload)
        return records, summarize_records(records)

    def live_agreement(self) -> dict:
        """Pairwise ambiguity agreement and cluster F1 over the current log."""
        with self._lock:
            latest = self._latest()
        per_annotator: dict[str, dict[str, AnswerGrouping]] = {}
        for (qid, ann), event in latest.items():
            per_annotator.setdefault(ann, {})[qid] = grouping_from_record(event.payload)
        return agreement_summaries(per_annotator)

    def stats(self) -> dict:
        with self._lock:
            latest = self._latest()
        groupings = [grouping_from_record(e.payload) for e in latest.values()]
        cs = category_stats([g for g in groupings if g.ambiguous])
        return {
            "frequency": {lab.value: n for lab, n in sorted(cs.frequency.items(), key=lambda kv: kv[0].value)},
            "cooccurrence": [
                {"labels": [a.value, b.value], "count": n}
                for (a, b), n in sorted(cs.cooccurrence_report().items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))
            ],
            "top": [lab.value for lab in cs.top_labels(3)],
        }


def _summary_dict(s) -> dict:
    return {"mean": s.mean, "std": s.std, "min": s.min, "max": s.max, "n_pairs": s.n_pairs}


def agreement_summaries(per_annotator: Mapping[str, Mapping[str, AnswerGrouping]]) -> dict:
    """Pairwise ambiguity-agreement and cluster-F1 summaries over annotators.

    A pair contributes to the cluster-F1 summary only on examples both
    marked ambiguous. Returns an empty-overlap response when fewer than two
    annotators share any example.
    """
    annotators = sorted(per_annotator)
    if len(annotators) < 2:
        return {"ok": False, "reason": "empty-overlap"}

    def ambiguity(a: str, b: str):
        shared = set(per_annotator[a]) & set(per_annotator[b])
        if not shared:
            return None
        return ambiguity_agreement(
            {q: per_annotator[a][q].ambiguous for q in shared},
            {q: per_annotator[b][q].ambiguous for q in shared},
        )

    def clusters(a: str, b: str):
        values = []
        for qid in set(per_annotator[a]) & set(per_annotator[b]):
            ga, gb = per_annotator[a][qid], per_annotator[b][qid]
            if ga.ambiguous and gb.ambiguous:
                prf = cluster_f1(
                    [g.member_indices for g in ga.groups],
                    [g.member_indices for g in gb.groups],
                )
                values.append(prf.f1)
        if not values:
            return None
        return sum(values) / len(values)

    try:
        amb = pairwise_summary(annotators, ambiguity)
    except ValueError:
        return {"ok": False, "reason": "empty-overlap"}
    out = {
        "ok": True,
        "n_annotators": len(annotators),
        "ambiguity_agreement": _summary_dict(amb),
    }
    try:
        clu = pairwise_summary(annotators, clusters)
        out["cluster_f1"] = _summary_dict(clu)
    except ValueError:
        out["cluster_f1"] = None
    return out


def summarize_records(records: Sequence[Mapping], splits: Mapping[str, frozenset[str]] | None = None) -> dict:
    """Dataset summary of exported records: ambiguous example count, total
    rewritten questions, mean unique answers per rewritten question."""
    ambiguous = [r for r in records if r.get("ambiguous")]
    qids = {str(r["question_id"]) for r in ambiguous}
    group_sizes = []
    for rec in ambiguous:
        for g in rec.get("groups", []):
            texts = g.get("answer_texts")
            if texts:
                group_sizes.append(len(set(texts)))
            else:
                group_sizes.append(len(g["answer_indices"]))
    summary = {
        "n_records": len(records),
        "n_examples": len(qids),
        "n_skipped": len(records) - len(ambiguous),
        "n_rewritten_questions": len(group_sizes),
        "mean_answers_per_question": (sum(group_sizes) / len(group_sizes)) if group_sizes else 0.0,
    }
    if splits:
        summary["splits"] = {name: len(qids & ids) for name, ids in sorted(splits.items())}
    return summary


# --- HTTP layer --------------------------------------------------------------


def build_app(workbench: Workbench, static_dir=None):
    """FastAPI app over a Workbench. Identity is the bearer token, mapped
    through config.token_map when present."""
    app = FastAPI(title="vqa-workbench annotation service")

    def identity(request: Request, fallback: str | None = None) -> str:
        auth = request.headers.get("authorization", "")
        if auth.lower().startswith("bearer "):
            token = auth[7:].strip()
            if workbench.config.token_map is not None:
                annotator = workbench.config.token_map.get(token)
                if annotator is None:
                    raise HTTPException(status_code=401, detail="unknown token")
                return annotator
            return token
        if fallback:
            return fallback
        raise HTTPException(status_code=401, detail="missing bearer token")

    def is_admin(request: Request) -> bool:
        auth = request.headers.get("authorization", "")
        return auth.lower().startswith("bearer ") and auth[7:].strip() in workbench.config.admin_tokens

    @app.exception_handler(ValidationError)
    def _validation_handler(request, exc: ValidationError):
        return JSONResponse(
            status_code=422, content={"error": "validation", "invariant": exc.invariant, "detail": str(exc)}
        )

    @app.exception_handler(LeaseConflict)
    def _lease_handler(request, exc: LeaseConflict):
        return JSONResponse(status_code=409, content={"error": "lease-conflict", "detail": str(exc)})

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/queue/next")
    def queue_next(request: Request, annotator: str | None = None):
        return workbench.next_example(identity(request, fallback=annotator))

    async def read_json(request: Request) -> dict:
        try:
            return await request.json()
        except json.JSONDecodeError as e:
            raise HTTPException(status_code=400, detail=f"malformed JSON body: {e.msg}")

    @app.post("/api/annotations")
    async def post_annotation(request: Request):
        annotator = identity(request)
        record = await read_json(request)
        grouping = grouping_from_record(record)
        seq = workbench.submit_annotation(annotator, grouping)
        return {"seq": seq}

    @app.post("/api/skips")
    async def post_skip(request: Request):
        annotator = identity(request)
        body = await read_json(request)
        if "question_id" not in body:
            raise ValidationError("record-missing-field", "skip needs question_id")
        seq = workbench.skip_example(annotator, str(body["question_id"]), body.get("reason"))
        return {"seq": seq}

    @app.post("/api/vet")
    async def post_vet(request: Request):
        if not is_admin(request):
            raise HTTPException(status_code=403, detail="vetting requires an admin token")
        author = identity(request)
        record = await read_json(request)
        seq = workbench.vet(author, grouping_from_record(record))
        return {"seq": seq}

    @app.get("/api/examples/{question_id}")
    def get_example(question_id: str):
        example = workbench.examples.get(question_id)
        if example is None:
            raise HTTPException(status_code=404, detail=f"no example {question_id!r}")
        return {
            "question_id": example.question_id,
            "image_id": example.image_id,
            "image_uri": example.image_uri,
            "question": example.question,
            "answers": [
                {"text": a.text, "confidence": a.confidence.value, "source_id": a.source_id}
                for a in example.answers
            ],
        }

    @app.get("/api/export")
    def export(vetted_only: bool = False):
        records, summary = workbench.export_dataset(vetted_only=vetted_only)
        return {"summary": summary, "records": records}

    @app.get("/api/agreement")
    def agreement():
        return workbench.live_agreement()

    @app.get("/api/stats")
    def stats():
        return workbench.stats()

    if static_dir is not None and Path(static_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
