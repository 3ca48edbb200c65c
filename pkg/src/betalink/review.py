"""Clerical-review service for rejected linkage decisions.

Each record the estimator declined to decide becomes a task listing the
record, its candidate matches with field-by-field comparison levels, and
the posterior probabilities behind them.  Human decisions are persisted
to an append-only NDJSON log before they are acknowledged, so a crash
loses at most the in-flight decision and a restart replays the log back
to the same state.  Link targets are claimed first-committed-wins, which
keeps the merged result one-to-one without locking the whole task set.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from .comparison import ComparatorSpec, compare_field
from .core import DataFile
from .estimators import LinkageEstimate

__all__ = [
    "InvalidDecisionError",
    "MergeConflictError",
    "ReviewConflictError",
    "ReviewError",
    "ReviewStore",
    "ReviewLogError",
    "UnknownTaskError",
    "create_app",
    "merge_decisions",
    "read_decision_log",
    "task_id_for",
]

DECISION_KINDS = ("link", "non-link", "skip")


class DecisionIn(BaseModel):
    """POST /api/decisions request body."""

    task_id: str
    decision: str
    target: int | None = None
    note: str = ""
    supersede: bool = False


class ReviewError(Exception):
    """Base class for review-service failures."""


class UnknownTaskError(ReviewError):
    pass


class InvalidDecisionError(ReviewError):
    pass


class ReviewConflictError(ReviewError):
    """Decision clashes with an earlier committed one."""

    def __init__(self, message: str, winner: dict | None = None):
        super().__init__(message)
        self.winner = winner


class ReviewLogError(ReviewError):
    pass


class MergeConflictError(ReviewError):
    """Merged decisions would link one file-1 record twice."""

    def __init__(self, conflicts: dict[int, list[int]]):
        listing = "; ".join(
            f"file-1 record {i} linked by j={sorted(js)}" for i, js in sorted(conflicts.items())
        )
        super().__init__(f"merge violates one-to-one: {listing}")
        self.conflicts = conflicts


def task_id_for(j: int) -> str:
    return f"task-{j}"


def _task_j(task_id: str) -> int:
    try:
        prefix, num = task_id.split("-", 1)
        if prefix != "task":
            raise ValueError
        return int(num)
    except ValueError:
        raise UnknownTaskError(f"malformed task id {task_id!r}") from None


def _entropy(probs: list[float]) -> float:
    return float(-sum(p * math.log(p) for p in probs if p > 0.0))


@dataclass
class ReviewTask:
    """One rejected record awaiting a human decision."""

    task_id: str
    j: int
    record: dict
    candidates: list[dict]
    nonmatch_prob: float
    entropy: float
    status: str = "pending"
    decision: dict | None = None

    def payload(self, taken: dict[int, str]) -> dict:
        return {
            "task_id": self.task_id,
            "j": self.j,
            "record": self.record,
            "candidates": [
                {**c, "taken": taken.get(c["i"]) is not None and taken.get(c["i"]) != self.task_id}
                for c in self.candidates
            ],
            "nonmatch_prob": self.nonmatch_prob,
            "entropy": self.entropy,
            "status": self.status,
            "decision": self.decision,
        }


def _record_payload(df: DataFile, idx: int) -> dict:
    values = {f.name: df.rows[idx - 1][k] for k, f in enumerate(df.schema)}
    return {"id": df.ids[idx - 1], "values": values}


class ReviewStore:
    """Tasks, committed decisions, and the append-only decision log.

    Decision commits are serialized through one lock; reads hand out
    plain dict snapshots.  Every mutation is written and flushed to the
    log before the in-memory state changes, so an acknowledged decision
    is always durable.
    """

    def __init__(
        self,
        estimate: LinkageEstimate,
        tasks: list[ReviewTask],
        log_path: str | Path,
    ):
        self.estimate = estimate
        self.tasks: dict[str, ReviewTask] = {t.task_id: t for t in tasks}
        self.log_path = Path(log_path)
        self._lock = threading.Lock()
        self._seq = 0
        # file-1 records already claimed: automatic links first
        self.taken: dict[int, str] = {
            int(d): "estimate" for d in estimate.decisions if d >= 1
        }
        if self.log_path.exists():
            for entry in read_decision_log(self.log_path):
                self._apply(entry, replay=True)

    # -- construction ----------------------------------------------------

    @classmethod
    def build(
        cls,
        *,
        estimate: LinkageEstimate,
        posterior,
        file1: DataFile,
        file2: DataFile,
        specs: list[ComparatorSpec] | None = None,
        log_path: str | Path,
        min_prob: float = 0.01,
        top_n: int = 5,
    ) -> "ReviewStore":
        """Create tasks for every rejected record of the estimate.

        Candidates are every file-1 record with posterior probability
        above ``min_prob`` plus the ``top_n`` most probable regardless,
        so payloads stay bounded but ambiguous cases keep all their
        contenders visible.
        """
        if estimate.n2 != posterior.n2 or estimate.n1 != posterior.n1:
            raise ReviewError(
                f"estimate is {estimate.n1}x{estimate.n2} but posterior is "
                f"{posterior.n1}x{posterior.n2}"
            )
        if file1.n != estimate.n1 or file2.n != estimate.n2:
            raise ReviewError("datafiles do not match the estimate's shape")
        spec_list = list(specs) if specs else []
        tasks = []
        for j in range(1, estimate.n2 + 1):
            if estimate.decisions[j - 1] != -1:
                continue
            ranked = posterior.candidates(j)
            chosen = [(i, p) for rank, (i, p) in enumerate(ranked) if p > min_prob or rank < top_n]
            cands = []
            for i, p in chosen:
                cand = _record_payload(file1, i)
                levels = {}
                for spec in spec_list:
                    k1 = file1.field_index(spec.field)
                    lvl, observed = compare_field(
                        spec, file1.rows[i - 1][k1], file2.rows[j - 1][k1]
                    )
                    levels[spec.field] = lvl if observed else None
                cands.append({"i": i, **cand, "levels": levels, "prob": p})
            nonmatch = float(posterior.nonmatch_probs[j - 1])
            tasks.append(
                ReviewTask(
                    task_id=task_id_for(j),
                    j=j,
                    record=_record_payload(file2, j),
                    candidates=cands,
                    nonmatch_prob=nonmatch,
                    entropy=_entropy([p for _, p in chosen] + [nonmatch]),
                )
            )
        return cls(estimate, tasks, log_path)

    # -- queries ----------------------------------------------------------

    def list_tasks(self, status: str = "pending", offset: int = 0, limit: int = 50) -> dict:
        if status not in ("pending", "decided", "all"):
            raise InvalidDecisionError(f"unknown status filter {status!r}")
        rows = [
            t
            for t in self.tasks.values()
            if status == "all" or t.status == status
        ]
        page = rows[offset : offset + limit]
        return {
            "tasks": [t.payload(self.taken) for t in page],
            "total": len(rows),
            "offset": offset,
            "limit": limit,
        }

    def get_task(self, task_id: str) -> dict:
        task = self.tasks.get(task_id)
        if task is None:
            raise UnknownTaskError(f"no review task {task_id!r}")
        return task.payload(self.taken)

    def progress(self) -> dict:
        decided = sum(1 for t in self.tasks.values() if t.status == "decided")
        return {
            "total": len(self.tasks),
            "decided": decided,
            "pending": len(self.tasks) - decided,
        }

    # -- decisions ----------------------------------------------------------

    def submit(
        self,
        task_id: str,
        decision: str,
        target: int | None = None,
        note: str = "",
        supersede: bool = False,
    ) -> tuple[str, dict]:
        """Validate, persist, and apply one decision.

        Returns (status, task payload) where status is ``ok`` for a new
        commit, ``unchanged`` for an idempotent resubmission, or
        ``skipped``.  Raises UnknownTaskError, InvalidDecisionError, or
        ReviewConflictError; nothing is persisted on a raise.
        """
        entry = {
            "task_id": task_id,
            "decision": decision,
            "target": target,
            "note": note,
            "supersede": bool(supersede),
        }
        with self._lock:
            status = self._validate(entry)
            if status == "unchanged":
                return status, self.tasks[task_id].payload(self.taken)
            entry["seq"] = self._seq
            entry["ts"] = datetime.now(timezone.utc).isoformat()
            self._append(entry)
            self._apply(entry, replay=False)
            return status, self.tasks[task_id].payload(self.taken)

    def _validate(self, entry: dict) -> str:
        task = self.tasks.get(entry["task_id"])
        if task is None:
            raise UnknownTaskError(f"no review task {entry['task_id']!r}")
        decision, target = entry["decision"], entry["target"]
        if decision not in DECISION_KINDS:
            raise InvalidDecisionError(f"unknown decision kind {decision!r}")
        if decision == "link":
            if target is None:
                raise InvalidDecisionError("link decision needs a target")
            if target not in {c["i"] for c in task.candidates}:
                raise InvalidDecisionError(
                    f"record {target} is not a candidate of {task.task_id}"
                )
        elif target is not None:
            raise InvalidDecisionError(f"{decision} decision carries no target")
        if decision == "skip":
            return "skipped"
        if task.status == "decided":
            prev = task.decision
            if prev["decision"] == decision and prev["target"] == target:
                return "unchanged"
            if not entry["supersede"]:
                raise ReviewConflictError(
                    f"{task.task_id} already decided; resubmit with supersede to replace",
                    winner=prev,
                )
        if decision == "link":
            holder = self.taken.get(target)
            if holder is not None and holder != task.task_id:
                winner = None if holder == "estimate" else self.tasks[holder].decision
                raise ReviewConflictError(
                    f"file-1 record {target} is already linked "
                    + ("by the automatic estimate" if holder == "estimate" else f"by {holder}"),
                    winner=winner,
                )
        return "ok"

    def _append(self, entry: dict) -> None:
        with open(self.log_path, "a") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _apply(self, entry: dict, *, replay: bool) -> None:
        if replay:
            status = self._validate(entry)
            if status != "ok":
                self._seq = max(self._seq, entry.get("seq", 0) + 1)
                return
        elif entry["decision"] == "skip":
            # logged for the audit trail; the task stays pending
            self._seq = max(self._seq, entry["seq"] + 1)
            return
        task = self.tasks[entry["task_id"]]
        if task.decision is not None and task.decision["target"] is not None:
            self.taken.pop(task.decision["target"], None)
        committed = {
            "decision": entry["decision"],
            "target": entry["target"],
            "note": entry["note"],
            "seq": entry.get("seq", self._seq),
            "ts": entry.get("ts"),
        }
        task.decision = committed
        task.status = "decided"
        if entry["decision"] == "link":
            self.taken[entry["target"]] = task.task_id
        self._seq = max(self._seq, committed["seq"] + 1)

    def decision_log(self) -> list[dict]:
        if not self.log_path.exists():
            return []
        return read_decision_log(self.log_path)

    def export(self) -> LinkageEstimate:
        return merge_decisions(self.estimate, self.decision_log())


def read_decision_log(path: str | Path) -> list[dict]:
    """Parse an NDJSON decision log, preserving order."""
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ReviewLogError(f"{path}:{lineno}: not valid JSON ({exc})") from None
            for key in ("task_id", "decision"):
                if key not in doc:
                    raise ReviewLogError(f"{path}:{lineno}: missing {key!r}")
            entries.append(doc)
    return entries


def merge_decisions(estimate: LinkageEstimate, decisions: list[dict]) -> LinkageEstimate:
    """Replay reviewed decisions over the estimate's rejections.

    Entries apply in log order, later entries for the same task
    replacing earlier ones; skips change nothing.  Rejections nobody
    decided stay rejected.  The merged result must link every file-1
    record at most once; a violating decision set raises
    MergeConflictError naming every doubly-linked record.
    """
    out = np.array(estimate.decisions, dtype=np.int64, copy=True)
    reviewable = {j for j in range(1, estimate.n2 + 1) if estimate.decisions[j - 1] == -1}
    for entry in decisions:
        j = _task_j(entry["task_id"])
        if j not in reviewable:
            raise ReviewLogError(
                f"decision for {entry['task_id']} but record {j} was never rejected"
            )
        kind = entry["decision"]
        if kind == "skip":
            continue
        if kind == "link":
            out[j - 1] = int(entry["target"])
        elif kind == "non-link":
            out[j - 1] = 0
        else:
            raise ReviewLogError(f"unknown decision kind {kind!r} for {entry['task_id']}")
    linked, counts = np.unique(out[out >= 1], return_counts=True)
    if np.any(counts > 1):
        conflicts = {
            int(i): [int(j) for j in range(1, estimate.n2 + 1) if out[j - 1] == i]
            for i in linked[counts > 1]
        }
        raise MergeConflictError(conflicts)
    estimator = f"{estimate.estimator}+review" if estimate.estimator else "review"
    return LinkageEstimate(
        n1=estimate.n1,
        n2=estimate.n2,
        decisions=out,
        estimator=estimator,
        probs=estimate.probs,
        losses=estimate.losses,
    )


# -- HTTP layer ------------------------------------------------------------


def create_app(store: ReviewStore, static_dir: str | Path | None = None):
    """FastAPI app exposing the review store.

    Endpoints: GET /api/tasks, GET /api/tasks/{id}, POST /api/decisions,
    GET /api/progress, GET /api/export.  When ``static_dir`` exists it is
    served at the root so the browser client ships with the service.
    """
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="betalink clerical review", docs_url="/api/docs")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/tasks")
    def list_tasks(status: str = "pending", offset: int = 0, limit: int = 50):
        try:
            return store.list_tasks(status=status, offset=max(0, offset), limit=max(1, limit))
        except InvalidDecisionError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        try:
            return store.get_task(task_id)
        except UnknownTaskError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/api/decisions")
    def post_decision(body: DecisionIn):
        try:
            status, task = store.submit(
                body.task_id,
                body.decision,
                target=body.target,
                note=body.note,
                supersede=body.supersede,
            )
        except UnknownTaskError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except InvalidDecisionError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except ReviewConflictError as exc:
            raise HTTPException(
                status_code=409, detail={"message": str(exc), "winner": exc.winner}
            )
        return {"status": status, "task": task}

    @app.get("/api/progress")
    def progress():
        return store.progress()

    @app.get("/api/export")
    def export():
        try:
            est = store.export()
        except ReviewError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return {
            "n1": est.n1,
            "n2": est.n2,
            "estimator": est.estimator,
            "decisions": [int(d) for d in est.decisions],
            "links": [[i, j] for i, j in est.links],
            "rejects": [j for j in range(1, est.n2 + 1) if est.decisions[j - 1] == -1],
        }

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
