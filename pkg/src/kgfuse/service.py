"""HTTP review service for candidate edges.

A ReviewSession wraps an ExpansionState behind a single writer lock
and a monotonically increasing version. Clients read candidates at
some version and submit verdicts carrying it; a stale version gets a
conflict instead of silently overwriting newer state. Every applied
verdict (and every expansion step) is appended to a JSON Lines log,
so replaying the log over the same starting state reproduces the
session exactly.
"""
from __future__ import annotations

import json
import threading
import time
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import (
    CandidateError,
    ParseError,
    TerminalStatusError,
    UnknownNodeError,
    VersionConflictError,
)
from .expand import CANDIDATE_STATUSES, CandidateEdge, ExpansionState
from .graph import KnowledgeGraph

CONTEXT_NEIGHBOR_CAP = 8
MAX_PAGE_SIZE = 200


class ReviewSession:
    """Single-writer review state with an append-only verdict log."""

    def __init__(
        self,
        state: ExpansionState,
        log_path: str | Path | None = None,
        clock: Callable[[], float] = time.time,
    ) -> None:
        self.state = state
        self.version = 1
        self.log_path = Path(log_path) if log_path is not None else None
        self._clock = clock
        self._lock = threading.Lock()

    def _append_log(self, record: dict) -> None:
        if self.log_path is None:
            return
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def submit_verdict(
        self, candidate_id: str, verdict: str, version: int, reviewer: str = ""
    ) -> tuple[CandidateEdge, int]:
        """Apply one verdict read at ``version``; returns (candidate, new version)."""
        with self._lock:
            if version != self.version:
                raise VersionConflictError(version, self.version)
            ts = float(self._clock())
            cand = self.state.apply_feedback(candidate_id, verdict, timestamp=ts)
            self.version += 1
            self._append_log(
                {
                    "kind": "verdict",
                    "candidate_id": candidate_id,
                    "verdict": verdict,
                    "reviewer": reviewer,
                    "timestamp": ts,
                    "version": self.version,
                    "probability_after": cand.probability,
                    "status_after": cand.status,
                }
            )
            return cand.clone(), self.version

    def advance(self) -> int:
        """Run one expansion step (integrations and removals) and log it."""
        with self._lock:
            self.state = self.state.expand_step()
            self.version += 1
            self._append_log(
                {"kind": "step", "version": self.version, "timestamp": float(self._clock())}
            )
            return self.version

    def snapshot(self) -> tuple[ExpansionState, int]:
        with self._lock:
            return self.state, self.version


def replay_log(state: ExpansionState, log_path: str | Path) -> ReviewSession:
    """Rebuild a session by replaying a verdict log over a fresh state.

    Logged timestamps are re-applied as written, so replayed feedback
    entries match the originals field for field. The returned session
    keeps appending to the same log.
    """
    path = Path(log_path)
    session = ReviewSession(state, log_path=None)
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad log record: {exc.msg}", line=line_no, path=str(path))
            kind = rec.get("kind")
            if kind == "verdict":
                session.state.apply_feedback(
                    rec["candidate_id"], rec["verdict"], timestamp=rec["timestamp"]
                )
                session.version += 1
            elif kind == "step":
                session.state = session.state.expand_step()
                session.version += 1
            else:
                raise ParseError(f"unknown log record kind {kind!r}", line=line_no, path=str(path))
    session.log_path = path
    return session


def _node_context(graph: KnowledgeGraph, node_id: str, cap: int = CONTEXT_NEIGHBOR_CAP) -> dict:
    node = graph.node(node_id)
    neighbors = []
    for t in graph.out_triples(node_id)[:cap]:
        neighbors.append(
            {
                "id": t.tail,
                "label": graph.node(t.tail).label,
                "relation": t.relation,
                "direction": "out",
            }
        )
    room = cap - len(neighbors)
    for t in graph.in_triples(node_id)[:room]:
        neighbors.append(
            {
                "id": t.head,
                "label": graph.node(t.head).label,
                "relation": t.relation,
                "direction": "in",
            }
        )
    return {
        "id": node.id,
        "label": node.label,
        "node_type": node.node_type,
        "neighbors": neighbors,
    }


class VerdictRequest(BaseModel):
    verdict: str
    version: int
    reviewer: str = ""


def create_app(session: ReviewSession, static_dir: str | Path | None = None) -> FastAPI:
    """Build the review HTTP app over one session."""
    app = FastAPI(title="candidate review")

    @app.get("/api/candidates")
    def list_candidates(
        status: str | None = None,
        relation: str | None = None,
        min_p: float | None = Query(default=None, ge=0.0, le=1.0),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=50, ge=1, le=MAX_PAGE_SIZE),
    ) -> dict:
        if status is not None and status not in CANDIDATE_STATUSES:
            raise HTTPException(
                status_code=400,
                detail=f"unknown status {status!r}; expected one of {sorted(CANDIDATE_STATUSES)}",
            )
        state, version = session.snapshot()
        items = list(state.candidates.values())
        if status is not None:
            items = [c for c in items if c.status == status]
        if relation is not None:
            items = [c for c in items if c.relation == relation]
        if min_p is not None:
            items = [c for c in items if c.probability >= min_p]
        items.sort(key=lambda c: (-c.probability, c.id))
        total = len(items)
        start = (page - 1) * page_size
        page_items = items[start : start + page_size]
        out = []
        for cand in page_items:
            payload = cand.to_dict()
            payload["head_context"] = _node_context(state.graph, cand.head)
            payload["tail_context"] = _node_context(state.graph, cand.tail)
            out.append(payload)
        return {
            "version": version,
            "total": total,
            "page": page,
            "page_size": page_size,
            "items": out,
        }

    @app.post("/api/candidates/{candidate_id}/verdict")
    def submit_verdict(candidate_id: str, body: VerdictRequest) -> dict:
        try:
            cand, version = session.submit_verdict(
                candidate_id, body.verdict, body.version, body.reviewer
            )
        except VersionConflictError as exc:
            raise HTTPException(
                status_code=409,
                detail={"submitted": exc.submitted, "current": exc.current},
            )
        except CandidateError:
            raise HTTPException(status_code=404, detail=f"unknown candidate {candidate_id!r}")
        except TerminalStatusError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"version": version, "candidate": cand.to_dict()}

    @app.get("/api/stats")
    def get_stats() -> dict:
        state, version = session.snapshot()
        stats = state.graph.stats()
        return {
            "version": version,
            "iteration": state.iteration,
            "node_count": stats.node_count,
            "edge_count": stats.edge_count,
            "nodes_by_type": stats.nodes_by_type,
            "edges_by_relation": stats.edges_by_relation,
            "status_counts": state.status_counts(),
        }

    @app.get("/api/graph/nodes/{node_id}")
    def get_node(node_id: str) -> dict:
        state, version = session.snapshot()
        try:
            context = _node_context(state.graph, node_id)
        except UnknownNodeError:
            raise HTTPException(status_code=404, detail=f"unknown node {node_id!r}")
        return {"version": version, "node": context}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
