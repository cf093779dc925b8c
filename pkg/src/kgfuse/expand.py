"""Probabilistic graph expansion with reviewer feedback.

New relations are proposed between node pairs, admitted when their
probability clears the acceptance threshold, and integrated snapshot by
snapshot.  Reviewer rejections decay a candidate's probability by a
fixed step; once it falls below the threshold the candidate is dropped
and its triple disappears from the next snapshot.  Accepting pins the
probability and closes the candidate.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Protocol, Sequence

import numpy as np

from .embeddings import Embedding, EmbeddingProvider
from .errors import CandidateError, EmbeddingError, TerminalStatusError
from .graph import PROVENANCE_PREDICTED, KnowledgeGraph, Node, Triple

DEFAULT_TAU_ACCEPT = 0.5
DEFAULT_DELTA_P = 0.1
DEFAULT_SIGMA = 1.0
DEFAULT_PAIR_CAP = 10_000

VERDICT_ACCEPT = "accept"
VERDICT_REJECT = "reject"

STATUS_PENDING = "pending"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"  # dropped before ever being integrated
STATUS_REMOVED = "removed"  # dropped after integration; triple deleted

CANDIDATE_STATUSES = frozenset(
    {STATUS_PENDING, STATUS_ACCEPTED, STATUS_REJECTED, STATUS_REMOVED}
)


def gaussian_relation_prob(
    v_h: Embedding | Sequence[float],
    v_t: Embedding | Sequence[float],
    sigma: float,
    *,
    inverted: bool = False,
) -> float:
    """Distance-based relation probability.

    The primary form is ``1 - exp(-||v_h - v_t||^2 / (2 sigma^2))``,
    which grows with embedding distance and is 0 for identical vectors.
    The inverted flag selects ``exp(-||v_h - v_t||^2 / (2 sigma^2))``,
    the variant that rewards proximity instead.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    a = v_h.values if isinstance(v_h, Embedding) else np.asarray(v_h, dtype=np.float64)
    b = v_t.values if isinstance(v_t, Embedding) else np.asarray(v_t, dtype=np.float64)
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d2 = float(np.sum((a - b) ** 2))
    core = math.exp(-d2 / (2.0 * sigma * sigma))
    return core if inverted else 1.0 - core


@dataclass(slots=True)
class FeedbackEntry:
    verdict: str
    delta: float
    probability_after: float
    timestamp: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "delta": self.delta,
            "probability_after": self.probability_after,
            "timestamp": self.timestamp,
        }


@dataclass(slots=True)
class CandidateEdge:
    """A proposed triple moving through review."""

    id: str
    head: str
    relation: str
    tail: str
    probability: float
    status: str = STATUS_PENDING
    iteration_born: int = 0
    integrated_at: int | None = None
    feedback: list[FeedbackEntry] = field(default_factory=list)

    def key(self) -> tuple[str, str, str]:
        return (self.head, self.relation, self.tail)

    def clone(self) -> CandidateEdge:
        return replace(self, feedback=list(self.feedback))

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "head": self.head,
            "relation": self.relation,
            "tail": self.tail,
            "probability": self.probability,
            "status": self.status,
            "iteration_born": self.iteration_born,
            "integrated_at": self.integrated_at,
            "feedback": [f.to_dict() for f in self.feedback],
        }


class RelationPredictor(Protocol):
    def predict(
        self, head: Node, tail: Node, graph: KnowledgeGraph
    ) -> list[tuple[str, float]]: ...


class GaussianPredictor:
    """Scores pairs by label-embedding distance.

    The relation label comes from a (head type, tail type) table, with a
    configurable default for unlisted type pairs.
    """

    def __init__(
        self,
        provider: EmbeddingProvider,
        sigma: float = DEFAULT_SIGMA,
        relation_table: dict[tuple[str, str], str] | None = None,
        default_relation: str = "AssociatedWith",
        inverted: bool = False,
    ) -> None:
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        self.provider = provider
        self.sigma = sigma
        self.relation_table = relation_table or {}
        self.default_relation = default_relation
        self.inverted = inverted

    def predict(self, head: Node, tail: Node, graph: KnowledgeGraph) -> list[tuple[str, float]]:
        p = gaussian_relation_prob(
            self.provider.embed(head.label),
            self.provider.embed(tail.label),
            self.sigma,
            inverted=self.inverted,
        )
        relation = self.relation_table.get(
            (head.node_type, tail.node_type), self.default_relation
        )
        return [(relation, p)]


class TablePredictor:
    """Fixed (head id, tail id) -> [(relation, probability)] lookup."""

    def __init__(self, table: dict[tuple[str, str], list[tuple[str, float]]]):
        self.table = table

    def predict(self, head: Node, tail: Node, graph: KnowledgeGraph) -> list[tuple[str, float]]:
        return list(self.table.get((head.id, tail.id), []))


# Pair sources are either explicit pair lists or callables on the graph.
PairPolicy = Callable[[KnowledgeGraph, int], list[tuple[str, str]]]


def all_cross_type_pairs(graph: KnowledgeGraph, seed: int = 0) -> list[tuple[str, str]]:
    """Every ordered pair of nodes with differing types, seeded-shuffled."""
    ids = sorted(graph.node_ids())
    pairs = [
        (h, t)
        for h in ids
        for t in ids
        if h != t and graph.node(h).node_type != graph.node(t).node_type
    ]
    random.Random(seed).shuffle(pairs)
    return pairs


def two_hop_cross_type_pairs(
    graph: KnowledgeGraph, seed: int = 0, cap: int = DEFAULT_PAIR_CAP
) -> list[tuple[str, str]]:
    """Ordered cross-type pairs within two undirected hops, capped.

    Enumeration order is deterministic: pairs are collected in sorted
    order, shuffled with the seed, and truncated to ``cap``.
    """
    pairs: set[tuple[str, str]] = set()
    for start in sorted(graph.node_ids()):
        start_type = graph.node(start).node_type
        first = graph.undirected_neighbors(start)
        reach = set(first)
        for mid in first:
            reach |= graph.undirected_neighbors(mid)
        reach.discard(start)
        for other in reach:
            if graph.node(other).node_type != start_type:
                pairs.add((start, other))
    ordered = sorted(pairs)
    random.Random(seed).shuffle(ordered)
    return ordered[:cap]


def capped_two_hop_policy(cap: int = DEFAULT_PAIR_CAP) -> PairPolicy:
    return lambda graph, seed: two_hop_cross_type_pairs(graph, seed, cap)


@dataclass(slots=True)
class ExpansionState:
    """One expansion run: the current snapshot plus candidate bookkeeping."""

    graph: KnowledgeGraph
    tau_accept: float = DEFAULT_TAU_ACCEPT
    delta_p: float = DEFAULT_DELTA_P
    max_iterations: int = 10
    auto_accept: bool = True
    seed: int = 0
    iteration: int = 0
    candidates: dict[str, CandidateEdge] = field(default_factory=dict)
    proposed_keys: set[tuple[str, str, str]] = field(default_factory=set)
    last_delta: list[Triple] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (0.0 < self.tau_accept <= 1.0):
            raise ValueError(f"tau_accept must be in (0, 1], got {self.tau_accept}")
        if not (0.0 < self.delta_p <= 1.0):
            raise ValueError(f"delta_p must be in (0, 1], got {self.delta_p}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    # ------------------------------------------------------------------

    def propose_candidates(
        self,
        predictor: RelationPredictor,
        pair_source: PairPolicy | Iterable[tuple[str, str]] | None = None,
    ) -> list[CandidateEdge]:
        """Score pairs and admit new candidates with probability >= tau_accept.

        Triples already in the graph and triples proposed before (in any
        status, removed ones included) are never re-proposed.
        """
        if pair_source is None:
            pairs = two_hop_cross_type_pairs(self.graph, self.seed)
        elif callable(pair_source):
            pairs = pair_source(self.graph, self.seed)
        else:
            pairs = list(pair_source)
        born: list[CandidateEdge] = []
        for head_id, tail_id in pairs:
            head = self.graph.node(head_id)
            tail = self.graph.node(tail_id)
            for relation, prob in predictor.predict(head, tail, self.graph):
                if not (isinstance(prob, (int, float)) and math.isfinite(prob) and 0.0 <= prob <= 1.0):
                    raise ValueError(
                        f"predictor returned invalid probability {prob!r} for "
                        f"({head_id}, {relation}, {tail_id})"
                    )
                key = (head_id, relation, tail_id)
                if key in self.proposed_keys or self.graph.has_triple(*key):
                    continue
                if prob < self.tau_accept:
                    continue
                cand = CandidateEdge(
                    id=f"cand-{len(self.proposed_keys):05d}",
                    head=head_id,
                    relation=relation,
                    tail=tail_id,
                    probability=float(prob),
                    iteration_born=self.iteration,
                )
                self.candidates[cand.id] = cand
                self.proposed_keys.add(key)
                born.append(cand)
        return born

    def apply_feedback(
        self,
        candidate_id: str,
        verdict: str,
        *,
        delta_p: float | None = None,
        timestamp: float | None = None,
    ) -> CandidateEdge:
        """Record one reviewer verdict.

        Rejections subtract delta_p (clamped at 0); when the probability
        drops below tau_accept the candidate leaves the pool: "removed"
        if its triple was integrated (deletion happens at the next
        snapshot), "rejected" if it never was.  Accepting pins the
        probability and is terminal.

        Decay arithmetic rounds to 12 decimal places so that decimal
        inputs behave as written (0.7 minus 0.2 is 0.5, not a hair
        below it).
        """
        cand = self.candidates.get(candidate_id)
        if cand is None:
            raise CandidateError(candidate_id)
        if cand.status != STATUS_PENDING:
            raise TerminalStatusError(
                f"candidate {candidate_id} is {cand.status}; verdicts apply to pending only"
            )
        if verdict not in (VERDICT_ACCEPT, VERDICT_REJECT):
            raise ValueError(f"unknown verdict {verdict!r}")
        step = self.delta_p if delta_p is None else delta_p
        if not (0.0 < step <= 1.0):
            raise ValueError(f"delta_p must be in (0, 1], got {step}")
        ts = time.time() if timestamp is None else timestamp
        if verdict == VERDICT_ACCEPT:
            cand.status = STATUS_ACCEPTED
            cand.feedback.append(FeedbackEntry(verdict, 0.0, cand.probability, ts))
            return cand
        cand.probability = round(max(0.0, cand.probability - step), 12)
        cand.feedback.append(FeedbackEntry(verdict, step, cand.probability, ts))
        if cand.probability < self.tau_accept:
            cand.status = STATUS_REMOVED if cand.integrated_at is not None else STATUS_REJECTED
        return cand

    def pending_integrations(self) -> list[CandidateEdge]:
        out = []
        for cand in self.candidates.values():
            if cand.integrated_at is not None:
                continue
            if cand.status == STATUS_ACCEPTED or (
                self.auto_accept
                and cand.status == STATUS_PENDING
                and cand.probability >= self.tau_accept
            ):
                out.append(cand)
        return out

    def pending_removals(self) -> list[CandidateEdge]:
        return [
            c
            for c in self.candidates.values()
            if c.status == STATUS_REMOVED
            and c.integrated_at is not None
            and self.graph.has_triple(*c.key())
        ]

    def expand_step(self) -> ExpansionState:
        """Materialise the next snapshot: integrate admitted candidates,
        delete triples of removed ones, bump the iteration counter."""
        if self.iteration >= self.max_iterations:
            raise RuntimeError(
                f"iteration budget exhausted ({self.iteration}/{self.max_iterations})"
            )
        new_graph = self.graph.copy()
        delta: list[Triple] = []
        new_candidates = {cid: c.clone() for cid, c in self.candidates.items()}
        next_iteration = self.iteration + 1
        for cand in new_candidates.values():
            if cand.status == STATUS_REMOVED and cand.integrated_at is not None:
                new_graph.remove_triple(*cand.key())
        for cand in new_candidates.values():
            if cand.integrated_at is not None:
                continue
            admit = cand.status == STATUS_ACCEPTED or (
                self.auto_accept
                and cand.status == STATUS_PENDING
                and cand.probability >= self.tau_accept
            )
            if not admit:
                continue
            triple = Triple(
                head=cand.head,
                relation=cand.relation,
                tail=cand.tail,
                provenance=PROVENANCE_PREDICTED,
                confidence=cand.probability,
            )
            new_graph.add_triple(triple)
            cand.integrated_at = next_iteration
            delta.append(triple)
        return ExpansionState(
            graph=new_graph,
            tau_accept=self.tau_accept,
            delta_p=self.delta_p,
            max_iterations=self.max_iterations,
            auto_accept=self.auto_accept,
            seed=self.seed,
            iteration=next_iteration,
            candidates=new_candidates,
            proposed_keys=set(self.proposed_keys),
            last_delta=delta,
        )

    def status_counts(self) -> dict[str, int]:
        counts = {
            STATUS_PENDING: 0,
            STATUS_ACCEPTED: 0,
            STATUS_REJECTED: 0,
            STATUS_REMOVED: 0,
        }
        for cand in self.candidates.values():
            counts[cand.status] += 1
        return counts


def run_expansion(
    state: ExpansionState,
    predictor: RelationPredictor,
    pair_source: PairPolicy | Iterable[tuple[str, str]] | None = None,
) -> tuple[ExpansionState, list[int]]:
    """Iterate propose/integrate until a fixed point or the budget.

    Returns the final state and the per-step delta sizes.  The fixed
    point is reached when a proposal round admits nothing and no
    integration or removal is outstanding.
    """
    deltas: list[int] = []
    while True:
        state.propose_candidates(predictor, pair_source)
        if not state.pending_integrations() and not state.pending_removals():
            return state, deltas
        if state.iteration >= state.max_iterations:
            return state, deltas
        state = state.expand_step()
        deltas.append(len(state.last_delta))


def write_candidate_log(state: ExpansionState, path: str, meta: dict[str, Any] | None = None) -> None:
    """Candidates as JSONL: meta record, then one record per candidate."""
    with open(path, "w", encoding="utf-8") as fh:
        head = {
            "kind": "meta",
            "iteration": state.iteration,
            "tau_accept": state.tau_accept,
            "delta_p": state.delta_p,
            **(meta or {}),
        }
        fh.write(json.dumps(head, sort_keys=True) + "\n")
        for cid in sorted(state.candidates):
            record = {"kind": "candidate", **state.candidates[cid].to_dict()}
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_candidate_log(path: str) -> tuple[dict[str, Any], list[CandidateEdge]]:
    """Load a candidate log back into (meta, candidates)."""
    meta: dict[str, Any] = {}
    candidates: list[CandidateEdge] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:line {line_no}: bad JSON: {exc.msg}")
            kind = rec.pop("kind", None)
            if kind == "meta":
                meta = rec
            elif kind == "candidate":
                feedback = [FeedbackEntry(**f) for f in rec.pop("feedback", [])]
                candidates.append(CandidateEdge(feedback=feedback, **rec))
            else:
                raise ValueError(f"{path}:line {line_no}: unknown record kind {kind!r}")
    return meta, candidates
