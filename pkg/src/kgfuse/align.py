"""Entity alignment, relation unification, and graph merging.

Alignment proposes same-type cross-source node pairs by embedding
similarity of labels and aliases; pairs at or above the threshold form
connected components that collapse onto the lexicographically smallest
member id.  Relation labels are unified onto the canonical 7-relation
taxonomy.  Merging unions everything, rewrites ids and relations, and
reports what it did.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingProvider, cosine_sim
from .errors import ConfigError, ParseError, TypeConflictError
from .graph import (
    RELATION_TYPES,
    KnowledgeGraph,
    Node,
    Triple,
    merge_node_into,
)
from .ingest import tokenize
from .unionfind import UnionFind

# Fallback for relation labels nothing else can place.
FALLBACK_RELATION = "AssociatedWith"

DEFAULT_TAU = 0.90
DEFAULT_TAU_REL = 0.70


@dataclass(slots=True)
class AlignmentDecision:
    """One accepted cross-source equivalence."""

    left: tuple[str, str]  # (source name, node id)
    right: tuple[str, str]
    score: float
    merged_into: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "left": list(self.left),
            "right": list(self.right),
            "score": self.score,
            "merged_into": self.merged_into,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> AlignmentDecision:
        return cls(
            left=tuple(d["left"]),
            right=tuple(d["right"]),
            score=float(d["score"]),
            merged_into=d["merged_into"],
        )


@dataclass(slots=True)
class RelationMapping:
    """How one source relation label lands in the canonical taxonomy."""

    source_label: str
    target: str
    score: float
    origin: str  # "static_table" | "predictor"

    def to_dict(self) -> dict[str, Any]:
        return {
            "source_label": self.source_label,
            "target": self.target,
            "score": self.score,
            "origin": self.origin,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RelationMapping:
        return cls(d["source_label"], d["target"], float(d["score"]), d["origin"])


@dataclass(slots=True)
class MergeReport:
    """Audit record of a merge: decisions, mappings, created adjacency."""

    tau: float | None
    decisions: list[AlignmentDecision] = field(default_factory=list)
    mappings: list[RelationMapping] = field(default_factory=list)
    delta_edges: list[Triple] = field(default_factory=list)
    canonical_map: dict[str, str] = field(default_factory=dict)
    source_stats: dict[str, dict[str, int]] = field(default_factory=dict)


def write_merge_report(report: MergeReport, path: str, meta: dict | None = None) -> None:
    """One JSONL record per decision/mapping/delta edge, meta first."""
    with open(path, "w", encoding="utf-8") as fh:
        head = {
            "kind": "meta",
            "tau": report.tau,
            "canonical_map": dict(sorted(report.canonical_map.items())),
            "source_stats": dict(sorted(report.source_stats.items())),
            **(meta or {}),
        }
        fh.write(json.dumps(head, sort_keys=True) + "\n")
        for d in report.decisions:
            fh.write(json.dumps({"kind": "decision", **d.to_dict()}, sort_keys=True) + "\n")
        for m in report.mappings:
            fh.write(json.dumps({"kind": "mapping", **m.to_dict()}, sort_keys=True) + "\n")
        for t in report.delta_edges:
            fh.write(json.dumps({"kind": "delta", **t.to_dict()}, sort_keys=True) + "\n")


def read_merge_report(path: str) -> MergeReport:
    report = MergeReport(tau=None)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            kind = record.get("kind")
            if kind == "meta":
                report.tau = record.get("tau")
                report.canonical_map = dict(record.get("canonical_map", {}))
                report.source_stats = {
                    k: dict(v) for k, v in record.get("source_stats", {}).items()
                }
            elif kind == "decision":
                report.decisions.append(AlignmentDecision.from_dict(record))
            elif kind == "mapping":
                report.mappings.append(RelationMapping.from_dict(record))
            elif kind == "delta":
                report.delta_edges.append(Triple.from_dict(record))
            else:
                raise ParseError(f"unknown record kind {kind!r}", line=lineno, path=path)
    return report


# ----------------------------------------------------------------------
# entity alignment


def _mapped_type(node_type: str, type_map: dict[str, str] | None) -> str:
    if type_map is None:
        return node_type
    return type_map.get(node_type, node_type)


def _graph_names(graphs: Sequence[KnowledgeGraph]) -> list[str]:
    names = []
    for i, g in enumerate(graphs):
        names.append(g.name or f"g{i}")
    if len(set(names)) != len(names):
        raise ValueError(f"graph names must be unique, got {names}")
    return names


def align_nodes(
    graphs: Sequence[KnowledgeGraph],
    provider: EmbeddingProvider,
    tau: float = DEFAULT_TAU,
    *,
    type_map: dict[str, str] | None = None,
) -> list[AlignmentDecision]:
    """Propose cross-source equivalences.

    Candidates are node pairs from different graphs whose (mapped) types
    agree; a pair is accepted when the best cosine similarity over both
    nodes' label forms (label plus aliases) reaches ``tau``.  Accepted
    pairs are transitively unioned and ``merged_into`` names each
    component's lexicographically smallest id.  A ``tau`` above 1 is
    legal and matches nothing.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    names = _graph_names(graphs)

    # type bucket -> per graph: list of (node, form embeddings matrix)
    buckets: dict[str, dict[int, list[Node]]] = {}
    for gi, g in enumerate(graphs):
        for node in g.nodes():
            buckets.setdefault(_mapped_type(node.node_type, type_map), {}).setdefault(
                gi, []
            ).append(node)

    raw: list[tuple[int, str, int, str, float]] = []
    if tau <= 1.0:
        for node_type in sorted(buckets):
            per_graph = buckets[node_type]
            indices = sorted(per_graph)
            if len(indices) < 2:
                continue
            embeds: dict[int, tuple[list[Node], np.ndarray, list[tuple[int, int]]]] = {}
            for gi in indices:
                nodes = sorted(per_graph[gi], key=lambda n: n.id)
                rows: list[np.ndarray] = []
                spans: list[tuple[int, int]] = []
                for node in nodes:
                    start = len(rows)
                    for form in node.label_forms():
                        rows.append(provider.embed(form).values)
                    spans.append((start, len(rows)))
                mat = np.stack(rows)
                norms = np.linalg.norm(mat, axis=1, keepdims=True)
                mat = mat / np.where(norms == 0.0, 1.0, norms)
                embeds[gi] = (nodes, mat, spans)
            for ai in range(len(indices)):
                for bi in range(ai + 1, len(indices)):
                    ga, gb = indices[ai], indices[bi]
                    nodes_a, mat_a, spans_a = embeds[ga]
                    nodes_b, mat_b, spans_b = embeds[gb]
                    sims = mat_a @ mat_b.T
                    for na, (a0, a1) in zip(nodes_a, spans_a):
                        block = sims[a0:a1]
                        for nb, (b0, b1) in zip(nodes_b, spans_b):
                            score = float(block[:, b0:b1].max())
                            if score >= tau:
                                raw.append((ga, na.id, gb, nb.id, min(1.0, score)))

    uf = UnionFind()
    for ga, ida, gb, idb, _ in raw:
        uf.union(ida, idb)
    decisions = [
        AlignmentDecision(
            left=(names[ga], ida),
            right=(names[gb], idb),
            score=score,
            merged_into=uf.find(ida),
        )
        for ga, ida, gb, idb, score in sorted(raw)
    ]
    return decisions


# ----------------------------------------------------------------------
# relation unification

LabelScorer = Callable[[str, str], float]

_CAMEL_RE = re.compile(r"[A-Z][a-z0-9]*")


def canonical_relation_phrase(relation: str) -> str:
    """AssociatedWith -> "associated with", for similarity scoring."""
    parts = _CAMEL_RE.findall(relation)
    return " ".join(p.lower() for p in parts) if parts else relation.lower()


class EmbeddingLabelScorer:
    """Scores a source label against a canonical relation by embedding cosine.

    Both sides are tokenized and re-joined so that underscore and case
    variants of the same words score 1.0.
    """

    def __init__(self, provider: EmbeddingProvider):
        self.provider = provider

    def __call__(self, label: str, canonical: str) -> float:
        left = " ".join(tokenize(label)) or label.lower()
        right = " ".join(tokenize(canonical_relation_phrase(canonical)))
        return cosine_sim(self.provider.embed(left), self.provider.embed(right))


def _identity_target(label: str) -> str | None:
    squashed = "".join(tokenize(label))
    for canonical in RELATION_TYPES:
        if squashed == canonical.lower():
            return canonical
    return None


def unify_relations(
    labels: Iterable[str],
    scorer: LabelScorer | None = None,
    static_table: dict[str, str] | None = None,
    *,
    tau_rel: float = DEFAULT_TAU_REL,
) -> list[RelationMapping]:
    """Map source relation labels onto the canonical taxonomy.

    Resolution order per label: explicit static table entry, identity
    (case/underscore-insensitive match of a canonical name), then the
    scorer against all seven canonical relations; a best score below
    ``tau_rel`` falls back to AssociatedWith with the failing score
    recorded.  Static table targets outside the taxonomy are rejected.
    """
    static_table = static_table or {}
    for key, target in static_table.items():
        if target not in RELATION_TYPES:
            raise ConfigError(f"static table maps {key!r} to unknown relation {target!r}")

    out: list[RelationMapping] = []
    for label in sorted(set(labels)):
        if label in static_table:
            out.append(RelationMapping(label, static_table[label], 1.0, "static_table"))
            continue
        identity = _identity_target(label)
        if identity is not None:
            out.append(RelationMapping(label, identity, 1.0, "static_table"))
            continue
        if scorer is None:
            out.append(RelationMapping(label, FALLBACK_RELATION, 0.0, "predictor"))
            continue
        scored = sorted(
            ((scorer(label, canonical), canonical) for canonical in sorted(RELATION_TYPES)),
            key=lambda pair: (-pair[0], pair[1]),
        )
        best_score, best = scored[0]
        if best_score >= tau_rel:
            out.append(RelationMapping(label, best, float(best_score), "predictor"))
        else:
            out.append(RelationMapping(label, FALLBACK_RELATION, float(best_score), "predictor"))
    return out


# ----------------------------------------------------------------------
# merging


def merge_graphs(
    graphs: Sequence[KnowledgeGraph],
    decisions: Sequence[AlignmentDecision],
    mappings: Sequence[RelationMapping],
    *,
    type_map: dict[str, str] | None = None,
    tau: float | None = None,
    name: str = "merged",
) -> tuple[KnowledgeGraph, MergeReport]:
    """Union the graphs under the given equivalences and relation mappings.

    Aligned components collapse onto their smallest id; that node's
    label wins and every other label survives as an alias.  Relation
    labels found in ``mappings`` are rewritten, unlisted labels pass
    through untouched (so merging with empty mappings is the identity on
    relations).  delta_edges lists merged triples whose head/tail pair
    is adjacent in no single source after id rewriting.
    """
    names = _graph_names(graphs)
    by_name = dict(zip(names, graphs))

    uf = UnionFind()
    for g in graphs:
        for node_id in g.node_ids():
            uf.add(node_id)
    for d in decisions:
        for source, node_id in (d.left, d.right):
            g = by_name.get(source)
            if g is None:
                raise ValueError(f"alignment decision references unknown source {source!r}")
            if not g.has_node(node_id):
                raise ValueError(
                    f"alignment decision references unknown node {node_id!r} in {source!r}"
                )
        uf.union(d.left[1], d.right[1])

    rel_map: dict[str, str] = {}
    for m in mappings:
        if m.target not in RELATION_TYPES:
            raise ConfigError(f"mapping targets unknown relation {m.target!r}")
        rel_map[m.source_label] = m.target

    # group member nodes by canonical id, in (graph, id) order
    members: dict[str, list[Node]] = {}
    for g in graphs:
        for node_id in sorted(g.node_ids()):
            members.setdefault(uf.find(node_id), []).append(g.node(node_id))

    merged = KnowledgeGraph(name)
    for canon in sorted(members):
        group = members[canon]
        base = next((n for n in group if n.id == canon), group[0])
        base_type = _mapped_type(base.node_type, type_map)
        target = Node(
            id=canon,
            label=base.label,
            node_type=base_type,
            aliases=set(base.aliases),
            description=base.description,
            sources=set(base.sources),
        )
        merged.add_node(target)
        stored = merged.node(canon)
        for other in group:
            if other is base:
                continue
            other_type = _mapped_type(other.node_type, type_map)
            if other_type != base_type:
                raise TypeConflictError(
                    f"component {canon!r}: type {other_type!r} conflicts with {base_type!r}"
                )
            merge_node_into(stored, other)

    source_adjacency: set[tuple[str, str]] = set()
    for g in graphs:
        for t in g.triples():
            source_adjacency.add((uf.find(t.head), uf.find(t.tail)))
        for t in sorted(g.triples(), key=lambda tr: tr.key()):
            merged.add_triple(
                Triple(
                    head=uf.find(t.head),
                    relation=rel_map.get(t.relation, t.relation),
                    tail=uf.find(t.tail),
                    provenance=t.provenance,
                    confidence=t.confidence,
                )
            )

    delta = [t for t in merged.triples() if (t.head, t.tail) not in source_adjacency]
    report = MergeReport(
        tau=tau,
        decisions=list(decisions),
        mappings=list(mappings),
        delta_edges=delta,
        canonical_map={
            node_id: canon
            for canon, group in members.items()
            for node_id in (n.id for n in group)
            if node_id != canon
        },
        source_stats={
            g.name or f"g{i}": {"nodes": g.node_count, "edges": g.edge_count}
            for i, g in enumerate(graphs)
        },
    )
    return merged, report
