"""Typed directed multigraph for biomedical knowledge.

Nodes carry a type label, triples carry a relation label, and both keep
provenance so merged graphs stay auditable.  Adjacency is always derived
from the triple store; nothing here materialises a dense matrix.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .errors import (
    ParseError,
    ReferentialIntegrityError,
    TypeConflictError,
    UnknownNodeError,
)

# Canonical taxonomy of the fused graph.  Source-native types and relation
# labels are carried through ingestion unchanged and only mapped onto these
# during merging.
NODE_TYPES: frozenset[str] = frozenset(
    {"Genes", "Diseases", "CognitiveProcesses", "BiologicalPathways", "TherapeuticTargets"}
)
RELATION_TYPES: frozenset[str] = frozenset(
    {"Causes", "AssociatedWith", "Regulates", "InvolvedIn", "TreatedBy", "Influences", "LinkedTo"}
)

# Provenance strings: "source:<name>" for ingested elements, or one of the
# two literals below.
PROVENANCE_MERGED = "merged"
PROVENANCE_PREDICTED = "predicted"


def source_provenance(name: str) -> str:
    """Provenance tag for an element ingested from a named source."""
    if not name:
        raise ValueError("source name must be non-empty")
    return f"source:{name}"


def is_source_provenance(tag: str) -> bool:
    return tag.startswith("source:")


@dataclass(slots=True)
class Node:
    """A typed entity with a primary label and optional aliases."""

    id: str
    label: str
    node_type: str
    aliases: set[str] = field(default_factory=set)
    description: str | None = None
    sources: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("node id must be non-empty")
        if not self.node_type:
            raise ValueError(f"node {self.id!r} has empty node_type")
        if any(not a for a in self.aliases):
            raise ValueError(f"node {self.id!r} has an empty alias")

    def copy(self) -> Node:
        return Node(
            id=self.id,
            label=self.label,
            node_type=self.node_type,
            aliases=set(self.aliases),
            description=self.description,
            sources=set(self.sources),
        )

    def label_forms(self) -> list[str]:
        """Label plus aliases, deduplicated, label first."""
        forms = [self.label]
        for alias in sorted(self.aliases):
            if alias != self.label:
                forms.append(alias)
        return forms

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.id,
            "label": self.label,
            "node_type": self.node_type,
            "aliases": sorted(self.aliases),
            "sources": sorted(self.sources),
        }
        if self.description is not None:
            d["description"] = self.description
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Node:
        return cls(
            id=d["id"],
            label=d["label"],
            node_type=d["node_type"],
            aliases=set(d.get("aliases", ())),
            description=d.get("description"),
            sources=set(d.get("sources", ())),
        )


@dataclass(frozen=True, slots=True)
class Triple:
    """One directed edge: (head, relation, tail) with provenance."""

    head: str
    relation: str
    tail: str
    provenance: str
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if not self.relation:
            raise ValueError("relation must be non-empty")

    def key(self) -> tuple[str, str, str]:
        return (self.head, self.relation, self.tail)

    def to_dict(self) -> dict[str, Any]:
        return {
            "head": self.head,
            "relation": self.relation,
            "tail": self.tail,
            "provenance": self.provenance,
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Triple:
        return cls(
            head=d["head"],
            relation=d["relation"],
            tail=d["tail"],
            provenance=d.get("provenance", PROVENANCE_MERGED),
            confidence=float(d.get("confidence", 1.0)),
        )


@dataclass(slots=True)
class StatsReport:
    """Node/edge counts with per-type and per-relation breakdowns."""

    node_count: int
    edge_count: int
    nodes_by_type: dict[str, int]
    edges_by_relation: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "nodes_by_type": dict(sorted(self.nodes_by_type.items())),
            "edges_by_relation": dict(sorted(self.edges_by_relation.items())),
        }


class KnowledgeGraph:
    """Mutable triple store with typed nodes.

    Construction is single-writer; hand out copies (``copy()``) when a
    frozen snapshot is needed.  Duplicate triples collapse to the
    higher-confidence copy, and every triple's endpoints must already be
    present as nodes.
    """

    def __init__(self, name: str = "") -> None:
        self.name = name
        self._nodes: dict[str, Node] = {}
        self._triples: dict[tuple[str, str, str], Triple] = {}
        # Outbound and inbound index per node id, for neighborhood walks.
        self._out: dict[str, set[tuple[str, str, str]]] = {}
        self._in: dict[str, set[tuple[str, str, str]]] = {}

    # ------------------------------------------------------------------
    # nodes

    def add_node(self, node: Node) -> Node:
        """Insert a node, or merge into the existing one with the same id.

        Merging unions aliases and sources and fills a missing
        description; a differing label is kept as an alias so nothing is
        dropped.  A differing node_type is a hard error.
        """
        existing = self._nodes.get(node.id)
        if existing is None:
            stored = node.copy()
            self._nodes[node.id] = stored
            self._out.setdefault(node.id, set())
            self._in.setdefault(node.id, set())
            return stored
        if existing.node_type != node.node_type:
            raise TypeConflictError(
                f"node {node.id!r}: type {node.node_type!r} conflicts with existing "
                f"{existing.node_type!r}"
            )
        existing.aliases |= node.aliases
        if node.label != existing.label:
            existing.aliases.add(node.label)
        if existing.description is None and node.description is not None:
            existing.description = node.description
        existing.sources |= node.sources
        return existing

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def nodes(self) -> Iterator[Node]:
        return iter(self._nodes.values())

    def node_ids(self) -> list[str]:
        return list(self._nodes)

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    # ------------------------------------------------------------------
    # triples

    def add_triple(self, triple: Triple) -> Triple:
        """Insert a triple; both endpoints must resolve to known nodes.

        A duplicate (same head/relation/tail) keeps whichever copy has
        the higher confidence.
        """
        missing = [i for i in (triple.head, triple.tail) if i not in self._nodes]
        if missing:
            raise ReferentialIntegrityError(
                f"triple {triple.key()} references unknown node(s): {', '.join(missing)}"
            )
        key = triple.key()
        existing = self._triples.get(key)
        if existing is not None and existing.confidence >= triple.confidence:
            return existing
        self._triples[key] = triple
        self._out[triple.head].add(key)
        self._in[triple.tail].add(key)
        return triple

    def remove_triple(self, head: str, relation: str, tail: str) -> bool:
        """Delete a triple if present; returns whether anything was removed."""
        key = (head, relation, tail)
        if key not in self._triples:
            return False
        del self._triples[key]
        self._out[head].discard(key)
        self._in[tail].discard(key)
        return True

    def has_triple(self, head: str, relation: str, tail: str) -> bool:
        return (head, relation, tail) in self._triples

    def triples(self) -> Iterator[Triple]:
        return iter(self._triples.values())

    @property
    def edge_count(self) -> int:
        return len(self._triples)

    def adjacent(self, head_id: str, tail_id: str, relation: str | None = None) -> bool:
        """Directed adjacency derived from the triple store.

        With ``relation`` given, only that relation counts.  Unknown ids
        are an error rather than a silent False.
        """
        for node_id in (head_id, tail_id):
            if node_id not in self._nodes:
                raise UnknownNodeError(node_id)
        if relation is not None:
            return (head_id, relation, tail_id) in self._triples
        return any(key[2] == tail_id for key in self._out[head_id])

    def out_triples(self, node_id: str) -> list[Triple]:
        self.node(node_id)
        return [self._triples[k] for k in sorted(self._out[node_id])]

    def in_triples(self, node_id: str) -> list[Triple]:
        self.node(node_id)
        return [self._triples[k] for k in sorted(self._in[node_id])]

    def undirected_neighbors(self, node_id: str) -> set[str]:
        self.node(node_id)
        out_n = {k[2] for k in self._out[node_id]}
        in_n = {k[0] for k in self._in[node_id]}
        return (out_n | in_n) - {node_id}

    # ------------------------------------------------------------------
    # derived views

    @property
    def node_taxonomy(self) -> set[str]:
        """Exactly the node types appearing in the graph."""
        return {n.node_type for n in self._nodes.values()}

    @property
    def relation_taxonomy(self) -> set[str]:
        """Exactly the relation labels appearing in the graph."""
        return {t.relation for t in self._triples.values()}

    def stats(self) -> StatsReport:
        by_type = Counter(n.node_type for n in self._nodes.values())
        by_rel = Counter(t.relation for t in self._triples.values())
        return StatsReport(
            node_count=len(self._nodes),
            edge_count=len(self._triples),
            nodes_by_type=dict(by_type),
            edges_by_relation=dict(by_rel),
        )

    def copy(self, name: str | None = None) -> KnowledgeGraph:
        g = KnowledgeGraph(name if name is not None else self.name)
        for node in self._nodes.values():
            g._nodes[node.id] = node.copy()
            g._out[node.id] = set(self._out[node.id])
            g._in[node.id] = set(self._in[node.id])
        g._triples = dict(self._triples)
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._triples == other._triples

    def __repr__(self) -> str:
        return f"KnowledgeGraph({self.name!r}, nodes={self.node_count}, edges={self.edge_count})"


# ----------------------------------------------------------------------
# serialization: JSON Lines, one record per line, nodes before triples


def write_jsonl(graph: KnowledgeGraph, path: str, meta: dict[str, Any] | None = None) -> None:
    """Write the graph as JSON Lines.

    Records are ``{"kind": "node", ...}`` and ``{"kind": "triple", ...}``;
    nodes are emitted before any triple, both in sorted order so output
    bytes are stable.  An optional leading ``{"kind": "meta", ...}``
    record carries run information such as the config hash.
    """
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"kind": "meta", **meta}, sort_keys=True) + "\n")
        for node_id in sorted(graph._nodes):
            record = {"kind": "node", **graph._nodes[node_id].to_dict()}
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        for key in sorted(graph._triples):
            record = {"kind": "triple", **graph._triples[key].to_dict()}
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: str, name: str = "") -> KnowledgeGraph:
    """Read a graph written by :func:`write_jsonl`.

    Unknown record kinds and triples whose endpoints never appear are
    rejected; meta records are ignored.
    """
    graph = KnowledgeGraph(name)
    pending: list[tuple[int, Triple]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line=lineno, path=path) from None
            kind = record.get("kind")
            if kind == "meta":
                continue
            if kind == "node":
                graph.add_node(Node.from_dict(record))
            elif kind == "triple":
                pending.append((lineno, Triple.from_dict(record)))
            else:
                raise ParseError(f"unknown record kind {kind!r}", line=lineno, path=path)
    for lineno, triple in pending:
        try:
            graph.add_triple(triple)
        except ReferentialIntegrityError as exc:
            raise ReferentialIntegrityError(f"{path}:line {lineno}: {exc}") from None
    return graph


def merge_node_into(target: Node, other: Node) -> None:
    """Fold ``other``'s fields into ``target`` (same merge rules as add_node)."""
    target.aliases |= other.aliases
    if other.label != target.label:
        target.aliases.add(other.label)
    if target.description is None and other.description is not None:
        target.description = other.description
    target.sources |= other.sources


def iter_sources(graph: KnowledgeGraph) -> set[str]:
    """All source names referenced by node provenance."""
    out: set[str] = set()
    for node in graph.nodes():
        out |= node.sources
    return out
