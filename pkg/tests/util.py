"""Small builders shared by the test modules."""

from __future__ import annotations

from kgfuse.graph import KnowledgeGraph, Node, Triple, source_provenance


def mk_node(node_id: str, label: str | None = None, node_type: str = "Genes", **kw) -> Node:
    return Node(id=node_id, label=label if label is not None else node_id, node_type=node_type, **kw)


def mk_graph(name: str, nodes, triples=()) -> KnowledgeGraph:
    """Build a graph from (id, label, type) tuples and (h, r, t) tuples."""
    g = KnowledgeGraph(name)
    for node_id, label, node_type in nodes:
        g.add_node(Node(id=node_id, label=label, node_type=node_type, sources={name} if name else set()))
    prov = source_provenance(name) if name else "merged"
    for h, r, t in triples:
        g.add_triple(Triple(head=h, relation=r, tail=t, provenance=prov))
    return g
