"""Shared fixtures: scripted providers and alignment corpora."""

from __future__ import annotations

import pytest

from kgfuse.embeddings import DeterministicProvider
from kgfuse.graph import KnowledgeGraph, Node, Triple

# Four abbreviation pairs scripted to be semantic matches; everything else
# must stay below the alignment threshold under the hashed provider.
ALIAS_TABLE = {
    "AD": "alzheimer's disease",
    "PD": "parkinson's disease",
    "HD": "huntington's disease",
    "MS": "multiple sclerosis",
}

# Gold equivalences for the 20-node corpus below: (left id, right id).
ALIGNMENT_GOLD = {
    ("CN:D1", "DO:001"),
    ("CN:D2", "DO:002"),
    ("CN:D3", "DO:003"),
    ("CN:D4", "DO:004"),
}


@pytest.fixture()
def provider() -> DeterministicProvider:
    return DeterministicProvider(seed=11, alias_table=ALIAS_TABLE)


def build_alignment_pair() -> tuple[KnowledgeGraph, KnowledgeGraph]:
    """Two 10-node single-type graphs with exactly four true matches."""
    left = KnowledgeGraph("cn")
    right = KnowledgeGraph("do")
    left_labels = [
        ("CN:D1", "AD"),
        ("CN:D2", "PD"),
        ("CN:D3", "HD"),
        ("CN:D4", "MS"),
        ("CN:D5", "vascular dementia"),
        ("CN:D6", "mild cognitive impairment"),
        ("CN:D7", "temporal lobe epilepsy"),
        ("CN:D8", "major depressive disorder"),
        ("CN:D9", "bipolar disorder"),
        ("CN:D10", "generalized anxiety"),
    ]
    right_labels = [
        ("DO:001", "alzheimer's disease"),
        ("DO:002", "parkinson's disease"),
        ("DO:003", "huntington's disease"),
        ("DO:004", "multiple sclerosis"),
        ("DO:005", "amyotrophic lateral sclerosis"),
        ("DO:006", "frontotemporal lobar degeneration"),
        ("DO:007", "creutzfeldt-jakob syndrome"),
        ("DO:008", "progressive supranuclear palsy"),
        ("DO:009", "corticobasal degeneration"),
        ("DO:010", "normal pressure hydrocephalus"),
    ]
    for node_id, label in left_labels:
        left.add_node(Node(id=node_id, label=label, node_type="Diseases", sources={"cn"}))
    for node_id, label in right_labels:
        right.add_node(Node(id=node_id, label=label, node_type="Diseases", sources={"do"}))
    # a few edges so merged graphs are not edgeless
    left.add_triple(Triple("CN:D1", "LinkedTo", "CN:D5", "source:cn"))
    right.add_triple(Triple("DO:001", "is_a", "DO:006", "source:do"))
    return left, right


@pytest.fixture()
def alignment_pair() -> tuple[KnowledgeGraph, KnowledgeGraph]:
    return build_alignment_pair()
