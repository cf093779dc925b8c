"""Knowledge-graph fusion workbench.

Ingest ontology and edge-list sources, align and merge them into one
typed graph, expand it with probabilistic relation predictions under
human review, and evaluate the result with integration metrics and
embedding-based link prediction.
"""

from .graph import (
    NODE_TYPES,
    PROVENANCE_MERGED,
    PROVENANCE_PREDICTED,
    RELATION_TYPES,
    KnowledgeGraph,
    Node,
    StatsReport,
    Triple,
    read_jsonl,
    source_provenance,
    write_jsonl,
)
from .pipeline import PipelineConfig, PipelineResult, run_pipeline

__all__ = [
    "NODE_TYPES",
    "RELATION_TYPES",
    "PROVENANCE_MERGED",
    "PROVENANCE_PREDICTED",
    "KnowledgeGraph",
    "Node",
    "StatsReport",
    "Triple",
    "read_jsonl",
    "write_jsonl",
    "source_provenance",
    "PipelineConfig",
    "PipelineResult",
    "run_pipeline",
]

__version__ = "0.1.0"
