#!/usr/bin/env python3
"""Run the full fusion pipeline on a small bundled corpus.

Builds one OBO source and two edge-list sources in a scratch directory,
merges them with scripted aliases, expands, and prints the metric table.
"""
import argparse
import json
import tempfile
from pathlib import Path

from kgfuse.pipeline import PipelineConfig, run_pipeline

OBO = """\
format-version: 1.2
ontology: demo-diseases

[Term]
id: DD:0001
name: alzheimer's disease
synonym: "AD" EXACT []

[Term]
id: DD:0002
name: parkinson's disease
synonym: "PD" EXACT []
is_a: DD:0001 ! placeholder lineage for the demo
"""

GENE_EDGES = """\
head_id\thead_label\thead_type\trelation\ttail_id\ttail_label\ttail_type
GN:1\tBDNF\tGenes\tAssociatedWith\tDS:1\talzheimer's disease\tDiseases
GN:2\tAPOE\tGenes\tCauses\tDS:1\talzheimer's disease\tDiseases
GN:3\tSNCA\tGenes\tCauses\tDS:2\tparkinson's disease\tDiseases
GN:1\tBDNF\tGenes\tInvolvedIn\tPW:1\tneurotrophin signaling\tBiologicalPathways
"""

COGNITION_EDGES = """\
head_id\thead_label\thead_type\trelation\ttail_id\ttail_label\ttail_type
CG:1\tworking memory\tCognitiveProcesses\tis_linked_to\tCG:9\tAD\tDiseases
CG:2\tmotor control\tCognitiveProcesses\tis_linked_to\tCG:8\tPD\tDiseases
CG:3\tepisodic memory\tCognitiveProcesses\tis_linked_to\tCG:9\tAD\tDiseases
"""


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=None, help="output directory (default: temp)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    work = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="kgfuse-demo-"))
    work.mkdir(parents=True, exist_ok=True)
    (work / "diseases.obo").write_text(OBO)
    (work / "genes.tsv").write_text(GENE_EDGES)
    (work / "cognition.tsv").write_text(COGNITION_EDGES)

    config = PipelineConfig(
        sources=[
            {"name": "diseases", "format": "obo", "path": str(work / "diseases.obo"),
             "default_node_type": "Diseases"},
            {"name": "genes", "format": "edge_tsv", "path": str(work / "genes.tsv")},
            {"name": "cognition", "format": "edge_tsv", "path": str(work / "cognition.tsv")},
        ],
        alias_table={"AD": "alzheimer's disease", "PD": "parkinson's disease"},
        seed=args.seed,
        deterministic=True,
        max_iterations=2,
    )
    result = run_pipeline(config, work / "run")

    print(f"config hash  {result.config_hash}")
    print(f"merged graph {result.merged.node_count} nodes, {result.merged.edge_count} edges")
    print(f"alignments   {len(result.report.decisions)}")
    for d in result.report.decisions:
        print(f"  {d.left[0]}:{d.left[1]} == {d.right[0]}:{d.right[1]}  (cos {d.score:.3f})")
    print("relation map")
    for m in result.report.mappings:
        print(f"  {m.source_label} -> {m.target}  ({m.origin})")
    print("metrics")
    for row, value in result.metrics.rows().items():
        print(f"  {row:20s} {value}")
    print(f"outputs under {work / 'run'}")
    print(json.dumps({k: str(Path(v).name) for k, v in result.outputs.items()}, indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
