"""Integration quality metrics for merged knowledge graphs.

Every score lives in [0, 1]; report rendering multiplies by 100. A
zero denominator never raises: the metric comes back 0.0 and the
result carries a warning string instead.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .align import MergeReport
from .errors import ConfigError, ParseError
from .graph import (
    PROVENANCE_PREDICTED,
    RELATION_TYPES,
    KnowledgeGraph,
    Triple,
    is_source_provenance,
)

_DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_CONSTRAINTS_PATH = _DATA_DIR / "relation_constraints.tsv"

WILDCARD = "*"


# ---------------------------------------------------------------------------
# precision / recall / F1


@dataclass
class PRFResult:
    """Set-overlap scores plus the raw counts they came from."""

    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    warnings: list[str] = field(default_factory=list)


def prf_from_counts(tp: int, fp: int, fn: int) -> PRFResult:
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    warnings: list[str] = []
    if tp + fp == 0:
        precision = 0.0
        warnings.append("precision undefined: no predictions; reported as 0.0")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        warnings.append("recall undefined: empty gold set; reported as 0.0")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1 = 0.0
        warnings.append("f1 undefined: precision + recall is 0; reported as 0.0")
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return PRFResult(precision, recall, f1, tp, fp, fn, warnings)


def precision_recall_f1(predicted: Iterable, gold: Iterable) -> PRFResult:
    """Score a predicted collection against a gold collection.

    Elements can be anything hashable (triple keys, pairs, ids).
    """
    pred = set(predicted)
    gold_set = set(gold)
    tp = len(pred & gold_set)
    return prf_from_counts(tp, len(pred) - tp, len(gold_set) - tp)


# ---------------------------------------------------------------------------
# coverage


@dataclass
class CoverageResult:
    """How much of the source material survived into the merged graph.

    ``literal`` divides surviving elements by the plain sum of source
    sizes, so merging duplicates pushes it below 1.0 by design.
    ``union_based`` divides by the number of distinct source elements
    after identity rewriting, which treats deduplication as lossless.
    """

    literal: float
    union_based: float
    surviving_nodes: int
    surviving_edges: int
    warnings: list[str] = field(default_factory=list)


def _traces_to_source(triple: Triple) -> bool:
    return is_source_provenance(triple.provenance)


def coverage(
    merged: KnowledgeGraph,
    sources: Sequence[KnowledgeGraph],
    report: MergeReport | None = None,
) -> CoverageResult:
    """Measure retention of source nodes and edges in ``merged``.

    The union variant needs ``report`` to rewrite source identities
    through the merge's canonical map and relation mappings; without a
    report the identity rewrite is empty (plain union).
    """
    surviving_nodes = sum(1 for n in merged.nodes() if n.sources)
    surviving_edges = sum(1 for t in merged.triples() if _traces_to_source(t))
    surviving = surviving_nodes + surviving_edges

    literal_denom = sum(g.node_count + g.edge_count for g in sources)

    canon: Mapping[str, str] = report.canonical_map if report else {}
    rel_map = {m.source_label: m.target for m in report.mappings} if report else {}

    distinct_nodes: set[str] = set()
    distinct_edges: set[tuple[str, str, str]] = set()
    for g in sources:
        for node in g.nodes():
            distinct_nodes.add(canon.get(node.id, node.id))
        for t in g.triples():
            rel = rel_map.get(t.relation, t.relation)
            distinct_edges.add((canon.get(t.head, t.head), rel, canon.get(t.tail, t.tail)))
    union_denom = len(distinct_nodes) + len(distinct_edges)

    warnings: list[str] = []
    if literal_denom == 0:
        literal = 0.0
        warnings.append("coverage undefined: sources are empty; reported as 0.0")
    else:
        literal = surviving / literal_denom
    if union_denom == 0:
        union_based = 0.0
        if not warnings:
            warnings.append("coverage undefined: sources are empty; reported as 0.0")
    else:
        union_based = surviving / union_denom
    return CoverageResult(literal, union_based, surviving_nodes, surviving_edges, warnings)


# ---------------------------------------------------------------------------
# novelty


def novelty_score(graph: KnowledgeGraph) -> float:
    """Fraction of edges carrying predicted provenance. 0.0 when empty."""
    total = graph.edge_count
    if total == 0:
        return 0.0
    predicted = sum(1 for t in graph.triples() if t.provenance == PROVENANCE_PREDICTED)
    return predicted / total


# ---------------------------------------------------------------------------
# consistency


@dataclass(frozen=True)
class RelationConstraint:
    relation: str
    head_types: frozenset[str]
    tail_types: frozenset[str]

    def allows_head(self, node_type: str) -> bool:
        return WILDCARD in self.head_types or node_type in self.head_types

    def allows_tail(self, node_type: str) -> bool:
        return WILDCARD in self.tail_types or node_type in self.tail_types


def _parse_type_set(cell: str, line_no: int, path: str | None) -> frozenset[str]:
    names = frozenset(part.strip() for part in cell.split("|") if part.strip())
    if not names:
        raise ParseError("empty type list", line=line_no, path=path)
    return names


def load_constraints(source) -> dict[str, RelationConstraint]:
    """Read a relation constraint table from TSV.

    Columns: relation, head_types, tail_types. Type cells are
    ``|``-separated node type names; ``*`` allows any type.
    """
    if isinstance(source, (str, Path)):
        path = str(source)
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        path = getattr(source, "name", None)
        lines = [ln.rstrip("\n") for ln in source]
    if not lines:
        raise ParseError("constraint table is empty", line=1, path=path)
    header = lines[0].rstrip("\r").split("\t")
    if header != ["relation", "head_types", "tail_types"]:
        raise ParseError(
            "expected header 'relation\\thead_types\\ttail_types'", line=1, path=path
        )
    table: dict[str, RelationConstraint] = {}
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 3:
            raise ParseError(f"expected 3 columns, got {len(cells)}", line=line_no, path=path)
        relation = cells[0].strip()
        if not relation:
            raise ParseError("empty relation name", line=line_no, path=path)
        if relation in table:
            raise ParseError(f"duplicate constraint for {relation!r}", line=line_no, path=path)
        table[relation] = RelationConstraint(
            relation,
            _parse_type_set(cells[1], line_no, path),
            _parse_type_set(cells[2], line_no, path),
        )
    return table


def default_constraints() -> dict[str, RelationConstraint]:
    return load_constraints(DEFAULT_CONSTRAINTS_PATH)


CHECK_REFERENTIAL = "referential"
CHECK_RELATION = "relation_taxonomy"
CHECK_DOMAIN_RANGE = "domain_range"
CHECKS_PER_EDGE = 3


@dataclass(frozen=True)
class Violation:
    triple: tuple[str, str, str]
    check: str
    detail: str


@dataclass
class ConsistencyResult:
    score: float
    checks: int
    violations: list[Violation]
    warnings: list[str] = field(default_factory=list)


def consistency_check(
    graph: KnowledgeGraph,
    constraints: Mapping[str, RelationConstraint] | None = None,
) -> ConsistencyResult:
    """Run three structural checks per edge and score the pass rate.

    Checks: both endpoints resolve to nodes, the relation belongs to
    the canonical taxonomy, and the endpoint types satisfy the
    relation's constraint row (relations without a row pass freely).
    """
    if constraints is None:
        constraints = default_constraints()
    for name in constraints:
        if name not in RELATION_TYPES:
            raise ConfigError(f"constraint references unknown relation {name!r}")

    violations: list[Violation] = []
    node_ids = {n.id for n in graph.nodes()}
    types = {n.id: n.node_type for n in graph.nodes()}
    edges = sorted(graph.triples(), key=lambda t: t.key())
    for t in edges:
        key = t.key()
        missing = [e for e in (t.head, t.tail) if e not in node_ids]
        if missing:
            violations.append(
                Violation(key, CHECK_REFERENTIAL, f"missing endpoint(s): {', '.join(missing)}")
            )
        if t.relation not in RELATION_TYPES:
            violations.append(
                Violation(key, CHECK_RELATION, f"unknown relation {t.relation!r}")
            )
        rule = constraints.get(t.relation)
        if rule is not None and not missing:
            bad_parts = []
            if not rule.allows_head(types[t.head]):
                bad_parts.append(f"head type {types[t.head]!r}")
            if not rule.allows_tail(types[t.tail]):
                bad_parts.append(f"tail type {types[t.tail]!r}")
            if bad_parts:
                violations.append(
                    Violation(
                        key,
                        CHECK_DOMAIN_RANGE,
                        f"{t.relation} forbids " + " and ".join(bad_parts),
                    )
                )

    checks = CHECKS_PER_EDGE * len(edges)
    warnings: list[str] = []
    if checks == 0:
        score = 1.0
        warnings.append("consistency vacuous: graph has no edges; reported as 1.0")
    else:
        score = 1.0 - len(violations) / checks
    return ConsistencyResult(score, checks, violations, warnings)


# ---------------------------------------------------------------------------
# report assembly


NOT_MEASURED = "not measured"


@dataclass
class MetricReport:
    """Bundle of integration metrics plus optional run instrumentation."""

    precision: float
    recall: float
    f1: float
    coverage_literal: float
    coverage_union: float
    novelty: float
    consistency: float
    expert_validation: float | None = None
    warnings: list[str] = field(default_factory=list)
    timings: dict[str, float] | None = None
    peak_memory_bytes: int | None = None

    def rows(self) -> dict[str, float | str]:
        """Percentage view of every score, in a stable row order."""
        out: dict[str, float | str] = {
            "Precision": round(self.precision * 100.0, 4),
            "Recall": round(self.recall * 100.0, 4),
            "F1-Score": round(self.f1 * 100.0, 4),
            "Coverage": round(self.coverage_literal * 100.0, 4),
            "Graph Consistency": round(self.consistency * 100.0, 4),
            "Novelty Detection": round(self.novelty * 100.0, 4),
        }
        if self.expert_validation is None:
            out["Expert Validation"] = NOT_MEASURED
        else:
            out["Expert Validation"] = round(self.expert_validation * 100.0, 4)
        return out

    def to_dict(self) -> dict:
        return {
            "rows": self.rows(),
            "raw": {
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "coverage_literal": self.coverage_literal,
                "coverage_union": self.coverage_union,
                "novelty": self.novelty,
                "consistency": self.consistency,
                "expert_validation": self.expert_validation,
            },
            "warnings": list(self.warnings),
            "timings": self.timings if self.timings is not None else NOT_MEASURED,
            "peak_memory_bytes": (
                self.peak_memory_bytes if self.peak_memory_bytes is not None else NOT_MEASURED
            ),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def build_metric_report(
    merged: KnowledgeGraph,
    sources: Sequence[KnowledgeGraph],
    report: MergeReport | None = None,
    predicted: Iterable | None = None,
    gold: Iterable | None = None,
    constraints: Mapping[str, RelationConstraint] | None = None,
    expert_validation: float | None = None,
    timings: dict[str, float] | None = None,
    peak_memory_bytes: int | None = None,
) -> MetricReport:
    """Compute every metric the report knows about in one pass.

    Precision, recall, and F1 need a prediction/gold pairing; when
    either is absent all three come back 0.0 with a warning so the
    report shape stays stable.
    """
    warnings: list[str] = []
    if predicted is None or gold is None:
        prf = PRFResult(0.0, 0.0, 0.0, 0, 0, 0)
        warnings.append("precision/recall/f1 not evaluated: no gold pairing supplied")
    else:
        prf = precision_recall_f1(predicted, gold)
        warnings.extend(prf.warnings)
    cov = coverage(merged, sources, report)
    warnings.extend(cov.warnings)
    cons = consistency_check(merged, constraints)
    warnings.extend(cons.warnings)
    return MetricReport(
        precision=prf.precision,
        recall=prf.recall,
        f1=prf.f1,
        coverage_literal=cov.literal,
        coverage_union=cov.union_based,
        novelty=novelty_score(merged),
        consistency=cons.score,
        expert_validation=expert_validation,
        warnings=warnings,
        timings=timings,
        peak_memory_bytes=peak_memory_bytes,
    )


# ---------------------------------------------------------------------------
# efficiency instrumentation


class StageTimer:
    """Wall-clock stage timer feeding efficiency_report.

    Usage: ``with timer.stage("merge"): ...``. Stages are cumulative
    when re-entered.
    """

    def __init__(self) -> None:
        self.timings: dict[str, float] = {}

    class _Stage:
        def __init__(self, owner: "StageTimer", name: str) -> None:
            self.owner = owner
            self.name = name

        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc) -> None:
            elapsed = time.perf_counter() - self.start
            self.owner.timings[self.name] = self.owner.timings.get(self.name, 0.0) + elapsed

    def stage(self, name: str) -> "StageTimer._Stage":
        return StageTimer._Stage(self, name)


def peak_memory() -> int | None:
    """Peak RSS of this process in bytes, when the platform reports it."""
    try:
        import resource
    except ImportError:  # pragma: no cover
        return None
    usage = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    if usage <= 0:  # pragma: no cover
        return None
    import sys

    # Linux reports kilobytes, macOS reports bytes.
    return usage if sys.platform == "darwin" else usage * 1024


def efficiency_report(
    timings: Mapping[str, float] | None,
    peak_memory_bytes: int | None = None,
) -> dict:
    """Render instrumentation into a report fragment.

    Missing measurements come through as the literal string
    ``"not measured"`` rather than fabricated numbers.
    """
    if timings:
        out_timings: dict | str = {k: timings[k] for k in sorted(timings)}
        total: float | str = sum(timings.values())
    else:
        out_timings = NOT_MEASURED
        total = NOT_MEASURED
    return {
        "timings_seconds": out_timings,
        "total_seconds": total,
        "peak_memory_bytes": peak_memory_bytes if peak_memory_bytes is not None else NOT_MEASURED,
    }
