"""End-to-end orchestration: ingest, align, merge, expand, measure.

A PipelineConfig is a plain JSON-serializable record; its sha256 hash
stamps every output file so a result can always be traced back to the
exact configuration that produced it. With the deterministic provider
and a fixed seed, two runs of the same config write byte-identical
JSON (timings are then reported as "not measured" rather than letting
wall-clock noise into the bytes).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .align import (
    DEFAULT_TAU,
    DEFAULT_TAU_REL,
    EmbeddingLabelScorer,
    MergeReport,
    align_nodes,
    merge_graphs,
    unify_relations,
    write_merge_report,
)
from .embeddings import DEFAULT_DIM, DeterministicProvider, RemoteProvider
from .errors import ConfigError
from .expand import (
    DEFAULT_DELTA_P,
    DEFAULT_SIGMA,
    DEFAULT_TAU_ACCEPT,
    ExpansionState,
    GaussianPredictor,
    run_expansion,
    write_candidate_log,
)
from .graph import KnowledgeGraph, write_jsonl
from .ingest import RemovalEntry, SourceSpec, noise_filter, parse_source
from .metrics import (
    MetricReport,
    StageTimer,
    build_metric_report,
    load_constraints,
    peak_memory,
)

_UNIT_INTERVAL_FIELDS = ("tau", "tau_rel", "tau_accept", "delta_p")


def _source_spec(entry: dict[str, Any]) -> SourceSpec:
    if not isinstance(entry, dict):
        raise ConfigError(f"source entries must be objects, got {type(entry).__name__}")
    try:
        return SourceSpec(**entry)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad source entry {entry.get('name', '?')!r}: {exc}")


@dataclass
class PipelineConfig:
    """Everything a run needs, round-trippable through JSON."""

    sources: list[dict[str, Any]] = field(default_factory=list)
    tau: float = DEFAULT_TAU
    tau_rel: float = DEFAULT_TAU_REL
    sigma: float = DEFAULT_SIGMA
    delta_p: float = DEFAULT_DELTA_P
    tau_accept: float = DEFAULT_TAU_ACCEPT
    theta_dup: float | None = None
    provider: str = "deterministic"
    endpoint: str | None = None
    seed: int = 0
    dim: int = DEFAULT_DIM
    max_iterations: int = 3
    auto_accept: bool = True
    expand: bool = True
    alias_table: dict[str, str] = field(default_factory=dict)
    type_map: dict[str, str] = field(default_factory=dict)
    relation_table: dict[str, str] = field(default_factory=dict)
    constraints_path: str | None = None
    deterministic: bool = False

    def __post_init__(self) -> None:
        for name in _UNIT_INTERVAL_FIELDS:
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                raise ConfigError(f"{name} must be in (0, 1], got {value}")
        if self.theta_dup is not None and not (0.0 < self.theta_dup <= 1.0):
            raise ConfigError(f"theta_dup must be in (0, 1], got {self.theta_dup}")
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.provider not in ("deterministic", "remote"):
            raise ConfigError(f"provider must be deterministic or remote, got {self.provider!r}")
        if self.provider == "remote" and not self.endpoint and not self.deterministic:
            raise ConfigError("remote provider needs an endpoint")
        if self.dim < 1:
            raise ConfigError("dim must be positive")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        for entry in self.sources:
            _source_spec(entry)

    def to_dict(self) -> dict[str, Any]:
        return {
            "sources": [dict(s) for s in self.sources],
            "tau": self.tau,
            "tau_rel": self.tau_rel,
            "sigma": self.sigma,
            "delta_p": self.delta_p,
            "tau_accept": self.tau_accept,
            "theta_dup": self.theta_dup,
            "provider": self.provider,
            "endpoint": self.endpoint,
            "seed": self.seed,
            "dim": self.dim,
            "max_iterations": self.max_iterations,
            "auto_accept": self.auto_accept,
            "expand": self.expand,
            "alias_table": dict(self.alias_table),
            "type_map": dict(self.type_map),
            "relation_table": dict(self.relation_table),
            "constraints_path": self.constraints_path,
            "deterministic": self.deterministic,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc.msg}")
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        return cls.from_json(text)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def build_provider(self):
        if self.deterministic or self.provider == "deterministic":
            return DeterministicProvider(self.seed, self.dim, self.alias_table)
        return RemoteProvider(self.endpoint)


@dataclass
class PipelineResult:
    config_hash: str
    merged: KnowledgeGraph
    report: MergeReport
    metrics: MetricReport
    state: ExpansionState | None
    removals: dict[str, list[RemovalEntry]]
    outputs: dict[str, str]
    manifest: dict[str, Any]


def _typed_relation_table(table: dict[str, str]) -> dict[tuple[str, str], str]:
    """Config stores "HeadType->TailType" keys; the predictor wants tuples."""
    out: dict[tuple[str, str], str] = {}
    for key, rel in table.items():
        if "->" not in key:
            continue
        head_type, tail_type = (part.strip() for part in key.split("->", 1))
        out[(head_type, tail_type)] = rel
    return out


def run_pipeline(config: PipelineConfig, out_dir: str | Path) -> PipelineResult:
    """Run ingest through metrics and write the result files.

    Nothing is written until every input has been validated, so a bad
    source path fails before any partial output exists.
    """
    for entry in config.sources:
        spec = _source_spec(entry)
        if spec.path is None or not Path(spec.path).is_file():
            raise ConfigError(f"source {spec.name!r}: unreadable path {spec.path!r}")
    if config.constraints_path is not None and not Path(config.constraints_path).is_file():
        raise ConfigError(f"unreadable constraints table {config.constraints_path!r}")

    provider = config.build_provider()
    timer = StageTimer()
    removals: dict[str, list[RemovalEntry]] = {}

    with timer.stage("ingest"):
        graphs: list[KnowledgeGraph] = []
        for entry in config.sources:
            spec = _source_spec(entry)
            g = parse_source(spec)
            if config.theta_dup is not None:
                g, removed = noise_filter(g, provider, config.theta_dup)
                removals[spec.name] = removed
            graphs.append(g)

    with timer.stage("align"):
        decisions = align_nodes(graphs, provider, config.tau, type_map=config.type_map or None)
        labels = sorted({t.relation for g in graphs for t in g.triples()})
        mappings = unify_relations(
            labels,
            EmbeddingLabelScorer(provider),
            {k: v for k, v in config.relation_table.items() if "->" not in k},
            tau_rel=config.tau_rel,
        )

    with timer.stage("merge"):
        merged, report = merge_graphs(
            graphs,
            decisions,
            mappings,
            type_map=config.type_map or None,
            tau=config.tau,
        )

    state: ExpansionState | None = None
    final = merged
    if config.expand:
        with timer.stage("expand"):
            state = ExpansionState(
                graph=merged,
                tau_accept=config.tau_accept,
                delta_p=config.delta_p,
                max_iterations=config.max_iterations,
                auto_accept=config.auto_accept,
                seed=config.seed,
            )
            predictor = GaussianPredictor(
                provider,
                sigma=config.sigma,
                relation_table=_typed_relation_table(config.relation_table),
            )
            state, _ = run_expansion(state, predictor)
            final = state.graph

    with timer.stage("metrics"):
        constraints = (
            load_constraints(config.constraints_path) if config.constraints_path else None
        )
        metrics = build_metric_report(
            final,
            graphs,
            report,
            constraints=constraints,
            timings=None if config.deterministic else dict(timer.timings),
            peak_memory_bytes=None if config.deterministic else peak_memory(),
        )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h = config.config_hash()
    stamp = {"config_hash": h}
    outputs: dict[str, str] = {}

    merged_path = out / "merged.jsonl"
    write_jsonl(final, str(merged_path), meta={**stamp, "name": final.name})
    outputs["merged"] = str(merged_path)

    report_path = out / "merge_report.jsonl"
    write_merge_report(report, str(report_path), meta=stamp)
    outputs["merge_report"] = str(report_path)

    if state is not None:
        cand_path = out / "candidates.jsonl"
        write_candidate_log(state, str(cand_path), meta=stamp)
        outputs["candidates"] = str(cand_path)

    metrics_path = out / "metrics.json"
    metrics_path.write_text(
        json.dumps({**stamp, **metrics.to_dict()}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    outputs["metrics"] = str(metrics_path)

    manifest = {
        "config_hash": h,
        "config": config.to_dict(),
        "outputs": {k: Path(v).name for k, v in outputs.items()},
        "stats": {
            "sources": {g.name: {"nodes": g.node_count, "edges": g.edge_count} for g in graphs},
            "merged_nodes": final.node_count,
            "merged_edges": final.edge_count,
            "alignment_decisions": len(report.decisions),
            "expansion_iterations": state.iteration if state is not None else 0,
        },
        "timings_seconds": "not measured" if config.deterministic else dict(timer.timings),
        "peak_memory_bytes": "not measured" if config.deterministic else peak_memory(),
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    outputs["manifest"] = str(manifest_path)

    return PipelineResult(
        config_hash=h,
        merged=final,
        report=report,
        metrics=metrics,
        state=state,
        removals=removals,
        outputs=outputs,
        manifest=manifest,
    )
