"""Command-line entry point.

Subcommands: ingest, merge, expand, evaluate, train, rank, serve,
export.  Exit codes are stable so scripts can branch on failure class:

* 0: success
* 1: any other library failure
* 2: configuration problem (bad config file, unreadable input, usage)
* 3: parse failure in a source or data file
* 4: graph integrity violation
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path
from typing import Any

from .errors import (
    ConfigError,
    KgFuseError,
    ParseError,
    ReferentialIntegrityError,
    TypeConflictError,
)
from .graph import KnowledgeGraph, read_jsonl, write_jsonl
from .ingest import EDGE_TSV_COLUMNS
from .pipeline import PipelineConfig, run_pipeline, _source_spec

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_INTEGRITY = 4

CONFIG_ENV_VAR = "KGFUSE_CONFIG"


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    """Config file (flag, then env var), with flag overrides on top."""
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    config = PipelineConfig.load(path) if path else PipelineConfig()
    overrides: dict[str, Any] = {}
    for name in ("seed", "tau", "sigma", "delta_p"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "deterministic", False):
        overrides["deterministic"] = True
    if not overrides:
        return config
    return PipelineConfig.from_dict({**config.to_dict(), **overrides})


def _print_run_summary(result) -> None:
    graph = result.merged
    print(f"config_hash {result.config_hash}")
    print(f"nodes {graph.node_count}")
    print(f"edges {graph.edge_count}")
    print(f"alignment_decisions {len(result.report.decisions)}")
    if result.state is not None:
        print(f"expansion_iterations {result.state.iteration}")
        for status, count in sorted(result.state.status_counts().items()):
            print(f"candidates_{status} {count}")
    for kind, path in sorted(result.outputs.items()):
        print(f"wrote {kind} {path}")


def _cmd_ingest(args: argparse.Namespace) -> int:
    from .ingest import noise_filter, parse_source

    config = _load_config(args)
    if not config.sources:
        raise ConfigError("config lists no sources")
    for entry in config.sources:
        spec = _source_spec(entry)
        if spec.path is None or not Path(spec.path).is_file():
            raise ConfigError(f"source {spec.name!r}: unreadable path {spec.path!r}")
    provider = config.build_provider()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stamp = {"config_hash": config.config_hash()}
    for entry in config.sources:
        spec = _source_spec(entry)
        graph = parse_source(spec)
        dropped = 0
        if config.theta_dup is not None:
            graph, removed = noise_filter(graph, provider, config.theta_dup)
            dropped = len(removed)
        path = out / f"{spec.name}.jsonl"
        write_jsonl(graph, str(path), meta={**stamp, "name": spec.name})
        note = f", {dropped} near-duplicates removed" if dropped else ""
        print(f"{spec.name}: {graph.node_count} nodes, {graph.edge_count} edges{note}")
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_merge(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config = PipelineConfig.from_dict({**config.to_dict(), "expand": False})
    result = run_pipeline(config, args.out)
    _print_run_summary(result)
    return EXIT_OK


def _cmd_expand(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config = PipelineConfig.from_dict({**config.to_dict(), "expand": True})
    result = run_pipeline(config, args.out)
    _print_run_summary(result)
    return EXIT_OK


def _check_pair_files(args: argparse.Namespace) -> None:
    if (args.predicted is None) != (args.gold is None):
        raise ConfigError("precision metrics need both --predicted and --gold")
    for role in ("predicted", "gold"):
        path = getattr(args, role)
        if path is not None and not Path(path).is_file():
            raise ConfigError(f"{role} file not found: {path}")


def _cmd_evaluate(args: argparse.Namespace) -> int:
    from .align import read_merge_report
    from .ingest import parse_source
    from .metrics import build_metric_report, load_constraints

    from .linkpred import load_triples_tsv

    config = _load_config(args)
    if not Path(args.graph).is_file():
        raise ConfigError(f"graph file not found: {args.graph}")
    _check_pair_files(args)
    graph = read_jsonl(args.graph, name="merged")
    sources = [parse_source(_source_spec(entry)) for entry in config.sources]
    report = read_merge_report(args.report) if args.report else None
    predicted = set(load_triples_tsv(args.predicted)) if args.predicted else None
    gold = set(load_triples_tsv(args.gold)) if args.gold else None

    constraints = (
        load_constraints(config.constraints_path) if config.constraints_path else None
    )
    metrics = build_metric_report(
        graph, sources, report, predicted=predicted, gold=gold, constraints=constraints
    )
    payload = json.dumps(
        {"config_hash": config.config_hash(), **metrics.to_dict()},
        indent=2,
        sort_keys=True,
    )
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(payload)
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    from .linkpred import (
        TrainConfig,
        TripleDataset,
        cycle_dataset,
        evaluate_ranking,
        load_triples_tsv,
        train_model,
    )

    if (args.synthetic_cycle is None) == (args.data is None):
        raise ConfigError("pick exactly one of --synthetic-cycle and --data")
    seed = args.seed if args.seed is not None else 0
    if args.synthetic_cycle is not None:
        dataset = cycle_dataset(args.synthetic_cycle, seed=seed, style=args.style)
    else:
        root = Path(args.data)
        train_path = root / "train.tsv"
        if not train_path.is_file():
            raise ConfigError(f"no train.tsv under {root}")
        splits = []
        for stem in ("train", "valid", "test"):
            path = root / f"{stem}.tsv"
            splits.append(load_triples_tsv(path) if path.is_file() else [])
        dataset = TripleDataset.from_triples(*splits)

    workers = 1 if args.deterministic else args.workers
    config = TrainConfig(
        model=args.model,
        dim=args.dim,
        epochs=args.epochs,
        lr=args.lr,
        margin=args.margin,
        k_neg=args.k_neg,
        batch_size=args.batch_size,
        seed=seed,
        norm=args.norm,
        workers=workers,
    )
    result = train_model(dataset, config)
    split = "test" if len(dataset.test) else "train"
    ranking = evaluate_ranking(result.model, dataset, split=split, filtered=True)

    config_blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    payload = json.dumps(
        {
            "config": config.to_dict(),
            "config_hash": hashlib.sha256(config_blob.encode("utf-8")).hexdigest(),
            "dataset": {
                "entities": dataset.n_entities,
                "relations": dataset.n_relations,
                "train": int(len(dataset.train)),
                "valid": int(len(dataset.valid)),
                "test": int(len(dataset.test)),
            },
            "losses": result.epoch_losses,
            "ranking": ranking.to_dict(),
        },
        indent=2,
        sort_keys=True,
    )
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
        print(f"MRR {ranking.mrr:.4f}")
    else:
        print(payload)
    return EXIT_OK


def _parse_rank_file(path: str) -> list[int]:
    if not Path(path).is_file():
        raise ConfigError(f"ranks file not found: {path}")
    text = Path(path).read_text(encoding="utf-8").strip()
    if not text:
        raise ConfigError(f"ranks file is empty: {path}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.split()
    if not isinstance(data, list):
        raise ConfigError("ranks file must hold a JSON list or whitespace-separated integers")
    try:
        return [int(v) for v in data]
    except (TypeError, ValueError):
        raise ConfigError("ranks file must contain integers only")


def _cmd_rank(args: argparse.Namespace) -> int:
    from .linkpred import summarize_ranks

    ranks = _parse_rank_file(args.ranks)
    report = summarize_ranks(ranks)
    print(f"MR {report.mr:.4f}")
    print(f"MRR {report.mrr:.4f}")
    for k in sorted(report.hits):
        print(f"Hits@{k} {report.hits[k]:.4f}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    from .expand import ExpansionState, read_candidate_log
    from .service import ReviewSession, create_app, replay_log

    for role, path in (("graph", args.graph), ("candidates", args.candidates)):
        if not Path(path).is_file():
            raise ConfigError(f"{role} file not found: {path}")
    graph = read_jsonl(args.graph, name="merged")
    try:
        meta, candidates = read_candidate_log(args.candidates)
    except ValueError as exc:
        raise ParseError(str(exc))
    state = ExpansionState(
        graph=graph,
        tau_accept=meta.get("tau_accept", 0.5),
        delta_p=meta.get("delta_p", 0.1),
        auto_accept=False,
        iteration=meta.get("iteration", 0),
        candidates={c.id: c for c in candidates},
        proposed_keys={c.key() for c in candidates},
    )
    if args.log and Path(args.log).is_file() and Path(args.log).stat().st_size > 0:
        session = replay_log(state, args.log)
        print(f"resumed from {args.log} at version {session.version}")
    else:
        session = ReviewSession(state, log_path=args.log)
    app = create_app(session, static_dir=args.static_dir)
    print(f"serving on http://{args.host}:{args.port}")
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    if not Path(args.graph).is_file():
        raise ConfigError(f"graph file not found: {args.graph}")
    graph = read_jsonl(args.graph)
    triples = sorted(graph.triples(), key=lambda t: t.key())
    out = Path(args.out)
    if args.format == "edge_tsv":
        with out.open("w", encoding="utf-8") as fh:
            fh.write("\t".join(EDGE_TSV_COLUMNS) + "\n")
            for t in triples:
                head, tail = graph.node(t.head), graph.node(t.tail)
                fh.write(
                    "\t".join(
                        (
                            head.id,
                            head.label,
                            head.node_type,
                            t.relation,
                            tail.id,
                            tail.label,
                            tail.node_type,
                        )
                    )
                    + "\n"
                )
    else:
        from .linkpred import write_triples_tsv

        write_triples_tsv((t.key() for t in triples), out)
    print(f"wrote {out} ({len(triples)} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgfuse", description="Knowledge graph fusion workbench."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help=f"config JSON path (or ${CONFIG_ENV_VAR})")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tau", type=float, default=None, help="alignment threshold")
        p.add_argument("--sigma", type=float, default=None, help="prediction bandwidth")
        p.add_argument("--delta-p", type=float, default=None, dest="delta_p")
        p.add_argument(
            "--deterministic",
            action="store_true",
            help="offline embeddings, single-threaded training, stable output bytes",
        )

    p = sub.add_parser("ingest", help="parse each configured source to JSONL")
    add_common(p)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("merge", help="ingest, align, and merge (no expansion)")
    add_common(p)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_merge)

    p = sub.add_parser("expand", help="full pipeline including edge prediction")
    add_common(p)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("evaluate", help="score a merged graph against its sources")
    add_common(p)
    p.add_argument("--graph", required=True, help="merged graph JSONL")
    p.add_argument("--report", help="merge report JSONL for union coverage")
    p.add_argument("--predicted", help="predicted triples TSV")
    p.add_argument("--gold", help="gold triples TSV")
    p.add_argument("--out", help="write metrics JSON here instead of stdout")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("train", help="train a link prediction model")
    add_common(p)
    p.add_argument("--synthetic-cycle", type=int, help="entity count for the built-in benchmark")
    p.add_argument("--style", choices=("pairs", "ring"), default="pairs")
    p.add_argument("--data", help="directory with train.tsv (and optional valid/test.tsv)")
    p.add_argument("--model", default="transe")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--k-neg", type=int, default=4, dest="k_neg")
    p.add_argument("--batch-size", type=int, default=128, dest="batch_size")
    p.add_argument("--norm", type=int, default=2, choices=(1, 2))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write the report JSON here instead of stdout")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("rank", help="summarize a file of ranks")
    p.add_argument("--ranks", required=True, help="JSON list or whitespace-separated integers")
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("serve", help="run the candidate review service")
    p.add_argument("--graph", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--log", help="verdict log JSONL; replayed when it already exists")
    p.add_argument("--static-dir", dest="static_dir", help="directory of review UI assets")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("export", help="write a graph back out as TSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--format", choices=("edge_tsv", "triples"), default="edge_tsv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_CONFIG
    command = args.command
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"kgfuse {command}: config failure: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"kgfuse {command}: config failure: missing file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"kgfuse {command}: parse failure: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ReferentialIntegrityError, TypeConflictError) as exc:
        print(f"kgfuse {command}: integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except KgFuseError as exc:
        print(f"kgfuse {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
