"""Source ingestion: OBO flat files, edge TSVs, and near-duplicate cleanup.

Parsers build one KnowledgeGraph per source with provenance tags and
carry source-native node types and relation labels through unchanged;
mapping onto the canonical taxonomy happens later, at merge time.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

import numpy as np

from .embeddings import EmbeddingProvider
from .errors import ParseError, ReferentialIntegrityError
from .graph import KnowledgeGraph, Node, Triple, merge_node_into, source_provenance
from .unionfind import UnionFind

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# TSV sources must present exactly this header.
EDGE_TSV_COLUMNS = (
    "head_id",
    "head_label",
    "head_type",
    "relation",
    "tail_id",
    "tail_label",
    "tail_type",
)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split at whitespace and punctuation; never empty strings.

    "Alzheimer's disease" -> ["alzheimer", "s", "disease"]; digits stay
    attached to their word ("APOE4" -> ["apoe4"]).
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(slots=True)
class SourceSpec:
    """How to read one source file."""

    name: str
    format: str  # "obo" | "edge_tsv"
    path: str | None = None
    default_node_type: str = "Term"

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("source name must be non-empty")
        if self.format not in ("obo", "edge_tsv"):
            raise ValueError(f"unknown source format {self.format!r}")


@dataclass(slots=True)
class RemovalEntry:
    """One near-duplicate collapse: removed_id folded into kept_id."""

    kept_id: str
    removed_id: str
    score: float

    def to_dict(self) -> dict:
        return {"kept_id": self.kept_id, "removed_id": self.removed_id, "score": self.score}


def _lines(source: str | IO, encoding: str = "utf-8") -> Iterator[str]:
    if isinstance(source, str):
        with open(source, "rb") as fh:
            for raw in fh:
                yield raw.decode(encoding)
        return
    for raw in source:
        yield raw.decode(encoding) if isinstance(raw, bytes) else raw


def _strip_obo_comment(value: str) -> str:
    """Drop an unescaped trailing ``! comment``; quoted text is protected."""
    in_quotes = False
    i = 0
    while i < len(value):
        c = value[i]
        if c == "\\":
            i += 2
            continue
        if c == '"':
            in_quotes = not in_quotes
        elif c == "!" and not in_quotes:
            return value[:i].rstrip()
        i += 1
    return value.rstrip()


def _first_quoted(value: str, lineno: int, path: str | None) -> str:
    m = re.match(r'\s*"((?:[^"\\]|\\.)*)"', value)
    if not m:
        raise ParseError(f"expected quoted string in {value!r}", line=lineno, path=path)
    return m.group(1).replace('\\"', '"')


def parse_obo(source: str | IO, spec: SourceSpec) -> KnowledgeGraph:
    """Parse the OBO 1.2 subset used by ontology releases.

    Recognised term tags: id, name, namespace, def, synonym, is_a,
    relationship, is_obsolete.  Other tags and non-Term stanzas are
    skipped.  is_a / relationship targets may be defined later in the
    file; unresolved targets are an error at end of file.  Obsolete
    terms vanish together with their edges.
    """
    path = source if isinstance(source, str) else getattr(source, "name", None)
    graph = KnowledgeGraph(spec.name)
    provenance = source_provenance(spec.name)

    edges: list[tuple[str, str, str, int]] = []  # head, relation, tail, line
    obsolete_ids: set[str] = set()

    stanza_tags: list[tuple[str, str, int]] | None = None  # None = outside [Term]
    stanza_line = 0

    def commit() -> None:
        nonlocal stanza_tags
        if not stanza_tags:
            stanza_tags = None
            return
        term_id: str | None = None
        name: str | None = None
        namespace: str | None = None
        definition: str | None = None
        aliases: set[str] = set()
        local_edges: list[tuple[str, str, int]] = []
        obsolete = False
        for tag, value, lineno in stanza_tags:
            if tag == "id":
                term_id = value
            elif tag == "name":
                name = value
            elif tag == "namespace":
                namespace = value
            elif tag == "def":
                definition = _first_quoted(value, lineno, path)
            elif tag == "synonym":
                aliases.add(_first_quoted(value, lineno, path))
            elif tag == "is_a":
                target = value.split()[0] if value.split() else ""
                if not target:
                    raise ParseError("is_a without a target id", line=lineno, path=path)
                local_edges.append(("is_a", target, lineno))
            elif tag == "relationship":
                parts = value.split()
                if len(parts) < 2:
                    raise ParseError(
                        f"relationship needs '<type> <id>', got {value!r}", line=lineno, path=path
                    )
                local_edges.append((parts[0], parts[1], lineno))
            elif tag == "is_obsolete":
                obsolete = value.strip().lower() == "true"
        if term_id is None:
            raise ParseError("[Term] stanza without an id", line=stanza_line, path=path)
        if obsolete:
            obsolete_ids.add(term_id)
            stanza_tags = None
            return
        aliases.discard("")
        graph.add_node(
            Node(
                id=term_id,
                label=name if name is not None else term_id,
                node_type=namespace if namespace else spec.default_node_type,
                aliases={a for a in aliases if a},
                description=definition,
                sources={spec.name},
            )
        )
        for relation, target, lineno in local_edges:
            edges.append((term_id, relation, target, lineno))
        stanza_tags = None

    lineno = 0
    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line.startswith("["):
            commit()
            if line.strip() == "[Term]":
                stanza_tags = []
                stanza_line = lineno
            continue
        if stanza_tags is None:
            continue
        stripped = _strip_obo_comment(line).strip()
        if not stripped:
            continue
        if ":" not in stripped:
            raise ParseError(f"malformed tag line {line!r}", line=lineno, path=path)
        tag, value = stripped.split(":", 1)
        stanza_tags.append((tag.strip(), value.strip(), lineno))
    commit()

    unresolved = []
    for head, relation, tail, edge_line in edges:
        if tail in obsolete_ids or head in obsolete_ids:
            continue
        if not graph.has_node(tail):
            unresolved.append((tail, edge_line))
            continue
        graph.add_triple(Triple(head=head, relation=relation, tail=tail, provenance=provenance))
    if unresolved:
        first_id, first_line = unresolved[0]
        raise ReferentialIntegrityError(
            f"{path or '<stream>'}: {len(unresolved)} unresolved reference(s), "
            f"first: {first_id!r} at line {first_line}"
        )
    return graph


def parse_edge_tsv(source: str | IO, spec: SourceSpec) -> KnowledgeGraph:
    """Parse a 7-column edge list with a mandatory header row.

    Columns: head_id, head_label, head_type, relation, tail_id,
    tail_label, tail_type.  Nodes are upserted from both endpoints; a
    type conflict for the same id is an error.
    """
    path = source if isinstance(source, str) else getattr(source, "name", None)
    graph = KnowledgeGraph(spec.name)
    provenance = source_provenance(spec.name)

    lines = _lines(source)
    header: list[str] | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        cells = line.split("\t")
        if header is None:
            header = [c.strip() for c in cells]
            if tuple(header) != EDGE_TSV_COLUMNS:
                raise ParseError(
                    f"bad header {header!r}, expected {list(EDGE_TSV_COLUMNS)}",
                    line=lineno,
                    path=path,
                )
            continue
        if len(cells) != len(EDGE_TSV_COLUMNS):
            raise ParseError(
                f"expected {len(EDGE_TSV_COLUMNS)} columns, got {len(cells)}",
                line=lineno,
                path=path,
            )
        head_id, head_label, head_type, relation, tail_id, tail_label, tail_type = (
            c.strip() for c in cells
        )
        if not head_id or not tail_id or not relation:
            raise ParseError("empty head_id, tail_id or relation", line=lineno, path=path)
        graph.add_node(
            Node(id=head_id, label=head_label or head_id, node_type=head_type or spec.default_node_type,
                 sources={spec.name})
        )
        graph.add_node(
            Node(id=tail_id, label=tail_label or tail_id, node_type=tail_type or spec.default_node_type,
                 sources={spec.name})
        )
        graph.add_triple(Triple(head=head_id, relation=relation, tail=tail_id, provenance=provenance))
    if header is None:
        raise ParseError("empty file: missing header row", line=1, path=path)
    return graph


def parse_source(spec: SourceSpec) -> KnowledgeGraph:
    """Parse spec.path according to spec.format."""
    if spec.path is None:
        raise ValueError(f"source {spec.name!r} has no path")
    if spec.format == "obo":
        return parse_obo(spec.path, spec)
    return parse_edge_tsv(spec.path, spec)


def noise_filter(
    graph: KnowledgeGraph,
    provider: EmbeddingProvider,
    theta_dup: float,
) -> tuple[KnowledgeGraph, list[RemovalEntry]]:
    """Collapse near-duplicate nodes of the same type.

    Two nodes collapse when the cosine similarity of their label
    embeddings reaches ``theta_dup``; collapses are transitive and every
    component keeps its lexicographically smallest id.  Edges are
    rewired onto the kept ids.  Values above 1 are legal and simply
    unreachable (cosine is capped at 1), so they turn the filter off.
    """
    if theta_dup <= 0:
        raise ValueError(f"theta_dup must be positive, got {theta_dup}")

    by_type: dict[str, list[Node]] = {}
    for node in graph.nodes():
        by_type.setdefault(node.node_type, []).append(node)

    uf = UnionFind()
    for node_id in graph.node_ids():
        uf.add(node_id)
    log: list[RemovalEntry] = []

    if theta_dup <= 1.0:
        for node_type in sorted(by_type):
            bucket = sorted(by_type[node_type], key=lambda n: n.id)
            if len(bucket) < 2:
                continue
            mat = np.stack([provider.embed(n.label).values for n in bucket])
            norms = np.linalg.norm(mat, axis=1, keepdims=True)
            mat = mat / np.where(norms == 0.0, 1.0, norms)
            # row blocks keep the similarity matrix small for big buckets
            block = 1024
            for start in range(0, len(bucket), block):
                stop = min(start + block, len(bucket))
                sims = mat[start:stop] @ mat.T
                rows, cols = np.nonzero(sims >= theta_dup)
                for r, c in zip(rows, cols):
                    i, j = start + int(r), int(c)
                    if i >= j:
                        continue
                    a, b = bucket[i].id, bucket[j].id
                    if uf.union(a, b):
                        log.append(
                            RemovalEntry(kept_id=min(a, b), removed_id=max(a, b),
                                         score=float(sims[r, c]))
                        )

    if not log:
        return graph.copy(), []

    filtered = KnowledgeGraph(graph.name)
    for node_id in sorted(graph.node_ids()):
        node = graph.node(node_id)
        canon = uf.find(node_id)
        if canon == node_id:
            filtered.add_node(node.copy())
    for node_id in sorted(graph.node_ids()):
        canon = uf.find(node_id)
        if canon != node_id:
            merge_node_into(filtered.node(canon), graph.node(node_id))
    for triple in graph.triples():
        filtered.add_triple(
            Triple(
                head=uf.find(triple.head),
                relation=triple.relation,
                tail=uf.find(triple.tail),
                provenance=triple.provenance,
                confidence=triple.confidence,
            )
        )
    log.sort(key=lambda e: (e.kept_id, e.removed_id))
    return filtered, log
