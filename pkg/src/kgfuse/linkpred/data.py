"""Triple datasets for link prediction training and evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import ParseError
from ..graph import KnowledgeGraph

_HEADER = ("head", "relation", "tail")


def load_triples_tsv(path) -> list[tuple[str, str, str]]:
    """Read head/relation/tail rows from a TSV file.

    The format is headerless; a single literal ``head\\trelation\\ttail``
    first row is tolerated and skipped.
    """
    path = Path(path)
    triples: list[tuple[str, str, str]] = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            cells = tuple(line.split("\t"))
            if len(cells) != 3:
                raise ParseError(
                    f"expected 3 tab-separated columns, got {len(cells)}",
                    line=line_no,
                    path=str(path),
                )
            if line_no == 1 and cells == _HEADER:
                continue
            if any(not c.strip() for c in cells):
                raise ParseError("empty cell", line=line_no, path=str(path))
            triples.append(cells)
    return triples


def write_triples_tsv(triples: Iterable[tuple[str, str, str]], path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for h, r, t in triples:
            fh.write(f"{h}\t{r}\t{t}\n")


def _encode(
    triples: Sequence[tuple[str, str, str]],
    ent_index: dict[str, int],
    rel_index: dict[str, int],
) -> np.ndarray:
    if not triples:
        return np.zeros((0, 3), dtype=np.int64)
    rows = [(ent_index[h], rel_index[r], ent_index[t]) for h, r, t in triples]
    return np.asarray(rows, dtype=np.int64)


@dataclass
class TripleDataset:
    """Train/valid/test triples over a shared integer vocabulary.

    Splits are int64 arrays of shape (n, 3) holding entity and
    relation indices; ``entities`` and ``relations`` are sorted so the
    encoding is reproducible from the raw triples alone.
    """

    entities: tuple[str, ...]
    relations: tuple[str, ...]
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    ent_index: dict[str, int] = field(repr=False, default_factory=dict)
    rel_index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if not self.ent_index:
            self.ent_index = {e: i for i, e in enumerate(self.entities)}
        if not self.rel_index:
            self.rel_index = {r: i for i, r in enumerate(self.relations)}
        for name, split in self.splits().items():
            if split.ndim != 2 or split.shape[1] != 3:
                raise ValueError(f"{name} split must have shape (n, 3)")

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    def splits(self) -> dict[str, np.ndarray]:
        return {"train": self.train, "valid": self.valid, "test": self.test}

    def all_true(self) -> set[tuple[int, int, int]]:
        """Every known-true triple across all splits, as index tuples."""
        out: set[tuple[int, int, int]] = set()
        for split in self.splits().values():
            out.update(map(tuple, split.tolist()))
        return out

    def decode(self, row: Sequence[int]) -> tuple[str, str, str]:
        return self.entities[row[0]], self.relations[row[1]], self.entities[row[2]]

    @classmethod
    def from_triples(
        cls,
        train: Sequence[tuple[str, str, str]],
        valid: Sequence[tuple[str, str, str]] = (),
        test: Sequence[tuple[str, str, str]] = (),
    ) -> "TripleDataset":
        ents: set[str] = set()
        rels: set[str] = set()
        for split in (train, valid, test):
            for h, r, t in split:
                ents.add(h)
                ents.add(t)
                rels.add(r)
        entities = tuple(sorted(ents))
        relations = tuple(sorted(rels))
        ent_index = {e: i for i, e in enumerate(entities)}
        rel_index = {r: i for i, r in enumerate(relations)}
        return cls(
            entities=entities,
            relations=relations,
            train=_encode(train, ent_index, rel_index),
            valid=_encode(valid, ent_index, rel_index),
            test=_encode(test, ent_index, rel_index),
            ent_index=ent_index,
            rel_index=rel_index,
        )

    @classmethod
    def from_graph(
        cls, graph: KnowledgeGraph, seed: int = 0, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    ) -> "TripleDataset":
        """Split a graph's edges into train/valid/test by seeded shuffle."""
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise ValueError("split ratios must sum to 1")
        triples = sorted((t.head, t.relation, t.tail) for t in graph.triples())
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(triples))
        n_valid = int(len(triples) * ratios[1])
        n_test = int(len(triples) * ratios[2])
        valid_idx = set(order[:n_valid].tolist())
        test_idx = set(order[n_valid : n_valid + n_test].tolist())
        train = [t for i, t in enumerate(triples) if i not in valid_idx and i not in test_idx]
        valid = [triples[i] for i in sorted(valid_idx)]
        test = [triples[i] for i in sorted(test_idx)]
        return cls.from_triples(train, valid, test)


def _split_held_out(
    triples: list[tuple[str, str, str]],
    conflicts: dict[int, set[int]],
    n_hold: int,
    seed: int,
) -> tuple[list, list, list]:
    """Hold out n_hold edges, never two that share a conflict group.

    Conflict edges are the ones whose joint removal would strand an
    entity outside train; the seeded greedy pass skips them.
    """
    n = len(triples)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    held: list[int] = []
    taken: set[int] = set()
    for idx in order.tolist():
        if conflicts.get(idx, set()) & taken:
            continue
        taken.add(idx)
        held.append(idx)
        if len(held) == n_hold:
            break
    if len(held) < n_hold:
        raise RuntimeError("failed to pick a non-stranding held-out set")
    half = n_hold // 2
    valid_idx = set(held[:half])
    test_idx = set(held[half:])
    train = [t for i, t in enumerate(triples) if i not in valid_idx and i not in test_idx]
    valid = [triples[i] for i in sorted(valid_idx)]
    test = [triples[i] for i in sorted(test_idx)]
    return train, valid, test


def cycle_dataset(n: int = 50, seed: int = 0, style: str = "pairs") -> TripleDataset:
    """Synthetic two-relation cycle benchmark over n entities.

    ``pairs`` (default): n/2 disjoint directed 2-cycles, edge pair
    a_i --r0--> b_i --r1--> a_i. Every cycle closes with zero
    translational frustration (a + r0 + r1 = a is consistent with all
    pairs distinct), so translation and bilinear models alike can fit
    it exactly; this is the benchmark split.

    ``ring``: one directed n-cycle whose relation alternates with hop
    parity, e_i --r_{i mod 2}--> e_{i+1 mod n}. Closing the ring forces
    r0 + r1 toward zero for translation models, which makes it a
    deliberately frustrated stress variant.

    Both styles hold out 10% valid and 10% test, never stranding an
    entity outside train, and keep both relations in train.
    """
    if n < 10 or n % 2 != 0:
        raise ValueError("entity count must be an even number of at least 10")
    width = len(str(n - 1))
    n_hold = 2 * (n // 10)
    if style == "pairs":
        half = n // 2
        a = [f"a{i:0{width}d}" for i in range(half)]
        b = [f"b{i:0{width}d}" for i in range(half)]
        triples = []
        for i in range(half):
            triples.append((a[i], "r0", b[i]))
            triples.append((b[i], "r1", a[i]))
        # edges 2i and 2i+1 are the same pair; removing both strands it
        conflicts = {2 * i: {2 * i + 1} for i in range(half)}
        conflicts.update({2 * i + 1: {2 * i} for i in range(half)})
    elif style == "ring":
        ents = [f"e{i:0{width}d}" for i in range(n)]
        triples = [(ents[i], f"r{i % 2}", ents[(i + 1) % n]) for i in range(n)]
        # entity i sits only on edges i-1 and i; keep neighbors apart
        conflicts = {i: {(i - 1) % n, (i + 1) % n} for i in range(n)}
    else:
        raise ValueError(f"unknown cycle style {style!r}")
    train, valid, test = _split_held_out(triples, conflicts, n_hold, seed)
    return TripleDataset.from_triples(train, valid, test)
