"""Ranking evaluation: MR, MRR, Hits@K over tail and head queries."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from .data import TripleDataset
from .models import BaseModel

DEFAULT_KS = (1, 3, 10)


def _pessimistic_rank(scores: np.ndarray, gold: int, excluded: np.ndarray) -> int:
    """Rank of the gold entity, counting every tie as ranked above it.

    ``excluded`` marks candidates removed from consideration (known
    true entities other than gold, under the filtered setting).
    """
    gold_score = scores[gold]
    mask = ~excluded
    mask[gold] = False
    higher = int((scores[mask] > gold_score).sum())
    ties = int((scores[mask] == gold_score).sum())
    return 1 + higher + ties


def rank_query(
    model: BaseModel,
    dataset: TripleDataset,
    h: int,
    r: int,
    t: int,
    mode: str = "tail",
    filtered: bool = True,
) -> int:
    """Rank the gold entity for one corruption query."""
    if mode == "tail":
        scores = model.score_all_tails(h, r)
        gold = t
    elif mode == "head":
        scores = model.score_all_heads(r, t)
        gold = h
    else:
        raise ConfigError(f"unknown query mode {mode!r}")
    excluded = np.zeros(dataset.n_entities, dtype=bool)
    if filtered:
        for hh, rr, tt in dataset.all_true():
            if mode == "tail" and hh == h and rr == r and tt != t:
                excluded[tt] = True
            elif mode == "head" and tt == t and rr == r and hh != h:
                excluded[hh] = True
    return _pessimistic_rank(scores, gold, excluded)


@dataclass
class RankingReport:
    """Aggregate ranking metrics with the per-query ranks kept around."""

    ranks: list[int]
    mr: float
    mrr: float
    hits: dict[int, float]
    p_at_k_literal: dict[int, float]
    setting: str
    split: str = "test"
    model_kind: str = ""

    def to_dict(self) -> dict:
        return {
            "ranks": list(self.ranks),
            "mr": self.mr,
            "mrr": self.mrr,
            "hits": {str(k): v for k, v in sorted(self.hits.items())},
            "p_at_k_literal": {str(k): v for k, v in sorted(self.p_at_k_literal.items())},
            "setting": self.setting,
            "split": self.split,
            "model_kind": self.model_kind,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def summarize_ranks(
    ranks: list[int],
    ks: tuple[int, ...] = DEFAULT_KS,
    setting: str = "filtered",
    split: str = "test",
    model_kind: str = "",
) -> RankingReport:
    """Aggregate a rank list into MR, MRR, Hits@K, and literal P@K.

    Hits@K is the fraction of queries ranked at or under K. The
    literal P@K variant divides the hit count by K instead of by the
    query count, so it is not bounded by 1; both are reported.
    """
    if not ranks:
        raise ConfigError("cannot summarize an empty rank list")
    if any(x < 1 for x in ranks):
        raise ConfigError("ranks must be >= 1")
    arr = np.asarray(ranks, dtype=np.float64)
    hits = {k: float((arr <= k).mean()) for k in ks}
    p_literal = {k: float((arr <= k).sum() / k) for k in ks}
    return RankingReport(
        ranks=list(int(x) for x in ranks),
        mr=float(arr.mean()),
        mrr=float((1.0 / arr).mean()),
        hits=hits,
        p_at_k_literal=p_literal,
        setting=setting,
        split=split,
        model_kind=model_kind,
    )


def evaluate_ranking(
    model: BaseModel,
    dataset: TripleDataset,
    split: str = "test",
    filtered: bool = True,
    ks: tuple[int, ...] = DEFAULT_KS,
) -> RankingReport:
    """Rank every query in a split, tail then head corruption per triple."""
    splits = dataset.splits()
    if split not in splits:
        raise ConfigError(f"unknown split {split!r}")
    triples = splits[split]
    if len(triples) == 0:
        raise ConfigError(f"split {split!r} is empty")
    ranks: list[int] = []
    for h, r, t in triples.tolist():
        ranks.append(rank_query(model, dataset, h, r, t, "tail", filtered))
        ranks.append(rank_query(model, dataset, h, r, t, "head", filtered))
    return summarize_ranks(
        ranks,
        ks=ks,
        setting="filtered" if filtered else "raw",
        split=split,
        model_kind=model.kind,
    )
