"""Stochastic training for the embedding models.

One seeded generator drives initialization order, epoch shuffles, and
negative sampling, so a fixed seed reproduces final parameters bit for
bit in single-threaded mode. With workers > 1 each batch is sharded
across a thread pool and shard gradients are summed in completion
order; the arithmetic is the same but float summation order is not,
so bitwise determinism is not guaranteed there.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ConfigError, TrainingError
from .data import TripleDataset
from .models import BaseModel, build_model, model_kinds


@dataclass
class TrainConfig:
    """Hyperparameters for link prediction training."""

    model: str = "transe"
    dim: int = 32
    epochs: int = 200
    lr: float = 0.05
    margin: float = 1.0
    k_neg: int = 4
    batch_size: int = 128
    seed: int = 0
    norm: int = 2
    workers: int = 1

    def __post_init__(self) -> None:
        if self.model.lower() not in model_kinds():
            raise ConfigError(f"unknown model {self.model!r}; expected one of {model_kinds()}")
        if self.dim < 1:
            raise ConfigError("dim must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.margin <= 0:
            raise ConfigError("margin must be positive")
        if self.k_neg < 1:
            raise ConfigError("k_neg must be at least 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.norm not in (1, 2):
            raise ConfigError("norm must be 1 or 2")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "dim": self.dim,
            "epochs": self.epochs,
            "lr": self.lr,
            "margin": self.margin,
            "k_neg": self.k_neg,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "norm": self.norm,
            "workers": self.workers,
        }


def _corrupt(
    batch: np.ndarray, k_neg: int, n_entities: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Uniform negative sampling: corrupt head or tail, 1/2 each.

    Returns (h, r, t) index arrays of length len(batch) * k_neg. The
    sampling is unfiltered, so a drawn negative may coincide with a
    true triple; that follows the usual protocol.
    """
    rep = np.repeat(batch, k_neg, axis=0)
    h, r, t = rep[:, 0].copy(), rep[:, 1].copy(), rep[:, 2].copy()
    corrupt_head = rng.random(len(rep)) < 0.5
    replacements = rng.integers(0, n_entities, size=len(rep))
    h[corrupt_head] = replacements[corrupt_head]
    t[~corrupt_head] = replacements[~corrupt_head]
    return h, r, t


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _margin_shard(model, cfg, pos, neg, lo, hi):
    ph, pr, pt = (a[lo:hi] for a in pos)
    nh, nr, nt = (a[lo:hi] for a in neg)
    s_pos = model.score(ph, pr, pt)
    s_neg = model.score(nh, nr, nt)
    viol = cfg.margin - s_pos + s_neg
    active = viol > 0.0
    loss = float(viol[active].sum())
    grads = model.zero_grads()
    if active.any():
        model.add_score_grads(ph, pr, pt, np.where(active, -1.0, 0.0), grads)
        model.add_score_grads(nh, nr, nt, np.where(active, 1.0, 0.0), grads)
    return loss, grads, bool(active.any())


def _logistic_shard(model, cfg, pos, neg, lo, hi):
    ph, pr, pt = (a[lo:hi] for a in pos)
    nh, nr, nt = (a[lo:hi] for a in neg)
    s_pos = model.score(ph, pr, pt)
    s_neg = model.score(nh, nr, nt)
    loss = float(_softplus(-s_pos).sum() + _softplus(s_neg).sum())
    grads = model.zero_grads()
    model.add_score_grads(ph, pr, pt, -_sigmoid(-s_pos), grads)
    model.add_score_grads(nh, nr, nt, _sigmoid(s_neg), grads)
    return loss, grads, True


def _run_batch(
    model: BaseModel,
    batch: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator,
    pool: ThreadPoolExecutor | None,
) -> float:
    neg = _corrupt(batch, cfg.k_neg, model.n_entities, rng)
    k = cfg.k_neg
    pos = (np.repeat(batch[:, 0], k), np.repeat(batch[:, 1], k), np.repeat(batch[:, 2], k))
    shard = _margin_shard if model.loss_kind == "margin" else _logistic_shard
    n = len(pos[0])

    if pool is None:
        loss, grads, apply = shard(model, cfg, pos, neg, 0, n)
    else:
        workers = min(cfg.workers, n)
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        futures = [
            pool.submit(shard, model, cfg, pos, neg, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        loss, grads, apply = 0.0, None, False
        for fut in as_completed(futures):
            shard_loss, shard_grads, shard_apply = fut.result()
            loss += shard_loss
            apply = apply or shard_apply
            if grads is None:
                grads = shard_grads
            else:
                for name in grads:
                    grads[name] += shard_grads[name]

    if apply:
        model.apply_grads(grads, cfg.lr)
        model.post_update()
    return loss


@dataclass
class TrainResult:
    model: BaseModel
    config: TrainConfig
    epoch_losses: list[float] = field(default_factory=list)


def train_model(
    dataset: TripleDataset,
    config: TrainConfig,
    progress: Callable[[int, float], None] | None = None,
) -> TrainResult:
    """Train an embedding model on the dataset's train split.

    epochs=0 returns the seeded initialization untouched. Reported
    losses are per-epoch means over positive triples.
    """
    if len(dataset.train) == 0:
        raise TrainingError("train split is empty")
    model = build_model(
        config.model, dataset.n_entities, dataset.n_relations,
        config.dim, config.seed, norm=config.norm,
    )
    rng = np.random.default_rng(config.seed + 1)
    train = dataset.train
    losses: list[float] = []
    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for epoch in range(config.epochs):
            order = rng.permutation(len(train))
            total = 0.0
            for start in range(0, len(train), config.batch_size):
                batch = train[order[start : start + config.batch_size]]
                total += _run_batch(model, batch, config, rng, pool)
            mean_loss = total / len(train)
            losses.append(mean_loss)
            if progress is not None:
                progress(epoch, mean_loss)
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    return TrainResult(model=model, config=config, epoch_losses=losses)
