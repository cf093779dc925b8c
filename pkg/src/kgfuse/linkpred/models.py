"""Knowledge graph embedding models with numpy scoring and gradients.

All four models expose the same surface: ``score`` over parallel index
arrays, ``score_all_tails`` / ``score_all_heads`` over the full entity
vocabulary, and ``add_score_grads`` which scatter-adds coefficient
weighted gradients of the score into caller-owned buffers. Higher
scores always mean more plausible.

Complex-valued parameters store gradients in the same complex arrays,
using the (d/dRe, d/dIm) pairing so a plain ``param -= lr * grad``
update is correct.
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from ..errors import ConfigError

_EPS = 1e-12


class BaseModel:
    """Shared bookkeeping for the concrete scoring models."""

    kind = "base"
    loss_kind = "margin"

    def __init__(self, n_entities: int, n_relations: int, dim: int, seed: int = 0) -> None:
        if n_entities < 1 or n_relations < 1:
            raise ConfigError("model needs at least one entity and one relation")
        if dim < 1:
            raise ConfigError("embedding dimension must be positive")
        self.n_entities = n_entities
        self.n_relations = n_relations
        self.dim = dim
        self.seed = seed
        self._init_params(np.random.default_rng(seed))

    def _init_params(self, rng: np.random.Generator) -> None:
        raise NotImplementedError

    def params(self) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.params().items()}

    def apply_grads(self, grads: Mapping[str, np.ndarray], lr: float) -> None:
        for name, arr in self.params().items():
            arr -= lr * grads[name]

    def post_update(self) -> None:
        """Constraint projection hook, run after each optimizer step."""

    def score(self, h: np.ndarray, r: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def score_all_tails(self, h: int, r: int) -> np.ndarray:
        raise NotImplementedError

    def score_all_heads(self, r: int, t: int) -> np.ndarray:
        raise NotImplementedError

    def add_score_grads(
        self,
        h: np.ndarray,
        r: np.ndarray,
        t: np.ndarray,
        coeff: np.ndarray,
        grads: Mapping[str, np.ndarray],
    ) -> None:
        """Accumulate coeff[i] * d score_i / d param into grads."""
        raise NotImplementedError


def _uniform_init(rng: np.random.Generator, shape: tuple[int, ...], dim: int) -> np.ndarray:
    bound = 6.0 / np.sqrt(dim)
    return rng.uniform(-bound, bound, size=shape)


class TransEModel(BaseModel):
    """Translation scoring: -||e_h + e_r - e_t||_p, p in {1, 2}."""

    kind = "TransE"
    loss_kind = "margin"

    def __init__(self, n_entities: int, n_relations: int, dim: int, seed: int = 0, norm: int = 2):
        if norm not in (1, 2):
            raise ConfigError("TransE norm must be 1 or 2")
        self.norm = norm
        super().__init__(n_entities, n_relations, dim, seed)

    def _init_params(self, rng: np.random.Generator) -> None:
        self.ent = _uniform_init(rng, (self.n_entities, self.dim), self.dim)
        self.rel = _uniform_init(rng, (self.n_relations, self.dim), self.dim)

    def params(self) -> dict[str, np.ndarray]:
        return {"ent": self.ent, "rel": self.rel}

    def _diff(self, h, r, t) -> np.ndarray:
        return self.ent[h] + self.rel[r] - self.ent[t]

    def score(self, h, r, t) -> np.ndarray:
        d = self._diff(h, r, t)
        if self.norm == 1:
            return -np.abs(d).sum(axis=-1)
        return -np.sqrt((d * d).sum(axis=-1))

    def score_all_tails(self, h: int, r: int) -> np.ndarray:
        d = (self.ent[h] + self.rel[r])[None, :] - self.ent
        if self.norm == 1:
            return -np.abs(d).sum(axis=1)
        return -np.sqrt((d * d).sum(axis=1))

    def score_all_heads(self, r: int, t: int) -> np.ndarray:
        d = self.ent + (self.rel[r] - self.ent[t])[None, :]
        if self.norm == 1:
            return -np.abs(d).sum(axis=1)
        return -np.sqrt((d * d).sum(axis=1))

    def add_score_grads(self, h, r, t, coeff, grads) -> None:
        d = self._diff(h, r, t)
        if self.norm == 1:
            unit = np.sign(d)
        else:
            n = np.sqrt((d * d).sum(axis=-1, keepdims=True))
            unit = np.where(n > _EPS, d / np.maximum(n, _EPS), 0.0)
        g = -coeff[:, None] * unit
        np.add.at(grads["ent"], h, g)
        np.add.at(grads["rel"], r, g)
        np.add.at(grads["ent"], t, -g)

    def post_update(self) -> None:
        # entities live inside the unit ball
        norms = np.sqrt((self.ent * self.ent).sum(axis=1, keepdims=True))
        np.divide(self.ent, norms, out=self.ent, where=norms > 1.0)


class DistMultModel(BaseModel):
    """Diagonal bilinear scoring: sum(e_h * e_r * e_t)."""

    kind = "DistMult"
    loss_kind = "logistic"

    def _init_params(self, rng: np.random.Generator) -> None:
        self.ent = _uniform_init(rng, (self.n_entities, self.dim), self.dim)
        self.rel = _uniform_init(rng, (self.n_relations, self.dim), self.dim)

    def params(self) -> dict[str, np.ndarray]:
        return {"ent": self.ent, "rel": self.rel}

    def score(self, h, r, t) -> np.ndarray:
        return (self.ent[h] * self.rel[r] * self.ent[t]).sum(axis=-1)

    def score_all_tails(self, h: int, r: int) -> np.ndarray:
        return self.ent @ (self.ent[h] * self.rel[r])

    def score_all_heads(self, r: int, t: int) -> np.ndarray:
        return self.ent @ (self.rel[r] * self.ent[t])

    def add_score_grads(self, h, r, t, coeff, grads) -> None:
        c = coeff[:, None]
        np.add.at(grads["ent"], h, c * self.rel[r] * self.ent[t])
        np.add.at(grads["rel"], r, c * self.ent[h] * self.ent[t])
        np.add.at(grads["ent"], t, c * self.ent[h] * self.rel[r])


class ComplExModel(BaseModel):
    """Complex bilinear scoring: Re(sum(e_h * e_r * conj(e_t)))."""

    kind = "ComplEx"
    loss_kind = "logistic"

    def _init_params(self, rng: np.random.Generator) -> None:
        scale = 0.1
        shape_e = (self.n_entities, self.dim)
        shape_r = (self.n_relations, self.dim)
        self.ent = rng.normal(0.0, scale, shape_e) + 1j * rng.normal(0.0, scale, shape_e)
        self.rel = rng.normal(0.0, scale, shape_r) + 1j * rng.normal(0.0, scale, shape_r)

    def params(self) -> dict[str, np.ndarray]:
        return {"ent": self.ent, "rel": self.rel}

    def score(self, h, r, t) -> np.ndarray:
        return (self.ent[h] * self.rel[r] * np.conj(self.ent[t])).sum(axis=-1).real

    def score_all_tails(self, h: int, r: int) -> np.ndarray:
        return (np.conj(self.ent) @ (self.ent[h] * self.rel[r])).real

    def score_all_heads(self, r: int, t: int) -> np.ndarray:
        return (self.ent @ (self.rel[r] * np.conj(self.ent[t]))).real

    def add_score_grads(self, h, r, t, coeff, grads) -> None:
        c = coeff[:, None]
        eh, er, et = self.ent[h], self.rel[r], self.ent[t]
        np.add.at(grads["ent"], h, c * np.conj(er) * et)
        np.add.at(grads["rel"], r, c * np.conj(eh) * et)
        np.add.at(grads["ent"], t, c * eh * er)


class RotatEModel(BaseModel):
    """Rotation scoring: -||e_h o e^{i theta_r} - e_t|| (complex L2)."""

    kind = "RotatE"
    loss_kind = "margin"

    def _init_params(self, rng: np.random.Generator) -> None:
        bound = 6.0 / np.sqrt(self.dim)
        shape_e = (self.n_entities, self.dim)
        self.ent = rng.uniform(-bound, bound, shape_e) + 1j * rng.uniform(-bound, bound, shape_e)
        self.phase = rng.uniform(-np.pi, np.pi, (self.n_relations, self.dim))

    def params(self) -> dict[str, np.ndarray]:
        return {"ent": self.ent, "phase": self.phase}

    def _rot(self, r) -> np.ndarray:
        return np.exp(1j * self.phase[r])

    def score(self, h, r, t) -> np.ndarray:
        d = self.ent[h] * self._rot(r) - self.ent[t]
        return -np.sqrt((d * np.conj(d)).real.sum(axis=-1))

    def score_all_tails(self, h: int, r: int) -> np.ndarray:
        d = (self.ent[h] * self._rot(r))[None, :] - self.ent
        return -np.sqrt((d * np.conj(d)).real.sum(axis=1))

    def score_all_heads(self, r: int, t: int) -> np.ndarray:
        d = self.ent * self._rot(r)[None, :] - self.ent[t][None, :]
        return -np.sqrt((d * np.conj(d)).real.sum(axis=1))

    def add_score_grads(self, h, r, t, coeff, grads) -> None:
        rot = self._rot(r)
        hr = self.ent[h] * rot
        d = hr - self.ent[t]
        n = np.sqrt((d * np.conj(d)).real.sum(axis=-1, keepdims=True))
        unit = np.where(n > _EPS, d / np.maximum(n, _EPS), 0.0 + 0.0j)
        c = coeff[:, None]
        np.add.at(grads["ent"], h, c * (-np.conj(rot) * unit))
        np.add.at(grads["ent"], t, c * unit)
        np.add.at(grads["phase"], r, (c * (np.conj(unit) * hr).imag))


_MODELS = {
    "transe": TransEModel,
    "distmult": DistMultModel,
    "complex": ComplExModel,
    "rotate": RotatEModel,
}


def model_kinds() -> tuple[str, ...]:
    return tuple(sorted(_MODELS))


def build_model(
    kind: str,
    n_entities: int,
    n_relations: int,
    dim: int,
    seed: int = 0,
    norm: int = 2,
) -> BaseModel:
    key = kind.lower()
    if key not in _MODELS:
        raise ConfigError(f"unknown model kind {kind!r}; expected one of {model_kinds()}")
    if key == "transe":
        return TransEModel(n_entities, n_relations, dim, seed, norm=norm)
    return _MODELS[key](n_entities, n_relations, dim, seed)
