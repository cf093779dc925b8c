"""Text embedding providers and similarity.

Entity labels are compared in a shared vector space.  The offline
provider derives vectors from seeded hashes of character n-grams, so the
whole embedding table is a pure function of (seed, dim, alias table) and
runs are reproducible without any model download.  A remote provider
speaks a small JSON batch protocol for setups that have a real encoder.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from hashlib import blake2b
from typing import Callable, Iterable, Protocol, Sequence

import httpx
import numpy as np

from .errors import EmbeddingError, RemoteEmbeddingError

DEFAULT_DIM = 64

# Character n-gram orders hashed by the offline provider.  Bigrams give
# coverage for very short labels, trigrams carry most of the signal.
_NGRAM_ORDERS = (2, 3)


@dataclass(frozen=True, slots=True)
class Embedding:
    """A finite float64 vector."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise EmbeddingError(f"embedding must be a non-empty 1-d vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise EmbeddingError("embedding contains non-finite values")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(np.all(self.values == other.values))


def cosine_sim(a: Embedding | Sequence[float], b: Embedding | Sequence[float]) -> float:
    """Cosine similarity in [-1, 1].

    Zero vectors and dimension mismatches are errors rather than NaN.
    Both arguments go through the same code path, so the result is
    bitwise symmetric in its arguments.
    """
    va = a.values if isinstance(a, Embedding) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, Embedding) else np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise EmbeddingError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise EmbeddingError("cosine similarity undefined for a zero vector")
    sim = float(np.dot(va, vb)) / (na * nb)
    # guard against float excess like 1.0000000000000002
    return max(-1.0, min(1.0, sim))


class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> Embedding: ...

    def embed_many(self, texts: Sequence[str]) -> list[Embedding]: ...


def normalize_text(text: str) -> str:
    """Lowercase and collapse runs of whitespace; empty results are errors."""
    norm = " ".join(text.lower().split())
    if not norm:
        raise EmbeddingError("cannot embed empty text")
    return norm


class DeterministicProvider:
    """Offline provider: seeded hashes of character n-grams, L2-normalized.

    The alias table maps surface forms to a canonical form before
    hashing, so scripted synonyms ("AD" -> "alzheimer's disease") get the
    exact same vector as their target.  Fixing the seed fixes every
    vector byte-for-byte; changing it re-randomises the whole table.
    """

    def __init__(
        self,
        seed: int = 0,
        dim: int = DEFAULT_DIM,
        alias_table: dict[str, str] | None = None,
    ) -> None:
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.seed = seed
        self.dim = dim
        self.alias_table = {
            normalize_text(k): normalize_text(v) for k, v in (alias_table or {}).items()
        }
        self._key = str(seed).encode("utf-8")[:64]
        self._cache: dict[str, Embedding] = {}
        self._lock = threading.Lock()

    def canonical(self, text: str) -> str:
        norm = normalize_text(text)
        return self.alias_table.get(norm, norm)

    def embed(self, text: str) -> Embedding:
        canon = self.canonical(text)
        with self._lock:
            hit = self._cache.get(canon)
        if hit is not None:
            return hit
        vec = np.zeros(self.dim, dtype=np.float64)
        padded = f"^{canon}$"
        for order in _NGRAM_ORDERS:
            for i in range(len(padded) - order + 1):
                gram = padded[i : i + order]
                h = int.from_bytes(
                    blake2b(gram.encode("utf-8"), key=self._key, digest_size=8).digest(), "big"
                )
                # low bits pick the bucket, a high bit picks the sign
                vec[h % self.dim] += 1.0 if (h >> 56) & 1 else -1.0
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            # all grams cancelled; pin one coordinate so the vector stays usable
            h = int.from_bytes(blake2b(canon.encode("utf-8"), key=self._key, digest_size=8).digest(), "big")
            vec[h % self.dim] = 1.0
            norm = 1.0
        emb = Embedding(vec / norm)
        with self._lock:
            self._cache[canon] = emb
        return emb

    def embed_many(self, texts: Sequence[str]) -> list[Embedding]:
        return [self.embed(t) for t in texts]


class RemoteProvider:
    """Provider backed by an HTTP embedding endpoint (see remote_embed)."""

    def __init__(self, endpoint: str, **kwargs) -> None:
        self.endpoint = endpoint
        self.kwargs = kwargs

    def embed(self, text: str) -> Embedding:
        return self.embed_many([text])[0]

    def embed_many(self, texts: Sequence[str]) -> list[Embedding]:
        return remote_embed(self.endpoint, list(texts), **self.kwargs)


def _parse_batch(payload: object, expected: int) -> list[np.ndarray]:
    if not isinstance(payload, dict) or "vectors" not in payload:
        raise RemoteEmbeddingError("malformed response: missing 'vectors'")
    vectors = payload["vectors"]
    if not isinstance(vectors, list) or len(vectors) != expected:
        raise RemoteEmbeddingError(
            f"malformed response: expected {expected} vectors, got "
            f"{len(vectors) if isinstance(vectors, list) else type(vectors).__name__}"
        )
    out: list[np.ndarray] = []
    for row in vectors:
        try:
            arr = np.asarray(row, dtype=np.float64)
        except (TypeError, ValueError):
            raise RemoteEmbeddingError("malformed response: non-numeric vector") from None
        if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
            raise RemoteEmbeddingError("malformed response: bad vector shape or non-finite values")
        out.append(arr)
    return out


def remote_embed(
    endpoint: str,
    texts: Sequence[str],
    *,
    batch_size: int = 64,
    max_attempts: int = 3,
    backoff: float = 0.5,
    timeout: float = 30.0,
    headers: dict[str, str] | None = None,
    max_in_flight: int = 4,
    client: httpx.Client | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[Embedding]:
    """Embed texts through a remote JSON endpoint.

    Requests are POSTs of {"texts": [...]} in batches of at most
    ``batch_size``; responses must be {"vectors": [[...], ...]} aligned
    with the request.  5xx responses and transport failures are retried
    with exponential backoff up to ``max_attempts`` total tries; other
    failures raise immediately.  Batches are issued concurrently up to
    ``max_in_flight`` and results keep input order.  All returned
    vectors must share one dimension.
    """
    if batch_size <= 0:
        raise ValueError("batch_size must be positive")
    if max_attempts <= 0:
        raise ValueError("max_attempts must be positive")
    if not texts:
        return []

    own_client = client is None
    http = client or httpx.Client(timeout=timeout)
    batches = [list(texts[i : i + batch_size]) for i in range(0, len(texts), batch_size)]

    def fetch(batch: list[str]) -> list[np.ndarray]:
        last_error: Exception | None = None
        for attempt in range(max_attempts):
            if attempt:
                sleep(backoff * (2 ** (attempt - 1)))
            try:
                resp = http.post(endpoint, json={"texts": batch}, headers=headers)
            except httpx.TransportError as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = RemoteEmbeddingError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise RemoteEmbeddingError(f"embedding endpoint returned {resp.status_code}")
            try:
                payload = resp.json()
            except ValueError:
                raise RemoteEmbeddingError("malformed response: not JSON") from None
            return _parse_batch(payload, len(batch))
        raise RemoteEmbeddingError(
            f"embedding endpoint failed after {max_attempts} attempts: {last_error}"
        )

    try:
        if len(batches) == 1 or max_in_flight <= 1:
            results = [fetch(b) for b in batches]
        else:
            with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
                results = list(pool.map(fetch, batches))
    finally:
        if own_client:
            http.close()

    flat = [arr for group in results for arr in group]
    dims = {arr.shape[0] for arr in flat}
    if len(dims) > 1:
        raise RemoteEmbeddingError(f"inconsistent vector dimensions in response: {sorted(dims)}")
    return [Embedding(arr) for arr in flat]
