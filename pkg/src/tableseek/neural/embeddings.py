"""Word embedding table and hashed character-trigram encoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, ParseError


def _fnv1a(data: bytes) -> int:
    """32-bit FNV-1a; a process-independent stable string hash."""
    h = 0x811C9DC5
    for byte in data:
        h = ((h ^ byte) * 0x01000193) & 0xFFFFFFFF
    return h


@dataclass(frozen=True)
class CharEncoder:
    """Hashed character-trigram bag encoder.

    Tokens are padded with '#' on both sides, split into character
    trigrams, each trigram hashed into one of ``buckets`` rows of an
    embedding table, and the rows averaged. Deterministic, total (any
    token including the empty one encodes to a ``dim``-vector), and
    cheap; out-of-vocabulary tokens therefore never fail to encode.
    """

    buckets: int
    dim: int

    def trigram_ids(self, token: str) -> list[int]:
        padded = f"#{token}#"
        if len(padded) < 3:
            return []
        return [
            _fnv1a(padded[i : i + 3].encode("utf-8")) % self.buckets
            for i in range(len(padded) - 2)
        ]

    def encode(self, token: str, table: np.ndarray) -> np.ndarray:
        if table.shape != (self.buckets, self.dim):
            raise DataError(
                f"char table shape {table.shape} != ({self.buckets}, {self.dim})"
            )
        ids = self.trigram_ids(token)
        if not ids:
            return np.zeros(self.dim)
        return table[ids].mean(axis=0)


class EmbeddingTable:
    """Token -> vector lookup with a character-level fallback.

    Vectors all have length ``dim``. Lookup is total: out-of-vocabulary
    tokens are encoded by a fixed, seed-determined character-trigram
    table so that two processes always agree on the fallback vector.
    """

    def __init__(
        self,
        dim: int,
        vectors: dict[str, np.ndarray],
        fallback_seed: int = 0,
        fallback_buckets: int = 1024,
    ):
        if dim <= 0:
            raise DataError("embedding dim must be positive")
        self.dim = dim
        self.vectors: dict[str, np.ndarray] = {}
        for token, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise DataError(
                    f"embedding for {token!r} has length {arr.shape}, "
                    f"expected ({dim},)"
                )
            self.vectors[token] = arr
        self.fallback_seed = fallback_seed
        self.fallback_buckets = fallback_buckets
        self._fallback_encoder = CharEncoder(fallback_buckets, dim)
        rng = np.random.default_rng(fallback_seed)
        scale = 1.0 / np.sqrt(dim)
        self._fallback_table = rng.uniform(
            -scale, scale, size=(fallback_buckets, dim)
        )

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def lookup(self, token: str) -> np.ndarray:
        vec = self.vectors.get(token)
        if vec is not None:
            return vec
        return self._fallback_encoder.encode(token, self._fallback_table)

    @classmethod
    def random(
        cls, vocab, dim: int, seed: int = 0, fallback_seed: int = 0
    ) -> "EmbeddingTable":
        """Seeded random table over a vocabulary (fixture/training helper)."""
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(dim)
        vectors = {
            token: rng.uniform(-scale, scale, size=dim)
            for token in sorted(set(vocab))
        }
        return cls(dim, vectors, fallback_seed=fallback_seed)


def load_embeddings(path, fallback_seed: int = 0) -> EmbeddingTable:
    """Load a text embedding file.

    Format: an optional ``count dim`` header line, then one
    ``token v1 ... v_dim`` line per token, space separated.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = None
    declared_count = None
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            parts = raw.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    declared_count, dim = int(parts[0]), int(parts[1])
                    continue
                except ValueError:
                    pass  # not a header
            token, values = parts[0], parts[1:]
            if not values:
                raise ParseError("no vector values", path=path, line=lineno)
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise ParseError(
                    f"bad vector value: {exc}", path=path, line=lineno
                ) from None
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ParseError(
                    f"vector length {len(vec)} != {dim}", path=path, line=lineno
                )
            vectors[token] = vec
    if not vectors:
        raise DataError(f"no embeddings found in {path}")
    if declared_count is not None and declared_count != len(vectors):
        raise DataError(
            f"{path}: header declares {declared_count} vectors, "
            f"found {len(vectors)}"
        )
    return EmbeddingTable(dim, vectors, fallback_seed=fallback_seed)
