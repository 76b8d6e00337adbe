"""Pluggable phrase encoders for embedding initialization.

The default offline encoder hashes character n-grams into a fixed-width
vector with a keyed hash, so it is a pure function of (seed, phrase) across
processes and needs no model downloads.  A remote encoder slot mirrors the
oracle's backend split.
"""

from __future__ import annotations

import hashlib
from typing import Protocol

import numpy as np

from .errors import EncoderFailure


class PhraseEncoder(Protocol):
    dim: int

    def encode(self, phrase: str) -> np.ndarray: ...


class HashedNGramEncoder:
    """Seeded signed hashing of character 3-5-grams, L2-normalized."""

    def __init__(self, dim: int = 128, seed: int = 0, ngram_range: tuple[int, int] = (3, 5)) -> None:
        if dim < 2:
            raise ValueError("encoder dim must be >= 2")
        self.dim = dim
        self.seed = seed
        self.ngram_range = ngram_range

    def _hash(self, token: str) -> tuple[int, float]:
        key = f"{self.seed}|{token}".encode("utf-8")
        digest = hashlib.blake2b(key, digest_size=8).digest()
        value = int.from_bytes(digest, "big")
        return value % self.dim, 1.0 if (value >> 40) & 1 else -1.0

    def encode(self, phrase: str) -> np.ndarray:
        text = f" {phrase.lower().strip()} "
        vec = np.zeros(self.dim, dtype=np.float64)
        lo, hi = self.ngram_range
        for n in range(lo, hi + 1):
            for i in range(max(0, len(text) - n + 1)):
                idx, sign = self._hash(text[i : i + n])
                vec[idx] += sign
        norm = float(np.linalg.norm(vec))
        if norm > 0:
            vec /= norm
        else:
            vec[0] = 1.0  # degenerate ultra-short phrase
        return vec


class RemoteEncoder:
    """Fetches vectors from an embedding endpoint (same wire family as the
    oracle's remote backend).  Not used by the offline pipeline."""

    def __init__(self, endpoint_url: str, model_name: str, dim: int, timeout: float = 30.0) -> None:
        self.endpoint_url = endpoint_url
        self.model_name = model_name
        self.dim = dim
        self.timeout = timeout

    def encode(self, phrase: str) -> np.ndarray:
        import httpx

        try:
            response = httpx.post(
                self.endpoint_url,
                json={"model": self.model_name, "input": phrase},
                timeout=self.timeout,
            )
            response.raise_for_status()
            vec = np.asarray(response.json()["data"][0]["embedding"], dtype=np.float64)
        except Exception as exc:
            raise EncoderFailure(-1, phrase, str(exc)) from exc
        if vec.shape != (self.dim,):
            raise EncoderFailure(-1, phrase, f"expected dim {self.dim}, got {vec.shape}")
        return vec
