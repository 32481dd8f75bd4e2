"""Synthetic insert streams.

``uniform``        keys drawn uniformly (with repeats) from the universe
``zipf``           bounded Zipf ranks, scrambled over the universe
``sorted``         ascending distinct keys
``sorted-stride``  distinct keys interleaved so that every run of
                   ``keys_per_sst`` consecutive keys spans the whole universe
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ModelError

DISTRIBUTIONS = ("uniform", "zipf", "sorted", "sorted-stride")
DEFAULT_ZIPF_THETA = 0.99


@dataclass(frozen=True)
class WorkloadSpec:
    num_pairs: int
    key_bytes: int = 3
    value_bytes: int = 1079
    distribution: str = "uniform"
    key_universe: int = 1 << 24
    seed: int = 0
    zipf_theta: float = DEFAULT_ZIPF_THETA

    def __post_init__(self):
        if self.num_pairs < 1:
            raise ModelError("workload needs at least one pair")
        if self.key_bytes < 1 or self.value_bytes < 0:
            raise ModelError("key size must be >= 1 and value size >= 0")
        if self.distribution not in DISTRIBUTIONS:
            raise ModelError(
                f"unknown distribution {self.distribution!r}; expected one of {DISTRIBUTIONS}")
        if self.key_universe < 1:
            raise ModelError("key universe must be positive")
        if self.distribution in ("sorted", "sorted-stride") and self.key_universe < self.num_pairs:
            raise GeometryError(
                f"universe of {self.key_universe} keys cannot hold {self.num_pairs} distinct keys")
        if self.distribution == "zipf" and not 0 < self.zipf_theta < 1:
            raise ModelError("zipf theta must lie in (0, 1)")

    @property
    def pair_bytes(self) -> int:
        return self.key_bytes + self.value_bytes

    @property
    def dataset_bytes(self) -> int:
        return self.num_pairs * self.pair_bytes


@functools.lru_cache(maxsize=16)
def _zeta(n: int, theta: float, chunk: int = 1 << 22) -> float:
    total = 0.0
    for start in range(1, n + 1, chunk):
        i = np.arange(start, min(n, start + chunk - 1) + 1, dtype=np.float64)
        total += float(np.sum(i ** -theta))
    return total


def _zipf_ranks(rng, n: int, universe: int, theta: float) -> np.ndarray:
    # Gray et al. rejection-free generator (as used by YCSB), ranks in [0, universe)
    zetan = _zeta(universe, theta)
    zeta2 = 1.0 + 0.5**theta
    alpha = 1.0 / (1.0 - theta)
    eta = (1.0 - (2.0 / universe) ** (1.0 - theta)) / (1.0 - zeta2 / zetan)
    u = rng.random(n)
    uz = u * zetan
    ranks = (universe * (eta * u - eta + 1.0) ** alpha).astype(np.int64)
    ranks = np.where(uz < zeta2, 1, ranks)
    ranks = np.where(uz < 1.0, 0, ranks)
    return np.clip(ranks, 0, universe - 1)


def _scramble(ranks: np.ndarray, universe: int) -> np.ndarray:
    # affine bijection on [0, universe) so hot ranks are spread over the key space
    mult = int(universe * 0.6180339887) | 1
    while math.gcd(mult, universe) != 1:
        mult += 2
    return (ranks * mult + universe // 3) % universe


def generate_keys(spec: WorkloadSpec, keys_per_sst: int | None = None) -> np.ndarray:
    """Deterministic key stream of ``spec.num_pairs`` int64 keys."""
    rng = np.random.default_rng(spec.seed)
    n, u = spec.num_pairs, spec.key_universe
    if spec.distribution == "uniform":
        return rng.integers(0, u, size=n, dtype=np.int64)
    if spec.distribution == "zipf":
        return _scramble(_zipf_ranks(rng, n, u, spec.zipf_theta), u).astype(np.int64)

    keys = np.sort(rng.choice(u, size=n, replace=False).astype(np.int64))
    if spec.distribution == "sorted":
        return keys
    if keys_per_sst is None or keys_per_sst < 1:
        raise ModelError("sorted-stride needs keys_per_sst >= 1")
    if n % keys_per_sst:
        raise GeometryError(
            f"sorted-stride needs num_pairs ({n}) to be a multiple of keys_per_sst "
            f"({keys_per_sst})")
    groups = n // keys_per_sst
    # SST g takes keys g, g + groups, g + 2*groups, ... of the sorted set
    return keys.reshape(keys_per_sst, groups).T.reshape(-1).copy()
