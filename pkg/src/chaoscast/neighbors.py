"""Exact nearest-neighbor search over embedded delay vectors.

The index is a vectorized full scan: at the data sizes this toolkit
targets an exact scan is faster than tree bookkeeping, and it makes the
contract trivial to honor — results identical to a brute-force distance
sort, deterministic ties (smaller time index wins), and a temporal
exclusion window applied per query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddedDataset


@dataclass(frozen=True)
class NeighborSet:
    """k nearest eligible rows for one query, sorted by distance.

    truncated marks queries where fewer than k rows were eligible (the
    set then holds all of them). Every index respects the exclusion
    window around the query time.
    """

    query: np.ndarray
    indices: np.ndarray
    distances: np.ndarray
    k: int
    truncated: bool


class NeighborIndex:
    """Immutable snapshot of dataset rows answering exact k-NN queries."""

    def __init__(self, x: np.ndarray, t: np.ndarray):
        self.x = np.ascontiguousarray(x, dtype=float)
        self.t = np.asarray(t, dtype=int)
        if self.x.ndim != 2 or len(self.x) != len(self.t):
            raise ValueError("x must be (m, p) aligned with t of length m")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def p(self) -> int:
        return self.x.shape[1]


def build_index(dataset: EmbeddedDataset) -> NeighborIndex:
    """Index the dataset rows for repeated queries."""
    if len(dataset) < 1:
        raise ValueError("cannot index an empty dataset")
    return NeighborIndex(dataset.x, dataset.t)


def query_knn(
    index: NeighborIndex,
    query,
    k: int,
    query_time: int,
    exclusion: int = 0,
) -> NeighborSet:
    """k nearest rows by Euclidean distance outside the exclusion window.

    Rows with |t_row - query_time| <= exclusion are ineligible, so an
    in-sample query never matches its own row. Exact distance ties are
    broken by the smaller time index. If fewer than k rows are eligible
    the set is returned truncated; zero eligible rows is an error.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if exclusion < 0:
        raise ValueError(f"exclusion must be >= 0, got {exclusion}")
    q = np.asarray(query, dtype=float)
    if q.shape != (index.p,):
        raise ValueError(f"query must have shape ({index.p},), got {q.shape}")

    eligible = np.abs(index.t - int(query_time)) > exclusion
    rows = np.nonzero(eligible)[0]
    if len(rows) == 0:
        raise ValueError(
            f"no eligible rows: exclusion window {exclusion} around time "
            f"{query_time} removes all {len(index)} rows"
        )
    dists = np.sqrt(((index.x[rows] - q) ** 2).sum(axis=1))
    order = np.lexsort((index.t[rows], dists))
    take = min(k, len(rows))
    chosen = rows[order[:take]]
    return NeighborSet(
        query=q,
        indices=chosen,
        distances=dists[order[:take]],
        k=k,
        truncated=take < k,
    )


def neighbor_schedule(n: int, c: float = 1.0, gamma: float = 0.5) -> int:
    """Neighbor count k = max(2, ceil(c * n**gamma)), capped at n - 1.

    Any gamma in (0, 1) makes k grow without bound while k/n vanishes,
    which is what consistency of the local predictors requires. The ceil
    is taken with a tiny slack so exact powers are not bumped up by
    floating-point noise.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not c > 0:
        raise ValueError(f"c must be > 0, got {c}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    k = max(2, math.ceil(c * float(n) ** gamma - 1e-9))
    return min(k, n - 1)
