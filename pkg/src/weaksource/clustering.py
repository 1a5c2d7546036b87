"""k-medoid clustering of atypical blocks under Hamming distance.

Cluster indices ``j`` are 1-based in the public API (``assign`` returns
``1..k``, ``largest_index`` is 1-based); per-cluster lists such as ``sizes``
are ordinary Python lists, so cluster ``j`` lives at ``sizes[j - 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .source_model import SourceModel, SymbolBlock
from .typicality import Zone, TypicalPartition


class ClusteringError(ValueError):
    pass


def hamming_distance(a: SymbolBlock, b: SymbolBlock) -> int:
    if len(a) != len(b):
        raise ClusteringError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))


def _distances_to(rows: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """``(m, k)`` matrix of Hamming distances from each row to each center."""
    out = np.empty((rows.shape[0], centers.shape[0]), dtype=np.int64)
    for j, c in enumerate(centers):
        out[:, j] = (rows != c).sum(axis=1)
    return out


def _medoid_of(rows: np.ndarray, alphabet_size: int) -> int:
    """Index (into ``rows``) of the member with least total distance to the others.

    Sum of distances from x to every member is ``s*n - sum_i count[i, x_i]``
    where ``count[i, a]`` counts members with symbol a at position i. Ties go to
    the first row, which is the lexicographically smallest when rows are sorted.
    """
    s, n = rows.shape
    counts = np.zeros((n, alphabet_size), dtype=np.int64)
    for a in range(alphabet_size):
        counts[:, a] = (rows == a).sum(axis=0)
    agree = counts[np.arange(n)[None, :], rows].sum(axis=1)
    return int(np.argmin(s * n - agree))


@dataclass(frozen=True, eq=False)
class ClusterModel:
    k: int
    blocks: np.ndarray = field(repr=False)  # clustered rows, lexicographic
    log2p: np.ndarray = field(repr=False)
    medoid_rows: tuple[int, ...]  # row index of each medoid in ``blocks``
    labels: np.ndarray = field(repr=False)  # 0-based cluster of each row
    sizes: list[int]
    cluster_prob: list[float]
    largest_index: int  # 1-based
    plc: float
    converged: bool
    rounds: int
    cost_history: list[int] = field(repr=False)
    seed: int = 0

    @cached_property
    def medoids(self) -> list[SymbolBlock]:
        return [SymbolBlock(tuple(self.blocks[r].tolist())) for r in self.medoid_rows]

    @cached_property
    def medoid_array(self) -> np.ndarray:
        return self.blocks[list(self.medoid_rows)]

    @cached_property
    def _row_of(self) -> dict[SymbolBlock, int]:
        return {SymbolBlock(tuple(r)): i for i, r in enumerate(self.blocks.tolist())}

    @property
    def n(self) -> int:
        return int(self.blocks.shape[1])

    @property
    def total_cost(self) -> int:
        return self.cost_history[-1]

    @cached_property
    def assignment(self) -> dict[SymbolBlock, int]:
        """Clustered block -> 1-based cluster index."""
        return {b: int(self.labels[i]) + 1 for b, i in self._row_of.items()}

    def members(self, j: int) -> list[SymbolBlock]:
        rows = np.flatnonzero(self.labels == j - 1)
        return [SymbolBlock(tuple(self.blocks[r].tolist())) for r in rows]

    def to_dict(self, homogeneity: "HomogeneityReport | None" = None) -> dict:
        out = {
            "k": self.k,
            "sizes": list(self.sizes),
            "cluster_prob": list(self.cluster_prob),
            "plc": self.plc,
            "largest_index": self.largest_index,
            "medoids": [list(m.symbols) for m in self.medoids],
            "converged": self.converged,
            "rounds": self.rounds,
        }
        if homogeneity is not None:
            out["homogeneity"] = homogeneity.to_dict()
        return out


def _largest(sizes: list[int], probs: list[float]) -> int:
    # most members, then most mass, then lowest index
    return min(range(len(sizes)), key=lambda j: (-sizes[j], -probs[j], j)) + 1


def _farthest_point_init(rows: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    chosen = [0]
    nearest = (rows != rows[0]).sum(axis=1)
    while len(chosen) < k:
        best = nearest.max()
        ties = np.flatnonzero(nearest == best)
        pick = int(ties[rng.integers(len(ties))]) if len(ties) > 1 else int(ties[0])
        chosen.append(pick)
        nearest = np.minimum(nearest, (rows != rows[pick]).sum(axis=1))
    return chosen


def cluster_blocks(
    blocks: np.ndarray,
    log2p: np.ndarray,
    k: int,
    seed: int = 0,
    alphabet_size: int | None = None,
    max_rounds: int | None = None,
) -> ClusterModel:
    """Cluster an arbitrary set of distinct, lexicographically sorted blocks."""
    blocks = np.asarray(blocks)
    m = blocks.shape[0]
    if m == 0:
        raise ClusteringError("nothing to cluster: the block set is empty")
    if not 2 <= k <= m:
        raise ClusteringError(f"k={k} out of range [2, {m}]")
    if alphabet_size is None:
        alphabet_size = int(blocks.max()) + 1
    if max_rounds is None:
        max_rounds = 10 * m

    rng = np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF))
    medoids = _farthest_point_init(blocks, k, rng)

    def assign_all(meds):
        d = _distances_to(blocks, blocks[meds])
        lab = np.argmin(d, axis=1)  # first minimum = lowest j
        return lab, int(d[np.arange(m), lab].sum()), d

    labels, cost, dist = assign_all(medoids)
    history = [cost]
    converged = False
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        # medoids are distinct members, so clusters cannot empty out; reseed defensively
        for j in range(k):
            if not np.any(labels == j):
                own = dist[np.arange(m), labels].copy()
                own[medoids] = -1
                medoids[j] = int(np.argmax(own))
                labels, cost, dist = assign_all(medoids)
        new_medoids = []
        for j in range(k):
            rows = np.flatnonzero(labels == j)
            new_medoids.append(int(rows[_medoid_of(blocks[rows], alphabet_size)]))
        new_labels, new_cost, new_dist = assign_all(new_medoids)
        if new_medoids == medoids and np.array_equal(new_labels, labels):
            converged = True
            break
        medoids, labels, cost, dist = new_medoids, new_labels, new_cost, new_dist
        history.append(cost)

    probs = np.exp2(log2p)
    sizes = [int(np.count_nonzero(labels == j)) for j in range(k)]
    cluster_prob = [math.fsum(probs[labels == j].tolist()) for j in range(k)]
    largest = _largest(sizes, cluster_prob)
    return ClusterModel(
        k=k,
        blocks=blocks,
        log2p=np.asarray(log2p),
        medoid_rows=tuple(medoids),
        labels=labels,
        sizes=sizes,
        cluster_prob=cluster_prob,
        largest_index=largest,
        plc=cluster_prob[largest - 1],
        converged=converged,
        rounds=rounds,
        cost_history=history,
        seed=int(seed),
    )


def cluster_atypical(
    partition: TypicalPartition, model: SourceModel, k: int, seed: int = 0
) -> ClusterModel:
    if partition.atypical_count == 0:
        raise ClusteringError("atypical set is empty")
    return cluster_blocks(
        partition.atypical_array,
        partition.atypical_log2p,
        k,
        seed=seed,
        alphabet_size=model.alphabet_size,
    )


def assign(block: SymbolBlock, clusters: ClusterModel) -> int:
    """1-based index of the nearest medoid; ties go to the lowest index."""
    if block.n != clusters.n:
        raise ClusteringError(f"block length {block.n} != {clusters.n}")
    d = (clusters.medoid_array != np.asarray(block.symbols)).sum(axis=1)
    return int(np.argmin(d)) + 1


def largest_cluster_probability(clusters: ClusterModel) -> float:
    return clusters.plc


def compute_b_prime(clusters: ClusterModel) -> list[SymbolBlock]:
    """Clustered blocks minus the medoids of every non-largest cluster."""
    empty = [j + 1 for j, s in enumerate(clusters.sizes) if s == 0]
    if empty:
        raise ClusteringError(f"empty clusters: {empty}")
    drop = {r for j, r in enumerate(clusters.medoid_rows) if j + 1 != clusters.largest_index}
    return [
        SymbolBlock(tuple(row))
        for i, row in enumerate(clusters.blocks.tolist())
        if i not in drop
    ]


@dataclass(frozen=True)
class HomogeneityReport:
    labels: list[str]  # per cluster: VLPZ, VHPZ or MIXED
    fraction: float  # share of clusters lying in a single zone

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "fraction": self.fraction}


def zone_homogeneity(
    clusters: ClusterModel, partition: TypicalPartition, model: SourceModel
) -> HomogeneityReport:
    if clusters.blocks is partition.atypical_array or np.array_equal(
        clusters.blocks, partition.atypical_array
    ):
        codes = partition.atypical_zone_codes
    else:
        codes = np.array(
            [list(Zone).index(partition.zone_of(SymbolBlock(tuple(r)))) for r in clusters.blocks.tolist()]
        )
    zones = list(Zone)
    labels = []
    for j in range(clusters.k):
        present = set(codes[clusters.labels == j].tolist())
        labels.append(zones[present.pop()].value if len(present) == 1 else "MIXED")
    homogeneous = sum(lab != "MIXED" for lab in labels)
    return HomogeneityReport(labels=labels, fraction=homogeneous / clusters.k)
