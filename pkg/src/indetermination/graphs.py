"""Graph clustering by local-weight modularities.

A clustering score is built in two stages: a local weight ``w[i, j]`` per
vertex pair, then the global score ``sum(w[i, j])`` over same-class pairs
(a partition viewed as a binary equivalence relation).  Two local weights
are provided, one per canonical coupling of the edge-frequency matrix:

* deviation to independence (the Newman-Girvan modularity weight)
    ``w[i, j] = a[i, j]/2M - deg(i)*deg(j)/(2M)**2``  (times 1/2M global
    normalization folded into the weight),
* deviation to indetermination
    ``w[i, j] = a[i, j] - deg(i)/n - deg(j)/n + 2M/n**2``  (unnormalized).

The two scales are NOT comparable across criteria; only the partitions
are.  Both weight matrices sum to zero over all pairs, so the one-class
partition always scores 0.

Since every vertex is always in the same class as itself, the diagonal
terms contribute a partition-independent constant under either weight;
``global_score`` includes them by default and exposes
``include_diagonal=False`` for the bare off-diagonal convention.

Maximization uses a seeded local-move heuristic (single-vertex
relocations to convergence, then class aggregation, repeated), plus an
exact enumeration oracle for small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .coupling import _freeze
from .errors import InvalidDistribution, SizeExceeded

__all__ = [
    "WeightedGraph",
    "Partition",
    "LocalWeights",
    "local_weights_independence",
    "local_weights_indetermination",
    "global_score",
    "louvain",
    "louvain_detailed",
    "brute_force_best",
    "set_partitions",
]

# Local weights are plain dense arrays; entries may be negative.
LocalWeights = np.ndarray

_GAIN_TOL = 1e-12


class WeightedGraph:
    """Symmetric nonnegative incidence matrix over ``n`` vertices.

    Self-loops are allowed (default absent).  ``two_m`` is the total
    weight ``sum(a)`` and must be positive.
    """

    __slots__ = ("a", "n", "two_m")

    def __init__(self, a) -> None:
        m = np.array(a, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.size == 0:
            raise InvalidDistribution("incidence matrix must be square and nonempty")
        if not np.all(np.isfinite(m)) or m.min() < 0:
            raise InvalidDistribution("weights must be finite and nonnegative")
        if not np.allclose(m, m.T, atol=1e-12):
            raise InvalidDistribution("incidence matrix must be symmetric")
        m = 0.5 * (m + m.T)
        total = float(m.sum())
        if total <= 0:
            raise InvalidDistribution("total weight must be positive")
        self.a = _freeze(m)
        self.n = m.shape[0]
        self.two_m = total

    @classmethod
    def from_edges(cls, edges, n: int | None = None) -> "WeightedGraph":
        """Build from an undirected edge list of ``(i, j, weight)`` triples.

        Each edge is listed once; the matrix is symmetrized.  A self-loop
        ``(i, i, w)`` contributes ``w`` once to the diagonal.
        """
        triples = [(int(i), int(j), float(w)) for i, j, w in edges]
        if not triples:
            raise InvalidDistribution("edge list is empty")
        size = n if n is not None else 1 + max(max(i, j) for i, j, _ in triples)
        m = np.zeros((size, size))
        for i, j, w in triples:
            m[i, j] += w
            if i != j:
                m[j, i] += w
        return cls(m)

    @property
    def degrees(self) -> np.ndarray:
        return self.a.sum(axis=1)


@dataclass(frozen=True)
class Partition:
    """Class labels over ``n`` items.

    Labels induce a reflexive, symmetric, transitive pairwise relation by
    construction; any integers are accepted and can be compacted with
    :meth:`canonical`.
    """

    labels: np.ndarray

    def __post_init__(self) -> None:
        lab = np.array(self.labels, dtype=np.int64)
        if lab.ndim != 1 or lab.size == 0:
            raise InvalidDistribution("labels must form a nonempty 1-D vector")
        object.__setattr__(self, "labels", _freeze(lab))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def n_classes(self) -> int:
        return np.unique(self.labels).size

    def canonical(self) -> np.ndarray:
        """Labels renumbered 0, 1, ... in order of first appearance."""
        _, first = np.unique(self.labels, return_index=True)
        order = self.labels[np.sort(first)]
        remap = {int(c): k for k, c in enumerate(order)}
        return np.array([remap[int(c)] for c in self.labels], dtype=np.int64)

    def as_relation(self) -> np.ndarray:
        """Boolean equivalence-relation matrix of the partition."""
        return self.labels[:, None] == self.labels[None, :]


def local_weights_independence(g: WeightedGraph) -> LocalWeights:
    """Deviation-to-independence weights ``a/2M - outer(deg, deg)/(2M)**2``."""
    d = g.degrees
    return g.a / g.two_m - np.outer(d, d) / g.two_m**2


def local_weights_indetermination(g: WeightedGraph) -> LocalWeights:
    """Deviation-to-indetermination weights ``a - deg/n - deg'/n + 2M/n**2``."""
    d = g.degrees
    return g.a - d[:, None] / g.n - d[None, :] / g.n + g.two_m / g.n**2


def _labels_of(part) -> np.ndarray:
    if isinstance(part, Partition):
        return part.labels
    return Partition(part).labels


def global_score(w: LocalWeights, part, include_diagonal: bool = True) -> float:
    """Sum of ``w[i, j]`` over same-class ordered pairs.

    Includes ``i == j`` terms by default; they shift every partition's
    score by the same constant and never change the maximizer.
    """
    w = np.asarray(w, dtype=float)
    labels = _labels_of(part)
    if labels.size != w.shape[0] or w.shape[0] != w.shape[1]:
        raise InvalidDistribution("weight matrix and partition sizes disagree")
    same = labels[:, None] == labels[None, :]
    total = float(w[same].sum())
    if not include_diagonal:
        total -= float(np.trace(w))
    return total


def _local_moves(w: np.ndarray, rng: np.random.Generator,
                 labels: np.ndarray | None = None) -> tuple[bool, np.ndarray]:
    """Single-vertex relocations until no move improves the score.

    Gain of moving vertex i between classes is twice the difference of
    its weight sums into the classes (w symmetric; the diagonal term
    moves with the vertex and cancels).  Ties never move; among strictly
    improving targets the smallest class index wins.  Empty label slots
    act as "detach to a singleton" candidates.
    """
    n = w.shape[0]
    labels = np.arange(n) if labels is None else labels.copy()
    improved = False
    while True:
        moved = False
        for i in rng.permutation(n):
            row = w[i]
            comm_sum = np.bincount(labels, weights=row, minlength=n)
            comm_sum[labels[i]] -= row[i]
            best = int(np.argmax(comm_sum))
            if comm_sum[best] > comm_sum[labels[i]] + _GAIN_TOL and best != labels[i]:
                labels[i] = best
                moved = True
                improved = True
        if not moved:
            return improved, labels


def _compact(labels: np.ndarray) -> np.ndarray:
    _, compact = np.unique(labels, return_inverse=True)
    return compact


def _aggregate(w: np.ndarray, labels: np.ndarray) -> np.ndarray:
    k = labels.max() + 1
    onehot = np.zeros((w.shape[0], k))
    onehot[np.arange(w.shape[0]), labels] = 1.0
    return onehot.T @ w @ onehot


def louvain(w: LocalWeights, seed: int, max_passes: int = 10) -> Partition:
    """Greedy modularity maximization over an arbitrary local-weight matrix.

    Each pass runs seeded-order single-vertex moves to local convergence,
    then aggregates classes into super-vertices and repeats on the
    aggregated weights, until a pass makes no move or ``max_passes`` is
    reached.  The result is locally optimal under single-vertex
    relocations and deterministic for a fixed seed.
    """
    return louvain_detailed(w, seed, max_passes)[0]


def louvain_detailed(w: LocalWeights, seed: int,
                     max_passes: int = 10) -> tuple[Partition, int]:
    """Like :func:`louvain` but also reports the number of improving passes."""
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")
    ws = np.asarray(w, dtype=float)
    if ws.ndim != 2 or ws.shape[0] != ws.shape[1] or ws.size == 0:
        raise InvalidDistribution("weight matrix must be square and nonempty")
    ws = 0.5 * (ws + ws.T)
    rng = np.random.default_rng(seed)
    mapping = np.arange(ws.shape[0])
    current = ws
    passes = 0
    for _ in range(max_passes):
        improved, labels = _local_moves(current, rng)
        if improved:
            passes += 1
            labels = _compact(labels)
            mapping = labels[mapping]
            current = _aggregate(current, labels)
            if current.shape[0] > 1:
                continue
        # aggregation moves whole classes; re-examine single original
        # vertices so the local-optimality contract holds at vertex level
        refined, mapping = _local_moves(ws, rng, labels=mapping)
        if not refined:
            break
        passes += 1
        mapping = _compact(mapping)
        current = _aggregate(ws, mapping)
    return Partition(_compact(mapping)), passes


def set_partitions(n: int) -> Iterator[np.ndarray]:
    """Yield every partition of ``range(n)`` as a label vector.

    Restricted-growth strings: position i may use any label seen so far
    or open the next one, so each set partition appears exactly once
    (Bell(n) in total).
    """
    if n == 0:
        return
    labels = np.zeros(n, dtype=np.int64)

    def rec(i: int, width: int) -> Iterator[np.ndarray]:
        if i == n:
            yield labels.copy()
            return
        for c in range(width + 1):
            labels[i] = c
            yield from rec(i + 1, width + (1 if c == width else 0))

    yield from rec(1, 1)


def brute_force_best(w: LocalWeights, n_max: int = 10,
                     include_diagonal: bool = True) -> tuple[Partition, float]:
    """Exact maximizer of :func:`global_score` by enumerating set partitions.

    Raises
    ------
    SizeExceeded
        When the graph has more than ``n_max`` vertices (Bell-number
        growth makes enumeration hopeless beyond small n).
    """
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    if n > n_max:
        raise SizeExceeded(f"{n} vertices exceed the enumeration cap {n_max}")
    best_labels = None
    best_score = -np.inf
    for labels in set_partitions(n):
        score = global_score(w, labels, include_diagonal=include_diagonal)
        if score > best_score:
            best_score = score
            best_labels = labels
    return Partition(best_labels), float(best_score)
