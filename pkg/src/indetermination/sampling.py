"""Exact sampling from an indetermination coupling.

Any two rows of ``pi[u, v] = mu[u]/q + nu[v]/p - 1/(p*q)`` differ by a
constant, so after renaming the row categories in ascending margin order
the whole matrix is determined by its first (minimal-margin) row plus a
nonnegative offset per row:

    pi_sorted[u, v] = first_line[v] + deltas[u] / q,
    deltas[u] = mu_sorted[u] - min(mu).

:func:`decompose` extracts this description and :func:`draw` turns it
into an exact three-step procedure per sample:

1. draw ``u`` from ``mu``;
2. flip a coin with success probability ``(mu[u] - min(mu)) / mu[u]``;
3. on failure draw ``v`` from the minimal row renormalised to mass one,
   on success draw ``v`` uniformly over the ``q`` columns.

Mixing the two conditional laws reproduces each cell exactly, so the
empirical histogram converges to the coupling itself.  Samples are
reported with the original (unsorted) 0-based labels; callers never see
the renaming.

Determinism contract
--------------------
Draws use numpy's PCG64 generator.  The stream for ``(seed, stream)`` is
derived as ``SeedSequence(seed, spawn_key=(stream,))``; parallel callers
must pass distinct ``stream`` values.  ``GENERATOR_VERSION`` names the
generator plus this derivation rule and is recorded in CLI metadata so
stored seeds stay meaningful across releases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coupling import JointDistribution, Margin, check_condition_h, _freeze
from .errors import ConditionHViolation, DegenerateInput

__all__ = [
    "GENERATOR_VERSION",
    "IndetDecomposition",
    "SampleBatch",
    "decompose",
    "reconstruct",
    "draw",
    "empirical_joint",
    "derive_rng",
]

GENERATOR_VERSION = "pcg64-seedseq-1"


def derive_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for ``(seed, stream)`` under the documented splitting rule."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


@dataclass(frozen=True)
class IndetDecomposition:
    """First-line/offset description of an indetermination coupling.

    ``sort_permutation[k]`` is the original index of the k-th smallest
    margin entry; ``first_line`` is the coupling row belonging to the
    minimal margin (sums to ``min(mu)``); ``deltas`` are the sorted
    margin offsets ``mu_sorted - min(mu)`` (nondecreasing, first entry 0).
    """

    sort_permutation: np.ndarray
    first_line: np.ndarray
    deltas: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "sort_permutation",
                           _freeze(np.array(self.sort_permutation, dtype=np.intp)))
        object.__setattr__(self, "first_line",
                           _freeze(np.array(self.first_line, dtype=float)))
        object.__setattr__(self, "deltas",
                           _freeze(np.array(self.deltas, dtype=float)))


@dataclass(frozen=True)
class SampleBatch:
    """Sequence of ``(u, v)`` index pairs with its reproducibility metadata.

    ``pairs`` is a ``(count, 2)`` integer array of 0-based labels.
    """

    pairs: np.ndarray
    seed: int
    count: int
    stream: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs",
                           _freeze(np.array(self.pairs, dtype=np.int64).reshape(-1, 2)))
        if self.pairs.shape[0] != self.count:
            raise ValueError("count disagrees with the number of pairs")


def decompose(mu: Margin, nu: Margin) -> IndetDecomposition:
    """Split the indetermination coupling of ``(mu, nu)`` into line + offsets.

    Raises
    ------
    ConditionHViolation
        When the margins cannot support a nonnegative coupling.
    """
    if not check_condition_h(mu, nu):
        p, q = len(mu), len(nu)
        lhs = p * mu.weights.min() + q * nu.weights.min()
        raise ConditionHViolation(
            f"indetermination feasibility violated: "
            f"p*min(mu) + q*min(nu) = {lhs:.6g} < 1")
    p, q = len(mu), len(nu)
    perm = np.argsort(mu.weights, kind="stable")
    sorted_mu = mu.weights[perm]
    first_line = sorted_mu[0] / q + nu.weights / p - 1.0 / (p * q)
    np.clip(first_line, 0.0, None, out=first_line)  # boundary roundoff only
    deltas = sorted_mu - sorted_mu[0]
    return IndetDecomposition(perm, first_line, deltas)


def reconstruct(dec: IndetDecomposition) -> np.ndarray:
    """Coupling cells implied by a decomposition, in original row order."""
    q = dec.first_line.size
    sorted_cells = dec.first_line[None, :] + dec.deltas[:, None] / q
    cells = np.empty_like(sorted_cells)
    cells[dec.sort_permutation] = sorted_cells
    return cells


def draw(dec: IndetDecomposition, mu: Margin, n: int, seed: int,
         stream: int = 0) -> SampleBatch:
    """Draw ``n`` exact samples from the decomposed coupling.

    Inverse-CDF sampling over precomputed cumulative tables for both the
    row margin and the first line: O(p + q) setup, O(log) per draw.  When
    ``min(mu) = 0`` the first-line conditional is defined as uniform; that
    branch then has probability zero, so the definition only makes the
    algorithm total.
    """
    if n < 0:
        raise ValueError("sample count must be nonnegative")
    w = mu.weights
    p = w.size
    q = dec.first_line.size
    if n == 0:
        return SampleBatch(np.empty((0, 2), dtype=np.int64), seed, 0, stream)
    rng = derive_rng(seed, stream)
    mu_min = float(w.min())

    cum_mu = np.cumsum(w)
    u = np.searchsorted(cum_mu, rng.random(n), side="right")
    np.clip(u, 0, p - 1, out=u)

    # probability of the uniform branch, per original category
    skew = np.divide(w - mu_min, w, out=np.zeros_like(w), where=w > 0)
    uniform_branch = rng.random(n) < skew[u]

    if mu_min > 0.0:
        cond = dec.first_line / mu_min
    else:
        cond = np.full(q, 1.0 / q)
    cum_v = np.cumsum(cond)
    r_v = rng.random(n)
    v_line = np.searchsorted(cum_v, r_v, side="right")
    np.clip(v_line, 0, q - 1, out=v_line)
    v_unif = np.minimum((r_v * q).astype(np.int64), q - 1)
    v = np.where(uniform_branch, v_unif, v_line)

    return SampleBatch(np.column_stack([u, v]), seed, n, stream)


def empirical_joint(batch: SampleBatch, p: int, q: int) -> JointDistribution:
    """Empirical joint distribution ``counts / n`` of a sample batch."""
    if batch.count < 1:
        raise DegenerateInput("an empty batch has no empirical distribution")
    u = batch.pairs[:, 0]
    v = batch.pairs[:, 1]
    if u.min() < 0 or u.max() >= p or v.min() < 0 or v.max() >= q:
        raise ValueError("pair labels fall outside the requested p x q grid")
    counts = np.bincount(u * q + v, minlength=p * q).reshape(p, q)
    return JointDistribution(counts / float(batch.count))
