"""Task-partitioning performance: workloads, moment bound, one-shot chain.

``p`` tasks arrive with frequencies ``mu``; each task is pre-assigned to
one of ``q`` workers.  Triggering a task makes its worker's whole class
relevant, so the cost of an assignment is the class size of the drawn
task.  Its rho-moment (:func:`class_size_moment`) obeys a partition-free
floor (:func:`partition_moment_bound`).

An assignment also defines a coupling between tasks and workers
(:func:`induced_coupling`): the worker is a deterministic function of the
task, giving each row a single nonzero cell ``mu[u]``.  When each worker
serves its class in posterior-drawn order, the probability of serving the
triggered task first obeys the chain

    m_value >= ||pi_A||**2 / max(nu_A) >= ||C_plus(mu, nu_A)||**2 / max(nu_A),

where the last term replaces the induced coupling by the indetermination
coupling of the same margins, the matching-probability minimizer.  When
those margins are infeasible the signed closed form is used; it is still
the unconstrained minimizer, so the chain survives (the result carries a
feasibility flag).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .coupling import (
    JointDistribution,
    Margin,
    _freeze,
    check_condition_h,
    indetermination_coupling,
)
from .errors import DegenerateInput, EmptyClassWarning, InvalidDistribution
from .sampling import derive_rng

__all__ = [
    "TaskPartition",
    "PartitionOneShotBound",
    "class_size_moment",
    "partition_moment_bound",
    "induced_coupling",
    "partition_one_shot_bound",
    "simulate_tasks_before",
]


@dataclass(frozen=True)
class TaskPartition:
    """Total assignment of ``p`` tasks to ``q <= p`` workers (0-based)."""

    assignment: np.ndarray
    n_workers: int = 0  # 0 means infer as max(assignment) + 1

    def __post_init__(self) -> None:
        a = np.array(self.assignment, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise InvalidDistribution("assignment must be a nonempty 1-D vector")
        if a.min() < 0:
            raise InvalidDistribution("worker indices must be nonnegative")
        q = self.n_workers if self.n_workers else int(a.max()) + 1
        if a.max() >= q:
            raise InvalidDistribution("assignment refers to a worker >= n_workers")
        if q > a.size:
            raise InvalidDistribution("more workers than tasks")
        object.__setattr__(self, "assignment", _freeze(a))
        object.__setattr__(self, "n_workers", q)

    @property
    def n_tasks(self) -> int:
        return self.assignment.size

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_workers)


def _check_mu(mu: Margin, part: TaskPartition) -> None:
    if len(mu) != part.n_tasks:
        raise InvalidDistribution("margin length disagrees with task count")


def class_size_moment(mu: Margin, part: TaskPartition, rho: float) -> float:
    """``E[|class of the drawn task|**rho]``, i.e. ``sum_u mu[u] * A(u)**rho``.

    Empty workers are allowed (they contribute nothing) but emit an
    :class:`EmptyClassWarning`.
    """
    if not rho > 0:
        raise InvalidDistribution("rho must be positive")
    _check_mu(mu, part)
    sizes = part.class_sizes()
    if sizes.min() == 0:
        warnings.warn("some worker has no assigned tasks", EmptyClassWarning,
                      stacklevel=2)
    per_task = sizes[part.assignment].astype(float)
    return float(np.sum(mu.weights * per_task**rho))


def partition_moment_bound(mu: Margin, q: int, rho: float) -> float:
    """Floor ``q**(-rho) * (sum_u mu[u]**(1/(1+rho)))**(1+rho)`` over q-class assignments.

    Follows from Hoelder's inequality and ``sum_u 1/A(u) = q`` (each class
    contributes exactly 1).  Tight for singleton classes under a uniform
    margin.  At ``rho = 1`` the factor reduces to ``1/q``.
    """
    if not rho > 0:
        raise InvalidDistribution("rho must be positive")
    if not 1 <= q <= len(mu):
        raise InvalidDistribution("need 1 <= q <= number of tasks")
    s = float(np.sum(mu.weights ** (1.0 / (1.0 + rho))))
    return s ** (1.0 + rho) / q**rho


def induced_coupling(mu: Margin, part: TaskPartition) -> tuple[JointDistribution, Margin]:
    """Joint task/worker law of an assignment, plus the worker margin.

    ``pi_A[u, v] = mu[u]`` iff task u belongs to worker v (one nonzero per
    row), and ``nu_A[v]`` sums the frequencies of worker v's tasks.  Empty
    workers keep an all-zero column.
    """
    _check_mu(mu, part)
    p, q = part.n_tasks, part.n_workers
    cells = np.zeros((p, q))
    cells[np.arange(p), part.assignment] = mu.weights
    nu = Margin(np.bincount(part.assignment, weights=mu.weights, minlength=q))
    return JointDistribution(cells, mu, nu), nu


class PartitionOneShotBound(NamedTuple):
    """First-try service probability and its two lower bounds.

    ``indetermination_feasible`` is False when the induced margins violate
    the feasibility inequality, in which case ``bound_indet`` was computed
    from the signed closed form (still a valid lower bound).
    """

    m_value: float
    bound_piA: float
    bound_indet: float
    indetermination_feasible: bool


def partition_one_shot_bound(mu: Margin, part: TaskPartition) -> PartitionOneShotBound:
    """Chain ``m_value >= bound_piA >= bound_indet`` for a posterior-drawing worker.

    Empty workers are dropped before taking ``max(nu_A)`` and before
    building the indetermination reference.
    """
    _check_mu(mu, part)
    nu_all = np.bincount(part.assignment, weights=mu.weights,
                         minlength=part.n_workers)
    positive = nu_all > 0
    if not positive.any():
        raise DegenerateInput("every worker has zero total frequency")
    w = mu.weights
    per_task_nu = nu_all[part.assignment]
    m_value = float(np.sum(np.where(w > 0, w**2 / np.where(per_task_nu > 0, per_task_nu, 1.0), 0.0)))
    nu_max = float(nu_all[positive].max())
    l2_piA = float(np.sum(w**2))
    bound_piA = l2_piA / nu_max

    nu_eff = Margin(nu_all[positive])
    feasible = check_condition_h(mu, nu_eff)
    reference = indetermination_coupling(mu, nu_eff, strict=False)
    l2_plus = float(np.sum(reference.cells**2))
    bound_indet = l2_plus / nu_max
    return PartitionOneShotBound(m_value, bound_piA, bound_indet, feasible)


def simulate_tasks_before(mu: Margin, part: TaskPartition, n: int, seed: int,
                          stream: int = 0) -> np.ndarray:
    """Sampled counts of tasks served up to and including the triggered one.

    Each draw picks a task from ``mu``, then lets its worker serve its own
    class in posterior-drawn (sample-without-replacement) order; the
    returned value is the triggered task's 1-based service rank.  Purely
    observational: no bound is attached to this quantity here.
    """
    _check_mu(mu, part)
    if n < 0:
        raise ValueError("sample count must be nonnegative")
    rng = derive_rng(seed, stream)
    w = mu.weights
    cum = np.cumsum(w)
    out = np.empty(n, dtype=np.int64)
    members_by_worker = [np.flatnonzero(part.assignment == v)
                         for v in range(part.n_workers)]
    for i in range(n):
        u = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        u = min(u, w.size - 1)
        members = members_by_worker[part.assignment[u]]
        # Gumbel race realizes a posterior-proportional service order
        with np.errstate(divide="ignore"):
            keys = np.log(w[members]) + rng.gumbel(size=members.size)
        rank = 1 + int(np.sum(keys > keys[members == u]))
        out[i] = rank
    return out
