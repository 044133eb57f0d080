"""Guessing-problem machinery: strategies, gains, moments, bounds.

A sender transmits a message ``u`` (one of p, law ``mu``); a guesser who
observed a correlated value ``v`` (one of q, joint law ``pi``) proposes
messages one at a time until correct.  A strategy fixes, per observed
``v``, an order on the messages; its cost is the rank at which the true
message is found (:func:`gain`), its quality the rho-moment of that rank
(:func:`rho_moment`) or the probability of succeeding on the first try
(:func:`one_shot`).

Built-in strategy rules:

* ``SORTED_BY_POSTERIOR`` guesses in decreasing posterior order (the
  rho-moment-optimal deterministic strategy);
* ``RANDOM_BY_POSTERIOR`` draws each next guess from the posterior
  restricted to not-yet-guessed messages, i.e. a Plackett-Luce random
  order.  Its first guess follows the posterior itself, so its one-shot
  performance is ``sum_v nu_v * sum_u posterior(u|v)**2``.

All expectations are computed exactly by summation; randomized rules use
exact per-rank probabilities (:func:`plackett_luce_rank_probabilities`).
A seeded Monte-Carlo mode (:func:`rho_moment_mc`, :func:`one_shot_mc`)
cross-validates the exact path.

No strategy beats the rank-moment floor

    (1 + ln p)**(-rho) * sum_v (sum_u pi[u, v]**(1/(1+rho)))**(1+rho),

and for fixed margins the sender minimizes ``sum(pi**2)`` related one-shot
floors by coupling messages to observations through indetermination
(:func:`sender_optimal_coupling`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coupling import (
    JointDistribution,
    Margin,
    indetermination_coupling,
)
from .errors import DegenerateInput, InvalidDistribution, SizeExceeded
from .sampling import derive_rng

__all__ = [
    "StrategyRule",
    "Strategy",
    "GuessingInstance",
    "gain",
    "optimal_order",
    "plackett_luce_rank_probabilities",
    "rho_moment",
    "rho_moment_mc",
    "one_shot",
    "one_shot_mc",
    "k_shot",
    "lower_bound_original",
    "lower_bound_generalized",
    "one_shot_bounds_margin_strategy",
    "sender_optimal_coupling",
]

_PL_MAX_P = 16


class StrategyRule(Enum):
    SORTED_BY_POSTERIOR = "sorted_by_posterior"
    RANDOM_BY_POSTERIOR = "random_by_posterior"


@dataclass(frozen=True)
class Strategy:
    """Either a named posterior rule or explicit per-observation orders.

    ``orders[v]`` is the 0-based guessing permutation used after
    observing ``v``; exactly one of ``rule`` / ``orders`` is set.
    """

    rule: StrategyRule | None = None
    orders: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        if (self.rule is None) == (self.orders is None):
            raise InvalidDistribution("set exactly one of rule or orders")
        if self.orders is not None:
            normalized = tuple(tuple(int(i) for i in order) for order in self.orders)
            for order in normalized:
                if sorted(order) != list(range(len(order))):
                    raise InvalidDistribution(f"{order} is not a permutation")
            object.__setattr__(self, "orders", normalized)

    @classmethod
    def sorted_by_posterior(cls) -> "Strategy":
        return cls(rule=StrategyRule.SORTED_BY_POSTERIOR)

    @classmethod
    def random_by_posterior(cls) -> "Strategy":
        return cls(rule=StrategyRule.RANDOM_BY_POSTERIOR)

    @classmethod
    def deterministic(cls, orders) -> "Strategy":
        return cls(orders=tuple(tuple(o) for o in orders))


@dataclass(frozen=True)
class GuessingInstance:
    """A joint message/observation law plus the moment order ``rho > 0``."""

    pi: JointDistribution
    rho: float = 1.0

    def __post_init__(self) -> None:
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise InvalidDistribution("rho must be a positive real")


def gain(order, u: int) -> int:
    """1-based rank of message ``u`` in a guessing order."""
    seq = [int(i) for i in order]
    return seq.index(int(u)) + 1


def optimal_order(posterior) -> tuple[int, ...]:
    """Indices sorted by decreasing probability, ties broken by index."""
    w = posterior.weights if isinstance(posterior, Margin) else np.asarray(posterior, float)
    return tuple(int(i) for i in np.lexsort((np.arange(w.size), -w)))


def plackett_luce_rank_probabilities(weights) -> np.ndarray:
    """Exact rank distribution of a sample-without-replacement order.

    The order is built by repeatedly drawing the next guess among the
    remaining messages with probability proportional to ``weights``
    (uniformly once every remaining weight is zero).  Returns a (p, p)
    matrix ``R`` with ``R[u, r]`` the probability that message ``u`` is
    guessed at rank ``r + 1``.  Subset dynamic programming, O(2**p * p);
    capped at p = 16.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or w.min() < 0:
        raise InvalidDistribution("weights must be a nonempty nonnegative vector")
    p = w.size
    if p > _PL_MAX_P:
        raise SizeExceeded(f"{p} messages exceed the exact-rank cap {_PL_MAX_P}")
    total = float(w.sum())
    prob = np.zeros(1 << p)
    prob[0] = 1.0
    rank = np.zeros((p, p))
    mask_weight = np.zeros(1 << p)
    for mask in range(1 << p):
        pm = prob[mask]
        if pm == 0.0:
            continue
        r = bin(mask).count("1")
        if r == p:
            continue
        rem_weight = total - mask_weight[mask]
        remaining = [u for u in range(p) if not mask & (1 << u)]
        if rem_weight > 1e-300:
            picks = [(u, w[u] / rem_weight) for u in remaining]
        else:
            picks = [(u, 1.0 / len(remaining)) for u in remaining]
        for u, pick in picks:
            if pick == 0.0:
                continue
            nxt = mask | (1 << u)
            prob[nxt] += pm * pick
            mask_weight[nxt] = mask_weight[mask] + w[u]
            rank[u, r] += pm * pick
    return rank


def _column_orders(pi: np.ndarray, strategy: Strategy) -> list[tuple[int, ...] | None]:
    """Per-observation deterministic orders, or None for randomized columns."""
    p, q = pi.shape
    if strategy.orders is not None:
        if len(strategy.orders) != q:
            raise InvalidDistribution(
                f"strategy defines {len(strategy.orders)} orders for {q} observations")
        for order in strategy.orders:
            if len(order) != p:
                raise InvalidDistribution("order length disagrees with message count")
        return list(strategy.orders)
    if strategy.rule is StrategyRule.SORTED_BY_POSTERIOR:
        return [optimal_order(pi[:, v]) for v in range(q)]
    return [None] * q


def rho_moment(instance: GuessingInstance, strategy: Strategy) -> float:
    """Exact ``E[rank**rho]`` of a strategy, summed over messages and observations.

    Columns with zero observation probability never occur and are skipped.
    """
    pi = instance.pi.cells
    rho = instance.rho
    p, q = pi.shape
    rank_pow = np.arange(1, p + 1, dtype=float) ** rho
    orders = _column_orders(pi, strategy)
    total = 0.0
    for v in range(q):
        col = pi[:, v]
        if col.sum() <= 0.0:
            continue
        if orders[v] is not None:
            position = np.empty(p)
            position[list(orders[v])] = rank_pow
            total += float(col @ position)
        else:
            ranks = plackett_luce_rank_probabilities(col)
            total += float(col @ (ranks @ rank_pow))
    return total


def one_shot(instance: GuessingInstance, strategy: Strategy) -> float:
    """Probability that the first guess is the sent message."""
    return k_shot(instance, strategy, 1)


def k_shot(instance: GuessingInstance, strategy: Strategy, k: int) -> float:
    """Probability the message is found within the first ``k`` guesses.

    Natural extension of the first-try success probability; equals 1 for
    ``k >= p`` under any strategy.
    """
    pi = instance.pi.cells
    p, q = pi.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, p)
    orders = _column_orders(pi, strategy)
    total = 0.0
    for v in range(q):
        col = pi[:, v]
        nu_v = float(col.sum())
        if nu_v <= 0.0:
            continue
        if strategy.rule is StrategyRule.RANDOM_BY_POSTERIOR:
            if k == 1:
                # first guess follows the posterior itself
                total += float(np.sum(col**2)) / nu_v
            else:
                ranks = plackett_luce_rank_probabilities(col)
                total += float(col @ ranks[:, :k].sum(axis=1))
        elif strategy.rule is StrategyRule.SORTED_BY_POSTERIOR:
            total += float(np.sort(col)[::-1][:k].sum())
        else:
            total += float(col[list(orders[v][:k])].sum())
    return total


def _simulate_gains(instance: GuessingInstance, strategy: Strategy, n: int,
                    seed: int, stream: int) -> np.ndarray:
    pi = instance.pi.cells
    p, q = pi.shape
    rng = derive_rng(seed, stream)
    flat = pi.ravel()
    cum = np.cumsum(flat)
    idx = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
    np.clip(idx, 0, flat.size - 1, out=idx)
    us, vs = np.divmod(idx, q)
    orders = _column_orders(pi, strategy)
    gains = np.empty(n)
    if strategy.rule is StrategyRule.RANDOM_BY_POSTERIOR:
        # Gumbel race: argsort of log w + Gumbel noise is a Plackett-Luce order
        with np.errstate(divide="ignore"):
            logw = np.log(pi)
        noise = rng.gumbel(size=(n, p))
        for i in range(n):
            keys = logw[:, vs[i]] + noise[i]
            gains[i] = 1 + np.sum(keys > keys[us[i]])
    else:
        position = np.empty((q, p))
        for v in range(q):
            position[v, list(orders[v])] = np.arange(1, p + 1)
        gains = position[vs, us]
    return gains


def rho_moment_mc(instance: GuessingInstance, strategy: Strategy, n: int,
                  seed: int, stream: int = 0) -> float:
    """Monte-Carlo estimate of :func:`rho_moment` (cross-validation mode)."""
    gains = _simulate_gains(instance, strategy, n, seed, stream)
    return float(np.mean(gains**instance.rho))


def one_shot_mc(instance: GuessingInstance, strategy: Strategy, n: int,
                seed: int, stream: int = 0) -> float:
    """Monte-Carlo estimate of :func:`one_shot` (cross-validation mode)."""
    gains = _simulate_gains(instance, strategy, n, seed, stream)
    return float(np.mean(gains == 1))


def lower_bound_original(mu: Margin, rho: float) -> float:
    """Moment floor for guessing without side observation.

    ``(1 + ln p)**(-rho) * (sum_u mu[u]**(1/(1+rho)))**(1+rho)``.
    """
    if not rho > 0:
        raise InvalidDistribution("rho must be positive")
    p = len(mu)
    s = float(np.sum(mu.weights ** (1.0 / (1.0 + rho))))
    return (1.0 + math.log(p)) ** (-rho) * s ** (1.0 + rho)


def lower_bound_generalized(pi: JointDistribution, rho: float) -> float:
    """Moment floor with a side observation: per-column sums of the same form."""
    if not rho > 0:
        raise InvalidDistribution("rho must be positive")
    p = pi.shape[0]
    s = np.sum(pi.cells ** (1.0 / (1.0 + rho)), axis=0) ** (1.0 + rho)
    return (1.0 + math.log(p)) ** (-rho) * float(s.sum())


def one_shot_bounds_margin_strategy(pi: JointDistribution) -> tuple[float, float]:
    """Sandwich for the posterior-drawing strategy's one-shot performance.

    Returns ``(sum(pi**2)/max(nu), sum(pi**2)/min(nu))`` where the min and
    max run over observation probabilities ``nu > 0`` (zero-probability
    columns are dropped first).
    """
    nu = pi.col_margin.weights
    positive = nu[nu > 0]
    if positive.size == 0:
        raise DegenerateInput("no observation has positive probability")
    l2 = float(np.sum(pi.cells**2))
    return l2 / float(positive.max()), l2 / float(positive.min())


def sender_optimal_coupling(mu: Margin, nu: Margin) -> JointDistribution:
    """Coupling that minimizes ``sum(pi**2)`` over the margin polytope.

    This is the indetermination coupling, so the same-margin one-shot
    floor ``sum(pi**2)/max(nu)`` is lowest there: dispatching messages to
    observations this way is the sender's best defence against a
    posterior-drawing guesser.
    """
    out = indetermination_coupling(mu, nu, strict=True)
    assert isinstance(out, JointDistribution)
    return out
