"""Marginal-constrained couplings: independence and indetermination.

A coupling takes two discrete probability vectors ``mu`` (length p) and
``nu`` (length q) and builds a joint distribution on the p x q product
space whose margins are exactly ``mu`` and ``nu``.  Two couplings are
canonical, each being the projection of the uniform joint law onto the
margin-constrained polytope under one divergence:

* independence      ``pi[u, v] = mu[u] * nu[v]``
  minimizes the Kullback-Leibler divergence to the uniform law;
* indetermination   ``pi[u, v] = mu[u]/q + nu[v]/p - 1/(p*q)``
  minimizes the squared (chi-square style) divergence to the uniform law,
  equivalently the couple-matching probability ``sum(pi**2)``.

The indetermination closed form can go negative.  Nonnegativity of every
cell is equivalent to the margin feasibility inequality

    p * min(mu) + q * min(nu) >= 1,

tested by :func:`check_condition_h`.  The signed matrix remains the
unconstrained least-squares optimum and is needed by downstream bounds,
so it is kept as a first-class object (:class:`SignedCouplingMatrix`).

Indetermination matrices are exactly the "full Monge" matrices: every
2x2 sub-table has equal diagonal and anti-diagonal sums.  Checking the
condition on adjacent cells only is sufficient, which gives the O(p*q)
test :func:`is_full_monge`.
"""

from __future__ import annotations

from enum import Enum
from typing import Union

import numpy as np

from .errors import ConditionHViolation, InvalidDistribution

__all__ = [
    "SUM_ATOL",
    "MARGIN_ATOL",
    "FEASIBILITY_ATOL",
    "MONGE_RTOL",
    "CouplingKind",
    "Margin",
    "JointDistribution",
    "SignedCouplingMatrix",
    "independence_coupling",
    "indetermination_cells",
    "indetermination_coupling",
    "check_condition_h",
    "divergence_kl_to_uniform",
    "divergence_l2_to_uniform",
    "couple_matching_probability",
    "is_full_monge",
    "perturb_coupling",
    "generate_feasible_margins",
]

# Tolerances, chosen so double-precision closed forms pass while genuine
# violations fail.
SUM_ATOL = 1e-12        # total mass agreement
MARGIN_ATOL = 1e-10     # row/column sums vs stored margins
FEASIBILITY_ATOL = 1e-12  # how far below zero a cell may dip
MONGE_RTOL = 1e-9       # adjacent 2x2 defect, relative to max |cell|


class CouplingKind(Enum):
    """The two canonical couplings."""

    INDEPENDENCE = "independence"
    INDETERMINATION = "indetermination"


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class Margin:
    """Discrete probability vector over ``p`` categories.

    Entries are nonnegative and sum to one within ``SUM_ATOL``.  The
    stored array is read-only; instances are safe to share across
    threads.
    """

    __slots__ = ("weights",)

    def __init__(self, weights) -> None:
        w = np.array(weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise InvalidDistribution("margin must be a nonempty 1-D vector")
        if not np.all(np.isfinite(w)):
            raise InvalidDistribution("margin has non-finite entries")
        if w.min() < -SUM_ATOL:
            raise InvalidDistribution(f"margin has negative entry {w.min():.3g}")
        np.clip(w, 0.0, None, out=w)
        total = float(w.sum())
        if abs(total - 1.0) > SUM_ATOL:
            raise InvalidDistribution(f"margin sums to {total!r}, expected 1")
        self.weights = _freeze(w)

    @classmethod
    def uniform(cls, p: int) -> "Margin":
        return cls(np.full(p, 1.0 / p))

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, idx):
        return self.weights[idx]

    def __repr__(self) -> str:
        return f"Margin({np.array2string(self.weights, separator=', ')})"


class JointDistribution:
    """p x q joint probability matrix with cached margins.

    Cells are nonnegative and sum to one within ``SUM_ATOL``; row and
    column sums agree with the stored margins within ``MARGIN_ATOL``.
    If margins are not supplied they are computed from the cells.
    """

    __slots__ = ("cells", "row_margin", "col_margin")

    def __init__(self, cells, row_margin: Margin | None = None,
                 col_margin: Margin | None = None) -> None:
        c = np.array(cells, dtype=float)
        if c.ndim != 2 or c.size == 0:
            raise InvalidDistribution("cells must form a nonempty 2-D matrix")
        if not np.all(np.isfinite(c)):
            raise InvalidDistribution("cells contain non-finite values")
        if c.min() < -FEASIBILITY_ATOL:
            raise InvalidDistribution(f"negative cell {c.min():.3g}")
        np.clip(c, 0.0, None, out=c)
        total = float(c.sum())
        if abs(total - 1.0) > SUM_ATOL:
            raise InvalidDistribution(f"cells sum to {total!r}, expected 1")
        rows = c.sum(axis=1)
        cols = c.sum(axis=0)
        if row_margin is None:
            row_margin = Margin(rows)
        elif np.max(np.abs(rows - row_margin.weights)) > MARGIN_ATOL:
            raise InvalidDistribution("row sums disagree with the row margin")
        if col_margin is None:
            col_margin = Margin(cols)
        elif np.max(np.abs(cols - col_margin.weights)) > MARGIN_ATOL:
            raise InvalidDistribution("column sums disagree with the column margin")
        self.cells = _freeze(c)
        self.row_margin = row_margin
        self.col_margin = col_margin

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def __repr__(self) -> str:
        p, q = self.shape
        return f"JointDistribution({p}x{q})"


class SignedCouplingMatrix:
    """Real p x q matrix with prescribed margins; cells may be negative.

    ``feasible`` is True when every cell is at least ``-FEASIBILITY_ATOL``,
    i.e. the matrix is (up to roundoff) a genuine joint distribution.
    """

    __slots__ = ("cells", "row_margin", "col_margin", "feasible")

    def __init__(self, cells, row_margin: Margin, col_margin: Margin) -> None:
        c = np.array(cells, dtype=float)
        if c.ndim != 2 or c.size == 0:
            raise InvalidDistribution("cells must form a nonempty 2-D matrix")
        if not np.all(np.isfinite(c)):
            raise InvalidDistribution("cells contain non-finite values")
        if np.max(np.abs(c.sum(axis=1) - row_margin.weights)) > MARGIN_ATOL:
            raise InvalidDistribution("row sums disagree with the requested row margin")
        if np.max(np.abs(c.sum(axis=0) - col_margin.weights)) > MARGIN_ATOL:
            raise InvalidDistribution("column sums disagree with the requested column margin")
        self.cells = _freeze(c)
        self.row_margin = row_margin
        self.col_margin = col_margin
        self.feasible = bool(c.min() >= -FEASIBILITY_ATOL)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def to_joint(self) -> JointDistribution:
        """Reinterpret as a :class:`JointDistribution` (requires feasibility)."""
        if not self.feasible:
            raise InvalidDistribution(
                f"matrix is infeasible (min cell {self.cells.min():.3g})")
        return JointDistribution(self.cells, self.row_margin, self.col_margin)

    def __repr__(self) -> str:
        p, q = self.shape
        return f"SignedCouplingMatrix({p}x{q}, feasible={self.feasible})"


CouplingLike = Union[JointDistribution, SignedCouplingMatrix, np.ndarray]


def _cells_of(pi: CouplingLike) -> np.ndarray:
    if isinstance(pi, (JointDistribution, SignedCouplingMatrix)):
        return pi.cells
    c = np.asarray(pi, dtype=float)
    if c.ndim != 2:
        raise InvalidDistribution("expected a 2-D matrix of cells")
    return c


def independence_coupling(mu: Margin, nu: Margin) -> JointDistribution:
    """Outer-product coupling ``pi[u, v] = mu[u] * nu[v]``."""
    return JointDistribution(np.outer(mu.weights, nu.weights), mu, nu)


def indetermination_cells(mu: Margin, nu: Margin) -> np.ndarray:
    """Closed-form indetermination cells ``mu[u]/q + nu[v]/p - 1/(p*q)``.

    No feasibility check: the result may contain negative entries.
    """
    p, q = len(mu), len(nu)
    return mu.weights[:, None] / q + nu.weights[None, :] / p - 1.0 / (p * q)


def check_condition_h(mu: Margin, nu: Margin) -> bool:
    """True iff ``p * min(mu) + q * min(nu) >= 1`` (within slack).

    This inequality is exactly nonnegativity of every indetermination
    cell; equality is feasible and produces at least one zero cell.
    """
    p, q = len(mu), len(nu)
    return bool(p * mu.weights.min() + q * nu.weights.min() >= 1.0 - FEASIBILITY_ATOL)


def indetermination_coupling(
    mu: Margin, nu: Margin, strict: bool = True
) -> JointDistribution | SignedCouplingMatrix:
    """Least-squares optimal coupling of ``mu`` and ``nu``.

    In strict mode (default) the margins must be feasible and a
    :class:`JointDistribution` is returned; otherwise a
    :class:`SignedCouplingMatrix` carrying a ``feasible`` flag is
    returned unconditionally.

    Raises
    ------
    ConditionHViolation
        In strict mode, when ``p*min(mu) + q*min(nu) < 1``.
    """
    cells = indetermination_cells(mu, nu)
    if not strict:
        return SignedCouplingMatrix(cells, mu, nu)
    if not check_condition_h(mu, nu):
        p, q = len(mu), len(nu)
        lhs = p * mu.weights.min() + q * nu.weights.min()
        raise ConditionHViolation(
            f"indetermination feasibility violated: "
            f"p*min(mu) + q*min(nu) = {lhs:.6g} < 1")
    return JointDistribution(cells, mu, nu)


def divergence_kl_to_uniform(pi: CouplingLike) -> float:
    """Kullback-Leibler divergence ``sum(pi * log(p*q*pi))`` to the uniform law.

    Zero cells contribute 0 (the ``0 * log 0 = 0`` convention).  Minimized,
    over couplings with fixed margins, by the independence coupling.
    """
    c = _cells_of(pi)
    if c.min() < -FEASIBILITY_ATOL:
        raise InvalidDistribution("KL divergence requires nonnegative cells")
    pos = c > 0.0
    return float(np.sum(c[pos] * np.log(c.size * c[pos])))


def divergence_l2_to_uniform(pi: CouplingLike) -> float:
    """Squared divergence ``p*q * sum((pi - 1/(p*q))**2) = p*q*sum(pi**2) - 1``.

    Minimized, over couplings with fixed margins, by the indetermination
    coupling.  Signed matrices are accepted (the identity still holds).
    """
    c = _cells_of(pi)
    return float(c.size * np.sum(c * c) - 1.0)


def couple_matching_probability(pi: CouplingLike) -> float:
    """Probability that two independent draws from ``pi`` coincide: ``sum(pi**2)``."""
    c = _cells_of(pi)
    return float(np.sum(c * c))


def is_full_monge(cells, rel_tol: float = MONGE_RTOL) -> bool:
    """Test whether every adjacent 2x2 block has equal cross-diagonal sums.

    ``cells[u, v] + cells[u+1, v+1] == cells[u+1, v] + cells[u, v+1]`` for
    all adjacent blocks implies the same equality for every (not
    necessarily adjacent) 2x2 sub-table, which characterizes
    indetermination matrices.  Tolerance is relative to ``max(abs(cells))``.
    Runs in O(p*q).
    """
    c = np.asarray(cells, dtype=float)
    if c.ndim != 2 or c.size == 0:
        raise InvalidDistribution("expected a nonempty 2-D matrix")
    if c.shape[0] < 2 or c.shape[1] < 2:
        return True
    defect = c[:-1, :-1] + c[1:, 1:] - c[1:, :-1] - c[:-1, 1:]
    scale = float(np.abs(c).max())
    return bool(np.abs(defect).max() <= rel_tol * scale)


def perturb_coupling(pi: JointDistribution, seed: int,
                     amplitude: float) -> JointDistribution:
    """Random same-margin perturbation of a joint distribution.

    Applies a seeded sequence of 2x2 rectangle transfers: add ``t`` on one
    diagonal of a random 2x2 sub-table and subtract ``t`` on the other,
    which leaves every row and column sum unchanged.  Each transfer is
    drawn at scale ``amplitude`` and clipped to the available headroom, so
    cells never go negative (a transfer with no headroom degenerates to
    ``t = 0`` rather than erroring).  Deterministic for a fixed seed.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    c = pi.cells.copy()
    p, q = c.shape
    if amplitude == 0.0 or p < 2 or q < 2:
        return JointDistribution(c, pi.row_margin, pi.col_margin)
    rng = np.random.default_rng(seed)
    n_moves = 4 * max(p, q)
    us = rng.integers(0, p, size=n_moves)
    u2s = (us + 1 + rng.integers(0, p - 1, size=n_moves)) % p
    vs = rng.integers(0, q, size=n_moves)
    v2s = (vs + 1 + rng.integers(0, q - 1, size=n_moves)) % q
    sizes = amplitude * np.abs(rng.standard_normal((n_moves, 2)))
    flips = rng.random(n_moves) < 0.5
    for k in range(n_moves):
        u, u2, v, v2 = us[k], u2s[k], vs[k], v2s[k]
        if flips[k]:
            u, u2 = u2, u  # swapping one axis flips the transfer direction
        # +t on (u,v),(u2,v2); -t on (u,v2),(u2,v)
        t = min(sizes[k, 0], c[u, v2], c[u2, v])
        if t <= 0.0:
            u, u2 = u2, u
            t = min(sizes[k, 1], c[u, v2], c[u2, v])
            if t <= 0.0:
                continue
        c[u, v] += t
        c[u2, v2] += t
        c[u, v2] -= t
        c[u2, v] -= t
    return JointDistribution(c, pi.row_margin, pi.col_margin)


def generate_feasible_margins(alpha: float, r: Margin,
                              s: Margin) -> tuple[Margin, Margin]:
    """Mix arbitrary margins with uniform ones so feasibility always holds.

    Returns ``mu = (1-alpha)*r + alpha*uniform(p)`` and
    ``nu = alpha*s + (1-alpha)*uniform(q)``.  Then
    ``p*min(mu) >= alpha`` and ``q*min(nu) >= 1-alpha``, so the pair
    satisfies :func:`check_condition_h` for every ``alpha`` in [0, 1].
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    p, q = len(r), len(s)
    mu = (1.0 - alpha) * r.weights + alpha / p
    nu = alpha * s.weights + (1.0 - alpha) / q
    return Margin(mu), Margin(nu)
