"""Association indices on contingency data.

Both indices measure the squared deviation of an observed joint
frequency table from a canonical coupling of its own empirical margins:

* :func:`chi_square` deviates from the independence coupling
  (the classic mean-square contingency, i.e. Pearson's statistic
  divided by the sample size);
* :func:`jv_contingency` (Janson-Vegelius) deviates from the
  indetermination coupling, so it vanishes exactly on full-Monge tables.

The JV index also has a second life as a cosine between centred
pairwise-agreement matrices over the individuals themselves (the
"relational" encoding, :func:`relational_encode`); that form is
:func:`jv_relational`.  Both forms are provided without asserting their
numeric equality, whose printed contingency normalization is unusual for
small numbers of categories (see :func:`jv_index`).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .coupling import JointDistribution, Margin, _freeze
from .errors import DegenerateInput, InvalidDistribution

__all__ = [
    "ContingencyTable",
    "RelationalMatrix",
    "JVIndex",
    "chi_square",
    "jv_index",
    "jv_contingency",
    "relational_encode",
    "jv_relational",
]


class ContingencyTable:
    """p x q table of nonnegative counts with total ``n >= 1``.

    Counts are usually integers but any nonnegative reals are accepted,
    which covers exact-probability tables (total 1).
    """

    __slots__ = ("counts", "n")

    def __init__(self, counts) -> None:
        c = np.array(counts, dtype=float)
        if c.ndim != 2 or c.size == 0:
            raise InvalidDistribution("counts must form a nonempty 2-D table")
        if not np.all(np.isfinite(c)) or c.min() < 0:
            raise InvalidDistribution("counts must be finite and nonnegative")
        total = float(c.sum())
        if total <= 0:
            raise InvalidDistribution("table total must be positive")
        self.counts = _freeze(c)
        self.n = total

    @classmethod
    def from_labels(cls, labels_x, labels_y, p: int | None = None,
                    q: int | None = None) -> "ContingencyTable":
        """Cross-tabulate two equally long vectors of 0-based category labels."""
        x = np.asarray(labels_x, dtype=np.int64)
        y = np.asarray(labels_y, dtype=np.int64)
        if x.shape != y.shape or x.ndim != 1 or x.size == 0:
            raise InvalidDistribution("label vectors must be equal-length and nonempty")
        if x.min() < 0 or y.min() < 0:
            raise InvalidDistribution("labels must be nonnegative integers")
        p = int(x.max()) + 1 if p is None else p
        q = int(y.max()) + 1 if q is None else q
        counts = np.bincount(x * q + y, minlength=p * q).reshape(p, q)
        return cls(counts)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def joint(self) -> JointDistribution:
        """Empirical joint distribution ``counts / n``."""
        return JointDistribution(self.counts / self.n)


class RelationalMatrix:
    """n x n boolean agreement matrix: symmetric with an all-True diagonal."""

    __slots__ = ("cells",)

    def __init__(self, cells) -> None:
        c = np.array(cells, dtype=bool)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.size == 0:
            raise InvalidDistribution("relational matrix must be square and nonempty")
        if not np.array_equal(c, c.T):
            raise InvalidDistribution("relational matrix must be symmetric")
        if not np.all(np.diag(c)):
            raise InvalidDistribution("relational matrix must be reflexive")
        self.cells = _freeze(c)

    @property
    def n(self) -> int:
        return self.cells.shape[0]


class JVIndex(NamedTuple):
    """Janson-Vegelius numerator/denominator split.

    ``normalized`` is False when either category count is <= 2, in which
    case the printed denominator factor ``(p-2)/p`` is nonpositive and
    cannot normalize; ``value`` then falls back to the bare numerator.
    """

    numerator: float
    denominator: float
    value: float
    normalized: bool


def _empirical(table: ContingencyTable):
    pi = table.counts / table.n
    return pi, pi.sum(axis=1), pi.sum(axis=0)


def chi_square(table: ContingencyTable, drop_empty: bool = False) -> float:
    """Mean-square deviation from independence.

    ``sum((pi - mu*nu)**2 / (mu*nu))`` over cells, with ``pi`` the
    empirical joint frequency and ``mu``, ``nu`` its margins.  Zero iff
    the table is an exact outer product.  A table with an all-zero row or
    column raises :class:`DegenerateInput` unless ``drop_empty`` is set,
    in which case the empty categories are removed first.
    """
    counts = table.counts
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    if rows.min() <= 0 or cols.min() <= 0:
        if not drop_empty:
            raise DegenerateInput(
                "table has an all-zero row or column; pass drop_empty=True "
                "to exclude empty categories")
        counts = counts[rows > 0][:, cols > 0]
    sub = ContingencyTable(counts)
    pi, mu, nu = _empirical(sub)
    expected = np.outer(mu, nu)
    return float(np.sum((pi - expected) ** 2 / expected))


def jv_index(table: ContingencyTable) -> JVIndex:
    """Janson-Vegelius deviation from indetermination, with its parts.

    Numerator: ``sum((pi - ref)**2)`` where ``ref`` is the (possibly
    signed) indetermination closed form of the empirical margins.
    Denominator, kept verbatim from the index definition:
    ``sqrt((p-2)/p * (sum(mu**2) + 1)) * sqrt((q-2)/q * (sum(nu**2) + 1))``.
    """
    pi, mu, nu = _empirical(table)
    p, q = pi.shape
    ref = mu[:, None] / q + nu[None, :] / p - 1.0 / (p * q)
    numerator = float(np.sum((pi - ref) ** 2))
    factor_p = (p - 2.0) / p * (float(np.sum(mu**2)) + 1.0)
    factor_q = (q - 2.0) / q * (float(np.sum(nu**2)) + 1.0)
    normalized = factor_p > 0.0 and factor_q > 0.0
    denominator = float(np.sqrt(factor_p) * np.sqrt(factor_q)) if normalized else 0.0
    value = numerator / denominator if normalized else numerator
    return JVIndex(numerator, denominator, value, normalized)


def jv_contingency(table: ContingencyTable) -> float:
    """Janson-Vegelius index of a table (see :func:`jv_index` for the parts)."""
    return jv_index(table).value


def relational_encode(labels) -> RelationalMatrix:
    """n x n agreement matrix: ``cells[i, j]`` iff ``labels[i] == labels[j]``."""
    x = np.asarray(labels)
    if x.ndim != 1 or x.size == 0:
        raise InvalidDistribution("labels must form a nonempty 1-D vector")
    return RelationalMatrix(x[:, None] == x[None, :])


def jv_relational(x: RelationalMatrix, y: RelationalMatrix,
                  p: int, q: int) -> float:
    """Cosine of the centred agreement matrices ``x - 1/p`` and ``y - 1/q``.

    Always in [-1, 1] by Cauchy-Schwarz; invariant under any common
    permutation of the individuals.

    Raises
    ------
    DegenerateInput
        When a centred matrix is identically zero (only possible for an
        all-agreeing matrix with one category), which voids the cosine.
    """
    if x.n != y.n:
        raise InvalidDistribution("relational matrices must have the same size")
    if p < 1 or q < 1:
        raise InvalidDistribution("category counts must be >= 1")
    xc = x.cells.astype(float) - 1.0 / p
    yc = y.cells.astype(float) - 1.0 / q
    sx = float(np.sum(xc * xc))
    sy = float(np.sum(yc * yc))
    if sx <= 0.0 or sy <= 0.0:
        raise DegenerateInput("centred relational matrix is identically zero")
    return float(np.clip(np.sum(xc * yc) / np.sqrt(sx * sy), -1.0, 1.0))
