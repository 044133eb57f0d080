"""Shared fixtures: the 4x3 worked example used throughout the test suite.

The counting matrix

    3 4 2
    2 3 1
    1 2 0
    3 4 2

divided by 27 is an indetermination coupling of its own margins
mu = (9, 6, 3, 9)/27 and nu = (9, 13, 5)/27, sits exactly on the
feasibility boundary (one zero cell), and has hand-checkable values for
every index computed in this package.
"""

from __future__ import annotations

import numpy as np
import pytest

from indetermination import Margin


REF_COUNTS = np.array([[3, 4, 2], [2, 3, 1], [1, 2, 0], [3, 4, 2]], dtype=float)


@pytest.fixture
def ref_counts() -> np.ndarray:
    return REF_COUNTS.copy()


@pytest.fixture
def ref_cells() -> np.ndarray:
    return REF_COUNTS / 27.0


@pytest.fixture
def ref_mu() -> Margin:
    return Margin(np.array([9.0, 6.0, 3.0, 9.0]) / 27.0)


@pytest.fixture
def ref_nu() -> Margin:
    return Margin(np.array([9.0, 13.0, 5.0]) / 27.0)


def random_margin(rng: np.random.Generator, n: int) -> Margin:
    w = rng.random(n) + 0.05
    return Margin(w / w.sum())


def random_feasible_pair(rng: np.random.Generator, p: int, q: int):
    """Margins drawn through the uniform-mixing constructor, hence feasible."""
    from indetermination import generate_feasible_margins

    alpha = rng.random()
    return generate_feasible_margins(alpha, random_margin(rng, p), random_margin(rng, q))
