"""Indetermination for densities on rectangles.

Two densities ``f`` on [a, A] and ``g`` on [b, B] couple into the joint
density

    c(u, v) = f(u)/(B-b) + g(v)/(A-a) - 1/((A-a)*(B-b)),

whose margins are exactly ``f`` and ``g`` and which, on the unit square,
minimizes the squared norm over all joint densities with those margins.
Nonnegativity needs the feasibility inequality ``min f + min g >= 1``
taken after affine normalization of both supports to [0, 1] (where the
density reads ``f + g - 1``).  The joint CDF on the unit square is

    H(u, v) = v*F(u) + u*G(v) - u*v,

rescaled affinely for general rectangles.

Densities are restricted to piecewise-constant and piecewise-linear
specifications so that minima, integrals and CDFs are closed-form; the
free function :func:`density_eval_callable` applies the coupling formula
to raw callables without any certification.  Quadrature
(:func:`margins_of_density`) is deliberately kept as an independent
route for recovering margins, to cross-check the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coupling import _freeze
from .errors import ConditionHViolation, InvalidDistribution, OutOfSupport

__all__ = [
    "DensityKind",
    "DensitySpec",
    "ContinuousCoupling",
    "density_eval",
    "density_eval_callable",
    "cdf_eval",
    "check_condition_continuous",
    "margins_of_density",
    "construct_margins",
    "l2_optimality_check",
]

_INTEGRAL_ATOL = 1e-10
_FEASIBILITY_ATOL = 1e-12


class DensityKind(Enum):
    PIECEWISE_CONSTANT = "piecewise_constant"
    PIECEWISE_LINEAR = "piecewise_linear"


@dataclass(frozen=True)
class DensitySpec:
    """Piecewise-constant or piecewise-linear probability density.

    ``knots`` are the strictly increasing breakpoints spanning the
    support; ``values`` hold one density value per piece (constant kind)
    or one per knot (linear kind, interpolated in between).  Nonnegative
    everywhere, total mass 1 within 1e-10.
    """

    kind: DensityKind
    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        knots = np.array(self.knots, dtype=float)
        values = np.array(self.values, dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise InvalidDistribution("need at least two knots")
        if not np.all(np.isfinite(knots)) or not np.all(np.isfinite(values)):
            raise InvalidDistribution("knots and values must be finite")
        if np.any(np.diff(knots) <= 0):
            raise InvalidDistribution("knots must be strictly increasing")
        expected = knots.size - 1 if self.kind is DensityKind.PIECEWISE_CONSTANT \
            else knots.size
        if values.ndim != 1 or values.size != expected:
            raise InvalidDistribution(
                f"{self.kind.value} expects {expected} values, got {values.size}")
        if values.min() < 0:
            raise InvalidDistribution("density values must be nonnegative")
        object.__setattr__(self, "knots", _freeze(knots))
        object.__setattr__(self, "values", _freeze(values))
        total = self.integral()
        if abs(total - 1.0) > _INTEGRAL_ATOL:
            raise InvalidDistribution(f"density integrates to {total!r}, expected 1")

    @classmethod
    def uniform(cls, a: float = 0.0, b: float = 1.0) -> "DensitySpec":
        return cls(DensityKind.PIECEWISE_CONSTANT, [a, b], [1.0 / (b - a)])

    @classmethod
    def piecewise_constant(cls, knots, values) -> "DensitySpec":
        return cls(DensityKind.PIECEWISE_CONSTANT, knots, values)

    @classmethod
    def piecewise_linear(cls, knots, values) -> "DensitySpec":
        return cls(DensityKind.PIECEWISE_LINEAR, knots, values)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def _piece_masses(self) -> np.ndarray:
        widths = np.diff(self.knots)
        if self.kind is DensityKind.PIECEWISE_CONSTANT:
            return self.values * widths
        return 0.5 * (self.values[:-1] + self.values[1:]) * widths

    def integral(self) -> float:
        return float(self._piece_masses().sum())

    def minimum(self) -> float:
        """Exact minimum over the support (attained at a knot or on a piece)."""
        return float(self.values.min())

    def evaluate(self, x):
        """Density value(s) at ``x`` (inside the support)."""
        x = np.asarray(x, dtype=float)
        a, b = self.support
        if np.any(x < a) or np.any(x > b):
            raise OutOfSupport(f"point outside support [{a}, {b}]")
        if self.kind is DensityKind.PIECEWISE_LINEAR:
            out = np.interp(x, self.knots, self.values)
        else:
            idx = np.clip(np.searchsorted(self.knots, x, side="right") - 1,
                          0, self.values.size - 1)
            out = self.values[idx]
        return out if out.ndim else float(out)

    def cdf(self, x):
        """Cumulative mass up to ``x`` (closed form per piece)."""
        x = np.asarray(x, dtype=float)
        a, b = self.support
        if np.any(x < a) or np.any(x > b):
            raise OutOfSupport(f"point outside support [{a}, {b}]")
        cum = np.concatenate([[0.0], np.cumsum(self._piece_masses())])
        idx = np.clip(np.searchsorted(self.knots, x, side="right") - 1,
                      0, self.values.size - 1 if self.kind is DensityKind.PIECEWISE_CONSTANT
                      else self.knots.size - 2)
        left = self.knots[idx]
        if self.kind is DensityKind.PIECEWISE_CONSTANT:
            out = cum[idx] + self.values[idx] * (x - left)
        else:
            fx = np.interp(x, self.knots, self.values)
            out = cum[idx] + 0.5 * (self.values[idx] + fx) * (x - left)
        return out if out.ndim else float(out)

    def rescaled(self, support: tuple[float, float]) -> "DensitySpec":
        """Affinely transport the density onto a new support interval."""
        a0, b0 = self.support
        a1, b1 = float(support[0]), float(support[1])
        if b1 <= a1:
            raise InvalidDistribution("support must have positive length")
        scale = (b0 - a0) / (b1 - a1)
        knots = a1 + (self.knots - a0) / (b0 - a0) * (b1 - a1)
        return DensitySpec(self.kind, knots, self.values * scale)


@dataclass(frozen=True)
class ContinuousCoupling:
    """Pair of densities whose indetermination coupling is a true density.

    Construction validates the feasibility inequality (after [0, 1]
    normalization of both supports).
    """

    f: DensitySpec
    g: DensitySpec

    def __post_init__(self) -> None:
        if not check_condition_continuous(self.f, self.g):
            lhs = _normalized_min(self.f) + _normalized_min(self.g)
            raise ConditionHViolation(
                f"continuous feasibility violated: min f + min g = {lhs:.6g} < 1 "
                "after [0, 1] normalization")

    @property
    def supports(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return self.f.support, self.g.support


def _normalized_min(spec: DensitySpec) -> float:
    a, b = spec.support
    return (b - a) * spec.minimum()


def check_condition_continuous(f: DensitySpec, g: DensitySpec) -> bool:
    """Feasibility test ``min f + min g >= 1`` after [0, 1] normalization.

    Minima are exact: piecewise-constant and piecewise-linear densities
    attain extrema at knots.
    """
    return _normalized_min(f) + _normalized_min(g) >= 1.0 - _FEASIBILITY_ATOL


def density_eval(c: ContinuousCoupling, u, v):
    """Joint density ``f(u)/(B-b) + g(v)/(A-a) - 1/((A-a)(B-b))``.

    Accepts scalars or broadcastable arrays inside the support rectangle.
    """
    (a, A), (b, B) = c.supports
    lf, lg = A - a, B - b
    return c.f.evaluate(u) / lg + c.g.evaluate(v) / lf - 1.0 / (lf * lg)


def density_eval_callable(f, g, f_support: tuple[float, float],
                          g_support: tuple[float, float], u, v):
    """Coupling formula applied to raw callables (non-certified mode).

    No validation whatsoever: the caller vouches that ``f`` and ``g`` are
    densities on their supports and that the result is nonnegative.
    """
    a, A = f_support
    b, B = g_support
    return f(u) / (B - b) + g(v) / (A - a) - 1.0 / ((A - a) * (B - b))


def cdf_eval(c: ContinuousCoupling, u, v):
    """Joint CDF: ``y*F(u) + x*G(v) - x*y`` in normalized coordinates.

    ``x`` and ``y`` are the affine images of ``u`` and ``v`` in [0, 1].
    Satisfies ``H(A, B) = 1``, ``H(a, .) = H(., b) = 0``, and recovers the
    margins along the opposite edges.
    """
    (a, A), (b, B) = c.supports
    x = (np.asarray(u, dtype=float) - a) / (A - a)
    y = (np.asarray(v, dtype=float) - b) / (B - b)
    out = y * c.f.cdf(u) + x * c.g.cdf(v) - x * y
    return out if np.ndim(out) else float(out)


def _gauss_legendre_nodes(knots: np.ndarray, order: int):
    """Composite Gauss-Legendre nodes/weights over the pieces of a knot grid."""
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for left, right in zip(knots[:-1], knots[1:]):
        half = 0.5 * (right - left)
        xs.append(0.5 * (left + right) + half * base_x)
        ws.append(half * base_w)
    return np.concatenate(xs), np.concatenate(ws)


def margins_of_density(c: ContinuousCoupling,
                       n_quad: int = 64) -> tuple[DensitySpec, DensitySpec]:
    """Recover both margins by numeric integration of the joint density.

    For each evaluation abscissa of ``f`` (knots for the linear kind,
    piece midpoints for the constant kind) the joint density is
    integrated over the other axis with composite Gauss-Legendre rules of
    ``n_quad`` nodes per piece, and symmetrically for ``g``.  The result
    is packaged on the original knot grids; it must agree with the stored
    margins to quadrature accuracy (exact here, since the integrands are
    piecewise polynomials).
    """
    if n_quad < 16:
        raise InvalidDistribution("n_quad must be >= 16")
    order = min(int(n_quad), 64)

    def recover(target: DensitySpec, other: DensitySpec, flip: bool) -> DensitySpec:
        nodes_w, weights = _gauss_legendre_nodes(other.knots, order)
        if target.kind is DensityKind.PIECEWISE_LINEAR:
            abscissae = target.knots
        else:
            abscissae = 0.5 * (target.knots[:-1] + target.knots[1:])
        vals = np.empty(abscissae.size)
        for i, t in enumerate(abscissae):
            if flip:
                density = density_eval(c, nodes_w, np.full(nodes_w.size, t))
            else:
                density = density_eval(c, np.full(nodes_w.size, t), nodes_w)
            vals[i] = float(np.dot(weights, density))
        return DensitySpec(target.kind, target.knots, vals)

    return recover(c.f, c.g, flip=False), recover(c.g, c.f, flip=True)


def construct_margins(alpha: float, r: DensitySpec,
                      s: DensitySpec) -> tuple[DensitySpec, DensitySpec]:
    """Mix unit-square densities with the uniform one into a feasible pair.

    Returns ``f = (1-alpha)*r + alpha`` and ``g = alpha*s + (1-alpha)``
    (densities on [0, 1]).  Every feasible pair on the unit square arises
    this way, and conversely every output satisfies the feasibility
    inequality: ``min f >= alpha`` and ``min g >= 1 - alpha``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidDistribution("alpha must lie in [0, 1]")
    for spec in (r, s):
        a, b = spec.support
        if abs(a) > 1e-12 or abs(b - 1.0) > 1e-12:
            raise InvalidDistribution("r and s must be densities on [0, 1]")
    f = DensitySpec(r.kind, r.knots, (1.0 - alpha) * r.values + alpha)
    g = DensitySpec(s.kind, s.knots, alpha * s.values + (1.0 - alpha))
    return f, g


def l2_optimality_check(c: ContinuousCoupling, perturbation_seed: int,
                        n_perturbations: int = 20) -> bool:
    """Verify the coupling is a local L2 minimum among same-margin densities.

    Perturbations are products ``h(u, v) = a(u) * b(v)`` of random
    mean-zero quadratics, which leave both margins untouched.  Each is
    scaled to keep the perturbed density nonnegative on a corner grid
    (when the density touches zero, the scale shrinks accordingly), and
    the squared norms are compared by piecewise Gauss-Legendre quadrature
    (exact: all integrands are polynomials).  True iff every perturbation
    does not decrease the squared norm.
    """
    (a, A), (b, B) = c.supports
    if abs(a) > 1e-12 or abs(A - 1.0) > 1e-12 or abs(b) > 1e-12 or abs(B - 1.0) > 1e-12:
        raise InvalidDistribution("optimality check expects the unit square")
    rng = np.random.default_rng(perturbation_seed)
    order = 12
    xs, wx = _gauss_legendre_nodes(c.f.knots, order)
    ys, wy = _gauss_legendre_nodes(c.g.knots, order)
    grid_u, grid_v = np.meshgrid(xs, ys, indexing="ij")
    weight = np.outer(wx, wy)
    base = density_eval(c, grid_u, grid_v)
    base_norm = float(np.sum(weight * base**2))

    fine = np.linspace(0.0, 1.0, 101)
    fu, fv = np.meshgrid(fine, fine, indexing="ij")
    base_fine = density_eval(c, fu, fv)

    ok = True
    for _ in range(n_perturbations):
        ca = rng.normal(size=2)
        cb = rng.normal(size=2)

        def mean_zero(t, coef):
            return coef[0] * (t - 0.5) + coef[1] * (t * t - t + 1.0 / 6.0)

        h = mean_zero(grid_u, ca) * mean_zero(grid_v, cb)
        h_fine = mean_zero(fu, ca) * mean_zero(fv, cb)
        negative = h_fine < 0
        if negative.any():
            eps = float(np.min(base_fine[negative] / -h_fine[negative]))
            eps = min(0.9 * eps, 0.25)
        else:
            eps = 0.25
        if eps <= 0.0:
            h, h_fine = -h, -h_fine
            negative = h_fine < 0
            eps = 0.25 if not negative.any() else \
                min(0.9 * float(np.min(base_fine[negative] / -h_fine[negative])), 0.25)
        if eps <= 0.0:
            continue  # density touches zero in a way no scale survives
        perturbed_norm = float(np.sum(weight * (base + eps * h) ** 2))
        ok = ok and perturbed_norm >= base_norm - 1e-12
    return ok
