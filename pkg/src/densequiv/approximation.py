"""Hat basis, piecewise-linear density approximants and their error functionals."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._quad import QuadratureConfig

__all__ = [
    "HatBasis", "PiecewiseLinearDensity", "ApproxErrors",
    "build_hat_basis", "hat_density", "cell_masses", "sqrt_cell_integrals",
    "sqrt_hat", "error_functionals", "lemma_l2_bound", "l2_distance_sq",
    "aligned_pieces", "cell_integrals",
]

# tighter than the measure default: the functionals reach 1e-10 and below
FUNCTIONAL_QUAD = QuadratureConfig(epsabs=1e-15, epsrel=1e-12, limit=4000)


def aligned_pieces(partition):
    """Union of cell edges and barycenters, with the cell (0-based) of each piece.

    Every integrand built from the approximants is smooth on each piece.
    """
    pts = np.unique(np.concatenate([partition.edges, partition.barycenters]))
    lo, hi = pts[:-1], pts[1:]
    cell = np.clip(np.searchsorted(partition.edges, lo, side="right") - 1, 0, partition.m - 1)
    return lo, hi, cell


@dataclass(frozen=True, eq=False)
class PiecewiseLinearDensity:
    """Continuous function, linear between ``knots`` and flat outside them."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.knots.shape != self.values.shape or np.any(np.diff(self.knots) <= 0):
            raise ValueError("knots must be strictly increasing and match values")
        if np.any(self.values < 0):
            raise ValueError("piecewise-linear density must be nonnegative")

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.knots, self.values)

    def sqrt(self, x):
        return np.sqrt(self(x))


class HatBasis:
    """Triangular hats ``u_j`` peaking at ``1 / cell_mass`` on the barycenters.

    The outer two elements are trapezoids carried flat to the ends of the
    interval, so that ``sum_j cell_mass * u_j == 1`` everywhere.
    """

    def __init__(self, partition):
        if partition.m < 2:
            raise ValueError("hat basis needs m >= 2")
        self.partition = partition
        self.knots = partition.barycenters
        self.peak = 1.0 / partition.cell_mass
        m = partition.m
        iv = partition.measure.interval
        # segments: [inf I, x_1*], [x_k*, x_{k+1}*] (k = 1..m-1), [x_m*, sup I]
        self.seg_lo = np.concatenate([[iv.lower], self.knots])
        self.seg_hi = np.concatenate([self.knots, [iv.upper]])
        meas = partition.measure
        self.seg_mass = meas.moment_pieces(np.ones_like, self.seg_lo, self.seg_hi)
        a, b = self.knots[:-1], self.knots[1:]
        self.seg_right = np.zeros(m + 1)
        self.seg_right[1:m] = self._right_weights(a, b)

    def _right_weights(self, a, b, t=None):
        """``int_a^t (x - a)/(b - a) g(x) dx`` per segment ``[a, b]`` (``t`` defaults to ``b``)."""
        a = np.asarray(a, dtype=float)
        width = np.asarray(b, dtype=float) - a
        t = a + width if t is None else t
        return self.partition.measure.moment_pieces(lambda x: (x - a) / width, a, t)

    @property
    def m(self):
        return self.partition.m

    def values(self, x):
        """Matrix ``u_j(x)`` of shape ``x.shape + (m,)``."""
        x = np.asarray(x, dtype=float)
        eye = np.eye(self.m)
        out = np.stack([np.interp(x, self.knots, eye[j]) for j in range(self.m)], axis=-1)
        return out * self.peak

    @cached_property
    def masses(self):
        """``w_j``, the base-measure integral of each hat."""
        return self.cumulative(np.array([self.partition.measure.interval.upper]))[0]

    @property
    def normalization_defect(self):
        return float(np.max(np.abs(self.masses - 1.0)))

    def cumulative(self, t):
        """``F_j(t)``: integral of ``u_j`` over the interval up to ``t``; shape ``t.shape + (m,)``."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        m = self.m
        left = self.seg_mass - self.seg_right     # weight on the segment's left node
        # contribution of full segment k to hat j: segment 0 -> hat 0; segment m -> hat m-1
        full = np.zeros((m + 1, m))
        full[0, 0] = self.seg_mass[0]
        for k in range(1, m):
            full[k, k - 1] = left[k]
            full[k, k] = self.seg_right[k]
        full[m, m - 1] = self.seg_mass[m]
        cum_full = np.vstack([np.zeros(m), np.cumsum(full, axis=0)])
        iv = self.partition.measure.interval
        clamped = np.clip(flat, iv.lower, iv.upper)
        k = np.clip(np.searchsorted(self.seg_hi, clamped, side="left"), 0, m)
        out = cum_full[k].copy()
        meas = self.partition.measure
        a = self.seg_lo[k]
        part_mass = meas.moment_pieces(np.ones_like, a, clamped)
        inner = (k >= 1) & (k <= m - 1)
        part_right = np.zeros(flat.size)
        if inner.any():
            kk = k[inner]
            part_right[inner] = self._right_weights(self.seg_lo[kk], self.seg_hi[kk], clamped[inner])
        rows = np.arange(flat.size)
        first = k == 0
        last = k == m
        out[rows[first], 0] += part_mass[first]
        out[rows[last], m - 1] += part_mass[last]
        ki = k[inner]
        out[rows[inner], ki - 1] += part_mass[inner] - part_right[inner]
        out[rows[inner], ki] += part_right[inner]
        return (out * self.peak).reshape(t.shape + (m,))

    def expand(self, coefficients):
        """``sum_j c_j u_j`` as a :class:`PiecewiseLinearDensity`."""
        c = np.asarray(coefficients, dtype=float)
        return PiecewiseLinearDensity(self.knots.copy(), c * self.peak)


def build_hat_basis(partition):
    return HatBasis(partition)


def hat_density(masses, partition):
    """Interpolant with value ``masses[j] / cell_mass`` at barycenter ``j``."""
    masses = np.asarray(masses, dtype=float)
    if masses.shape != (partition.m,):
        raise ValueError(f"expected {partition.m} cell masses, got shape {masses.shape}")
    if np.any(masses < 0):
        raise ValueError("cell masses must be nonnegative")
    return PiecewiseLinearDensity(partition.barycenters.copy(), masses / partition.cell_mass)


def cell_masses(f, partition, quad=FUNCTIONAL_QUAD):
    """``nu(J_j) = int_{J_j} f dnu_0`` for each cell."""
    e = partition.edges
    return partition.measure.moment_pieces(f, e[:-1], e[1:], quad)


def sqrt_cell_integrals(f, partition, quad=FUNCTIONAL_QUAD):
    """``int_{J_j} sqrt(f) dnu_0`` for each cell."""
    e = partition.edges
    return partition.measure.moment_pieces(lambda x: np.sqrt(f(x)), e[:-1], e[1:], quad)


def sqrt_hat(f, partition):
    """Piecewise-linear interpolant of the cell averages of ``sqrt(f)``."""
    return hat_density(sqrt_cell_integrals(f, partition), partition)


@dataclass(frozen=True)
class ApproxErrors:
    H: float
    A: float
    B: float

    @property
    def total(self):
        return self.H + self.A + self.B


def error_functionals(f, partition, quad=FUNCTIONAL_QUAD):
    """Discretisation errors ``(H_m, A_m, B_m)`` of ``f`` on ``partition``."""
    meas = partition.measure
    nu = cell_masses(f, partition, quad)
    roots = sqrt_cell_integrals(f, partition, quad)
    fhat = hat_density(nu, partition)
    rhat = hat_density(roots, partition)
    lo, hi, _ = aligned_pieces(partition)
    h2 = meas.moment_pieces(lambda x: (np.sqrt(f(x)) - fhat.sqrt(x)) ** 2, lo, hi, quad).sum()
    a2 = meas.moment_pieces(lambda x: (rhat(x) - np.sqrt(f(x))) ** 2, lo, hi, quad).sum()
    b2 = np.sum((roots / np.sqrt(partition.cell_mass) - np.sqrt(nu)) ** 2)
    return ApproxErrors(H=float(np.sqrt(h2)), A=float(np.sqrt(a2)), B=float(np.sqrt(b2)))


def cell_integrals(func, partition, quad=FUNCTIONAL_QUAD):
    """``int_{J_j} func dnu_0`` per cell, split at the barycenters as well."""
    lo, hi, cell = aligned_pieces(partition)
    pieces = partition.measure.moment_pieces(func, lo, hi, quad)
    return np.bincount(cell, weights=pieces, minlength=partition.m)


def lemma_l2_bound(gamma, K, M, partition):
    """Explicit class-uniform bound on the squared L2(nu_0) error of the interpolant.

    ``2 mu (3 K l**(1+gamma) + M l)**2 + 18 K**2 l**(2+2 gamma)`` with cell mass
    ``mu`` and mesh ``l``.
    """
    if not partition.is_compact:
        raise ValueError("the L2 bound needs a compact interval (finite mesh over all cells)")
    mu, ell = partition.cell_mass, partition.finite_mesh
    return 2 * mu * (3 * K * ell ** (1 + gamma) + M * ell) ** 2 + 18 * K ** 2 * ell ** (2 + 2 * gamma)


def l2_distance_sq(f, approx, measure, points=None, quad=FUNCTIONAL_QUAD):
    """``int (f - approx)**2 dnu_0``, split at ``points`` (defaults to the approximant's knots)."""
    iv = measure.interval
    if points is None:
        points = getattr(approx, "knots", getattr(f, "knots", np.empty(0)))
    pts = np.asarray(points, dtype=float)
    pts = pts[(pts > iv.lower) & (pts < iv.upper)]
    grid = np.unique(np.concatenate([[iv.lower], pts, [iv.upper]]))
    return float(measure.moment_pieces(lambda x: (f(x) - approx(x)) ** 2, grid[:-1], grid[1:], quad).sum())
