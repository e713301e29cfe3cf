"""Explicit randomisations: grouping, the hat-mixture kernel and the Y* process."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import open_uniform, std_normal, stream
from .approximation import cell_integrals, cell_masses, hat_density, sqrt_cell_integrals
from .experiments import Trajectory
from .partition import locate_cell

__all__ = [
    "KernelDiagnostics", "grouping_statistic", "randomization_kernel_draw",
    "compound_kernel_draws", "kernel_marginal_cdf", "cell_probability_discrepancy",
    "build_y_star_path", "y_star_theoretical_moments", "y_star_construction_covariance",
    "bridge_fractions",
]


def grouping_statistic(samples, partition):
    """Number of samples falling in each cell."""
    cells = locate_cell(partition, np.asarray(samples, dtype=float))
    return np.bincount(np.ravel(cells) - 1, minlength=partition.m)


def _support(basis, j):
    k = basis.knots
    iv = basis.partition.measure.interval
    lo = np.where(j == 0, iv.lower, k[np.maximum(j - 1, 0)])
    hi = np.where(j == basis.m - 1, iv.upper, k[np.minimum(j + 1, basis.m - 1)])
    return lo, hi


def _unit_hat(basis, j, x):
    """``cell_mass * u_j(x)``, in [0, 1]."""
    k = basis.knots
    m = basis.m
    kj = k[j]
    kl = k[np.maximum(j - 1, 0)]
    kr = k[np.minimum(j + 1, m - 1)]
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(j == 0, 1.0, (x - kl) / (kj - kl))
        down = np.where(j == m - 1, 1.0, (kr - x) / (kr - kj))
    return np.clip(np.where(x <= kj, up, down), 0.0, 1.0)


def _element_draws(basis, j, rng):
    """One draw from the normalised hat ``u_j dnu_0 / w_j`` for every entry of ``j``.

    Proposals come from the base measure restricted to the hat's support and
    are accepted with probability ``cell_mass * u_j(x)``.
    """
    meas = basis.partition.measure
    out = np.empty(j.size)
    pending = np.arange(j.size)
    while pending.size:
        jj = j[pending]
        lo, hi = _support(basis, jj)
        x = meas.sample(rng, pending.size, lo, hi)
        ok = open_uniform(rng, pending.size) < _unit_hat(basis, jj, x)
        out[pending[ok]] = x[ok]
        pending = pending[~ok]
    return out


def randomization_kernel_draw(counts, basis, draws=None, seed=0):
    """Draw from the mixture ``sum_j (k_j / n) u_j dnu_0 / w_j`` given cell counts.

    ``draws`` defaults to ``n``; draws are i.i.d. given the counts.
    """
    counts = np.asarray(counts)
    if counts.shape != (basis.m,) or np.any(counts < 0):
        raise ValueError(f"expected {basis.m} nonnegative counts")
    n = int(counts.sum())
    if n == 0:
        raise ValueError("counts are all zero")
    draws = n if draws is None else int(draws)
    rng = stream(seed)
    j = rng.choice(basis.m, size=draws, p=counts / n)
    return _element_draws(basis, j, rng)


def compound_kernel_draws(probabilities, n, basis, draws, seed):
    """Fresh multinomial counts for every draw, then one kernel draw from them.

    The marginal law is ``sum_j p_j u_j dnu_0 / w_j``.
    """
    p = np.asarray(probabilities, dtype=float)
    rng = stream(seed)
    counts = rng.multinomial(int(n), p / p.sum(), size=int(draws))
    pick = rng.integers(0, int(n), size=int(draws))
    j = (np.cumsum(counts, axis=1) <= pick[:, None]).sum(axis=1)
    return _element_draws(basis, j, rng)


def kernel_marginal_cdf(weights, basis, x):
    """CDF of ``sum_j weights_j u_j dnu_0 / w_j`` by quadrature."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    F = basis.cumulative(np.asarray(x, dtype=float))
    return F @ (w / basis.masses)


@dataclass(frozen=True, eq=False)
class KernelDiagnostics:
    masses: np.ndarray
    max_normalization_defect: float
    cell_probability_discrepancy: float
    f_masses: np.ndarray
    fhat_masses: np.ndarray


def cell_probability_discrepancy(f, basis):
    """Compare the cell masses of ``f`` with those of its hat interpolant."""
    part = basis.partition
    nu = cell_masses(f, part)
    fhat = hat_density(nu, part)
    nu_hat = cell_integrals(fhat, part)
    return KernelDiagnostics(
        masses=basis.masses.copy(),
        max_normalization_defect=basis.normalization_defect,
        cell_probability_discrepancy=float(np.max(np.abs(nu - nu_hat))),
        f_masses=nu, fhat_masses=nu_hat)


def bridge_fractions(basis, t):
    """Normalised time changes ``F_j(t) / w_j`` clipped to [0, 1]; shape ``t.shape + (m,)``."""
    F = basis.cumulative(t)
    return np.clip(F / basis.masses, 0.0, 1.0)


def build_y_star_path(increments, basis, n, grid, seed):
    """Reconstruct ``Y*`` on ``grid`` from cell increments plus bridge noise.

    ``Y*_t = sum_j Ybar_j F_j(t) + (2 sqrt n)^-1 sum_j sqrt(cell_mass) B_j(t)``,
    where ``B_j`` is a Brownian bridge run on the clock ``F_j / w_j``.
    ``increments`` may carry leading replicate axes.
    """
    t = grid.times
    iv = basis.partition.measure.interval
    if np.any(~iv.contains(t)):
        raise ValueError("grid leaves the interval")
    inc = np.asarray(increments, dtype=float)
    if inc.shape[-1] != basis.m:
        raise ValueError(f"expected {basis.m} increments per path")
    F = basis.cumulative(t)                               # (G, m)
    frac = np.maximum.accumulate(np.clip(F / basis.masses, 0.0, 1.0), axis=0)
    clock = np.vstack([frac, np.ones((1, basis.m))])      # (G + 1, m)
    steps = np.diff(np.vstack([np.zeros((1, basis.m)), clock]), axis=0)
    lead = inc.shape[:-1]
    z = std_normal(stream(seed), lead + clock.shape)
    W = np.cumsum(np.sqrt(steps) * z, axis=-2)
    bridge = W[..., :-1, :] - frac * W[..., -1:, :]
    mu = basis.partition.cell_mass
    signal = inc @ F.T
    noise = bridge.sum(axis=-1) * np.sqrt(mu) / (2.0 * np.sqrt(n))
    return Trajectory(t, signal + noise)


def y_star_theoretical_moments(f, basis, n, t):
    """Mean ``sum_j (int_{J_j} sqrt f) F_j(t)`` and variance ``nu_0(I, <= t) / (4n)``."""
    t = np.asarray(t, dtype=float)
    roots = sqrt_cell_integrals(f, basis.partition)
    mean = basis.cumulative(t) @ roots
    var = basis.partition.measure.cdf(t) / (4.0 * n)
    return mean, var


def y_star_construction_covariance(basis, n, s, t):
    """Exact covariance of the constructed ``Y*`` at times ``s <= t`` (any ``w_j``)."""
    s, t = np.minimum(s, t), np.maximum(s, t)
    Fs, Ft = basis.cumulative(np.asarray(s, dtype=float)), basis.cumulative(np.asarray(t, dtype=float))
    bs, bt = np.clip(Fs / basis.masses, 0, 1), np.clip(Ft / basis.masses, 0, 1)
    mu = basis.partition.cell_mass
    return mu / (4.0 * n) * np.sum(Fs * Ft + bs * (1.0 - bt), axis=-1)
