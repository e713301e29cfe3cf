"""Total variation and Hellinger distances: quadrature, closed forms, bounds, Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ._quad import DEFAULT_QUAD, QuadratureConfig, integrate_pieces
from ._rng import std_normal, stream
from .measure import sample_from_density

__all__ = [
    "DivergenceResult", "l1_and_hellinger", "total_variation", "hellinger_product_bound",
    "gaussian_hellinger_sq", "gaussian_tv_exact", "gaussian_tv_bound", "gp_l1_bound",
    "NormalFactor", "DensityFactor", "tv_monte_carlo_product",
]

_FINE = QuadratureConfig(epsabs=1e-13, epsrel=1e-12)


@dataclass(frozen=True)
class DivergenceResult:
    value: float
    method: str
    standard_error: float | None = None
    tolerance: float | None = None


def _sign_change_points(diff, lo, hi, grid_size=1024):
    """Roots of ``diff`` on ``[lo, hi]`` located by bisection between grid brackets."""
    x = np.linspace(lo, hi, grid_size + 1)
    d = diff(x)
    s = np.sign(d)
    roots = []
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        a, b = x[i], x[i + 1]
        sa = s[i]
        for _ in range(200):
            c = 0.5 * (a + b)
            if c in (a, b):
                break
            if np.sign(diff(np.array([c]))[0]) == sa:
                a = c
            else:
                b = c
        roots.append(0.5 * (a + b))
    return roots


def l1_and_hellinger(p, q, measure, points=(), quad=_FINE):
    """``L1 = int |p - q|`` and ``H = (int (sqrt p - sqrt q)**2)**0.5`` against ``measure``.

    ``p`` and ``q`` are densities with respect to the base measure.  The
    absolute value is integrated piecewise between the sign changes of
    ``p - q``; ``points`` adds known kinks.
    """
    iv = measure.interval
    a = iv.lower if math.isfinite(iv.lower) else float(measure.quantile(1e-12))
    b = iv.upper if math.isfinite(iv.upper) else float(measure.quantile(1 - 1e-12))
    cuts = list(points) + _sign_change_points(lambda x: p(x) - q(x), a, b)
    cuts = np.array(sorted(c for c in cuts if iv.lower < c < iv.upper))
    grid = np.unique(np.concatenate([[iv.lower], cuts, [iv.upper]]))
    lo, hi = grid[:-1], grid[1:]
    l1 = np.abs(measure.moment_pieces(lambda x: p(x) - q(x), lo, hi, quad)).sum()
    h2 = measure.moment_pieces(lambda x: (np.sqrt(p(x)) - np.sqrt(q(x))) ** 2, lo, hi, quad).sum()
    return float(l1), float(np.sqrt(max(h2, 0.0)))


def total_variation(p, q, measure, points=()):
    l1, _ = l1_and_hellinger(p, q, measure, points)
    return DivergenceResult(0.5 * l1, "quadrature", tolerance=_FINE.epsabs)


def hellinger_product_bound(per_factor_h2):
    """``sqrt(sum H_i**2)``, bounding the Hellinger distance of the product measures."""
    h2 = np.asarray(per_factor_h2, dtype=float)
    if np.any(h2 < 0):
        raise ValueError("squared Hellinger distances must be nonnegative")
    return float(np.sqrt(h2.sum()))


def gaussian_hellinger_sq(mu1, sigma1, mu2, sigma2):
    """Closed-form ``int (sqrt p - sqrt q)**2`` for normals (no factor 1/2), broadcasting."""
    mu1, s1, mu2, s2 = (np.asarray(v, dtype=float) for v in (mu1, sigma1, mu2, sigma2))
    v = s1 ** 2 + s2 ** 2
    bc = np.sqrt(2 * s1 * s2 / v) * np.exp(-((mu1 - mu2) ** 2) / (4 * v))
    return 2.0 * (1.0 - bc)


def gaussian_tv_exact(mu1, sigma1, mu2, sigma2):
    """Exact total variation between two normals via their density crossings."""
    if sigma1 <= 0 or sigma2 <= 0:
        raise ValueError("standard deviations must be positive")
    if mu1 == mu2 and sigma1 == sigma2:
        return 0.0
    # log p1 - log p2 = a x^2 + b x + c
    a = 0.5 / sigma2 ** 2 - 0.5 / sigma1 ** 2
    b = mu1 / sigma1 ** 2 - mu2 / sigma2 ** 2
    c = 0.5 * mu2 ** 2 / sigma2 ** 2 - 0.5 * mu1 ** 2 / sigma1 ** 2 + math.log(sigma2 / sigma1)
    if a == 0.0:
        roots = [-c / b]
    else:
        disc = b * b - 4 * a * c
        sq = math.sqrt(max(disc, 0.0))
        qq = -0.5 * (b + math.copysign(sq, b))
        roots = sorted([qq / a, c / qq] if qq != 0 else [-sq / (2 * a), sq / (2 * a)])
    cdf1 = [ndtr((r - mu1) / sigma1) for r in roots]
    cdf2 = [ndtr((r - mu2) / sigma2) for r in roots]
    edges1 = [0.0] + cdf1 + [1.0]
    edges2 = [0.0] + cdf2 + [1.0]
    tv = 0.0
    for k in range(len(edges1) - 1):
        tv += abs((edges1[k + 1] - edges1[k]) - (edges2[k + 1] - edges2[k]))
    return min(1.0, 0.5 * tv)


def gaussian_tv_bound(mu1, sigma1, mu2, sigma2):
    """``sqrt(2 (1 - s1^2/s2^2)^2 + (mu1 - mu2)^2 / (2 s2^2))``; not symmetric in its arguments."""
    if sigma1 <= 0 or sigma2 <= 0:
        raise ValueError("standard deviations must be positive")
    r = sigma1 ** 2 / sigma2 ** 2
    return math.sqrt(2 * (1 - r) ** 2 + (mu1 - mu2) ** 2 / (2 * sigma2 ** 2))


def gp_l1_bound(h1, h2, sigma, window, quad=DEFAULT_QUAD, points=()):
    """``sqrt(int_window (h1 - h2)**2 / sigma**2)`` for two drifts sharing a diffusion."""
    lo, hi = window
    grid = np.unique(np.concatenate([[lo], [p for p in points if lo < p < hi], [hi]]))

    def integrand(x):
        s = np.asarray(sigma(x), dtype=float)
        if np.any(s <= 0):
            raise ValueError("diffusion coefficient must be positive")
        return (np.asarray(h1(x)) - np.asarray(h2(x))) ** 2 / s ** 2

    return float(np.sqrt(integrate_pieces(integrand, grid[:-1], grid[1:], quad).sum()))


class NormalFactor:
    def __init__(self, mu, sigma):
        self.mu, self.sigma = float(mu), float(sigma)

    def sample(self, rng, size):
        return self.mu + self.sigma * std_normal(rng, size)

    def logpdf(self, x):
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - 0.5 * math.log(2 * math.pi)


class DensityFactor:
    """``f`` as a density with respect to ``measure``; log densities are relative to it."""

    def __init__(self, measure, f):
        self.measure, self.f = measure, f

    def sample(self, rng, size):
        return sample_from_density(self.measure, self.f, size, seed=None, rng=rng)

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.f(x))


def tv_monte_carlo_product(p_factors, q_factors, reps, seed, chunk=20000):
    """Monte Carlo estimate of ``TV(prod p_i, prod q_i) = E_P[(1 - dQ/dP)^+]``.

    The likelihood ratio is accumulated in log space.  Factors that are the
    same object are sampled together.
    """
    if len(p_factors) != len(q_factors):
        raise ValueError("factor lists differ in length")
    reps = int(reps)
    vals = np.empty(reps)
    groups = {}
    for i, pf in enumerate(p_factors):
        groups.setdefault(id(pf), []).append(i)
    for c, start in enumerate(range(0, reps, chunk)):
        size = min(chunk, reps - start)
        llr = np.zeros(size)
        for g, idx in enumerate(groups.values()):
            pf = p_factors[idx[0]]
            rng = stream(seed, c, g)
            x = pf.sample(rng, size * len(idx)).reshape(len(idx), size)
            for row, i in zip(x, idx):
                llr += q_factors[i].logpdf(row) - pf.logpdf(row)
        if np.any(np.isnan(llr)):
            raise FloatingPointError("likelihood ratio evaluated to NaN")
        vals[start:start + size] = np.where(llr < 0, -np.expm1(np.minimum(llr, 0.0)), 0.0)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(reps)) if reps > 1 else math.nan
    return DivergenceResult(min(max(est, 0.0), 1.0), "monte_carlo", standard_error=se)
