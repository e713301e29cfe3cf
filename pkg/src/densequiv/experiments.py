"""Forward samplers for the density, multinomial, Gaussian and white-noise models."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ._quad import integrate_pieces
from ._rng import std_normal, stream
from .approximation import sqrt_cell_integrals
from .measure import sample_from_density

__all__ = [
    "ExperimentDraw", "GridSpec", "Trajectory",
    "cell_probabilities", "sample_density_model", "sample_multinomial",
    "sample_gaussian_vector", "sample_increments", "rescale_increments",
    "unscale_increments", "simulate_white_noise_path",
    "write_trajectory_csv", "write_counts_csv",
]


@dataclass(frozen=True)
class ExperimentDraw:
    """One observation from a model, tagged with how it was produced."""

    tag: str
    payload: object
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag == "multinomial":
            n = self.provenance.get("n")
            if n is not None and int(np.sum(self.payload)) != n:
                raise ValueError("counts must sum to n")


@dataclass(frozen=True, eq=False)
class GridSpec:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or not np.all(np.isfinite(t)):
            raise ValueError("grid times must be finite and strictly increasing")
        object.__setattr__(self, "times", t)

    @classmethod
    def with_breakpoints(cls, partition, per_cell=4, window=None):
        """Grid refining every finite breakpoint with ``per_cell`` steps per cell."""
        e = partition.edges.copy()
        lo, hi = (e[0], e[-1]) if window is None else window
        if not np.isfinite(e[0]):
            e[0] = lo
        if not np.isfinite(e[-1]):
            e[-1] = hi
        pts = [np.linspace(e[j], e[j + 1], per_cell + 1)[:-1] for j in range(len(e) - 1)]
        return cls(np.unique(np.concatenate(pts + [[e[-1]]])))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    values: np.ndarray    # (..., len(times))

    def increments_over(self, edges):
        """Increments between consecutive ``edges``, which must be grid times."""
        idx = np.searchsorted(self.times, edges)
        if np.any(idx >= self.times.size) or not np.allclose(self.times[idx], edges, rtol=0, atol=0):
            raise ValueError("edges must be grid points")
        v = self.values[..., idx]
        return np.diff(v, axis=-1)


def cell_probabilities(f, partition):
    """``gamma_j = int_{J_j} f g dx`` normalised to sum to one."""
    e = partition.edges
    gam = partition.measure.moment_pieces(f, e[:-1], e[1:])
    if np.any(gam <= 0):
        raise ValueError("cell probabilities must be positive")
    return gam / gam.sum()


def sample_density_model(f, measure, n, seed):
    x = sample_from_density(measure, f, n, seed)
    return ExperimentDraw("density", x, {"n": n, "seed": seed})


def sample_multinomial(gammas, n, seed, size=None):
    """Counts of ``n`` multinomial trials; ``size`` gives independent replicates."""
    p = np.asarray(gammas, dtype=float)
    if np.any(p < 0) or not np.isclose(p.sum(), 1.0, rtol=0, atol=1e-9):
        raise ValueError("probabilities must be nonnegative and sum to 1")
    rng = stream(seed)
    return rng.multinomial(int(n), p / p.sum(), size=size)


def sample_gaussian_vector(gammas, n, seed, size=None):
    """Independent ``N(sqrt(n gamma_i), 1/4)`` coordinates."""
    mean = np.sqrt(n * np.asarray(gammas, dtype=float))
    shape = mean.shape if size is None else (size,) + mean.shape
    return mean + 0.5 * std_normal(stream(seed), shape)


def sample_increments(f, partition, n, seed, size=None):
    """Increments over the cells: ``N(int_{J_j} sqrt(f) dnu_0, cell_mass / (4n))``."""
    mean = sqrt_cell_integrals(f, partition)
    shape = mean.shape if size is None else (size,) + mean.shape
    sd = np.sqrt(partition.cell_mass / (4.0 * n))
    return mean + sd * std_normal(stream(seed), shape)


def rescale_increments(increments, partition, n):
    """Map cell increments to unit-variance coordinates (factor ``2 sqrt(n / mu)``)."""
    return np.asarray(increments) * (2.0 * np.sqrt(n / partition.cell_mass))


def unscale_increments(values, partition, n):
    return np.asarray(values) / (2.0 * np.sqrt(n / partition.cell_mass))


def simulate_white_noise_path(f, measure, n, grid, seed, parametrization="lebesgue_time",
                              noise=True, size=None):
    """Sample a white-noise trajectory on ``grid``.

    ``lebesgue_time``: drift ``sqrt(f g)``, noise ``dW / (2 sqrt n)``, anchored
    at ``t = 0`` (two independent halves of ``W`` when the grid straddles 0).
    ``nu0_time``: drift ``sqrt(f) g``, noise variance ``dnu_0 / (4n)``, anchored
    at the left end of the interval.
    """
    t = grid.times
    iv = measure.interval
    if np.any(~iv.contains(t)):
        raise ValueError("grid leaves the interval")
    shape = (t.size,) if size is None else (size, t.size)
    z = std_normal(stream(seed), shape) if noise else np.zeros(shape)
    if parametrization == "lebesgue_time":
        def rootfg(x):
            inside = iv.contains(x)
            xs = np.where(inside, x, t[0])
            return np.where(inside, np.sqrt(f(xs) * measure.g(xs)), 0.0)

        lo, hi = np.minimum(t, 0.0), np.maximum(t, 0.0)
        mean = np.where(t >= 0, 1.0, -1.0) * integrate_pieces(rootfg, lo, hi, measure.quad)
        values = mean + _two_sided_bm(t, z) / (2.0 * np.sqrt(n))
    elif parametrization == "nu0_time":
        mean = measure.moment_pieces(lambda x: np.sqrt(f(x)), np.full(t.size, iv.lower), t)
        clock = measure.cdf(t)
        steps = np.diff(np.concatenate([[0.0], clock]))
        w = np.cumsum(np.sqrt(steps) * z, axis=-1)
        values = mean + w / (2.0 * np.sqrt(n))
    else:
        raise ValueError(f"unknown parametrization {parametrization!r}")
    return Trajectory(t, values)


def _two_sided_bm(t, z):
    """Brownian motion pinned at 0, built outward from 0 on each side."""
    out = np.zeros_like(z)
    right = np.flatnonzero(t >= 0)
    left = np.flatnonzero(t < 0)[::-1]
    for side in (right, left):
        if side.size == 0:
            continue
        v = np.abs(t[side])
        steps = np.diff(np.concatenate([[0.0], v]))
        out[..., side] = np.cumsum(np.sqrt(steps) * z[..., side], axis=-1)
    return out


def write_trajectory_csv(path, trajectory, column="Y_t"):
    vals = np.asarray(trajectory.values)
    if vals.ndim != 1:
        raise ValueError("write one trajectory at a time")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", column])
        for ti, yi in zip(trajectory.times, vals):
            w.writerow([repr(float(ti)), repr(float(yi))])


def write_counts_csv(path, counts):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell_index", "count"])
        for j, c in enumerate(np.asarray(counts), start=1):
            w.writerow([j, int(c)])
