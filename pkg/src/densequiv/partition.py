"""Equal-mass quantile partitions of a base measure."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["QuantilePartition", "PartitionResolutionError", "build_partition", "locate_cell"]


class PartitionResolutionError(ValueError):
    def __init__(self, message, max_m):
        super().__init__(message)
        self.max_m = max_m


@dataclass(frozen=True, eq=False)
class QuantilePartition:
    """Cells ``J_1..J_m`` of equal base-measure mass.

    ``edges`` has ``m + 1`` entries, the outer two being the (possibly
    infinite) endpoints of the interval.  Cell ``j`` is ``(edges[j-1], edges[j]]``
    except that the first cell also contains the left endpoint.
    ``finite_mesh`` is the largest width over cells with two finite edges
    (``nan`` if there are none).
    """

    measure: object
    m: int
    edges: np.ndarray
    cell_mass: float
    measured_masses: np.ndarray
    barycenters: np.ndarray
    finite_mesh: float

    @property
    def breakpoints(self):
        return self.edges[1:-1]

    @property
    def is_compact(self):
        return bool(np.isfinite(self.edges[0]) and np.isfinite(self.edges[-1]))

    def cell_bounds(self, j):
        """``(lower, upper)`` of cell ``j`` (1-based)."""
        return float(self.edges[j - 1]), float(self.edges[j])


def build_partition(measure, m, min_cell_mass_factor=1e3):
    """Split ``measure`` into ``m`` cells of mass ``total_mass / m``.

    Raises
    ------
    PartitionResolutionError
        If the cell mass drops below ``min_cell_mass_factor`` times the
        quadrature tolerance or neighbouring quantiles coincide.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    total = measure.total_mass
    floor = min_cell_mass_factor * measure.quad.epsabs
    max_m = max(1, int(total / floor))
    if total / m < floor:
        raise PartitionResolutionError(
            f"cell mass {total / m:.3g} under-resolves the quadrature tolerance; "
            f"use m <= {max_m}", max_m)
    iv = measure.interval
    inner = measure.quantile(np.arange(1, m) / m)
    edges = np.concatenate([[iv.lower], inner, [iv.upper]])
    if np.any(np.diff(edges) <= 0):
        raise PartitionResolutionError(
            f"quantiles collide at m={m}; use m <= {max_m // 2 or 1}", max_m // 2 or 1)
    masses = measure.moment_pieces(lambda x: np.ones_like(x), edges[:-1], edges[1:])
    mu = total / m
    first = measure.moment_pieces(lambda x: x, edges[:-1], edges[1:])
    bary = first / masses
    if not np.all(np.isfinite(bary)):
        bad = int(np.flatnonzero(~np.isfinite(bary))[0]) + 1
        raise ValueError(f"barycenter of cell {bad} is not finite (x g(x) not integrable)")
    finite = np.isfinite(edges[:-1]) & np.isfinite(edges[1:])
    widths = np.diff(edges)[finite]
    mesh = float(widths.max()) if widths.size else math.nan
    return QuantilePartition(measure=measure, m=m, edges=edges, cell_mass=mu,
                             measured_masses=masses, barycenters=bary, finite_mesh=mesh)


def locate_cell(partition, x):
    """1-based index of the cell containing ``x``; breakpoint ``v_j`` lies in cell ``j``."""
    x = np.asarray(x, dtype=float)
    inside = partition.measure.interval.contains(x)
    if not np.all(inside):
        bad = np.asarray(x).ravel()[~np.asarray(inside).ravel()][0]
        raise ValueError(f"point {bad!r} lies outside the interval")
    return np.searchsorted(partition.breakpoints, x, side="left") + 1
