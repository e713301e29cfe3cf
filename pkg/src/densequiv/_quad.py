"""Vectorised adaptive quadrature over batches of (possibly unbounded) pieces.

Every integral in the package funnels through :func:`integrate_pieces`.  A batch
of intervals ``[lo_i, hi_i]`` is mapped onto ``u in [0, 1]`` and handed to
:func:`scipy.integrate.quad_vec` as one vector-valued integrand, so a whole
partition is integrated with a single adaptive Gauss-Kronrod run.
Half-lines use ``x = c + u / (1 - u)`` (mirrored for left tails); the full line
is split at zero first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec


class QuadratureError(RuntimeError):
    """Adaptive quadrature stopped before reaching its tolerance."""

    def __init__(self, message, achieved=None, index=None):
        super().__init__(message)
        self.achieved = achieved
        self.index = index


@dataclass(frozen=True)
class QuadratureConfig:
    epsabs: float = 1e-10
    epsrel: float = 1e-11
    limit: int = 4000


DEFAULT_QUAD = QuadratureConfig()


def _split_doubly_infinite(lo, hi):
    both = np.isneginf(lo) & np.isposinf(hi)
    if not both.any():
        return lo, hi, None
    idx = np.flatnonzero(both)
    lo2 = np.concatenate([lo, np.zeros(idx.size)])
    hi2 = np.concatenate([hi, np.full(idx.size, np.inf)])
    hi2[idx] = 0.0
    return lo2, hi2, idx


def integrate_pieces(func, lo, hi, config=DEFAULT_QUAD):
    """Integrate ``func`` over each interval ``[lo[i], hi[i]]``.

    Parameters
    ----------
    func : callable
        Vectorised integrand.  It receives a 1-d array holding one abscissa
        per piece, in piece order (pieces spanning the whole line are split in
        two and the second halves appended).
    lo, hi : array_like
        Interval endpoints, broadcast to a common 1-d shape.  Infinite values
        are allowed.  Pieces with ``lo >= hi`` integrate to zero.
    config : QuadratureConfig

    Returns
    -------
    ndarray
        One integral per piece.
    """
    lo, hi = np.broadcast_arrays(np.atleast_1d(np.asarray(lo, dtype=float)),
                                 np.atleast_1d(np.asarray(hi, dtype=float)))
    lo = lo.ravel().copy()
    hi = hi.ravel().copy()
    n_orig = lo.size
    empty = ~(hi > lo)
    lo[empty] = 0.0
    hi[empty] = 0.0
    lo, hi, split = _split_doubly_infinite(lo, hi)
    if lo.size == 0:
        return np.zeros(0)

    fin = np.isfinite(lo) & np.isfinite(hi)
    right = np.isfinite(lo) & np.isposinf(hi)
    left = np.isneginf(lo) & np.isfinite(hi)
    width = np.where(fin, hi - lo, 0.0)
    anchor = np.where(right, lo, np.where(left, hi, 0.0))
    anchor = np.where(fin, lo, anchor)

    def mapped(u):
        x = np.empty_like(lo)
        jac = np.empty_like(lo)
        x[fin] = lo[fin] + width[fin] * u
        jac[fin] = width[fin]
        # subdivision can land on u == 1 exactly after rounding
        u = np.float64(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = u / (1.0 - u)
            d = 1.0 / (1.0 - u) ** 2
        x[right] = anchor[right] + t
        jac[right] = d
        x[left] = anchor[left] - t
        jac[left] = d
        with np.errstate(invalid="ignore", over="ignore"):
            vals = np.asarray(func(x), dtype=float) * jac
        # tails may produce inf*0 far out
        vals[~np.isfinite(vals) & (jac > 1e200)] = 0.0
        return vals

    res, err, info = quad_vec(mapped, 0.0, 1.0, epsabs=config.epsabs,
                              epsrel=config.epsrel, norm="max",
                              limit=config.limit, full_output=True)
    if not info.success:
        raise QuadratureError(
            f"quadrature did not converge (estimated error {err:.3g}, "
            f"target {config.epsabs:.3g})", achieved=err)
    res = np.asarray(res, dtype=float)
    if not np.all(np.isfinite(res)):
        bad = int(np.flatnonzero(~np.isfinite(res))[0])
        raise QuadratureError(f"non-finite integral on piece {bad}", achieved=err,
                              index=bad)
    if split is not None:
        res[split] += res[n_orig:]
        res = res[:n_orig]
    res[empty] = 0.0
    return res
