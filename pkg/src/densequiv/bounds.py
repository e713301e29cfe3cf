"""Assembled upper bounds: the Hellinger step, the multinomial-normal step,
the Gaussian steps, and their totals for a battery or for a whole Holder class."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .approximation import error_functionals, lemma_l2_bound
from .experiments import cell_probabilities

__all__ = [
    "BoundReport", "step1_bound", "carter_bound", "ratio_condition", "step4_bound",
    "step4_parts", "theorem1_total", "corollary1_total", "BOUND_FIELDS",
]

BOUND_FIELDS = ("n", "m", "term_discretization", "term_carter", "term_step1",
                "term_step4", "total", "C_R", "ratio_ok")


@dataclass(frozen=True)
class BoundReport:
    n: int
    m: int
    term_discretization: float
    term_carter: float
    term_step1: float
    term_step4: float
    C_R: float
    ratio_ok: bool = True
    inputs: dict = field(default_factory=dict)
    total: float = field(init=False)

    def __post_init__(self):
        terms = (self.term_discretization, self.term_carter, self.term_step1, self.term_step4)
        if any(t < 0 for t in terms):
            raise ValueError("bound terms must be nonnegative")
        object.__setattr__(self, "total", self.term_discretization + self.term_carter)

    def row(self):
        d = asdict(self)
        return {k: d[k] for k in BOUND_FIELDS}


def step1_bound(f, partition, n, errors=None):
    """``sqrt(n) * H_m(f)``."""
    errors = error_functionals(f, partition) if errors is None else errors
    return math.sqrt(n) * errors.H


def carter_bound(m, n, C_R=1.0):
    """``C_R m ln(m) / sqrt(n)``."""
    if m < 1 or n < 1 or C_R <= 0:
        raise ValueError("need m >= 1, n >= 1, C_R > 0")
    return C_R * m * math.log(m) / math.sqrt(n)


def ratio_condition(gammas, R):
    """``(max gamma / min gamma, ratio <= R)``."""
    g = np.asarray(gammas, dtype=float)
    ratio = float(g.max() / g.min())
    return ratio, bool(ratio <= R * (1 + 1e-12))


def step4_parts(f, partition, n, errors=None):
    """``(2 sqrt(n) A_m, 2 sqrt(n) B_m)``."""
    errors = error_functionals(f, partition) if errors is None else errors
    s = 2.0 * math.sqrt(n)
    return s * errors.A, s * errors.B


def step4_bound(f, partition, n, errors=None):
    a, b = step4_parts(f, partition, n, errors)
    return a + b


def theorem1_total(battery, partition, n, C_R=1.0, errors=None):
    """Bound report with the supremum over the class replaced by a max over ``battery``.

    ``errors`` may supply precomputed :class:`ApproxErrors`, one per member.
    """
    if not battery:
        raise ValueError("battery must be nonempty")
    if errors is None:
        errors = [error_functionals(f, partition) for f in battery]
    ratio_ok = True
    for f in battery:
        _, ok = ratio_condition(cell_probabilities(f, partition), f.M / f.kappa)
        ratio_ok &= ok
    sq = math.sqrt(n)
    return BoundReport(
        n=int(n), m=partition.m,
        term_discretization=sq * max(e.total for e in errors),
        term_carter=carter_bound(partition.m, n, C_R),
        term_step1=sq * max(e.H for e in errors),
        term_step4=2 * sq * max(e.A + e.B for e in errors),
        C_R=C_R, ratio_ok=ratio_ok,
        inputs={"members": [f.name for f in battery]})


def corollary1_total(gamma, K, kappa, M, partition, n, C_R=1.0):
    """Class-uniform report for the Holder class, without evaluating any member.

    ``H^2 <= L(gamma, K, M) / (4 kappa)`` and ``A^2, B^2 <= L(gamma, K / sqrt(kappa), sqrt(M))``
    with ``L`` the explicit L2 interpolation bound.
    """
    meas = partition.measure
    if not meas.interval.is_compact:
        raise ValueError("the class bound needs a compact interval")
    if meas.total_mass > 1.0 / kappa * (1 + 1e-12):
        raise ValueError(f"total mass {meas.total_mass:g} exceeds 1/kappa = {1 / kappa:g}; "
                         "no density in the class exists")
    h = math.sqrt(lemma_l2_bound(gamma, K, M, partition) / (4 * kappa))
    a = math.sqrt(lemma_l2_bound(gamma, K / math.sqrt(kappa), math.sqrt(M), partition))
    sq = math.sqrt(n)
    ell, mu = partition.finite_mesh, partition.cell_mass
    return BoundReport(
        n=int(n), m=partition.m,
        term_discretization=sq * (h + 2 * a),
        term_carter=carter_bound(partition.m, n, C_R),
        term_step1=sq * h, term_step4=2 * sq * 2 * a, C_R=C_R,
        inputs={"gamma": gamma, "K": K, "kappa": kappa, "M": M,
                "H_bound": h, "A_bound": a, "B_bound": a,
                "rate_shape": sq * (ell ** (gamma + 1) + math.sqrt(mu) * ell)})
