"""Base measures, density parameters, CDF inversion and rejection sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._quad import DEFAULT_QUAD, QuadratureConfig, QuadratureError, integrate_pieces
from ._rng import open_uniform, stream

__all__ = [
    "IntervalSpec", "BaseMeasure", "DensityParameter", "MembershipReport",
    "QuadratureConfig", "QuadratureError", "SamplingError",
    "uniform", "power_law", "exponential", "tabulated",
    "measure_cdf", "measure_quantile", "sample_from_density",
    "check_class_membership",
]

TABLE_SIZE = 1024
ROOT_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntervalSpec:
    """An interval of the real line; infinite endpoints are always open."""

    lower: float
    upper: float
    lower_closed: bool = True
    upper_closed: bool = True

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if not lo < hi:
            raise ValueError(f"empty interval: lower={lo} >= upper={hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if math.isinf(lo):
            object.__setattr__(self, "lower_closed", False)
        if math.isinf(hi):
            object.__setattr__(self, "upper_closed", False)

    @property
    def is_compact(self):
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        above = x >= self.lower if self.lower_closed else x > self.lower
        below = x <= self.upper if self.upper_closed else x < self.upper
        return above & below

    # Monotone bijection (0, 1) -> interior of the interval.
    def from_unit(self, u):
        u = np.asarray(u, dtype=float)
        a, b = self.lower, self.upper
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.is_compact:
                return a + (b - a) * u
            if math.isfinite(a):
                return a + u / (1.0 - u)
            if math.isfinite(b):
                return b - (1.0 - u) / u
            return (u - 0.5) / (u * (1.0 - u))

    def from_unit_deriv(self, u):
        u = np.asarray(u, dtype=float)
        a, b = self.lower, self.upper
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.is_compact:
                return np.full_like(u, b - a)
            if math.isfinite(a):
                return 1.0 / (1.0 - u) ** 2
            if math.isfinite(b):
                return 1.0 / u ** 2
            return (u * u - u + 0.5) / (u * (1.0 - u)) ** 2

    def to_unit(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.lower, self.upper
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.is_compact:
                u = (x - a) / (b - a)
            elif math.isfinite(a):
                d = x - a
                u = d / (1.0 + d)
            elif math.isfinite(b):
                d = b - x
                u = 1.0 / (1.0 + d)
            else:
                # root of u^2 x + u (1 - x) - 1/2 = 0 lying in (0, 1)
                safe = np.where(x == 0, 1.0, x)
                u = np.where(x == 0, 0.5,
                             ((x - 1.0) + np.sqrt(1.0 + x * x)) / (2.0 * safe))
        u = np.where(np.isposinf(x), 1.0, u)
        u = np.where(np.isneginf(x), 0.0, u)
        return np.clip(u, 0.0, 1.0)


@dataclass(frozen=True)
class _CdfTable:
    u: np.ndarray          # TABLE_SIZE + 1 nodes in the unit coordinate
    x: np.ndarray
    cum: np.ndarray        # measure of (inf I, x_k]
    smooth: np.ndarray     # segment passes the fixed-rule check


class BaseMeasure:
    """A finite measure on an interval with Lebesgue density ``g``.

    ``g`` must accept and return numpy arrays.  The total mass is obtained by
    quadrature; ``name`` is a free-form label used in reports.
    """

    def __init__(self, interval, g, quad=DEFAULT_QUAD, name="custom"):
        self.interval = interval
        self.g = g
        self.quad = quad
        self.name = name
        tm = self.total_mass
        if not (np.isfinite(tm) and tm > 0):
            raise ValueError(f"total mass must be positive and finite, got {tm}")

    def __repr__(self):
        iv = self.interval
        return f"BaseMeasure({self.name!r}, [{iv.lower}, {iv.upper}], mass={self.total_mass:.6g})"

    def density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(self.g(x), dtype=float) * np.ones_like(x)
        return np.where(self.interval.contains(x), out, 0.0)

    def _unit_integrand(self, u):
        x = self.interval.from_unit(u)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = np.asarray(self.g(x), dtype=float) * self.interval.from_unit_deriv(u)
        return np.where(np.isfinite(v), v, 0.0)

    @cached_property
    def _table(self):
        u = np.linspace(0.0, 1.0, TABLE_SIZE + 1)
        seg = integrate_pieces(self._unit_integrand, u[:-1], u[1:], self.quad)
        if np.any(seg < 0):
            raise ValueError("density g takes negative values on the interval")
        h = 0.5 * (u[1] - u[0])
        nodes = (u[:-1, None] + h) + h * _GL_NODES[None, :]
        fixed = h * (self._unit_integrand(nodes.ravel()).reshape(nodes.shape) @ _GL_WEIGHTS)
        smooth = np.abs(fixed - seg) <= 1e-14 * max(seg.sum(), 1e-300) + 1e-15 * seg
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        x = self.interval.from_unit(u)
        x[0], x[-1] = self.interval.lower, self.interval.upper
        return _CdfTable(u=u, x=x, cum=cum, smooth=smooth)

    @property
    def total_mass(self):
        return float(self._table.cum[-1])

    def _partial_unit(self, k, u0, u1):
        """Integral of the unit-coordinate integrand from u0 to u1 inside segment k."""
        out = np.zeros_like(u0)
        if u0.size == 0:
            return out
        sm = self._table.smooth[k]
        if sm.any():
            a, b = u0[sm], u1[sm]
            h = 0.5 * (b - a)
            nodes = (a + h)[:, None] + h[:, None] * _GL_NODES[None, :]
            vals = self._unit_integrand(nodes.ravel()).reshape(nodes.shape)
            out[sm] = h * (vals @ _GL_WEIGHTS)
        if (~sm).any():
            out[~sm] = integrate_pieces(self._unit_integrand, u0[~sm], u1[~sm], self.quad)
        return out

    def _cdf_unit(self, u):
        tab = self._table
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        k = np.clip(np.searchsorted(tab.u, u, side="right") - 1, 0, TABLE_SIZE - 1)
        return tab.cum[k] + self._partial_unit(k, tab.u[k], u)

    def cdf(self, t):
        """Measure of ``I`` intersected with ``(-inf, t]``; ``t`` is clamped to ``I``."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = self._cdf_unit(self.interval.to_unit(flat))
        out[flat >= self.interval.upper] = self.total_mass
        out[flat <= self.interval.lower] = 0.0
        return out.reshape(t.shape)

    def quantile(self, p):
        """Invert :meth:`cdf` at levels ``p * total_mass``.

        Safeguarded Newton iteration in the unit coordinate, bracketed by the
        cached table; bisection takes over whenever a Newton step leaves the
        bracket.  Stops once the bracket or the step is below ``ROOT_TOL`` in x.
        """
        p = np.asarray(p, dtype=float)
        if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
            raise ValueError("quantile level must lie in [0, 1]")
        flat = p.ravel()
        target = flat * self.total_mass
        tab = self._table
        k = np.clip(np.searchsorted(tab.cum, target, side="right") - 1, 0, TABLE_SIZE - 1)
        # levels landing on a zero-mass run must not step past it
        lo = tab.u[k].copy()
        hi = tab.u[k + 1].copy()
        base = tab.cum[k]
        segmass = tab.cum[k + 1] - base
        frac = np.where(segmass > 0, (target - base) / np.where(segmass > 0, segmass, 1), 0.5)
        u = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
        active = np.ones(flat.size, dtype=bool)
        iv = self.interval
        for _ in range(200):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            ui = u[idx]
            resid = base[idx] + self._partial_unit(k[idx], tab.u[k[idx]], ui) - target[idx]
            lo_i, hi_i = lo[idx], hi[idx]
            lo_i = np.where(resid < 0, ui, lo_i)
            hi_i = np.where(resid >= 0, ui, hi_i)
            slope = self._unit_integrand(ui)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = resid / slope
            newton = ui - step
            ok = np.isfinite(newton) & (newton > lo_i) & (newton < hi_i)
            new_u = np.where(ok, newton, 0.5 * (lo_i + hi_i))
            x_new, x_old = iv.from_unit(new_u), iv.from_unit(ui)
            x_lo, x_hi = iv.from_unit(lo_i), iv.from_unit(hi_i)
            scale = np.maximum(1.0, np.abs(x_new))
            done = (np.abs(x_hi - x_lo) <= ROOT_TOL) | (ok & (np.abs(x_new - x_old) <= 1e-3 * ROOT_TOL * scale)) \
                | (new_u == ui) | (resid == 0)
            lo[idx], hi[idx], u[idx] = lo_i, hi_i, np.where(resid == 0, ui, new_u)
            active[idx[done]] = False
        x = iv.from_unit(u)
        x = np.where(flat <= 0, iv.lower, x)
        x = np.where(flat >= 1, iv.upper, x)
        return x.reshape(p.shape)

    def moment_pieces(self, func, lo, hi, quad=None):
        """Integrate ``func(x) g(x) dx`` over each piece ``[lo_i, hi_i]``.

        ``func`` receives one abscissa per piece, in piece order, so it may
        close over per-piece arrays as long as no piece spans the whole line.
        """
        def integrand(x):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                v = np.asarray(func(x), dtype=float) * np.asarray(self.g(x), dtype=float)
            return np.where(np.isfinite(v), v, 0.0)

        return integrate_pieces(integrand, lo, hi, self.quad if quad is None else quad)

    def sample(self, rng, size, lo=None, hi=None):
        """Draw from the normalised restriction of this measure to ``[lo, hi]``."""
        c0 = 0.0 if lo is None else self.cdf(np.broadcast_to(lo, (size,)))
        c1 = self.total_mass if hi is None else self.cdf(np.broadcast_to(hi, (size,)))
        w = open_uniform(rng, size)
        levels = (c0 + w * (c1 - c0)) / self.total_mass
        return self.quantile(np.clip(levels, 0.0, 1.0))


def uniform(a=0.0, b=1.0, quad=DEFAULT_QUAD):
    """Lebesgue measure on ``[a, b]``."""
    return BaseMeasure(IntervalSpec(a, b), lambda x: np.ones_like(np.asarray(x, dtype=float)),
                       quad, name=f"uniform[{a:g},{b:g}]")


def power_law(a, L=1.0, quad=DEFAULT_QUAD):
    """``g(x) = x**(a - 1)`` on ``[0, L]``; total mass ``L**a / a``."""
    if a <= 0 or L <= 0:
        raise ValueError("power law needs a > 0 and L > 0")

    def g(x):
        with np.errstate(divide="ignore"):
            return np.asarray(x, dtype=float) ** (a - 1.0)

    return BaseMeasure(IntervalSpec(0.0, L, lower_closed=a >= 1), g, quad,
                       name=f"power_law(a={a:g},L={L:g})")


def exponential(rate=1.0, quad=DEFAULT_QUAD):
    """``g(x) = exp(-rate x)`` on ``[0, inf)``."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return BaseMeasure(IntervalSpec(0.0, math.inf), lambda x: np.exp(-rate * np.asarray(x, dtype=float)),
                       quad, name=f"exponential(rate={rate:g})")


def tabulated(xs, gs, quad=DEFAULT_QUAD):
    """Piecewise-linear ``g`` through the points ``(xs, gs)``."""
    xs = np.asarray(xs, dtype=float)
    gs = np.asarray(gs, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or xs.shape != gs.shape or np.any(np.diff(xs) <= 0):
        raise ValueError("tabulated g needs >= 2 strictly increasing abscissae")
    if np.any(gs < 0):
        raise ValueError("tabulated g must be nonnegative")
    return BaseMeasure(IntervalSpec(xs[0], xs[-1]), lambda x: np.interp(x, xs, gs), quad,
                       name="tabulated")


def measure_cdf(measure, t):
    return measure.cdf(t)


def measure_quantile(measure, p):
    return measure.quantile(p)


@dataclass(frozen=True)
class DensityParameter:
    """A density ``f`` with respect to the base measure, with its class constants.

    ``holder`` is ``(gamma, K)`` bounding the derivative's Holder modulus.
    """

    f: object
    kappa: float
    M: float
    holder: tuple | None = None
    name: str = "f"

    def __call__(self, x):
        return np.asarray(self.f(np.asarray(x, dtype=float)), dtype=float) * np.ones_like(np.asarray(x, dtype=float))

    def sqrt(self, x):
        return np.sqrt(self(x))


def sample_from_density(measure, f, count, seed, acceptance_floor=1e-3, rng=None):
    """Draw ``count`` i.i.d. points with Lebesgue density ``f * g``.

    Proposals come from the normalised base measure and are accepted with
    probability ``f(x) / M``, so the expected acceptance rate is
    ``1 / (M * total_mass)``.
    """
    count = int(count)
    accept = 1.0 / (f.M * measure.total_mass)
    if accept < acceptance_floor:
        raise SamplingError(
            f"acceptance rate {accept:.3g} below floor {acceptance_floor:g} "
            f"(M = {f.M:g}, total mass = {measure.total_mass:g}, M * mass = {f.M * measure.total_mass:g})")
    rng = stream(seed) if rng is None else rng
    out = np.empty(count)
    filled = 0
    chunk = 1 << 16
    while filled < count:
        need = count - filled
        size = min(chunk, int(need / accept * 1.05) + 16)
        x = measure.sample(rng, size)
        fx = f(x)
        if np.any(fx > f.M * (1 + 1e-9)):
            raise SamplingError(f"f exceeds its declared bound M={f.M:g} (max {fx.max():.6g})")
        keep = x[open_uniform(rng, size) * f.M < fx]
        take = min(keep.size, need)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


@dataclass(frozen=True)
class MembershipReport:
    f_min: float
    f_max: float
    normalization_defect: float
    holder_quotient: float | None
    h1_ok: bool
    normalized_ok: bool
    holder_ok: bool | None
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = self.h1_ok and self.normalized_ok and self.holder_ok is not False
        object.__setattr__(self, "passed", ok)


def check_class_membership(f, measure, grid_size=512, normalization_tol=1e-8, holder_rtol=1e-6):
    """Scan ``f`` on a grid of base-measure quantiles and report class membership.

    The Holder quotient uses central finite differences for ``f'`` and the
    maximum of ``|f'(x) - f'(y)| / |x - y|**gamma`` over all grid pairs.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    grid = measure.quantile((np.arange(grid_size) + 0.5) / grid_size)
    fx = f(grid)
    fmin, fmax = float(fx.min()), float(fx.max())
    iv = measure.interval
    total = float(measure.moment_pieces(f, [iv.lower], [iv.upper])[0])
    defect = abs(total - 1.0)
    quotient = None
    holder_ok = None
    if f.holder is not None:
        gamma, K = f.holder
        span = grid[-1] - grid[0]
        h = 1e-5 * max(span, 1e-8)
        xp = np.minimum(grid + h, np.nextafter(iv.upper, -np.inf))
        xm = np.maximum(grid - h, np.nextafter(iv.lower, np.inf))
        deriv = (f(xp) - f(xm)) / (xp - xm)
        dx = np.abs(grid[:, None] - grid[None, :])
        dd = np.abs(deriv[:, None] - deriv[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dx > 0, dd / dx ** gamma, 0.0)
        quotient = float(q.max())
        # rounding noise of the difference quotient, divided by the smallest spacing
        dmin = float(np.min(np.diff(grid))) if grid_size > 1 else 1.0
        noise = 8 * np.finfo(float).eps * max(abs(fmax), 1.0) / h / max(dmin, 1e-300) ** gamma
        holder_ok = bool(quotient <= K * (1 + holder_rtol) + max(noise, 1e-9))
    return MembershipReport(
        f_min=fmin, f_max=fmax, normalization_defect=defect, holder_quotient=quotient,
        h1_ok=bool(f.kappa <= fmin and fmax <= f.M),
        normalized_ok=bool(defect <= normalization_tol), holder_ok=holder_ok)
