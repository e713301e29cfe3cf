"""Built-in density parameters and test batteries."""
from __future__ import annotations

import math

import numpy as np

from .measure import DensityParameter

__all__ = ["constant", "sinusoidal", "exp_tilt", "truncated_gamma", "quadratic",
           "sinusoidal_battery", "holder_battery", "build_member", "MEMBER_FAMILIES"]


def _normaliser(measure, h):
    iv = measure.interval
    return float(measure.moment_pieces(h, [iv.lower], [iv.upper])[0])


def constant(measure, name="constant"):
    c = 1.0 / measure.total_mass
    return DensityParameter(lambda x: np.full_like(np.asarray(x, dtype=float), c), c, c, (1.0, 0.0), name)


def sinusoidal(measure, amplitude=0.3, frequency=1.0, phase=0.0, name=None):
    """``1 + a sin(2 pi k s + phase)`` in the rescaled coordinate ``s in [0, 1]``, normalised."""
    iv = measure.interval
    if not iv.is_compact:
        raise ValueError("sinusoidal members need a compact interval")
    if not 0 <= amplitude < 1:
        raise ValueError("amplitude must lie in [0, 1)")
    lo, L = iv.lower, iv.upper - iv.lower
    w = 2 * math.pi * frequency / L

    def h(x):
        return 1.0 + amplitude * np.sin(w * (np.asarray(x, dtype=float) - lo) + phase)

    Z = _normaliser(measure, h)
    name = name or f"sin(a={amplitude:g},k={frequency:g},phi={phase:g})"
    return DensityParameter(lambda x: h(x) / Z, (1 - amplitude) / Z, (1 + amplitude) / Z,
                            (1.0, amplitude * w * w / Z), name)


def exp_tilt(measure, theta=1.0, name=None):
    """``f proportional to exp(-theta x)``; needs a compact interval for (H1)."""
    iv = measure.interval
    if not iv.is_compact:
        raise ValueError("exponential tilt is unbounded below on an infinite interval")
    # shift the exponent so the normaliser stays O(1)
    ref = iv.lower if theta >= 0 else iv.upper

    def h(x):
        return np.exp(-theta * (np.asarray(x, dtype=float) - ref))

    Z = _normaliser(measure, h)
    ends = np.exp(-theta * (np.array([iv.lower, iv.upper]) - ref)) / Z
    M = float(ends.max())
    name = name or f"exp_tilt(theta={theta:g})"
    return DensityParameter(lambda x: h(x) / Z, float(ends.min()), M, (1.0, theta * theta * M), name)


def truncated_gamma(measure, theta=1.0, name=None):
    """``f_theta`` of the truncated-Gamma family; pair with :func:`~densequiv.measure.power_law`.

    The factor ``theta**a`` cancels in the normalisation, leaving an
    exponential tilt of the power-law base measure.
    """
    return exp_tilt(measure, theta, name or f"truncated_gamma(theta={theta:g})")


def quadratic(measure, curvature=0.5, name=None):
    """``1 + c (s - 1/2)**2`` in the rescaled coordinate, normalised."""
    iv = measure.interval
    if not iv.is_compact:
        raise ValueError("quadratic members need a compact interval")
    lo, L = iv.lower, iv.upper - iv.lower
    c = float(curvature)
    if c <= -4:
        raise ValueError("curvature must exceed -4 to stay positive")

    def h(x):
        s = (np.asarray(x, dtype=float) - lo) / L
        return 1.0 + c * (s - 0.5) ** 2

    Z = _normaliser(measure, h)
    vals = np.array([1.0, 1.0 + c / 4])
    name = name or f"quadratic(c={c:g})"
    return DensityParameter(lambda x: h(x) / Z, float(vals.min() / Z), float(vals.max() / Z),
                            (1.0, 2 * abs(c) / (L * L * Z)), name)


MEMBER_FAMILIES = {
    "constant": constant,
    "sinusoidal": sinusoidal,
    "exp_tilt": exp_tilt,
    "truncated_gamma": truncated_gamma,
    "quadratic": quadratic,
}


def build_member(measure, family, **params):
    try:
        ctor = MEMBER_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown member family {family!r}; choose from {sorted(MEMBER_FAMILIES)}") from None
    return ctor(measure, **params)


def sinusoidal_battery(measure):
    """Amplitudes 0.1, 0.2, 0.3 at one and two periods over the interval."""
    return [sinusoidal(measure, a, k, name=f"sin_a{a:g}_k{k}")
            for a in (0.1, 0.2, 0.3) for k in (1, 2)]


def holder_battery(measure, size=20, seed=7, K_max=2.0):
    """Smooth members with derivative Lipschitz constant at most ``K_max``.

    Even slots are sinusoids of random frequency and phase, odd slots are
    quadratics; all stay within [0.5, 2] after normalisation.
    """
    rng = np.random.default_rng(seed)
    L = measure.interval.upper - measure.interval.lower
    out = []
    for i in range(size):
        if i % 2 == 0:
            k = rng.uniform(0.1, 0.35)
            w = 2 * math.pi * k / L
            a = min(0.3, rng.uniform(0.2, 1.0) * 0.7 * K_max / (w * w))
            out.append(sinusoidal(measure, a, k, rng.uniform(0, 2 * math.pi), name=f"holder{i:02d}_sin"))
        else:
            c = rng.uniform(-0.9, 0.9) * min(1.0, K_max * L * L * 0.7 / 2)
            out.append(quadratic(measure, c, name=f"holder{i:02d}_quad"))
    return out
