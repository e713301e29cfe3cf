"""Counter-based random streams keyed by ``(seed, *labels)``.

A stream depends only on its key, never on which worker or in which order it
is consumed, so replicated work is schedule independent.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1


def stream(seed, *key):
    """Return a Philox generator for ``seed`` and integer labels ``key``."""
    ss = np.random.SeedSequence(int(seed) & _MASK64,
                                spawn_key=tuple(int(k) & _MASK64 for k in key))
    return np.random.Generator(np.random.Philox(ss))


def open_uniform(rng, size):
    """Uniforms strictly inside (0, 1) on the 2**-53 lattice."""
    return (rng.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) * 2.0 ** -53


def std_normal(rng, size):
    """Standard normals by inverting the normal CDF."""
    return ndtri(open_uniform(rng, size))
