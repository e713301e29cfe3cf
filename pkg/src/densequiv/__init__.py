"""Explicit constructions linking density estimation to a Gaussian white noise model.

Quantile partitions of a base measure, piecewise-linear approximants, the
randomisation kernels that map one experiment to another, and the distance
bounds that control each step.
"""
from . import families
from .approximation import *  # noqa: F401,F403
from .bounds import *  # noqa: F401,F403
from .divergences import *  # noqa: F401,F403
from .experiments import *  # noqa: F401,F403
from .kernels import *  # noqa: F401,F403
from .measure import *  # noqa: F401,F403
from .partition import *  # noqa: F401,F403
from . import approximation, bounds, divergences, experiments, kernels, measure, partition

__version__ = "0.1.0"

__all__ = (["families", "__version__"] + measure.__all__ + partition.__all__ + approximation.__all__
           + experiments.__all__ + kernels.__all__ + divergences.__all__ + bounds.__all__)
