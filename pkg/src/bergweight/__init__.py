"""Numerical laboratory for weight operators of submultiplicative
filtrations, Bergman kernels and Toeplitz operators on the section ring
of (P^1, O(d))."""

__version__ = "0.1.0"

from . import bergman, errors, filtrations, hermitian, sections  # noqa: F401
from .experiments import list_experiments, run_experiment  # noqa: F401
