"""Finite-model laboratory for Gibbs measures on sofic groups.

Builds finite almost-actions of Z^d and free groups, derived configuration
spaces for nearest-neighbor constraint structures, and the estimators that
tie them together: partition functions (exact, transfer-matrix, MCMC),
Shannon entropies, strong-spatial-mixing profiles, and random-past
information-function formulas for pressure and entropy.
"""

from .version import __version__

__all__ = ["__version__"]
