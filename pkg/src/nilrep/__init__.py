"""Exact construction and certification of small faithful representations
of free nilpotent Lie algebras."""

__version__ = "0.1.0"

from .exactq import RatMatrix, is_independent, rank
from .freenil import FreeNilAlgebra, build_algebra, graded_dims
from .rep import BlockProfile, GradedRep, build_pi0, build_pi1, certify, mu_formula
from .minconstruct import construct, random_sab, recursive_sab
from .searchk import SearchConfig, search_min_dim

__all__ = [
    "RatMatrix", "is_independent", "rank",
    "FreeNilAlgebra", "build_algebra", "graded_dims",
    "BlockProfile", "GradedRep", "build_pi0", "build_pi1", "certify", "mu_formula",
    "construct", "random_sab", "recursive_sab",
    "SearchConfig", "search_min_dim",
    "__version__",
]
