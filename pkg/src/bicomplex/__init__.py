"""Exact-arithmetic engine for bounded double complexes over Q(i)."""

from .scalars import Scalar, ZERO, ONE, I, sc
from .linalg import Matrix, Subspace, rref, kernel, image, least_norm_solve

__version__ = "0.1.0"
