"""Nonlinear-interference statistics of fiber spans under joint PMD and Kerr effects."""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: F401
