"""Transient-stability simulation and individual/equivalent machine transformations."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
