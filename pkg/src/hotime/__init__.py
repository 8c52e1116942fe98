"""Exact and high-precision tools for time operators of the harmonic oscillator.

Modules: ``scalar`` (exact complex rationals, rational functions, the log
ring), ``gauss`` (Gaussian-polynomial vectors and operators), ``symrep``
(closed forms of the angle operator), ``forms`` (sesquilinear forms and CCR
checks), ``hermite`` and ``povm`` (eigenbasis and the POVM time operator),
``acceptance`` and ``cli``.
"""
from .errors import (BranchCutError, DomainError, EngineMismatchError, HotimeError, PoleError,
                     SingularPointError)

__version__ = "0.1.0"

__all__ = ["HotimeError", "DomainError", "PoleError", "SingularPointError", "BranchCutError",
           "EngineMismatchError", "__version__"]
