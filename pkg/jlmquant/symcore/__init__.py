"""Symbolic core for jlmquant."""

from .expr import (
    FULL_CTX,
    ODE_CTX,
    PDE_CTX,
    PSI,
    QD,
    QDD,
    XI,
    Q,
    T,
    X,
    collect_coefficients,
    diff,
    fraction,
    integrate_power,
    is_zero,
    linear_conditions,
    normalize,
    proportional,
    substitute,
)
from .linsolve import solve_linear
from .parser import parse, to_text

__all__ = [
    "FULL_CTX",
    "ODE_CTX",
    "PDE_CTX",
    "PSI",
    "QD",
    "QDD",
    "XI",
    "Q",
    "T",
    "X",
    "collect_coefficients",
    "diff",
    "fraction",
    "integrate_power",
    "is_zero",
    "linear_conditions",
    "normalize",
    "parse",
    "proportional",
    "solve_linear",
    "substitute",
    "to_text",
]
