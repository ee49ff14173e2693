"""Symmetry-preserving quantization through Jacobi last multipliers."""

from .const import DOMAIN, NAME

__all__ = ["DOMAIN", "NAME"]
