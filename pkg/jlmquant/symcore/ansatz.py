"""Undetermined-coefficient ansatz builders."""

from __future__ import annotations

import itertools
from typing import TYPE_CHECKING

import sympy as sp
from sympy.polys.monomials import itermonomials
from sympy.polys.orderings import monomial_key

if TYPE_CHECKING:
    from collections.abc import Sequence


def polynomial_monomials(variables: Sequence[sp.Symbol], degree: int) -> list[sp.Expr]:
    """Monomials of total degree <= degree in graded order."""
    return sorted(
        itermonomials(list(variables), degree),
        key=monomial_key("grlex", list(reversed(variables))),
    )


def laurent_monomials(variables: Sequence[sp.Symbol], bound: int) -> list[sp.Expr]:
    """Monomials with every exponent in [-bound, bound]."""
    exponents = range(-bound, bound + 1)
    return [
        sp.Mul(*(v**k for v, k in zip(variables, powers, strict=True)))
        for powers in itertools.product(exponents, repeat=len(variables))
    ]


def log_extended(
    monomials: Sequence[sp.Expr], variables: Sequence[sp.Symbol]
) -> list[sp.Expr]:
    """Monomials followed by their products with log of each variable."""
    logs = [sp.log(v) for v in variables]
    return list(monomials) + [m * atom for atom in logs for m in monomials]


def build(
    prefix: str, basis: Sequence[sp.Expr]
) -> tuple[sp.Expr, tuple[sp.Symbol, ...]]:
    """Linear combination of basis with fresh coefficient symbols."""
    unknowns = tuple(sp.Symbol(f"{prefix}_{index}") for index in range(len(basis)))
    return sp.Add(*(c * m for c, m in zip(unknowns, basis, strict=True))), unknowns
