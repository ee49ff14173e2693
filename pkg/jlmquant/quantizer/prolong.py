"""Jet space of psi(t, x) and prolongation of point symmetries."""

from __future__ import annotations

from math import comb
from typing import TYPE_CHECKING, Final

import sympy as sp

from ..symcore import PSI, T, X

if TYPE_CHECKING:
    from collections.abc import Mapping

JET_ORDER: Final = 3

LinearForm = dict[sp.Symbol, sp.Expr]


def jet_name(i: int, j: int) -> str:
    """Name of the derivative of psi taken i times in t and j times in x."""
    return PSI.name if i + j == 0 else f"{PSI.name}_{'t' * i}{'x' * j}"


JETS: Final[dict[tuple[int, int], sp.Symbol]] = {
    (i, order - i): PSI if order == 0 else sp.Symbol(jet_name(i, order - i))
    for order in range(JET_ORDER + 1)
    for i in range(order, -1, -1)
}
INDEX: Final[dict[sp.Symbol, tuple[int, int]]] = {s: k for k, s in JETS.items()}


def jet(i: int, j: int) -> sp.Symbol:
    """Jet coordinate psi with i t-derivatives and j x-derivatives."""
    return JETS[i, j]


def order(symbol: sp.Symbol) -> int:
    """Differential order of a jet coordinate."""
    i, j = INDEX[symbol]
    return i + j


def _step(index: tuple[int, int], direction: int) -> tuple[int, int]:
    i, j = index
    return (i + 1, j) if direction == 0 else (i, j + 1)


def jet_total_derivative(e: sp.Expr, direction: int) -> sp.Expr:
    """D_t (direction 0) or D_x (direction 1) of an expression on the jet."""
    base = T if direction == 0 else X
    result = sp.diff(e, base)
    for index, symbol in JETS.items():
        if sum(index) < JET_ORDER and e.has(symbol):
            result += JETS[_step(index, direction)] * sp.diff(e, symbol)
    return result


def as_form(e: sp.Expr) -> LinearForm:
    """Split an expanded expression linear in the jets into a jet map."""
    form: dict[sp.Symbol, list[sp.Expr]] = {}
    symbols = list(JETS.values())
    for term in sp.Add.make_args(sp.expand(e)):
        if term == 0:
            continue
        coeff, symbol = term.as_independent(*symbols, as_Add=False)
        if symbol not in INDEX:
            msg = f"{term} is not linear in the jet coordinates"
            raise ValueError(msg)
        form.setdefault(symbol, []).append(coeff)
    return {s: sp.Add(*cs) for s, cs in form.items()}


def add_forms(*forms: Mapping[sp.Symbol, sp.Expr]) -> LinearForm:
    """Sum of linear forms."""
    total: LinearForm = {}
    for form in forms:
        for symbol, coeff in form.items():
            total[symbol] = total.get(symbol, sp.S.Zero) + coeff
    return total


def scale_form(form: Mapping[sp.Symbol, sp.Expr], factor: sp.Expr) -> LinearForm:
    """Linear form times a function of (t, x)."""
    return {s: factor * c for s, c in form.items()}


def form_total_derivative(
    form: Mapping[sp.Symbol, sp.Expr], direction: int
) -> LinearForm:
    """Total derivative of a linear form, again a linear form."""
    base = T if direction == 0 else X
    result: LinearForm = {}
    for symbol, coeff in form.items():
        raised = JETS[_step(INDEX[symbol], direction)]
        result = add_forms(result, {symbol: sp.diff(coeff, base), raised: coeff})
    return result


def geometric_eta(tau: sp.Expr, xi: sp.Expr, index: tuple[int, int]) -> LinearForm:
    """
    Prolongation coefficient of tau d/dt + xi d/dx at the jet index.

    Third-order terms cancel in the expansion.
    """
    i, j = index
    characteristic = -tau * jet(1, 0) - xi * jet(0, 1)
    for _ in range(i):
        characteristic = jet_total_derivative(characteristic, 0)
    for _ in range(j):
        characteristic = jet_total_derivative(characteristic, 1)
    eta = characteristic + tau * jet(i + 1, j) + xi * jet(i, j + 1)
    return {s: c for s, c in as_form(eta).items() if c != 0}


def multiplier_eta(lam: sp.Expr, index: tuple[int, int]) -> LinearForm:
    """
    Lower-order part of D_J(lam*psi).

    The omitted lam*psi_J terms add up to lam times the equation.
    """
    i, j = index
    form: LinearForm = {}
    for a in range(i + 1):
        for b in range(j + 1):
            if a == 0 and b == 0:
                continue
            weight = comb(i, a) * comb(j, b)
            derivative = sp.diff(lam, *([T] * a + [X] * b))
            if derivative != 0:
                form[jet(i - a, j - b)] = weight * derivative
    return form
