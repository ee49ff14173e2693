"""Exact affine solver over the coefficient field."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import sympy as sp
from sympy.polys.constructor import construct_domain
from sympy.polys.matrices import DomainMatrix

from ..exceptions import ConsistencyError, NonlinearSystemError
from ..models import LinSolveResult, SolveStatus
from .expr import as_symbol, normalize

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

LOGGER = logging.getLogger(__name__)


def _split(term: sp.Expr, unknowns: set[sp.Symbol]) -> tuple[sp.Expr, sp.Expr]:
    """Split a product into (coefficient, unknown or 1)."""
    if term in unknowns:
        return sp.S.One, term
    if not term.free_symbols & unknowns:
        return term, sp.S.One
    if term.is_Mul:
        dependent = [f for f in term.args if f.free_symbols & unknowns]
        if len(dependent) == 1 and dependent[0] in unknowns:
            rest = [f for f in term.args if f is not dependent[0]]
            return sp.Mul(*rest), dependent[0]
    msg = f"term {term} is not affine in the unknowns"
    raise NonlinearSystemError(msg)


def affine_row(
    eq: sp.Expr, unknowns: set[sp.Symbol]
) -> tuple[dict[sp.Symbol, sp.Expr], sp.Expr]:
    """Coefficients and constant of an affine expression."""
    row: dict[sp.Symbol, list[sp.Expr]] = {}
    constant: list[sp.Expr] = []
    for term in sp.Add.make_args(sp.expand(eq)):
        coeff, unknown = _split(term, unknowns)
        if unknown == 1:
            constant.append(coeff)
        else:
            row.setdefault(unknown, []).append(coeff)
    collected = {u: sp.Add(*cs) for u, cs in row.items()}
    return {u: c for u, c in collected.items() if c != 0}, sp.Add(*constant)


def is_affine(eq: sp.Expr, unknowns: set[sp.Symbol]) -> bool:
    """True when eq is affine in the unknowns."""
    try:
        affine_row(eq, unknowns)
    except NonlinearSystemError:
        return False
    return True


def _back_substitute(
    eqs: Sequence[sp.Expr], assignments: dict[sp.Symbol, sp.Expr]
) -> None:
    for eq in eqs:
        residual = sp.expand(eq.xreplace(assignments))
        if residual != 0 and normalize(residual) != 0:
            msg = f"assignment does not satisfy {eq}"
            raise ConsistencyError(msg)


def solve_linear(
    eqs: Iterable[sp.Expr],
    unknowns: Iterable[str | sp.Symbol],
    *,
    check: bool = True,
) -> LinSolveResult:
    """
    Solve an affine system by fraction-free reduced row echelon form.

    Free parameters stand for themselves in the returned assignments; every
    assignment is back-substituted into every equation when check is set.
    """
    symbols = list(dict.fromkeys(as_symbol(u) for u in unknowns))
    index = {u: i for i, u in enumerate(symbols)}
    unknown_set = set(symbols)
    equations: list[sp.Expr] = []
    rows: list[tuple[dict[sp.Symbol, sp.Expr], sp.Expr]] = []
    for eq in eqs:
        eq = sp.sympify(eq)
        coefficients, constant = affine_row(eq, unknown_set)
        if not coefficients and constant == 0:
            continue
        equations.append(eq)
        rows.append((coefficients, constant))
    width = len(symbols)
    if not rows:
        status = SolveStatus.PARAMETRIZED if symbols else SolveStatus.UNIQUE
        return LinSolveResult(status, {}, tuple(symbols))

    elements = [c for coefficients, _ in rows for c in coefficients.values()]
    elements += [-constant for _, constant in rows]
    domain, converted = construct_domain(elements, field=True, extension=True)
    lookup = iter(converted)
    matrix: dict[int, dict[int, object]] = {}
    for i, (coefficients, _) in enumerate(rows):
        matrix[i] = {index[u]: next(lookup) for u in coefficients}
    for i in range(len(rows)):
        value = next(lookup)
        if value:
            matrix[i][width] = value
    matrix = {i: {j: v for j, v in row.items() if v} for i, row in matrix.items()}
    augmented = DomainMatrix(
        {i: row for i, row in matrix.items() if row}, (len(rows), width + 1), domain
    )
    LOGGER.debug(
        "Solving %s equations in %s unknowns over %s", len(rows), width, domain
    )
    reduced, denominator, pivots = augmented.rref_den()
    reduced_rows = reduced.to_sdm()

    if pivots and pivots[-1] == width:
        row = reduced_rows[len(pivots) - 1]
        witness = domain.to_sympy(domain.quo(row[width], denominator))
        LOGGER.debug("Inconsistent system, witness 0 = %s", witness)
        return LinSolveResult(SolveStatus.INCONSISTENT, {}, (), witness)

    pivot_set = set(pivots)
    free = tuple(u for u in symbols if index[u] not in pivot_set)
    den = domain.to_sympy(denominator)
    assignments: dict[sp.Symbol, sp.Expr] = {}
    for r, column in enumerate(pivots):
        row = reduced_rows.get(r, {})
        value = domain.to_sympy(row.get(width, domain.zero))
        for j, entry in row.items():
            if j not in (column, width):
                value -= domain.to_sympy(entry) * symbols[j]
        assignments[symbols[column]] = sp.expand(value / den)
    if check:
        _back_substitute(equations, assignments)
    status = SolveStatus.PARAMETRIZED if free else SolveStatus.UNIQUE
    return LinSolveResult(status, assignments, free)


def particular(
    result: LinSolveResult, free_value: sp.Expr = sp.S.Zero
) -> dict[sp.Symbol, sp.Expr]:
    """Assignments with every free parameter set to free_value."""
    fill = {p: free_value for p in result.free}
    values = {u: sp.expand(v.xreplace(fill)) for u, v in result.assignments.items()}
    values.update(fill)
    return values
