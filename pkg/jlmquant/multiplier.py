"""Jacobi last multipliers from pairs of point symmetries."""

from __future__ import annotations

import logging
from itertools import combinations
from typing import TYPE_CHECKING

import sympy as sp

from .exceptions import MultiplierError, SymmetryVerificationError
from .models import (
    DegeneratePair,
    Multiplier,
    MultiplierRatio,
    PairEntry,
    PairStatus,
    Verification,
)
from .odesym import prolong, total_derivative, verify_point_symmetry
from .symcore import QD, normalize, proportional

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .models import Ode2, PointSymmetry

LOGGER = logging.getLogger(__name__)


def pair_determinant(ode: Ode2, s1: PointSymmetry, s2: PointSymmetry) -> sp.Expr:
    """Determinant of the rows (1, qd, F), (V1, G1, eta1_1), (V2, G2, eta1_2)."""
    eta_1 = prolong(s1, ode).eta1
    eta_2 = prolong(s2, ode).eta1
    matrix = sp.Matrix(
        [
            [sp.S.One, QD, ode.rhs],
            [s1.v, s1.g, eta_1],
            [s2.v, s2.g, eta_2],
        ]
    )
    return normalize(matrix.det(method="berkowitz"))


def jlm_from_pair(
    ode: Ode2, s1: PointSymmetry, s2: PointSymmetry, *, verify: bool = True
) -> Multiplier | DegeneratePair:
    """Multiplier 1/det for the pair (s1, s2), or the degenerate outcome."""
    if verify:
        for sym in (s1, s2):
            check = verify_point_symmetry(sym, ode)
            if not check:
                raise SymmetryVerificationError(sym.label, check.residual)
    determinant = pair_determinant(ode, s1, s2)
    labels = (s1.label, s2.label)
    if determinant == 0:
        LOGGER.debug("Pair %s-%s is degenerate", *labels)
        return DegeneratePair(labels)
    return Multiplier(normalize(1 / determinant), labels)


def verify_multiplier(ode: Ode2, m: sp.Expr | Multiplier) -> Verification:
    """Residual Dt(M) + M*dF/dqd of the multiplier equation."""
    value = m.m if isinstance(m, Multiplier) else normalize(m)
    if value == 0:
        msg = "multiplier must be nonzero"
        raise MultiplierError(msg)
    residual = normalize(
        total_derivative(value, ode) + value * sp.diff(ode.rhs, QD)
    )
    return Verification(residual == 0, residual)


def multiplier_ratio(m1: Multiplier, m2: Multiplier, ode: Ode2) -> MultiplierRatio:
    """Ratio of two multipliers; it is conserved along solutions."""
    ratio = normalize(m1.m / m2.m)
    drift = total_derivative(ratio, ode)
    if drift != 0:
        msg = f"ratio {ratio} of {m1.label} and {m2.label} is not conserved"
        raise MultiplierError(msg)
    return MultiplierRatio(ratio, trivial=not ratio.free_symbols)


def multiplier_from_integral(m: Multiplier, integral: sp.Expr, ode: Ode2) -> Multiplier:
    """Product of a multiplier and a first integral."""
    integral = normalize(integral)
    if integral == 0:
        msg = "first integral must be nonzero"
        raise MultiplierError(msg)
    if total_derivative(integral, ode) != 0:
        msg = f"{integral} is not a first integral"
        raise MultiplierError(msg)
    product = Multiplier(normalize(m.m * integral), (*m.provenance, "I"))
    check = verify_multiplier(ode, product)
    if not check:
        msg = f"product multiplier fails with residual {check.residual}"
        raise MultiplierError(msg)
    return product


def multiplier_sweep(ode: Ode2, symmetries: Sequence[PointSymmetry]) -> list[PairEntry]:
    """
    Multipliers for every unordered pair of generators.

    A regular entry records the earlier entry whose multiplier it reproduces
    up to a constant factor, together with that factor.
    """
    for sym in symmetries:
        check = verify_point_symmetry(sym, ode)
        if not check:
            raise SymmetryVerificationError(sym.label, check.residual)
    entries: list[PairEntry] = []
    distinct: list[PairEntry] = []
    for s1, s2 in combinations(symmetries, 2):
        outcome = jlm_from_pair(ode, s1, s2, verify=False)
        labels = (s1.label, s2.label)
        if isinstance(outcome, DegeneratePair):
            entries.append(PairEntry(labels, PairStatus.DEGENERATE, sp.S.Zero))
            continue
        determinant = normalize(1 / outcome.m)
        duplicate = None
        factor = None
        for earlier in distinct:
            factor = proportional(outcome.m, earlier.multiplier.m)
            if factor is not None:
                duplicate = earlier.labels
                break
        entry = PairEntry(
            labels,
            PairStatus.REGULAR,
            determinant,
            outcome,
            duplicate_of=duplicate,
            factor=factor,
        )
        if duplicate is None:
            distinct.append(entry)
        entries.append(entry)
    LOGGER.info(
        "Pair sweep: %s pairs, %s degenerate, %s distinct multipliers",
        len(entries),
        sum(e.status == PairStatus.DEGENERATE for e in entries),
        len(distinct),
    )
    return entries


def distinct_multipliers(entries: Sequence[PairEntry]) -> list[Multiplier]:
    """Multipliers of the regular entries that duplicate no earlier one."""
    return [
        e.multiplier
        for e in entries
        if e.status == PairStatus.REGULAR and e.duplicate_of is None
    ]
