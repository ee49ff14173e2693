"""Noether symmetries, gauges and first integrals."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import sympy as sp

from .const import DEFAULT_GAUGE_BOUND, MAX_NOETHER_SYMMETRIES
from .exceptions import (
    AnsatzInsufficientError,
    ConsistencyError,
    UnsupportedIntegrandError,
)
from .lagrange import gauge_ansatz
from .models import NoetherCertificate, NoetherEntry, NoetherRejection
from .odesym import combination_label, combine, prolong, total_derivative
from .symcore import QD, Q, T, integrate_power, linear_conditions, normalize
from .symcore.linsolve import particular, solve_linear

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .models import Lagrangian, Ode2, PointSymmetry

LOGGER = logging.getLogger(__name__)


def noether_expression(
    l: Lagrangian,  # noqa: E741
    sym: PointSymmetry,
    ode: Ode2,
) -> sp.Expr:
    """X^(1)(L) + L*Dt(V), which must equal Dt(gauge)."""
    eta1 = prolong(sym, ode).eta1
    dv = sp.diff(sym.v, T) + QD * sp.diff(sym.v, Q)
    return normalize(
        sym.v * sp.diff(l.l, T)
        + sym.g * sp.diff(l.l, Q)
        + eta1 * sp.diff(l.l, QD)
        + l.l * dv
    )


def _split_gauge_equation(expression: sp.Expr) -> tuple[sp.Expr, sp.Expr, sp.Expr]:
    """Return (K_qdqd, A, B) with K = A + qd*B when K_qdqd vanishes."""
    curvature = normalize(sp.diff(expression, QD, 2))
    slope = normalize(sp.diff(expression, QD))
    offset = normalize(expression - QD * slope)
    return curvature, offset, slope


def _gauge_by_ansatz(
    offset: sp.Expr, slope: sp.Expr, bound: int, *, allow_log: bool
) -> sp.Expr:
    gauge, unknowns = gauge_ansatz("g", bound, allow_log=allow_log)
    conditions = linear_conditions(sp.diff(gauge, Q) - slope, [T, Q])
    conditions += linear_conditions(sp.diff(gauge, T) - offset, [T, Q])
    result = solve_linear(conditions, unknowns)
    if not result.consistent:
        msg = f"no gauge within bound {bound} has gradient ({offset}, {slope})"
        raise AnsatzInsufficientError(msg, [offset, slope])
    return normalize(gauge.xreplace(particular(result)))


def solve_gauge(
    offset: sp.Expr,
    slope: sp.Expr,
    *,
    bound: int = DEFAULT_GAUGE_BOUND,
    allow_log: bool = True,
) -> sp.Expr:
    """Function g(t, q) with g_t = offset and g_q = slope, constant dropped."""
    try:
        partial = integrate_power(slope, Q)
        rest = normalize(offset - sp.diff(partial, T))
        return normalize(partial + integrate_power(rest, T))
    except UnsupportedIntegrandError:
        LOGGER.debug("Falling back to the gauge ansatz for (%s, %s)", offset, slope)
    return _gauge_by_ansatz(offset, slope, bound, allow_log=allow_log)


def _integral(lag: Lagrangian, sym: PointSymmetry, gauge: sp.Expr) -> sp.Expr:
    momentum = sp.diff(lag.l, QD)
    return normalize((QD * sym.v - sym.g) * momentum - sym.v * lag.l + gauge)


def first_integral(
    cert: NoetherCertificate,
    l: Lagrangian,  # noqa: E741
    ode: Ode2,
) -> sp.Expr:
    """(qd*V - G)*L_qd - V*L + gauge, checked to be conserved."""
    integral = _integral(l, cert.symmetry, cert.gauge)
    drift = total_derivative(integral, ode)
    if drift != 0:
        msg = f"integral of {cert.symmetry.label} drifts by {drift}"
        raise ConsistencyError(msg)
    return integral


def noether_test(
    l: Lagrangian,  # noqa: E741
    sym: PointSymmetry,
    ode: Ode2,
    *,
    bound: int = DEFAULT_GAUGE_BOUND,
    allow_log: bool = True,
) -> NoetherCertificate | NoetherRejection:
    """
    Certify sym as a Noether symmetry of l, or return the failed constraint.

    The Noether expression must be affine in qd with matching cross
    derivatives; the gauge is then its potential.
    """
    expression = noether_expression(l, sym, ode)
    curvature, offset, slope = _split_gauge_equation(expression)
    if curvature != 0:
        return NoetherRejection(sym, (curvature,))
    compatibility = normalize(sp.diff(offset, Q) - sp.diff(slope, T))
    if compatibility != 0:
        return NoetherRejection(sym, (compatibility,))
    gauge = solve_gauge(offset, slope, bound=bound, allow_log=allow_log)
    cert = NoetherCertificate(sym, gauge, sp.S.Zero)
    return NoetherCertificate(sym, gauge, first_integral(cert, l, ode))


def noether_subalgebra(
    l: Lagrangian,  # noqa: E741
    symmetries: Sequence[PointSymmetry],
    ode: Ode2,
) -> list[PointSymmetry]:
    """
    Basis of the constant combinations of symmetries that are Noether.

    The basis is in reduced row echelon form over the given generators.
    """
    coefficients = [sp.Symbol(f"k_{index}") for index in range(len(symmetries))]
    curvature_terms = []
    compatibility_terms = []
    for c, sym in zip(coefficients, symmetries, strict=True):
        expression = noether_expression(l, sym, ode)
        curvature, offset, slope = _split_gauge_equation(expression)
        compatibility = normalize(sp.diff(offset, Q) - sp.diff(slope, T))
        curvature_terms.append(c * curvature)
        compatibility_terms.append(c * compatibility)
    conditions = linear_conditions(sp.Add(*curvature_terms), [T, Q, QD])
    conditions += linear_conditions(sp.Add(*compatibility_terms), [T, Q, QD])
    result = solve_linear(conditions, coefficients)
    if not result.free:
        return []
    vectors = []
    for parameter in result.free:
        values = {p: sp.S.Zero for p in result.free}
        values[parameter] = sp.S.One
        vectors.append([result.value(c).xreplace(values) for c in coefficients])
    reduced, pivots = sp.Matrix(vectors).rref()
    basis = []
    for row in range(len(pivots)):
        terms = [
            (reduced[row, j], sym)
            for j, sym in enumerate(symmetries)
            if reduced[row, j] != 0
        ]
        label = combination_label([(c, s.label) for c, s in terms])
        basis.append(combine(terms, label=label))
    return basis


def noether_spectrum(
    lagrangians: Sequence[Lagrangian],
    symmetries: Sequence[PointSymmetry],
    ode: Ode2,
    *,
    bound: int = DEFAULT_GAUGE_BOUND,
    allow_log: bool = True,
) -> list[NoetherEntry]:
    """Noether subalgebra of each Lagrangian; the largest ones are flagged."""
    found: list[tuple[Lagrangian, tuple[NoetherCertificate, ...]]] = []
    for lagrangian in lagrangians:
        certificates = []
        for sym in noether_subalgebra(lagrangian, symmetries, ode):
            outcome = noether_test(
                lagrangian, sym, ode, bound=bound, allow_log=allow_log
            )
            if isinstance(outcome, NoetherRejection):
                msg = f"{sym.label} passed the span test but not the gauge test"
                raise ConsistencyError(msg)
            certificates.append(outcome)
        if len(certificates) > MAX_NOETHER_SYMMETRIES:
            LOGGER.warning(
                "%s has %s Noether symmetries", lagrangian.label, len(certificates)
            )
        LOGGER.debug(
            "%s: %s",
            lagrangian.label,
            ", ".join(c.symmetry.label for c in certificates),
        )
        found.append((lagrangian, tuple(certificates)))
    best = max((len(certs) for _, certs in found), default=0)
    entries = [
        NoetherEntry(lag, len(certs), certs, physical=best > 0 and len(certs) == best)
        for lag, certs in found
    ]
    LOGGER.info(
        "Noether spectrum: maximum %s, attained by %s",
        best,
        ", ".join(e.lagrangian.label for e in entries if e.physical),
    )
    return entries
