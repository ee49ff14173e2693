"""Second-order ODEs and their Lie point symmetries."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import sympy as sp

from .const import DEFAULT_SYMMETRY_DEGREE, MAX_SYMMETRY_DEGREE
from .exceptions import SymmetryVerificationError
from .models import Ode2, PointSymmetry, ProlongedSymmetry, Verification
from .symcore import QD, QDD, Q, T, linear_conditions, normalize, solve_linear
from .symcore.ansatz import build, polynomial_monomials
from .symcore.linsolve import particular

if TYPE_CHECKING:
    from collections.abc import Sequence

LOGGER = logging.getLogger(__name__)


def free_total_derivative(e: sp.Expr) -> sp.Expr:
    """d/dt on the jet (t, q, qd, qdd) with qdd kept symbolic; not normalized."""
    return sp.diff(e, T) + QD * sp.diff(e, Q) + QDD * sp.diff(e, QD)


def total_derivative(e: sp.Expr, ode: Ode2) -> sp.Expr:
    """Total derivative along the ODE: e_t + qd*e_q + F*e_qd."""
    return normalize(sp.diff(e, T) + QD * sp.diff(e, Q) + ode.rhs * sp.diff(e, QD))


def prolong(sym: PointSymmetry, ode: Ode2) -> ProlongedSymmetry:  # noqa: ARG001
    """First and second prolongation coefficients, qdd left unsubstituted."""
    dv = free_total_derivative(sym.v)
    eta1 = normalize(free_total_derivative(sym.g) - QD * dv)
    eta2 = normalize(free_total_derivative(eta1) - QDD * dv)
    return ProlongedSymmetry(base=sym, eta1=eta1, eta2=eta2)


def _symmetry_residual(v: sp.Expr, g: sp.Expr, ode: Ode2) -> sp.Expr:
    dv = free_total_derivative(v)
    eta1 = free_total_derivative(g) - QD * dv
    eta2 = free_total_derivative(eta1) - QDD * dv
    rhs = ode.rhs
    action = v * sp.diff(rhs, T) + g * sp.diff(rhs, Q) + eta1 * sp.diff(rhs, QD)
    return eta2.xreplace({QDD: rhs}) - action


def verify_point_symmetry(sym: PointSymmetry, ode: Ode2) -> Verification:
    """Check the second prolongation annihilates qdd - F on shell."""
    prolonged = prolong(sym, ode)
    rhs = ode.rhs
    action = (
        sym.v * sp.diff(rhs, T)
        + sym.g * sp.diff(rhs, Q)
        + prolonged.eta1 * sp.diff(rhs, QD)
    )
    residual = normalize(prolonged.eta2.xreplace({QDD: rhs}) - action)
    if residual != 0:
        LOGGER.debug("Generator %s fails with residual %s", sym.label, residual)
    return Verification(residual == 0, residual)


def find_point_symmetries(
    ode: Ode2, degree_bound: int = DEFAULT_SYMMETRY_DEGREE
) -> list[PointSymmetry]:
    """Basis of polynomial point symmetries of total degree <= degree_bound."""
    if not 0 <= degree_bound <= MAX_SYMMETRY_DEGREE:
        msg = f"degree bound must lie in [0, {MAX_SYMMETRY_DEGREE}]"
        raise ValueError(msg)
    basis = polynomial_monomials([T, Q], degree_bound)
    v, a = build("a", basis)
    g, b = build("b", basis)
    conditions = linear_conditions(_symmetry_residual(v, g, ode), [T, Q, QD])
    LOGGER.debug(
        "Symmetry search: %s unknowns, %s conditions", len(a) + len(b), len(conditions)
    )
    result = solve_linear(conditions, a + b)
    found = []
    for index, parameter in enumerate(result.free, start=1):
        values = {p: sp.S.Zero for p in result.free}
        values[parameter] = sp.S.One
        assigned = {u: result.value(u).xreplace(values) for u in a + b}
        sym = PointSymmetry(
            v=normalize(v.xreplace(assigned)),
            g=normalize(g.xreplace(assigned)),
            label=f"S{index}",
        )
        check = verify_point_symmetry(sym, ode)
        if not check:
            raise SymmetryVerificationError(sym.label, check.residual)
        found.append(sym)
    LOGGER.info("Found %s point symmetries up to degree %s", len(found), degree_bound)
    return found


def combination_label(terms: Sequence[tuple[sp.Expr, str]]) -> str:
    """Readable label such as X4-X5 or G3-2/3*G7."""
    parts = []
    for coeff, label in terms:
        coeff = sp.sympify(coeff)
        if coeff == 0:
            continue
        sign = "-" if coeff.could_extract_minus_sign() else "+"
        magnitude = -coeff if sign == "-" else coeff
        body = label if magnitude == 1 else f"{sp.sstr(magnitude)}*{label}"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first_body = parts[0]
    text = ("-" if first_sign == "-" else "") + first_body
    return text + "".join(sign + body for sign, body in parts[1:])


def combine(
    terms: Sequence[tuple[sp.Expr | int, PointSymmetry]], label: str | None = None
) -> PointSymmetry:
    """Constant linear combination of generators."""
    v = normalize(sp.Add(*(sp.sympify(c) * s.v for c, s in terms)))
    g = normalize(sp.Add(*(sp.sympify(c) * s.g for c, s in terms)))
    name = label or combination_label([(c, s.label) for c, s in terms])
    return PointSymmetry(v=v, g=g, label=name)


def symmetry_in_span(
    sym: PointSymmetry, basis: Sequence[PointSymmetry]
) -> dict[str, sp.Expr] | None:
    """Constant coefficients expressing sym over basis, or None."""
    coefficients = [sp.Symbol(f"k_{index}") for index in range(len(basis))]
    v_gap = sym.v - sp.Add(*(c * s.v for c, s in zip(coefficients, basis, strict=True)))
    g_gap = sym.g - sp.Add(*(c * s.g for c, s in zip(coefficients, basis, strict=True)))
    conditions = linear_conditions(v_gap, [T, Q]) + linear_conditions(g_gap, [T, Q])
    result = solve_linear(conditions, coefficients)
    if not result.consistent:
        return None
    values = particular(result)
    return {s.label: values[c] for c, s in zip(coefficients, basis, strict=True)}
