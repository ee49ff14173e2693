"""Lagrangians from Jacobi last multipliers."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import sympy as sp

from .const import DEFAULT_GAUGE_BOUND, MAX_GAUGE_BOUND
from .exceptions import (
    AnsatzInsufficientError,
    ConsistencyError,
    DegenerateTransformError,
    MultiplierError,
    UnsupportedIntegrandError,
)
from .models import Lagrangian, Multiplier, Verification
from .odesym import free_total_derivative, total_derivative
from .symcore import QD, QDD, Q, T, integrate_power, linear_conditions, normalize
from .symcore.ansatz import build, laurent_monomials, log_extended
from .symcore.expr import substitute
from .symcore.linsolve import particular, solve_linear

if TYPE_CHECKING:
    from .models import Ode2, PointSymmetry

LOGGER = logging.getLogger(__name__)


def gauge_ansatz(
    prefix: str, bound: int = DEFAULT_GAUGE_BOUND, *, allow_log: bool = True
) -> tuple[sp.Expr, tuple[sp.Symbol, ...]]:
    """Laurent polynomial in (t, q), optionally times log t or log q."""
    if not 0 <= bound <= MAX_GAUGE_BOUND:
        msg = f"ansatz bound must lie in [0, {MAX_GAUGE_BOUND}]"
        raise ValueError(msg)
    basis = laurent_monomials([T, Q], bound)
    if allow_log:
        basis = log_extended(basis, [T, Q])
    return build(prefix, basis)


def euler_lagrange_residual(
    l: Lagrangian | sp.Expr,  # noqa: E741
    ode: Ode2 | None = None,  # noqa: ARG001
) -> sp.Expr:
    """L_q - Dt(L_qd) with qdd left symbolic."""
    value = l.l if isinstance(l, Lagrangian) else l
    return normalize(sp.diff(value, Q) - free_total_derivative(sp.diff(value, QD)))


def _completion_source(l0: sp.Expr, m: sp.Expr, ode: Ode2) -> sp.Expr:
    """Right-hand side R of f3_q - f1_t = R for L = l0 + f1*qd + f3."""
    l0_qd = sp.diff(l0, QD)
    partial = sp.diff(l0, Q) - sp.diff(l0_qd, T) - QD * sp.diff(l0_qd, Q)
    return normalize(m * ode.rhs - partial)


def _solve_completion(
    source: sp.Expr, bound: int, *, allow_log: bool
) -> tuple[sp.Expr, sp.Expr]:
    if source == 0:
        return sp.S.Zero, sp.S.Zero
    try:
        return sp.S.Zero, integrate_power(source, Q)
    except UnsupportedIntegrandError:
        LOGGER.debug("Falling back to t-integration for %s", source)
    try:
        return -integrate_power(source, T), sp.S.Zero
    except UnsupportedIntegrandError:
        LOGGER.debug("Falling back to the completion ansatz for %s", source)
    f1, a = gauge_ansatz("f1", bound, allow_log=allow_log)
    f3, b = gauge_ansatz("f3", bound, allow_log=allow_log)
    equation = sp.diff(f3, Q) - sp.diff(f1, T) - source
    conditions = linear_conditions(equation, [T, Q])
    result = solve_linear(conditions, a + b)
    if not result.consistent:
        msg = f"no f1, f3 within bound {bound} solve f3_q - f1_t = {source}"
        raise AnsatzInsufficientError(msg, [source])
    values = particular(result)
    return normalize(f1.xreplace(values)), normalize(f3.xreplace(values))


def lagrangian_from_multiplier(
    ode: Ode2,
    m: Multiplier,
    *,
    bound: int = DEFAULT_GAUGE_BOUND,
    allow_log: bool = True,
) -> Lagrangian:
    """
    Lagrangian with L_qdqd = M by double integration in qd.

    The terms f1*qd + f3 left free by the integration are fixed so that the
    Euler-Lagrange residual is exactly -M*(qdd - F). The gauge freedom is not
    folded in.
    """
    l0 = integrate_power(integrate_power(m.m, QD), QD)
    source = _completion_source(l0, m.m, ode)
    if source.has(QD):
        msg = f"{m.label} does not satisfy the multiplier equation"
        raise MultiplierError(msg)
    f1, f3 = _solve_completion(source, bound, allow_log=allow_log)
    lagrangian = Lagrangian(
        normalize(l0 + f1 * QD + f3),
        f1=f1,
        f3=f3,
        multiplier=m.m,
        provenance=m.label,
    )
    check = verify_lagrangian(lagrangian, ode)
    if not check:
        msg = f"{lagrangian.label} fails with residual {check.residual}"
        raise ConsistencyError(msg)
    LOGGER.debug("%s = %s", lagrangian.label, lagrangian.l)
    return lagrangian


def verify_lagrangian(l: Lagrangian, ode: Ode2) -> Verification:  # noqa: E741
    """L_qdqd equals M and the Euler-Lagrange residual is -M*(qdd - F)."""
    hessian = normalize(sp.diff(l.l, QD, 2))
    m = hessian if l.multiplier is None else l.multiplier
    mismatch = normalize(hessian - m)
    if mismatch != 0:
        return Verification(ok=False, residual=mismatch)
    residual = normalize(euler_lagrange_residual(l) + m * (QDD - ode.rhs))
    return Verification(residual == 0, residual)


def gauge_equivalent(l1: Lagrangian, l2: Lagrangian) -> bool:
    """True when l1 - l2 is the total derivative of some h(t, q)."""
    gap = normalize(l1.l - l2.l)
    if gap == 0:
        return True
    if normalize(sp.diff(gap, QD, 2)) != 0:
        return False
    slope = normalize(sp.diff(gap, QD))
    offset = normalize(gap - QD * slope)
    return normalize(sp.diff(slope, T) - sp.diff(offset, Q)) == 0


def _apply(sym: PointSymmetry, f: sp.Expr) -> sp.Expr:
    return normalize(sym.v * sp.diff(f, T) + sym.g * sp.diff(f, Q))


def _require_invertible(tnew: sp.Expr, xnew: sp.Expr) -> None:
    jacobian = normalize(
        sp.diff(tnew, T) * sp.diff(xnew, Q) - sp.diff(tnew, Q) * sp.diff(xnew, T)
    )
    if jacobian == 0:
        msg = f"({tnew}, {xnew}) is not a change of variables"
        raise DegenerateTransformError(msg)


def pushforward_ode(ode: Ode2, tnew: sp.Expr, xnew: sp.Expr) -> sp.Expr:
    """Second derivative of xnew with respect to tnew, on shell, in (t, q, qd)."""
    _require_invertible(tnew, xnew)
    dtnew = total_derivative(tnew, ode)
    if dtnew == 0:
        msg = f"{tnew} is constant along solutions"
        raise DegenerateTransformError(msg)
    slope = normalize(total_derivative(xnew, ode) / dtnew)
    return normalize(total_derivative(slope, ode) / dtnew)


def canonical_straightening_check(
    s1: PointSymmetry,
    s2: PointSymmetry,
    tnew: sp.Expr,
    xnew: sp.Expr,
    *,
    ode: Ode2 | None = None,
    target: sp.Expr | None = None,
) -> Verification:
    """
    Check s1 and s2 become d/dtnew and d/dxnew in the new variables.

    With ode and target, also check the pushed-forward equation; target is
    the new right-hand side written with t, q, qd standing for the new
    independent variable, dependent variable and its derivative.
    """
    _require_invertible(tnew, xnew)
    residuals = [
        _apply(s1, tnew) - 1,
        _apply(s1, xnew),
        _apply(s2, tnew),
        _apply(s2, xnew) - 1,
    ]
    if ode is not None and target is not None:
        dtnew = total_derivative(tnew, ode)
        slope = normalize(total_derivative(xnew, ode) / dtnew)
        claimed = substitute(target, {T: tnew, Q: xnew, QD: slope})
        residuals.append(pushforward_ode(ode, tnew, xnew) - claimed)
    for residual in residuals:
        residual = normalize(residual)
        if residual != 0:
            return Verification(ok=False, residual=residual)
    return Verification(ok=True, residual=sp.S.Zero)
