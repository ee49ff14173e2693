"""Canonical forms and calculus for rational expressions with log atoms."""

from __future__ import annotations

import logging
import random
from collections import defaultdict
from typing import TYPE_CHECKING

import sympy as sp

from ..const import (
    CANONICAL_ORDER,
    DEFAULT_ZERO_CHECK_POINTS,
    MAX_SAMPLE_ATTEMPTS,
    RANDOM_SEED,
    SAMPLE_DENOMINATOR_RANGE,
    SAMPLE_NUMERATOR_RANGE,
    VAR_PSI,
    VAR_Q,
    VAR_QD,
    VAR_QDD,
    VAR_T,
    VAR_X,
    VAR_XI,
)
from ..exceptions import (
    ConsistencyError,
    NotPolynomialError,
    UnsupportedExpressionError,
    UnsupportedIntegrandError,
    ZeroDenominatorError,
)
from ..models import VarCtx, VarRole

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

LOGGER = logging.getLogger(__name__)

T, X, Q, QD, QDD, XI, PSI = (sp.Symbol(name) for name in CANONICAL_ORDER)

ODE_CTX = VarCtx(
    (VAR_T, VAR_Q, VAR_QD, VAR_QDD),
    (VarRole.INDEPENDENT, VarRole.JET, VarRole.JET, VarRole.JET),
)
PDE_CTX = VarCtx(
    (VAR_T, VAR_X, VAR_XI, VAR_PSI),
    (VarRole.INDEPENDENT, VarRole.INDEPENDENT, VarRole.AUXILIARY, VarRole.JET),
)
FULL_CTX = VarCtx(
    CANONICAL_ORDER,
    (
        VarRole.INDEPENDENT,
        VarRole.INDEPENDENT,
        VarRole.JET,
        VarRole.JET,
        VarRole.JET,
        VarRole.AUXILIARY,
        VarRole.JET,
    ),
)

_UNIT = sp.Dummy("unit")


def as_symbol(v: str | sp.Symbol) -> sp.Symbol:
    """Accept a variable name or symbol."""
    return v if isinstance(v, sp.Symbol) else sp.Symbol(v)


def make_log(argument: sp.Expr) -> sp.Expr:
    """Log atom over an already normalized argument."""
    if argument == 0:
        msg = "log of zero"
        raise ZeroDenominatorError(msg)
    if argument == 1:
        return sp.S.Zero
    return sp.log(argument, evaluate=False)


def _normalize_log_args(e: sp.Expr, ctx: VarCtx | None) -> sp.Expr:
    if not e.has(sp.log):
        return e
    mapping = {
        atom: make_log(normalize(atom.args[0], ctx)) for atom in e.atoms(sp.log)
    }
    return e.xreplace(mapping)


def freeze_logs(
    e: sp.Expr, extra: Iterable[sp.Expr] = ()
) -> tuple[sp.Expr, dict[sp.Dummy, sp.Expr]]:
    """Replace log atoms by dummies; return the expression and the inverse map."""
    atoms = set(e.atoms(sp.log))
    for other in extra:
        atoms |= other.atoms(sp.log)
    if not atoms:
        return e, {}
    ordered = sorted(atoms, key=sp.default_sort_key)
    forward = {atom: sp.Dummy(f"log{index}") for index, atom in enumerate(ordered)}
    return e.xreplace(forward), {dummy: atom for atom, dummy in forward.items()}


def _check_class(e: sp.Expr) -> None:
    if e.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        msg = f"expression {e} has a zero denominator"
        raise ZeroDenominatorError(msg)
    for atom in e.atoms():
        if not (atom.is_Symbol or atom.is_Rational or atom is sp.I):
            msg = f"{atom} is outside the rational class"
            raise UnsupportedExpressionError(msg)
    for power in e.atoms(sp.Pow):
        if not power.exp.is_Integer:
            msg = f"non-integer power {power}"
            raise UnsupportedExpressionError(msg)
    if e.atoms(sp.Function):
        msg = f"foreign function in {e}"
        raise UnsupportedExpressionError(msg)


def ordered_gens(
    symbols: Iterable[sp.Symbol],
    ctx: VarCtx | None = None,
    logs: Iterable[sp.Dummy] = (),
) -> list[sp.Symbol]:
    """Generators in context order, then other names, then log dummies."""
    names = (ctx or FULL_CTX).names
    log_order = [dummy for dummy in logs]
    symbols = set(symbols)

    def key(sym: sp.Symbol) -> tuple[int, int, str]:
        if sym.name in names:
            return (0, names.index(sym.name), "")
        return (1, 0, sym.name)

    plain = sorted((s for s in symbols if s not in log_order), key=key)
    return plain + [dummy for dummy in log_order if dummy in symbols]


def fraction(
    e: sp.Expr | int | str, ctx: VarCtx | None = None
) -> tuple[sp.Expr, sp.Expr]:
    """
    Coprime numerator and denominator of e over Q(i) with log atoms.

    The denominator's leading coefficient in graded lexicographic order is one;
    rational scalars stay in the numerator.
    """
    e = sp.sympify(e)
    if e.is_Rational:
        return e, sp.S.One
    e = _normalize_log_args(e, ctx)
    frozen, logs = freeze_logs(e)
    _check_class(frozen)
    num, den = sp.fraction(sp.together(frozen))
    gens = ordered_gens(num.free_symbols | den.free_symbols, ctx, logs) or [_UNIT]
    domain = sp.QQ_I if frozen.has(sp.I) else sp.QQ
    numerator = sp.Poly(num, *gens, domain=domain)
    denominator = sp.Poly(den, *gens, domain=domain)
    if denominator.is_zero:
        msg = f"division by zero in {e}"
        raise ZeroDenominatorError(msg)
    if numerator.is_zero:
        return sp.S.Zero, sp.S.One
    numerator, denominator = numerator.cancel(denominator, include=True)
    ground = denominator.get_domain()
    lead = ground.from_sympy(denominator.LC(order="grlex"))
    parts = (numerator.quo_ground(lead).as_expr(), denominator.monic().as_expr())
    if logs:
        return parts[0].xreplace(logs), parts[1].xreplace(logs)
    return parts


def normalize(e: sp.Expr | int | str, ctx: VarCtx | None = None) -> sp.Expr:
    """
    Canonical quotient of coprime polynomials over Q(i) with log atoms.

    sympy folds rational scalars of the quotient into its denominator; read the
    monic denominator with fraction().
    """
    num, den = fraction(e, ctx)
    return num if den == 1 else num / den


def diff(e: sp.Expr, v: str | sp.Symbol, ctx: VarCtx | None = None) -> sp.Expr:
    """Partial derivative, normalized."""
    return normalize(sp.diff(e, as_symbol(v)), ctx)


def substitute(
    e: sp.Expr,
    bindings: Mapping[str | sp.Symbol, sp.Expr | int],
    ctx: VarCtx | None = None,
) -> sp.Expr:
    """Simultaneous substitution followed by normalization."""
    mapping = {as_symbol(key): sp.sympify(value) for key, value in bindings.items()}
    frozen, logs = freeze_logs(sp.sympify(e))
    restored = {
        dummy: make_log(substitute(atom.args[0], mapping, ctx))
        for dummy, atom in logs.items()
    }
    replaced = frozen.xreplace(mapping)
    if replaced.has(sp.zoo, sp.nan):
        msg = f"substitution {bindings} hits a pole of {e}"
        raise ZeroDenominatorError(msg)
    return normalize(replaced.xreplace(restored), ctx)


def free_of(e: sp.Expr, *variables: str | sp.Symbol) -> bool:
    """True when no listed variable occurs, inside logs included."""
    return not e.has(*(as_symbol(v) for v in variables))


def _sample(rng: random.Random) -> sp.Expr:
    real = sp.Rational(
        rng.randint(-SAMPLE_NUMERATOR_RANGE, SAMPLE_NUMERATOR_RANGE),
        rng.randint(1, SAMPLE_DENOMINATOR_RANGE),
    )
    imag = sp.Rational(
        rng.randint(-SAMPLE_NUMERATOR_RANGE, SAMPLE_NUMERATOR_RANGE),
        rng.randint(1, SAMPLE_DENOMINATOR_RANGE),
    )
    return real + sp.I * imag


def evaluate_exact(e: sp.Expr, point: Mapping[sp.Symbol, sp.Expr]) -> sp.Expr | None:
    """Exact value at a point, or None at a pole."""
    value = e.xreplace(point)
    if value.has(sp.zoo, sp.nan):
        return None
    value = sp.expand_complex(value)
    if value.has(sp.zoo, sp.nan):
        return None
    return value


def random_points(
    symbols: Iterable[sp.Symbol], count: int, seed: int = RANDOM_SEED
) -> list[dict[sp.Symbol, sp.Expr]]:
    """Deterministic Gaussian-rational sample points."""
    rng = random.Random(seed)
    ordered = sorted(symbols, key=lambda s: s.name)
    return [
        {sym: _sample(rng) for sym in ordered}
        for _ in range(count * MAX_SAMPLE_ATTEMPTS)
    ]


def _cross_check(
    e: sp.Expr, canonical: sp.Expr, points: int, ctx: VarCtx | None
) -> None:
    prepared = _normalize_log_args(e, ctx)
    frozen, logs = freeze_logs(prepared, extra=(canonical,))
    inverse = {atom: dummy for dummy, atom in logs.items()}
    frozen_canonical = canonical.xreplace(inverse)
    symbols = frozen.free_symbols | frozen_canonical.free_symbols
    if not symbols:
        return
    checked = 0
    for point in random_points(symbols, points):
        left = evaluate_exact(frozen, point)
        right = evaluate_exact(frozen_canonical, point)
        if left is None or right is None:
            continue
        if sp.expand_complex(left - right) != 0:
            msg = f"normal form of {e} disagrees at {point}"
            raise ConsistencyError(msg)
        checked += 1
        if checked == points:
            return
    LOGGER.debug("Only %s pole-free sample points for %s", checked, e)


def is_zero(
    e: sp.Expr,
    ctx: VarCtx | None = None,
    points: int = DEFAULT_ZERO_CHECK_POINTS,
) -> bool:
    """Decide e == 0 by normal form, cross-checked at random points."""
    canonical = normalize(e, ctx)
    if points:
        _cross_check(sp.sympify(e), canonical, points, ctx)
    return canonical == 0


def proportional(a: sp.Expr, b: sp.Expr, ctx: VarCtx | None = None) -> sp.Expr | None:
    """Constant c with a == c*b, or None."""
    if normalize(b, ctx) == 0:
        return None
    ratio = normalize(sp.sympify(a) / sp.sympify(b), ctx)
    if ratio != 0 and ratio.is_number and not ratio.has(sp.log):
        return ratio
    return None


def primitive(u: sp.Expr, ctx: VarCtx | None = None) -> sp.Expr:
    """Scale u so that its numerator has leading coefficient one."""
    u = normalize(u, ctx)
    frozen, logs = freeze_logs(u)
    num, _ = sp.fraction(frozen)
    gens = ordered_gens(num.free_symbols, ctx, logs) or [_UNIT]
    lead = sp.Poly(num, *gens).LC(order="grlex")
    return normalize(u / lead, ctx)


def _integrate_term(term: sp.Expr, var: sp.Symbol, ctx: VarCtx | None) -> sp.Expr:
    coeff, dependent = term.as_independent(var, as_Add=False)
    if dependent == 1:
        return term * var
    factors = sp.Mul.make_args(dependent)
    if len(factors) != 1:
        raise UnsupportedIntegrandError(term, var)
    base, exponent = factors[0].as_base_exp()
    if not exponent.is_Integer or not base.is_polynomial(var):
        raise UnsupportedIntegrandError(term, var)
    if sp.Poly(base, var).degree() != 1:
        raise UnsupportedIntegrandError(term, var)
    slope = sp.diff(base, var)
    if exponent == -1:
        return coeff / slope * make_log(primitive(base, ctx))
    return coeff * base ** (exponent + 1) / (slope * (exponent + 1))


def _integrate_rational(r: sp.Expr, var: sp.Symbol, ctx: VarCtx | None) -> sp.Expr:
    if not r.has(var):
        return r * var
    parts = sp.apart(r, var)
    total = sp.S.Zero
    for part in sp.Add.make_args(parts):
        terms = sp.Add.make_args(sp.expand(part)) if part.is_polynomial(var) else [part]
        for term in terms:
            total += _integrate_term(term, var, ctx)
    return total


def _integrate_log(argument: sp.Expr, var: sp.Symbol) -> sp.Expr:
    num, den = sp.fraction(sp.together(argument))
    if den.has(var) or not num.is_polynomial(var) or sp.Poly(num, var).degree() != 1:
        raise UnsupportedIntegrandError(sp.log(argument, evaluate=False), var)
    slope = sp.diff(argument, var)
    return argument / slope * (sp.log(argument, evaluate=False) - 1)


def integrate_power(
    e: sp.Expr, v: str | sp.Symbol, ctx: VarCtx | None = None
) -> sp.Expr:
    """
    Antiderivative within the shifted-power class.

    Terms c*(a*v + b)**n integrate to powers, n = -1 to a log atom, and terms
    c*log(a*v + b) integrate to (a*v + b)/a*(log(a*v + b) - 1); a, b, c are
    free of v.
    """
    var = as_symbol(v)
    canonical = normalize(e, ctx)
    if canonical == 0:
        return sp.S.Zero
    frozen, logs = freeze_logs(canonical)
    num, den = sp.fraction(frozen)
    dependent_logs = [dummy for dummy, atom in logs.items() if atom.has(var)]
    if dependent_logs and den.has(*dependent_logs):
        raise UnsupportedIntegrandError(canonical, var)
    pieces = (
        sp.Poly(num, *dependent_logs).as_dict(native=False)
        if dependent_logs
        else {(): num}
    )
    total = sp.S.Zero
    for monom, coeff in pieces.items():
        degree = sum(monom)
        if degree == 0:
            total += _integrate_rational(sp.cancel(coeff / den), var, ctx)
            continue
        factor = sp.cancel(coeff / den)
        if degree > 1 or factor.has(var):
            term = coeff / den * _log_monomial(monom, dependent_logs, logs)
            raise UnsupportedIntegrandError(term.xreplace(logs), var)
        atom = logs[dependent_logs[monom.index(1)]]
        total += factor * _integrate_log(atom.args[0], var)
    result = normalize(total.xreplace(logs), ctx)
    if normalize(sp.diff(result, var) - canonical, ctx) != 0:
        msg = f"antiderivative of {canonical} failed its check"
        raise ConsistencyError(msg)
    return result


def _log_monomial(
    monom: tuple[int, ...], dummies: list[sp.Dummy], logs: Mapping[sp.Dummy, sp.Expr]
) -> sp.Expr:
    return sp.Mul(*(logs[d] ** k for d, k in zip(dummies, monom, strict=True)))


def collect_coefficients(
    e: sp.Expr,
    monomial_vars: Iterable[str | sp.Symbol],
    ctx: VarCtx | None = None,
    *,
    include_logs: bool = False,
) -> dict[sp.Expr, sp.Expr]:
    """
    Coefficients of e as a polynomial in monomial_vars.

    With include_logs, log atoms depending on monomial_vars are collected as
    further monomials. Zero coefficients are omitted.
    """
    variables = [as_symbol(v) for v in monomial_vars]
    canonical = normalize(e, ctx)
    if canonical == 0:
        return {}
    frozen, logs = freeze_logs(canonical)
    num, den = sp.fraction(frozen)
    related = [dummy for dummy, atom in logs.items() if atom.has(*variables)]
    if related and not include_logs:
        msg = f"{canonical} has logs of {variables}"
        raise NotPolynomialError(msg)
    gens = variables + related
    if den.has(*gens):
        msg = f"{canonical} is not polynomial in {variables}"
        raise NotPolynomialError(msg)
    result: dict[sp.Expr, sp.Expr] = {}
    for monom, coeff in sp.Poly(num, *gens).as_dict(native=False).items():
        key = sp.Mul(*(g**k for g, k in zip(gens, monom, strict=True)))
        value = normalize((coeff / den).xreplace(logs), ctx)
        if value != 0:
            result[key.xreplace(logs)] = value
    return result


def _laurent_groups(
    e: sp.Expr, gens: list[sp.Symbol]
) -> dict[sp.Expr, list[sp.Expr]] | None:
    groups: dict[sp.Expr, list[sp.Expr]] = defaultdict(list)
    gen_set = set(gens)
    for power in e.atoms(sp.Pow):
        base = power.base
        if power.exp.is_negative and base not in gen_set and base.has(*gens):
            return None
    for term in sp.Add.make_args(sp.expand(e)):
        coeff, monomial = term.as_independent(*gens, as_Add=False)
        for factor in sp.Mul.make_args(monomial):
            base, exponent = factor.as_base_exp()
            if factor != 1 and (base not in gen_set or not exponent.is_Integer):
                return None
        groups[monomial].append(coeff)
    return groups


def linear_conditions(
    e: sp.Expr,
    variables: Iterable[str | sp.Symbol],
    ctx: VarCtx | None = None,
) -> list[sp.Expr]:
    """
    Coefficient equations of e == 0 over the variables and all log atoms.

    Unknown parameters stay in the coefficients. Laurent polynomials are
    collected term by term; anything else is brought over a common denominator
    first.
    """
    e = _normalize_log_args(sp.sympify(e), ctx)
    frozen, logs = freeze_logs(e)
    gens = [as_symbol(v) for v in variables] + list(logs)
    groups = _laurent_groups(frozen, gens)
    if groups is not None:
        conditions = [sp.Add(*coeffs) for coeffs in groups.values()]
        return [c for c in conditions if c != 0]
    num, _ = sp.fraction(sp.together(frozen))
    present = [g for g in gens if num.has(g)]
    if not present:
        num = sp.expand(num)
        return [num] if num != 0 else []
    coefficients = sp.Poly(num, *present).as_dict(native=False).values()
    return [c for c in (sp.expand(c) for c in coefficients) if c != 0]
