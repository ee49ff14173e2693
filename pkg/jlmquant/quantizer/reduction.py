"""Classification and characteristic reduction of parabolic equations."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Final

import sympy as sp

from ..exceptions import (
    CharacteristicError,
    NotParabolicError,
    UnsupportedIntegrandError,
)
from ..models import CharReduction, PdeSymmetry, PdeType, SolutionBasis, Verification
from ..symcore import XI, T, X, fraction, integrate_power, normalize
from ..symcore.expr import make_log
from .determining import is_pde_symmetry

if TYPE_CHECKING:
    from ..models import LinearPde2

LOGGER = logging.getLogger(__name__)

EXPONENT: Final = sp.Symbol("r")
SLOT_NAMES: Final = ("alpha_1", "alpha_2")
SLOT_POWERS: Final = (0, 1, 2)


def discriminant(pde: LinearPde2) -> sp.Expr:
    """c_tx^2 - 4*c_tt*c_xx, normalized."""
    return normalize(pde.c_tx**2 - 4 * pde.c_tt * pde.c_xx)


def _even_sign(e: sp.Expr) -> int | None:
    """Sign of e when it is a constant times a square, else None."""
    num, den = sp.fraction(e)
    coeff, factors = sp.factor_list(sp.expand(num * den))
    if coeff.has(sp.I) or any(k % 2 for _, k in factors):
        return None
    return 1 if coeff > 0 else -1


def classify(pde: LinearPde2) -> PdeType:
    """Type from the discriminant; parabolic needs identical vanishing."""
    value = discriminant(pde)
    if value == 0:
        return PdeType.PARABOLIC
    sign = _even_sign(value)
    if sign is None:
        return PdeType.DEGENERATE_VARYING
    return PdeType.HYPERBOLIC if sign > 0 else PdeType.ELLIPTIC


def characteristic_form(pde: LinearPde2, xi: sp.Expr) -> sp.Expr:
    """Principal symbol evaluated on the gradient of xi."""
    xi_t, xi_x = sp.diff(xi, T), sp.diff(xi, X)
    return normalize(pde.c_tt * xi_t**2 + pde.c_tx * xi_t * xi_x + pde.c_xx * xi_x**2)


def _exponentiate(e: sp.Expr) -> sp.Expr:
    """Turn a pure combination of logs into the matching product of powers."""
    terms = sp.Add.make_args(e)
    pairs = [term.as_coeff_Mul() for term in terms]
    if not all(isinstance(atom, sp.log) and c.is_Rational for c, atom in pairs):
        return e
    scale = sp.ilcm(*(c.q for c, _ in pairs))
    return normalize(sp.Mul(*(atom.args[0] ** (c * scale) for c, atom in pairs)))


def characteristic_coordinate(pde: LinearPde2, xi: sp.Expr | None = None) -> sp.Expr:
    """
    Characteristic coordinate of a parabolic equation.

    With xi given only the characteristic property is checked. Otherwise
    dx/dt = c_tx/(2*c_tt) is integrated when it separates.
    """
    if classify(pde) != PdeType.PARABOLIC:
        msg = "characteristic reduction needs a parabolic equation"
        raise NotParabolicError(msg)
    if xi is None:
        xi = _integrate_characteristic(pde)
    xi = normalize(xi)
    if not xi.has(T, X):
        msg = f"{xi} is constant"
        raise CharacteristicError(msg)
    residual = characteristic_form(pde, xi)
    if residual != 0:
        msg = f"{xi} is not characteristic, residual {residual}"
        raise CharacteristicError(msg)
    LOGGER.debug("Characteristic coordinate %s", xi)
    return xi


def _integrate_characteristic(pde: LinearPde2) -> sp.Expr:
    if pde.c_tt == 0:
        return T
    slope = normalize(pde.c_tx / (2 * pde.c_tt))
    if slope == 0:
        return X
    parts = sp.separatevars(slope, symbols=[T, X], dict=True)
    if parts is None:
        msg = f"dx/dt = {slope} does not separate; supply xi"
        raise CharacteristicError(msg)
    rate = parts["coeff"] * parts[T]
    try:
        xi = integrate_power(1 / parts[X], X) - integrate_power(rate, T)
    except UnsupportedIntegrandError as err:
        msg = f"cannot integrate dx/dt = {slope}; supply xi"
        raise CharacteristicError(msg) from err
    return _exponentiate(normalize(xi))


def _solve_for_t(xi: sp.Expr) -> sp.Expr:
    roots = sp.solve(sp.Eq(xi, XI), T, rational=True)
    if len(roots) != 1:
        msg = f"cannot invert {xi} for t"
        raise CharacteristicError(msg)
    return normalize(roots[0])


def _clear_denominators(values: list[sp.Expr]) -> list[sp.Expr]:
    denominators = [sp.fraction(v)[1] for v in values]
    common = sp.lcm(denominators) if len(denominators) > 1 else denominators[0]
    scaled = [normalize(v * common) for v in values]
    numbers = [
        term.as_coeff_Mul()[0]
        for v in scaled
        for term in sp.Add.make_args(sp.expand(sp.fraction(v)[0]))
    ]
    scale = sp.ilcm(*(n.q for n in numbers if n.is_Rational)) if numbers else 1
    return [normalize(v * scale) for v in scaled]


def to_normal_form(pde: LinearPde2, xi: sp.Expr) -> CharReduction:
    """
    Rewrite the equation for phi(xi, x) with psi(t, x) = phi(xi(t, x), x).

    The phi_xx coefficient is scaled to a multiple of x^2 with the remaining
    coefficients cleared of denominators.
    """
    xi_t, xi_x = sp.diff(xi, T), sp.diff(xi, X)
    cross = normalize(pde.c_tx * xi_t + 2 * pde.c_xx * xi_x)
    if characteristic_form(pde, xi) != 0 or cross != 0:
        msg = f"{xi} does not remove the mixed derivative"
        raise CharacteristicError(msg)
    first = (
        pde.c_tt * sp.diff(xi, T, 2)
        + pde.c_tx * sp.diff(xi, T, X)
        + pde.c_xx * sp.diff(xi, X, 2)
        + pde.c_t * xi_t
        + pde.c_x * xi_x
    )
    back = {T: _solve_for_t(xi)} if xi.has(T) else {}
    values = [
        normalize(sp.sympify(e).xreplace(back))
        for e in (pde.c_xx, pde.c_x, pde.c_0, first)
    ]
    if values[0] == 0:
        msg = "phi_xx drops out of the normal form"
        raise CharacteristicError(msg)
    lead = values[0]
    values = [normalize(v * X**2 / lead) for v in values]
    phi_xx, phi_x, phi, phi_xi = _clear_denominators(values)
    return CharReduction(xi=xi, phi_xx=phi_xx, phi_x=phi_x, phi=phi, phi_xi=phi_xi)


def _gaussian_sqrt(c: sp.Expr) -> sp.Expr | None:
    """Square root in Q(i) of a Gaussian rational, if there is one."""
    re, im = (sp.Rational(part) for part in sp.expand(c).as_real_imag())
    modulus = sp.sqrt(re**2 + im**2)
    if not modulus.is_Rational:
        return None
    a, b = sp.sqrt((modulus + re) / 2), sp.sqrt((modulus - re) / 2)
    if not (a.is_Rational and b.is_Rational):
        return None
    return a + sp.I * b if im >= 0 else a - sp.I * b


def _rational_sqrt(e: sp.Expr) -> sp.Expr | None:
    roots = []
    for part in fraction(e):
        coeff, factors = sp.factor_list(part)
        if any(k % 2 for _, k in factors):
            return None
        root = _gaussian_sqrt(coeff)
        if root is None:
            return None
        roots.append(root * sp.Mul(*(f ** (k // 2) for f, k in factors)))
    return normalize(roots[0] / roots[1])


def solve_euler(red: CharReduction) -> SolutionBasis:
    """Power solutions x^r of a Cauchy-Euler reduction."""
    if not red.solvable:
        msg = "reduction keeps a phi_xi term"
        raise CharacteristicError(msg)
    a = normalize(red.phi_xx / X**2)
    b = normalize(red.phi_x / X)
    c = normalize(red.phi)
    if any(v.has(X) for v in (a, b, c)):
        msg = "reduction is not of Cauchy-Euler type"
        raise CharacteristicError(msg)
    r = EXPONENT
    indicial = sp.expand(a * r * (r - 1) + b * r + c)
    root = _rational_sqrt((b - a) ** 2 - 4 * a * c)
    if root is None:
        LOGGER.warning("Indicial equation %s has no rational roots", indicial)
        return SolutionBasis(indicial=indicial, exponents=())
    if root == 0:
        exponent = normalize((a - b) / (2 * a))
        terms = (X**exponent, X**exponent * sp.log(X))
        return SolutionBasis(
            indicial, (exponent,), terms, SLOT_NAMES, repeated=True
        )
    exponents = tuple(normalize((a - b + s) / (2 * a)) for s in (root, -root))
    terms = tuple(X**e for e in exponents)
    return SolutionBasis(indicial, exponents, terms, SLOT_NAMES)


def _apply_to_product(pde: LinearPde2, exponent: sp.Expr, w: sp.Expr) -> sp.Expr:
    """L[x^exponent * w] / x^exponent with the power handled by its log."""
    p = exponent * make_log(X)
    p_t, p_x = sp.diff(p, T), sp.diff(p, X)
    w_t, w_x = sp.diff(w, T), sp.diff(w, X)
    tt = (sp.diff(p, T, 2) + p_t**2) * w + 2 * p_t * w_t + sp.diff(w, T, 2)
    tx = (
        (sp.diff(p, T, X) + p_t * p_x) * w
        + p_t * w_x
        + p_x * w_t
        + sp.diff(w, T, X)
    )
    xx = (sp.diff(p, X, 2) + p_x**2) * w + 2 * p_x * w_x + sp.diff(w, X, 2)
    return normalize(
        pde.c_tt * tt
        + pde.c_tx * tx
        + pde.c_xx * xx
        + pde.c_t * (p_t * w + w_t)
        + pde.c_x * (p_x * w + w_x)
        + pde.c_0 * w
    )


def verify_solution(
    pde: LinearPde2, red: CharReduction, basis: SolutionBasis
) -> Verification:
    """Substitute each basis element with its slot set to xi^k, k = 0, 1, 2."""
    for index, term in enumerate(basis.terms):
        exponent = basis.exponents[0] if basis.repeated else basis.exponents[index]
        exponent = exponent.xreplace({XI: red.xi})
        extra = make_log(X) if basis.repeated and index == 1 else sp.S.One
        for power in SLOT_POWERS:
            w = extra * red.xi**power
            residual = _apply_to_product(pde, exponent, w)
            if residual != 0:
                LOGGER.debug("%s fails with residual %s", term, residual)
                return Verification(ok=False, residual=residual)
    return Verification(ok=True, residual=sp.S.Zero)


def trivial_symmetry_check(
    pde: LinearPde2,
    red: CharReduction | None = None,
    basis: SolutionBasis | None = None,
) -> bool:
    """psi d/dpsi is a symmetry; alpha d/dpsi is one for each solution alpha."""
    scaling = PdeSymmetry(xi_t=sp.S.Zero, xi_x=sp.S.Zero, lam=sp.S.One, label="psi")
    if not is_pde_symmetry(pde, scaling):
        return False
    if red is None or basis is None or not basis.closed:
        return True
    return bool(verify_solution(pde, red, basis))
