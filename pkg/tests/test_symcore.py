"""Tests for the symbolic core."""

import random

import pytest
import sympy as sp

from jlmquant.exceptions import (
    ExpressionParseError,
    NonlinearSystemError,
    UnknownVariableError,
    UnsupportedExpressionError,
    UnsupportedIntegrandError,
    ZeroDenominatorError,
)
from jlmquant.models import SolveStatus
from jlmquant.symcore import (
    ODE_CTX,
    PDE_CTX,
    QD,
    Q,
    T,
    X,
    collect_coefficients,
    fraction,
    integrate_power,
    is_zero,
    linear_conditions,
    normalize,
    parse,
    proportional,
    solve_linear,
    substitute,
    to_text,
)
from jlmquant.symcore.expr import evaluate_exact, random_points
from jlmquant.symcore.linsolve import particular

PROPERTY_SEED = 1729
PROPERTY_CASES = 1000
GAUSSIAN_LOG_CASES = 50


def _random_poly(rng):
    """Small random polynomial in t, q, qd with rational coefficients."""
    symbols = [T, Q, QD]
    return sp.Add(
        *(
            sp.Rational(rng.randint(-4, 4), rng.randint(1, 3))
            * rng.choice(symbols) ** rng.randint(0, 2)
            * rng.choice(symbols) ** rng.randint(0, 1)
            for _ in range(3)
        )
    )


def _nonzero_poly(rng):
    """Random polynomial that does not vanish identically."""
    poly = _random_poly(rng)
    return poly if sp.expand(poly) != 0 else sp.S.One + T


class TestParse:
    """Test the expression parser."""

    def test_precedence(self):
        """Test powers bind tighter than unary minus and products."""
        assert parse("-q^2", ODE_CTX) == -(Q**2)
        assert parse("2*q^2/4", ODE_CTX) == Q**2 / 2
        assert parse("1-t-q", ODE_CTX) == 1 - T - Q

    def test_power_is_right_associative(self):
        """Test a^b^c parses as a^(b^c)."""
        assert parse("2^3^2") == 512

    def test_imaginary_unit(self):
        """Test i stands for the imaginary unit."""
        assert parse("i*x^2/2", PDE_CTX) == sp.I * X**2 / 2

    def test_log_atom(self):
        """Test log keeps its argument unevaluated."""
        value = parse("log(t*qd-q)", ODE_CTX)
        assert isinstance(value, sp.log)
        assert value.args[0] == T * QD - Q

    def test_unknown_variable(self):
        """Test names outside the context are rejected with a position."""
        with pytest.raises(UnknownVariableError) as err:
            parse("q + x", ODE_CTX)
        assert err.value.position == 4

    @pytest.mark.parametrize(
        "text",
        ["", "q +", "(q", "q $ t", "sin(q)", "q^(1/2)", "q^t", "2 q"],
    )
    def test_malformed(self, text):
        """Test malformed text raises a parse error."""
        with pytest.raises(ExpressionParseError):
            parse(text, ODE_CTX)

    @pytest.mark.parametrize("text", ["q/0", "q/(t-t)", "0^-1"])
    def test_zero_denominator(self, text):
        """Test literal division by zero is rejected."""
        with pytest.raises(ZeroDenominatorError):
            parse(text, ODE_CTX)

    @pytest.mark.parametrize(
        "text",
        ["qd^2/2", "-1/(t*qd-q)^3", "i*t - q^2/3", "log(qd)*q"],
    )
    def test_text_round_trip(self, text):
        """Test rendered text parses back to the same expression."""
        value = parse(text)
        assert normalize(parse(to_text(value)) - value) == 0

    def test_to_text_uses_input_grammar(self):
        """Test the renderer writes ^ and i."""
        rendered = to_text(sp.I * X**2)
        assert "^" in rendered
        assert "i" in rendered
        assert "**" not in rendered


class TestNormalize:
    """Test canonical normal forms."""

    def test_cancels_common_factor(self):
        """Test a common factor cancels."""
        value = normalize((Q**2 - T**2) / (Q - T))
        assert value == Q + T

    def test_denominator_is_monic(self):
        """Test the denominator leading coefficient is one."""
        num, den = fraction(1 / (2 * QD))
        assert (num, den) == (sp.Rational(1, 2), QD)
        num, den = fraction((2 * Q + 4) / (6 * QD * T - 3 * Q))
        assert sp.Poly(den, T, Q, QD).LC(order="grlex") == 1
        assert normalize(num / den - (2 * Q + 4) / (6 * QD * T - 3 * Q)) == 0

    def test_zero(self):
        """Test an identically vanishing expression normalizes to zero."""
        assert normalize((T + Q) ** 2 - T**2 - 2 * T * Q - Q**2) == 0

    def test_gaussian_rationals(self):
        """Test complex coefficients stay exact."""
        assert normalize((1 + sp.I) * (1 - sp.I) * Q) == 2 * Q

    def test_log_difference(self):
        """Test equal log atoms cancel."""
        assert normalize(parse("log(2*q) - log(2*q)")) == 0

    def test_rejects_radicals(self):
        """Test non-integer powers leave the class."""
        with pytest.raises(UnsupportedExpressionError):
            normalize(sp.sqrt(Q))

    def test_rejects_foreign_functions(self):
        """Test functions other than log leave the class."""
        with pytest.raises(UnsupportedExpressionError):
            normalize(sp.sin(Q))

    def test_random_expressions(self):
        """Test idempotence, representation independence and values."""
        rng = random.Random(PROPERTY_SEED)
        for _ in range(PROPERTY_CASES):
            num = _random_poly(rng)
            den = _nonzero_poly(rng)
            common = _nonzero_poly(rng)
            original = num / den
            canonical = normalize(original)
            assert normalize(canonical) == canonical
            rewritten = sp.expand(num * common) / sp.expand(den * common)
            assert normalize(rewritten) == canonical
            symbols = original.free_symbols | canonical.free_symbols
            for point in random_points(symbols, 2)[:2]:
                left = evaluate_exact(original, point)
                right = evaluate_exact(canonical, point)
                if left is None or right is None:
                    continue
                assert sp.expand_complex(left - right) == 0

    def test_gaussian_log_expressions(self):
        """Test forms with i and log atoms agree with the input at five points."""
        rng = random.Random(PROPERTY_SEED)
        logs = [parse("log(t*qd-q)", ODE_CTX), parse("log(qd)", ODE_CTX)]
        for _ in range(GAUSSIAN_LOG_CASES):
            num = _random_poly(rng) + sp.I * _random_poly(rng)
            num += _random_poly(rng) * rng.choice(logs)
            den = _nonzero_poly(rng)
            common = _nonzero_poly(rng) + sp.I
            original = num / den
            rewritten = sp.expand(num * common) / sp.expand(den * common)
            assert is_zero(original - rewritten, ODE_CTX, points=5)
            canonical = normalize(original, ODE_CTX)
            assert is_zero(original, ODE_CTX, points=5) == (canonical == 0)


class TestIsZero:
    """Test the zero decision."""

    def test_identity(self):
        """Test a polynomial identity."""
        assert is_zero((T - Q) * (T + Q) - T**2 + Q**2)

    def test_nonzero(self):
        """Test a nonzero rational function."""
        assert not is_zero(1 / (T - Q))


class TestProportional:
    """Test constant ratios."""

    def test_constant_ratio(self):
        """Test the ratio is returned."""
        assert proportional(-2 / (T * QD - Q) ** 3, 1 / (T * QD - Q) ** 3) == -2

    def test_not_constant(self):
        """Test a varying ratio gives None."""
        assert proportional(T, Q) is None

    def test_zero_reference(self):
        """Test a zero reference gives None."""
        assert proportional(T, sp.S.Zero) is None


class TestSubstitute:
    """Test simultaneous substitution."""

    def test_simultaneous(self):
        """Test bindings do not see each other."""
        assert normalize(substitute(T - Q, {"t": Q, "q": T}) - Q + T) == 0

    def test_pole(self):
        """Test landing on a pole is an error."""
        with pytest.raises(ZeroDenominatorError):
            substitute(1 / (T - Q), {"t": Q})


class TestIntegratePower:
    """Test shifted-power integration."""

    def test_negative_power(self):
        """Test a power of a linear polynomial."""
        result = integrate_power(-1 / (T * QD - Q) ** 3, QD)
        assert normalize(result - 1 / (2 * T * (T * QD - Q) ** 2)) == 0

    def test_reciprocal_gives_log(self):
        """Test 1/qd integrates to log(qd)."""
        result = integrate_power(1 / QD, QD)
        assert normalize(result - sp.log(QD)) == 0

    def test_log_integrand(self):
        """Test log(qd) integrates to qd*(log(qd) - 1)."""
        result = integrate_power(sp.log(QD), QD)
        assert normalize(result - QD * (sp.log(QD) - 1)) == 0

    def test_polynomial(self):
        """Test a polynomial integrand with parameters."""
        result = integrate_power(3 * T * QD**2 + Q, QD)
        assert normalize(result - T * QD**3 - Q * QD) == 0

    def test_quadratic_denominator(self):
        """Test an irreducible quadratic is outside the class."""
        with pytest.raises(UnsupportedIntegrandError):
            integrate_power(1 / (QD**2 + 1), QD)


class TestCoefficients:
    """Test coefficient extraction."""

    def test_collect(self):
        """Test coefficients of a polynomial in t."""
        result = collect_coefficients(T**2 * Q + 3 * T, [T])
        assert result == {T**2: Q, T: 3}

    def test_linear_conditions(self):
        """Test coefficient equations keep the unknowns."""
        a, b, c = sp.symbols("a b c")
        conditions = linear_conditions(a * T**2 + b * T + c - T**2, [T])
        assert set(conditions) == {a - 1, b, c}

    def test_linear_conditions_with_denominator(self):
        """Test a rational expression is cleared first."""
        a = sp.Symbol("a")
        conditions = linear_conditions(a / (1 + T) - 1 / (1 + T), [T])
        assert [sp.expand(c) for c in conditions] == [a - 1]


class TestSolveLinear:
    """Test the exact affine solver."""

    def test_unique(self):
        """Test a square regular system."""
        a, b = sp.symbols("a b")
        result = solve_linear([a + b - 3, a - b - 1], [a, b])
        assert result.status == SolveStatus.UNIQUE
        assert result.assignments == {a: 2, b: 1}

    def test_parametrized(self):
        """Test free parameters stand for themselves."""
        a, b = sp.symbols("a b")
        result = solve_linear([a + b - 1], [a, b])
        assert result.status == SolveStatus.PARAMETRIZED
        assert result.free == (b,)
        assert sp.expand(result.value(a) - (1 - b)) == 0
        assert particular(result) == {a: 1, b: 0}

    def test_inconsistent(self):
        """Test an inconsistent system reports a witness."""
        a = sp.Symbol("a")
        result = solve_linear([a - 1, a - 2], [a])
        assert result.status == SolveStatus.INCONSISTENT
        assert not result.consistent
        assert result.witness != 0

    def test_symbolic_coefficients(self):
        """Test coefficients may involve the imaginary unit."""
        a, b = sp.symbols("a b")
        result = solve_linear([sp.I * a - 1, b - a], [a, b])
        assert result.assignments == {a: -sp.I, b: -sp.I}

    def test_nonlinear(self):
        """Test products of unknowns are rejected."""
        a, b = sp.symbols("a b")
        with pytest.raises(NonlinearSystemError):
            solve_linear([a * b - 1], [a, b])

    def test_empty(self):
        """Test no equations leave every unknown free."""
        a = sp.Symbol("a")
        result = solve_linear([], [a])
        assert result.free == (a,)
