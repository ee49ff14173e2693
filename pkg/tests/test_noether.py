"""Tests for Noether symmetries and physical Lagrangians."""

import pytest
import sympy as sp

from jlmquant.exceptions import ConsistencyError
from jlmquant.lagrange import lagrangian_from_multiplier
from jlmquant.models import Lagrangian, NoetherCertificate, NoetherRejection
from jlmquant.multiplier import distinct_multipliers, multiplier_sweep
from jlmquant.noether import (
    first_integral,
    noether_expression,
    noether_spectrum,
    noether_subalgebra,
    noether_test,
    solve_gauge,
)
from jlmquant.odesym import combine, total_derivative
from jlmquant.report import match_integral, match_lagrangian
from jlmquant.symcore import ODE_CTX, QD, Q, T, normalize, parse

FREE_INTEGRALS = [
    "-(q-t*qd)^2/2",
    "-qd*(q-t*qd)",
    "qd^2/2",
    "q-t*qd",
    "-qd",
]

PROJECTIVE_INTEGRALS = [
    "-qd/(q-t*qd)",
    "qd^2/(2*(q-t*qd)^2)",
    "-1/(q-t*qd)",
    "-qd/(q-t*qd)^2",
    "-1/(2*(q-t*qd)^2)",
]


@pytest.fixture(name="kinetic")
def _kinetic():
    """Create the kinetic Lagrangian qd^2/2."""
    return Lagrangian(QD**2 / 2, multiplier=sp.S.One, provenance="M87")


class TestNoetherTest:
    """Test the Noether condition for single generators."""

    def test_time_translation(self, free_particle, free_symmetries, kinetic):
        """Test d/dt gives the energy with zero gauge."""
        outcome = noether_test(kinetic, free_symmetries[5], free_particle)
        assert isinstance(outcome, NoetherCertificate)
        assert outcome.gauge == 0
        assert normalize(outcome.integral - QD**2 / 2) == 0

    def test_galilean_boost(self, free_particle, free_symmetries, kinetic):
        """Test t d/dq needs the gauge q."""
        outcome = noether_test(kinetic, free_symmetries[6], free_particle)
        assert isinstance(outcome, NoetherCertificate)
        assert normalize(outcome.gauge - Q) == 0

    def test_rejection(self, free_particle, free_symmetries, kinetic):
        """Test the projective generator is not Noether for qd^2/2."""
        outcome = noether_test(kinetic, free_symmetries[0], free_particle)
        assert isinstance(outcome, NoetherRejection)
        assert outcome.constraints

    def test_expression(self, free_particle, free_symmetries, kinetic):
        """Test the Noether expression of d/dq vanishes."""
        assert noether_expression(kinetic, free_symmetries[7], free_particle) == 0


class TestSolveGauge:
    """Test gauge potentials."""

    def test_potential(self):
        """Test the gradient is reproduced."""
        gauge = solve_gauge(2 * T * Q, T**2 + 1 / Q)
        assert normalize(sp.diff(gauge, T) - 2 * T * Q) == 0
        assert normalize(sp.diff(gauge, Q) - T**2 - 1 / Q) == 0


class TestNoetherSubalgebra:
    """Test the Noether subalgebra within the span of the generators."""

    def test_kinetic(self, free_particle, free_symmetries, kinetic):
        """Test qd^2/2 has five Noether symmetries with the known integrals."""
        basis = noether_subalgebra(kinetic, free_symmetries, free_particle)
        assert len(basis) == 5
        references = [parse(text, ODE_CTX) for text in FREE_INTEGRALS]
        for sym in basis:
            outcome = noether_test(kinetic, sym, free_particle)
            assert isinstance(outcome, NoetherCertificate), sym.label
            assert total_derivative(outcome.integral, free_particle) == 0
            assert match_integral(outcome.integral, references), sym.label

    def test_projective_lagrangian(self, free_particle, free_symmetries):
        """Test -1/(2*t^2*(t*qd-q)) conserves the five listed integrals."""
        lag = Lagrangian(parse("-1/(2*t^2*(t*qd-q))", ODE_CTX))
        x = {s.label: s for s in free_symmetries}
        generators = [
            x["X1"],
            x["X2"],
            x["X3"],
            combine([(1, x["X4"]), (-1, x["X5"])]),
            x["X7"],
        ]
        for sym, expected in zip(generators, PROJECTIVE_INTEGRALS, strict=True):
            outcome = noether_test(lag, sym, free_particle)
            assert isinstance(outcome, NoetherCertificate), sym.label
            assert total_derivative(outcome.integral, free_particle) == 0
            reference = parse(expected, ODE_CTX)
            assert match_integral(outcome.integral, [reference]), sym.label
        assert len(noether_subalgebra(lag, free_symmetries, free_particle)) == 5

    def test_riccati(self, riccati, riccati_symmetries):
        """Test the Riccati Lagrangian has five Noether symmetries."""
        lag = Lagrangian(parse("-1/(2*(qd+q^2))", ODE_CTX))
        basis = noether_subalgebra(lag, riccati_symmetries, riccati)
        assert len(basis) == 5
        for sym in basis:
            assert isinstance(noether_test(lag, sym, riccati), NoetherCertificate)


class TestNoetherSpectrum:
    """Test the spectrum over all derived Lagrangians."""

    def test_physical(self, free_particle, free_symmetries):
        """Test the largest subalgebras have five elements and are flagged."""
        entries = multiplier_sweep(free_particle, free_symmetries)
        lagrangians = [
            lagrangian_from_multiplier(free_particle, m, bound=3, allow_log=True)
            for m in distinct_multipliers(entries)
        ]
        spectrum = noether_spectrum(lagrangians, free_symmetries, free_particle)
        assert len(spectrum) == 10
        assert max(e.count for e in spectrum) == 5
        references = {
            "L13": parse("-1/(2*t^2*(t*qd-q))", ODE_CTX),
            "L87": parse("qd^2/2", ODE_CTX),
        }
        physical = {
            match_lagrangian(e.lagrangian, references) for e in spectrum if e.physical
        }
        assert {"L13", "L87"} <= physical
        for entry in spectrum:
            assert entry.count == len(entry.certificates)
            assert entry.physical == (entry.count == 5)


class TestFirstIntegral:
    """Test integrals rebuilt from certificates."""

    def test_energy(self, free_particle, free_symmetries, kinetic):
        """Test d/dt gives back qd^2/2."""
        cert = NoetherCertificate(free_symmetries[5], sp.S.Zero, sp.S.Zero)
        integral = first_integral(cert, kinetic, free_particle)
        assert normalize(integral - QD**2 / 2) == 0

    def test_wrong_gauge(self, free_particle, free_symmetries, kinetic):
        """Test a boost without its gauge does not conserve anything."""
        cert = NoetherCertificate(free_symmetries[6], sp.S.Zero, sp.S.Zero)
        with pytest.raises(ConsistencyError):
            first_integral(cert, kinetic, free_particle)
