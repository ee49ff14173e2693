"""Tests for point symmetries of second-order equations."""

import pytest
import sympy as sp

from jlmquant.models import PointSymmetry
from jlmquant.odesym import (
    combination_label,
    combine,
    find_point_symmetries,
    prolong,
    symmetry_in_span,
    verify_point_symmetry,
)
from jlmquant.symcore import QD, QDD, Q, T, normalize


class TestVerifyPointSymmetry:
    """Test the symmetry condition."""

    def test_free_particle_generators(self, free_particle, free_symmetries):
        """Test the eight free particle generators."""
        for sym in free_symmetries:
            assert verify_point_symmetry(sym, free_particle), sym.label

    def test_riccati_generators(self, riccati, riccati_symmetries):
        """Test the eight Riccati generators."""
        for sym in riccati_symmetries:
            assert verify_point_symmetry(sym, riccati), sym.label

    def test_rejects_non_symmetry(self, free_particle):
        """Test q^2 d/dq is not a symmetry of qdd = 0."""
        check = verify_point_symmetry(
            PointSymmetry(sp.S.Zero, Q**2, "bad"), free_particle
        )
        assert not check
        assert check.residual != 0

    def test_scaling_is_not_riccati_symmetry(self, riccati):
        """Test q d/dq does not preserve the Riccati equation."""
        assert not verify_point_symmetry(PointSymmetry(sp.S.Zero, Q, "s"), riccati)


class TestProlong:
    """Test prolongation coefficients."""

    def test_projective_generator(self, free_particle, free_symmetries):
        """Test the prolongation of q*t d/dt + q^2 d/dq."""
        prolonged = prolong(free_symmetries[0], free_particle)
        assert normalize(prolonged.eta1 - (Q * QD - T * QD**2)) == 0
        assert normalize(prolonged.eta2 + 3 * T * QD * QDD) == 0


class TestFindPointSymmetries:
    """Test the polynomial symmetry search."""

    def test_free_particle_span(self, free_particle, free_symmetries):
        """Test degree two recovers the eight-dimensional algebra."""
        found = find_point_symmetries(free_particle, 2)
        assert len(found) == 8
        for sym in free_symmetries:
            assert symmetry_in_span(sym, found) is not None, sym.label

    def test_riccati_span(self, riccati, riccati_symmetries):
        """Test degree four finds the generators of the canonical variables."""
        found = find_point_symmetries(riccati, 4)
        labelled = {s.label: s for s in riccati_symmetries}
        for label in ("G5", "G6"):
            assert symmetry_in_span(labelled[label], found) is not None, label
        for sym in found:
            assert verify_point_symmetry(sym, riccati), sym.label

    def test_degree_zero(self, free_particle):
        """Test degree zero finds only translations."""
        found = find_point_symmetries(free_particle, 0)
        assert len(found) == 2

    def test_bound_checked(self, free_particle):
        """Test the degree bound range."""
        with pytest.raises(ValueError):
            find_point_symmetries(free_particle, 99)


class TestCombine:
    """Test generator combinations."""

    def test_label(self):
        """Test readable combination labels."""
        assert combination_label([(1, "X4"), (-1, "X5")]) == "X4-X5"
        assert combination_label([(1, "G3"), (sp.Rational(-2, 3), "G7")]) == (
            "G3-2/3*G7"
        )
        assert combination_label([(0, "X1")]) == "0"

    def test_combination(self, free_symmetries):
        """Test coefficients combine linearly."""
        x4, x5 = free_symmetries[3], free_symmetries[4]
        combined = combine([(1, x4), (-1, x5)])
        assert combined.label == "X4-X5"
        assert combined.v == -T
        assert combined.g == Q

    def test_not_in_span(self, free_symmetries):
        """Test a generator outside the span is detected."""
        outside = PointSymmetry(sp.S.Zero, Q**2, "bad")
        assert symmetry_in_span(outside, free_symmetries) is None
