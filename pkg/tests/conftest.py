"""Pytest configuration and fixtures."""

from pathlib import Path

import pytest
import sympy as sp

from jlmquant.models import Ode2, PointSymmetry
from jlmquant.symcore import ODE_CTX, parse

PROBLEMS_DIR = Path(__file__).parent.parent / "problems"

FREE_PARTICLE_GENERATORS = [
    ("X1", "q*t", "q^2"),
    ("X2", "q", "0"),
    ("X3", "t^2", "q*t"),
    ("X4", "0", "q"),
    ("X5", "t", "0"),
    ("X6", "1", "0"),
    ("X7", "0", "t"),
    ("X8", "0", "1"),
]

RICCATI_RHS = "-3*q*qd-q^3"

RICCATI_GENERATORS = [
    ("G1", "t^3*(t*q-2)", "-t*(q*t-2)*(q^2*t^2+2-2*q*t)"),
    ("G2", "q*t^3", "-(q*t-1)*(q^2*t^2+4-2*q*t)"),
    ("G3", "q*t^2", "-q*(q^2*t^2+2-2*q*t)"),
    ("G4", "q*t", "-q^2*(q*t-1)"),
    ("G5", "q", "-q^3"),
    ("G6", "1", "0"),
    ("G7", "t", "-q"),
    ("G8", "t^2", "-2*(q*t-1)"),
]


def point_symmetries(rows):
    """Build generators from (label, v, g) text rows."""
    return [
        PointSymmetry(v=parse(v, ODE_CTX), g=parse(g, ODE_CTX), label=label)
        for label, v, g in rows
    ]


@pytest.fixture(name="free_particle")
def _free_particle():
    """Create the free particle equation qdd = 0."""
    return Ode2(sp.S.Zero, label="free particle")


@pytest.fixture(name="free_symmetries")
def _free_symmetries():
    """Create the eight point symmetries of the free particle."""
    return point_symmetries(FREE_PARTICLE_GENERATORS)


@pytest.fixture(name="riccati")
def _riccati():
    """Create the second-order Riccati equation."""
    return Ode2(parse(RICCATI_RHS, ODE_CTX), label="Riccati")


@pytest.fixture(name="riccati_symmetries")
def _riccati_symmetries():
    """Create the eight point symmetries of the Riccati equation."""
    return point_symmetries(RICCATI_GENERATORS)


@pytest.fixture(name="problem_file")
def _problem_file(tmp_path):
    """Copy a bundled problem file into a scratch directory."""

    def copy(name):
        target = tmp_path / name
        target.write_text((PROBLEMS_DIR / name).read_text(encoding="utf-8"))
        return target

    return copy
