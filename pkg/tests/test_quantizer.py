"""Tests for quantization and characteristic reduction."""

import pytest
import sympy as sp

from jlmquant.exceptions import (
    AnsatzInsufficientError,
    CharacteristicError,
    NotParabolicError,
)
from jlmquant.models import (
    BranchStatus,
    CharReduction,
    DeterminingBranch,
    LinearPde2,
    PdeMode,
    PdeSymmetry,
    PdeType,
)
from jlmquant.odesym import combine
from jlmquant.pipeline import reduce_branch
from jlmquant.quantizer import (
    characteristic_coordinate,
    classify,
    is_pde_symmetry,
    pde_symmetry_from_point,
    pde_symmetry_residual,
    solve_determining,
    solve_euler,
    solve_multipliers,
    to_normal_form,
    trivial_symmetry_check,
    verify_solution,
)
from jlmquant.quantizer.prolong import (
    as_form,
    jet,
    jet_total_derivative,
    multiplier_eta,
)
from jlmquant.report import match_pde
from jlmquant.symcore import PSI, XI, T, X, normalize

SCHRODINGER = LinearPde2(
    sp.S.Zero, sp.S.Zero, sp.S.One, 2 * sp.I, sp.S.Zero, sp.S.Zero, PdeMode.SCHRODINGER
)
FREE_PARTICLE_PDE = LinearPde2(
    4 * T**2, 8 * T * X, 4 * X**2, 12 * T, 12 * X, sp.Integer(3)
)
LOG_FREE_PARTICLE_PDE = LinearPde2(
    4 * T**4,
    8 * T**3 * X,
    4 * T**2 * X**2,
    4 * T**2 * (3 * T + X),
    4 * T * X * (3 * T + X),
    3 * T**2 + 4 * T * X + X**2,
)
RICCATI_PDE = LinearPde2(
    sp.Integer(4), -8 * X**2, 4 * X**4, sp.S.Zero, 8 * X**3, -3 * X**2
)


def _same(left, right):
    """Equal after normalization."""
    return normalize(left - right) == 0


def _exponents(basis):
    """Exponent set as normalized expressions."""
    return {normalize(e) for e in basis.exponents}


def _constant(e):
    """Free of t and x after normalization."""
    return not normalize(e).has(T, X)


@pytest.fixture(name="schrodinger_generators")
def _schrodinger_generators(free_symmetries):
    """Geometric parts of X3, X4+2*X5, X6, X7, X8."""
    x = {s.label: s for s in free_symmetries}
    chosen = [
        x["X3"],
        combine([(1, x["X4"]), (2, x["X5"])]),
        x["X6"],
        x["X7"],
        x["X8"],
    ]
    return [pde_symmetry_from_point(s) for s in chosen]


@pytest.fixture(name="projective_generators")
def _projective_generators(free_symmetries):
    """Geometric parts of X1, X2, X3, X4-X5, X7."""
    x = {s.label: s for s in free_symmetries}
    chosen = [
        x["X1"],
        x["X2"],
        x["X3"],
        combine([(1, x["X4"]), (-1, x["X5"])]),
        x["X7"],
    ]
    return [pde_symmetry_from_point(s) for s in chosen]


@pytest.fixture(name="riccati_generators")
def _riccati_generators(riccati_symmetries):
    """Geometric parts of G2-G8, G3-2/3*G7, G4, G5, G6."""
    g = {s.label: s for s in riccati_symmetries}
    chosen = [
        combine([(1, g["G2"]), (-1, g["G8"])]),
        combine([(1, g["G3"]), (sp.Rational(-2, 3), g["G7"])]),
        g["G4"],
        g["G5"],
        g["G6"],
    ]
    return [pde_symmetry_from_point(s) for s in chosen]


class TestProlong:
    """Test jet-space helpers."""

    def test_total_derivative(self):
        """Test D_x of x*psi_t."""
        result = jet_total_derivative(X * jet(1, 0), 1)
        assert sp.expand(result - jet(1, 0) - X * jet(1, 1)) == 0

    def test_multiplier_eta(self):
        """Test the lower-order part of D_x(x^2*psi)."""
        assert multiplier_eta(X**2, (0, 1)) == {PSI: 2 * X}

    def test_zero_form(self):
        """Test zero terms are dropped from the jet map."""
        assert as_form(sp.S.Zero) == {}
        assert as_form(0 * jet(1, 0) + X * PSI) == {PSI: X}

    def test_translation_with_zero_coefficients(self):
        """Test x-translation prolongs with vanishing jet coefficients."""
        assert is_pde_symmetry(SCHRODINGER, PdeSymmetry(sp.S.Zero, sp.S.One, sp.S.Zero))
        assert is_pde_symmetry(RICCATI_PDE, PdeSymmetry(sp.S.One, sp.S.Zero, sp.S.Zero))


class TestPdeSymmetryResidual:
    """Test the symmetry condition of linear equations."""

    def test_galilean_boost(self):
        """Test t d/dx + i*x*psi d/dpsi preserves the Schrodinger equation."""
        sym = PdeSymmetry(sp.S.Zero, T, sp.I * X, "boost")
        assert is_pde_symmetry(SCHRODINGER, sym)

    def test_projective(self):
        """Test the projective generator with its phase."""
        sym = PdeSymmetry(T**2, T * X, (sp.I * X**2 - T) / 2, "projective")
        assert is_pde_symmetry(SCHRODINGER, sym)

    def test_free_particle_pde(self):
        """Test the multipliers -x/2 and -t/2 of the projective pair."""
        first = PdeSymmetry(X * T, X**2, -X / 2, "W1")
        third = PdeSymmetry(T**2, T * X, -T / 2, "W3")
        assert is_pde_symmetry(FREE_PARTICLE_PDE, first)
        assert is_pde_symmetry(FREE_PARTICLE_PDE, third)

    def test_wrong_multiplier(self):
        """Test a missing multiplier leaves a residual."""
        sym = PdeSymmetry(X * T, X**2, sp.S.Zero, "W1")
        check = is_pde_symmetry(FREE_PARTICLE_PDE, sym)
        assert not check
        assert check.residual != 0

    def test_zero_generator(self):
        """Test the zero generator has an all-zero residual map."""
        zero = PdeSymmetry(sp.S.Zero, sp.S.Zero, sp.S.Zero)
        residual = pde_symmetry_residual(RICCATI_PDE, zero)
        assert all(value == 0 for value in residual.values())

    def test_point_symmetry_renaming(self, free_symmetries):
        """Test q becomes x in the geometric part."""
        sym = pde_symmetry_from_point(free_symmetries[0])
        assert sym.xi_t == X * T
        assert sym.xi_x == X**2
        assert sym.lam == 0


class TestSolveDetermining:
    """Test the determining-equation solve."""

    def test_schrodinger(self, schrodinger_generators):
        """Test the Schrodinger template recovers 2i*psi_t + psi_xx = 0."""
        branches = solve_determining(
            schrodinger_generators, mode=PdeMode.SCHRODINGER, ansatz_degree=2
        )
        solved = [b for b in branches if b.status == BranchStatus.SOLVED]
        matched = [b for b in solved if match_pde(b.pde, [SCHRODINGER]) is not None]
        assert matched
        for branch in solved:
            for sym in branch.symmetries:
                assert is_pde_symmetry(branch.pde, sym), sym.label
        boost = next(s for s in matched[0].symmetries if s.label == "X7")
        assert _constant(boost.lam - sp.I * X)
        projective = matched[0].symmetries[0]
        assert _constant(projective.lam - (sp.I * X**2 - T) / 2)

    def test_general(self, projective_generators):
        """Test a general-mode branch is the parabolic free particle equation."""
        branches = solve_determining(projective_generators, ansatz_degree=2)
        solved = [b for b in branches if b.status == BranchStatus.SOLVED]
        matched = [
            b for b in solved if match_pde(b.pde, [FREE_PARTICLE_PDE]) is not None
        ]
        assert matched
        for branch in solved:
            assert branch.pde.c_tt == 1
            for sym in branch.symmetries:
                assert is_pde_symmetry(branch.pde, sym), sym.label
        first, _, third, _, _ = matched[0].symmetries
        assert _constant(first.lam + X / 2)
        assert _constant(third.lam + T / 2)

    def test_general_with_logs(self, projective_generators):
        """Test a log-extended multiplier ansatz still closes on verified branches."""
        branches = solve_determining(
            projective_generators, ansatz_degree=2, allow_log=True
        )
        solved = [b for b in branches if b.status == BranchStatus.SOLVED]
        references = [FREE_PARTICLE_PDE, LOG_FREE_PARTICLE_PDE]
        assert any(match_pde(b.pde, references) is not None for b in solved)
        for branch in solved:
            for sym in branch.symmetries:
                assert is_pde_symmetry(branch.pde, sym), sym.label

    def test_riccati(self, riccati_generators):
        """Test the Riccati generators give the parabolic Riccati equation."""
        branches = solve_determining(riccati_generators, ansatz_degree=4)
        solved = [b for b in branches if b.status == BranchStatus.SOLVED]
        assert any(match_pde(b.pde, [RICCATI_PDE]) is not None for b in solved)

    def test_degree_checked(self, projective_generators):
        """Test the ansatz degree range."""
        with pytest.raises(ValueError):
            solve_determining(projective_generators, ansatz_degree=99)

    def test_insufficient(self, projective_generators):
        """Test a degree-zero ansatz cannot host the free particle equation."""
        with pytest.raises(AnsatzInsufficientError):
            solve_determining(
                projective_generators, mode=PdeMode.SCHRODINGER, ansatz_degree=0
            )


class TestSolveMultipliers:
    """Test multipliers of a fixed equation."""

    def test_schrodinger(self, schrodinger_generators):
        """Test the phases of the five Schrodinger generators."""
        branch = solve_multipliers(SCHRODINGER, schrodinger_generators)
        assert match_pde(branch.pde, [SCHRODINGER]) == 0
        omega = [s.lam for s in branch.symmetries]
        assert _constant(omega[0] - (sp.I * X**2 - T) / 2)
        assert _constant(omega[1])
        assert _constant(omega[2])
        assert _constant(omega[3] - sp.I * X)
        assert _constant(omega[4])

    def test_free_particle(self, projective_generators):
        """Test W1 = -x/2, W3 = -t/2 on the parabolic free particle equation."""
        branch = solve_multipliers(FREE_PARTICLE_PDE, projective_generators)
        first, second, third, fourth, fifth = (s.lam for s in branch.symmetries)
        assert _constant(first + X / 2)
        assert _constant(third + T / 2)
        assert all(_constant(lam) for lam in (second, fourth, fifth))

    def test_riccati(self, riccati_generators):
        """Test lambda_4 = -x^2/2 and lambda_5 = -(t*x - 1)/x."""
        branch = solve_multipliers(RICCATI_PDE, riccati_generators)
        fourth, fifth = (s.lam for s in branch.symmetries[3:])
        assert _constant(fourth + X**2 / 2)
        assert _constant(fifth + (T * X - 1) / X)
        for sym in branch.symmetries:
            assert is_pde_symmetry(RICCATI_PDE, sym), sym.label

    def test_log_multiplier(self, projective_generators):
        """Test the second projective generator needs x^2*log(t)/(2*t^2)."""
        with pytest.raises(AnsatzInsufficientError):
            solve_multipliers(LOG_FREE_PARTICLE_PDE, projective_generators)
        branch = solve_multipliers(
            LOG_FREE_PARTICLE_PDE, projective_generators, allow_log=True
        )
        second = branch.symmetries[1].lam
        assert _constant(second - X**2 * sp.log(T) / (2 * T**2))
        for sym in branch.symmetries:
            assert is_pde_symmetry(LOG_FREE_PARTICLE_PDE, sym), sym.label


class TestClassify:
    """Test the type of linear equations."""

    @pytest.mark.parametrize(
        ("pde", "expected"),
        [
            (FREE_PARTICLE_PDE, PdeType.PARABOLIC),
            (RICCATI_PDE, PdeType.PARABOLIC),
            (SCHRODINGER, PdeType.PARABOLIC),
            (LOG_FREE_PARTICLE_PDE, PdeType.PARABOLIC),
            (
                LinearPde2(sp.S.One, sp.S.Zero, sp.S.One, 0, 0, 0),
                PdeType.ELLIPTIC,
            ),
            (
                LinearPde2(sp.S.One, sp.S.Zero, -sp.S.One, 0, 0, 0),
                PdeType.HYPERBOLIC,
            ),
            (
                LinearPde2(sp.S.One, sp.S.Zero, X, 0, 0, 0),
                PdeType.DEGENERATE_VARYING,
            ),
        ],
    )
    def test_classify(self, pde, expected):
        """Test the discriminant decides the type."""
        assert classify(pde) == expected


class TestCharacteristicCoordinate:
    """Test characteristic coordinates."""

    def test_free_particle(self):
        """Test dx/dt = x/t gives x/t."""
        assert _same(characteristic_coordinate(FREE_PARTICLE_PDE), X / T)

    def test_riccati(self):
        """Test dx/dt = -x^2 gives t - 1/x."""
        assert _same(characteristic_coordinate(RICCATI_PDE), T - 1 / X)

    def test_pure_second_time_derivative(self):
        """Test psi_tt alone gives x."""
        pde = LinearPde2(sp.S.One, sp.S.Zero, sp.S.Zero, 0, 0, 0)
        assert characteristic_coordinate(pde) == X

    def test_supplied(self):
        """Test a supplied coordinate is only checked."""
        xi = characteristic_coordinate(FREE_PARTICLE_PDE, 2 * X / T)
        assert _same(xi, 2 * X / T)

    def test_supplied_wrong(self):
        """Test a non-characteristic coordinate is rejected."""
        with pytest.raises(CharacteristicError):
            characteristic_coordinate(FREE_PARTICLE_PDE, X)

    def test_not_parabolic(self):
        """Test elliptic equations have no real characteristic."""
        pde = LinearPde2(sp.S.One, sp.S.Zero, sp.S.One, 0, 0, 0)
        with pytest.raises(NotParabolicError):
            characteristic_coordinate(pde)


class TestNormalForm:
    """Test the Cauchy-Euler reductions and their solutions."""

    @pytest.mark.parametrize(
        ("pde", "xi", "coefficients", "exponents"),
        [
            (
                FREE_PARTICLE_PDE,
                X / T,
                (4 * X**2, 12 * X, 3),
                {sp.Rational(-1, 2), sp.Rational(-3, 2)},
            ),
            (
                RICCATI_PDE,
                T - 1 / X,
                (4 * X**2, 8 * X, -3),
                {sp.Rational(1, 2), sp.Rational(-3, 2)},
            ),
            (
                LOG_FREE_PARTICLE_PDE,
                X / T,
                (4 * X**2, (12 + 4 * XI) * X, 3 + 4 * XI + XI**2),
                {-sp.Rational(1, 2) - XI / 2, -sp.Rational(3, 2) - XI / 2},
            ),
        ],
    )
    def test_reduction(self, pde, xi, coefficients, exponents):
        """Test the normal form, the exponents and the back-substitution."""
        red = to_normal_form(pde, xi)
        assert red.solvable
        for actual, expected in zip(
            (red.phi_xx, red.phi_x, red.phi), coefficients, strict=True
        ):
            assert _same(actual, expected)
        basis = solve_euler(red)
        assert basis.closed
        assert not basis.repeated
        assert _exponents(basis) == {normalize(e) for e in exponents}
        assert verify_solution(pde, red, basis)
        assert trivial_symmetry_check(pde, red, basis)

    def test_mixed_term_survives(self):
        """Test a non-characteristic coordinate is refused."""
        with pytest.raises(CharacteristicError):
            to_normal_form(FREE_PARTICLE_PDE, X)

    def test_schrodinger_keeps_time_derivative(self):
        """Test the Schrodinger equation reduces with a phi_xi term."""
        red = to_normal_form(SCHRODINGER, T)
        assert not red.solvable
        with pytest.raises(CharacteristicError):
            solve_euler(red)

    def test_repeated_root(self):
        """Test x^2*phi_xx + x*phi_x gives 1 and log(x)."""
        red = CharReduction(xi=T, phi_xx=X**2, phi_x=X, phi=sp.S.Zero)
        basis = solve_euler(red)
        assert basis.repeated
        assert basis.exponents == (0,)
        assert basis.terms == (1, sp.log(X))

    def test_gaussian_roots(self):
        """Test x^2*phi_xx + x*phi_x + 4*phi has the exponents 2i and -2i."""
        red = CharReduction(xi=T, phi_xx=X**2, phi_x=X, phi=4 * sp.S.One)
        basis = solve_euler(red)
        assert basis.closed
        assert set(basis.exponents) == {2 * sp.I, -2 * sp.I}

    def test_irrational_roots(self):
        """Test an irrational indicial equation leaves no closed basis."""
        red = CharReduction(xi=T, phi_xx=X**2, phi_x=sp.S.Zero, phi=-sp.S.One)
        basis = solve_euler(red)
        assert not basis.closed
        assert basis.exponents == ()

    def test_wrong_basis(self):
        """Test back-substitution catches a wrong exponent."""
        red = to_normal_form(FREE_PARTICLE_PDE, X / T)
        basis = solve_euler(red)
        wrong = CharReduction(xi=red.xi, phi_xx=red.phi_xx, phi_x=red.phi_x, phi=0)
        assert not verify_solution(FREE_PARTICLE_PDE, red, solve_euler(wrong))
        assert verify_solution(FREE_PARTICLE_PDE, red, basis)


class TestReduceBranch:
    """Test branch reduction outcomes."""

    def test_schrodinger_branch(self):
        """Test the Schrodinger branch is reported without a basis."""
        branch = DeterminingBranch(BranchStatus.SOLVED, ("f1",), pde=SCHRODINGER)
        outcome = reduce_branch(branch)
        assert outcome.pde_type == PdeType.PARABOLIC
        assert outcome.basis is None
        assert outcome.error == "normal form keeps a phi_xi term"
        assert outcome.trivial

    def test_free_particle_branch(self):
        """Test a parabolic branch is solved and verified."""
        branch = DeterminingBranch(BranchStatus.SOLVED, (), pde=FREE_PARTICLE_PDE)
        outcome = reduce_branch(branch)
        assert outcome.solution
        assert outcome.trivial
        assert _same(outcome.xi, X / T)

    def test_elliptic_branch(self):
        """Test non-parabolic branches are classified only."""
        pde = LinearPde2(sp.S.One, sp.S.Zero, sp.S.One, 0, 0, 0)
        outcome = reduce_branch(DeterminingBranch(BranchStatus.SOLVED, (), pde=pde))
        assert outcome.pde_type == PdeType.ELLIPTIC
        assert outcome.reduction is None
        assert outcome.trivial

    def test_user_coordinate(self):
        """Test a supplied non-characteristic coordinate is reported."""
        branch = DeterminingBranch(BranchStatus.SOLVED, (), pde=FREE_PARTICLE_PDE)
        outcome = reduce_branch(branch, X)
        assert outcome.error is not None
        assert outcome.basis is None
