"""Models for jlmquant."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import sympy as sp

from .const import VAR_QD, VAR_QDD

if TYPE_CHECKING:
    from collections.abc import Mapping


class VarRole(str, Enum):
    """Role of a declared variable."""

    INDEPENDENT = "independent"
    JET = "jet"
    AUXILIARY = "auxiliary"


class SolveStatus(str, Enum):
    """Outcome of a linear solve."""

    UNIQUE = "unique"
    PARAMETRIZED = "parametrized"
    INCONSISTENT = "inconsistent"


class PairStatus(str, Enum):
    """Status of a symmetry-pair determinant."""

    REGULAR = "regular"
    DEGENERATE = "degenerate"


class PdeType(str, Enum):
    """Classification of a second-order linear PDE."""

    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    DEGENERATE_VARYING = "degenerate-varying"


class PdeMode(str, Enum):
    """Template used by the determining-equation solver."""

    SCHRODINGER = "schrodinger"
    GENERAL = "general"


class BranchStatus(str, Enum):
    """Outcome of one case-split branch."""

    SOLVED = "solved"
    UNRESOLVED = "unresolved"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class VarCtx:
    """Ordered variable names with their roles."""

    names: tuple[str, ...]
    roles: tuple[VarRole, ...]

    def __post_init__(self) -> None:
        """Check uniqueness and total role assignment."""
        if len(set(self.names)) != len(self.names):
            msg = f"duplicate variable names in {self.names}"
            raise ValueError(msg)
        if len(self.roles) != len(self.names):
            msg = "every variable needs a role"
            raise ValueError(msg)

    def __contains__(self, name: object) -> bool:
        """Return True for declared names."""
        return name in self.names

    @property
    def symbols(self) -> tuple[sp.Symbol, ...]:
        """Symbols in declaration order."""
        return tuple(sp.Symbol(name) for name in self.names)

    def symbol(self, name: str) -> sp.Symbol:
        """Return the symbol for a declared name."""
        if name not in self.names:
            msg = f"{name} is not declared"
            raise KeyError(msg)
        return sp.Symbol(name)

    def role(self, name: str) -> VarRole:
        """Return the role of a declared name."""
        return self.roles[self.names.index(name)]


@dataclass(frozen=True)
class Verification:
    """Boolean verdict with the residual that decided it."""

    ok: bool
    residual: sp.Expr

    def __bool__(self) -> bool:
        """Truth value is the verdict."""
        return self.ok


@dataclass(frozen=True)
class LinSolveResult:
    """Solution of an affine system."""

    status: SolveStatus
    assignments: Mapping[sp.Symbol, sp.Expr] = field(default_factory=dict)
    free: tuple[sp.Symbol, ...] = ()
    witness: sp.Expr | None = None

    @property
    def consistent(self) -> bool:
        """Return True unless the system is inconsistent."""
        return self.status != SolveStatus.INCONSISTENT

    def value(self, unknown: sp.Symbol) -> sp.Expr:
        """Value of an unknown, free parameters standing for themselves."""
        return self.assignments.get(unknown, unknown)


@dataclass(frozen=True)
class Ode2:
    """Second-order ODE qdd = rhs(t, q, qd)."""

    rhs: sp.Expr
    label: str = ""

    def __post_init__(self) -> None:
        """Reject right-hand sides containing qdd."""
        if sp.Symbol(VAR_QDD) in self.rhs.free_symbols:
            msg = "right-hand side must not contain qdd"
            raise ValueError(msg)


@dataclass(frozen=True)
class PointSymmetry:
    """Generator v(t, q) d/dt + g(t, q) d/dq."""

    v: sp.Expr
    g: sp.Expr
    label: str = ""

    def __post_init__(self) -> None:
        """Coefficients depend on (t, q) only."""
        jet = {sp.Symbol(VAR_QD), sp.Symbol(VAR_QDD)}
        if jet & (self.v.free_symbols | self.g.free_symbols):
            msg = f"generator {self.label or '?'} depends on derivatives"
            raise ValueError(msg)


@dataclass(frozen=True)
class ProlongedSymmetry:
    """Point symmetry with its first and second prolongation coefficients."""

    base: PointSymmetry
    eta1: sp.Expr
    eta2: sp.Expr


@dataclass(frozen=True)
class Multiplier:
    """Jacobi last multiplier with its origin."""

    m: sp.Expr
    provenance: tuple[str, ...] = ("user",)

    def __post_init__(self) -> None:
        """A multiplier is never zero."""
        if self.m == 0:
            msg = "multiplier must be nonzero"
            raise ValueError(msg)

    @property
    def label(self) -> str:
        """Short label such as M87."""
        if self.provenance == ("user",):
            return "M"
        return "M" + "".join(_short(label) for label in self.provenance)


@dataclass(frozen=True)
class DegeneratePair:
    """Symmetry pair whose determinant vanishes."""

    labels: tuple[str, str]
    determinant: sp.Expr = sp.S.Zero


@dataclass(frozen=True)
class PairEntry:
    """One row of a multiplier sweep."""

    labels: tuple[str, str]
    status: PairStatus
    determinant: sp.Expr
    multiplier: Multiplier | None = None
    duplicate_of: tuple[str, str] | None = None
    factor: sp.Expr | None = None


@dataclass(frozen=True)
class MultiplierRatio:
    """Ratio of two multipliers, a first integral."""

    ratio: sp.Expr
    trivial: bool


@dataclass(frozen=True)
class Lagrangian:
    """Lagrangian with its Euler-Lagrange completion terms f1*qd + f3."""

    l: sp.Expr  # noqa: E741
    f1: sp.Expr = sp.S.Zero
    f3: sp.Expr = sp.S.Zero
    multiplier: sp.Expr | None = None
    provenance: str = ""

    @property
    def label(self) -> str:
        """Short label such as L87."""
        if self.provenance.startswith("M"):
            return "L" + self.provenance[1:]
        return self.provenance or "L"


@dataclass(frozen=True)
class NoetherCertificate:
    """Accepted Noether symmetry with gauge and first integral."""

    symmetry: PointSymmetry
    gauge: sp.Expr
    integral: sp.Expr


@dataclass(frozen=True)
class NoetherRejection:
    """Generator that fails the Noether condition."""

    symmetry: PointSymmetry
    constraints: tuple[sp.Expr, ...]


@dataclass(frozen=True)
class NoetherEntry:
    """Noether subalgebra found for one Lagrangian."""

    lagrangian: Lagrangian
    count: int
    certificates: tuple[NoetherCertificate, ...]
    physical: bool = False


@dataclass(frozen=True)
class LinearPde2:
    """Linear second-order PDE in psi(t, x)."""

    c_tt: sp.Expr
    c_tx: sp.Expr
    c_xx: sp.Expr
    c_t: sp.Expr
    c_x: sp.Expr
    c_0: sp.Expr
    mode: PdeMode = PdeMode.GENERAL

    def __post_init__(self) -> None:
        """Some principal coefficient is nonzero."""
        if self.c_tt == 0 and self.c_tx == 0 and self.c_xx == 0:
            msg = "principal part vanishes"
            raise ValueError(msg)

    @property
    def coefficients(self) -> tuple[sp.Expr, ...]:
        """Coefficients of psi_tt, psi_tx, psi_xx, psi_t, psi_x, psi."""
        return (self.c_tt, self.c_tx, self.c_xx, self.c_t, self.c_x, self.c_0)


@dataclass(frozen=True)
class PdeSymmetry:
    """Generator xi_t d/dt + xi_x d/dx + lam*psi d/dpsi."""

    xi_t: sp.Expr
    xi_x: sp.Expr
    lam: sp.Expr = sp.S.Zero
    label: str = ""


@dataclass(frozen=True)
class DeterminingBranch:
    """One branch of the determining-equation solve."""

    status: BranchStatus
    path: tuple[str, ...]
    pde: LinearPde2 | None = None
    symmetries: tuple[PdeSymmetry, ...] = ()
    pinned: tuple[str, ...] = ()
    constraints: tuple[sp.Expr, ...] = ()


@dataclass(frozen=True)
class CharReduction:
    """PDE rewritten in characteristic coordinates (xi, x)."""

    xi: sp.Expr
    phi_xx: sp.Expr
    phi_x: sp.Expr
    phi: sp.Expr
    phi_xi: sp.Expr = sp.S.Zero

    @property
    def solvable(self) -> bool:
        """True when no phi_xi term blocks the Euler solve."""
        return self.phi_xi == 0


@dataclass(frozen=True)
class SolutionBasis:
    """Closed-form Cauchy-Euler solutions with arbitrary-function slots."""

    indicial: sp.Expr
    exponents: tuple[sp.Expr, ...]
    terms: tuple[sp.Expr, ...] = ()
    slots: tuple[str, ...] = ()
    repeated: bool = False

    @property
    def closed(self) -> bool:
        """True when a closed basis was found."""
        return bool(self.terms)


@dataclass(frozen=True)
class BranchOutcome:
    """Determining branch with its classification and reduction."""

    branch: DeterminingBranch
    pde_type: PdeType | None = None
    xi: sp.Expr | None = None
    reduction: CharReduction | None = None
    basis: SolutionBasis | None = None
    solution: Verification | None = None
    trivial: bool | None = None
    error: str | None = None


@dataclass(frozen=True)
class QuantizeOutcome:
    """Quantization of one Lagrangian's Noether generators."""

    lagrangian: str
    mode: PdeMode
    generators: tuple[PdeSymmetry, ...]
    branches: tuple[BranchOutcome, ...] = ()

    @property
    def ok(self) -> bool:
        """No solved branch failed a back-substitution check."""
        return all(
            (b.solution is None or b.solution.ok) and b.trivial is not False
            for b in self.branches
        )


def _short(label: str) -> str:
    """Trailing digits of a generator label, or the label itself."""
    digits = "".join(ch for ch in label if ch.isdigit())
    return digits if digits and label[: -len(digits)].isalpha() else label
