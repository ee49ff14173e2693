"""Linear PDEs admitting prescribed point symmetries."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import sympy as sp

from ..const import DEFAULT_ANSATZ_DEGREE, MAX_ANSATZ_DEGREE, MAX_SPLIT_DEPTH
from ..exceptions import AnsatzInsufficientError, ZeroDenominatorError
from ..models import (
    BranchStatus,
    DeterminingBranch,
    LinearPde2,
    PdeMode,
    PdeSymmetry,
    Verification,
)
from ..symcore import Q, T, X, linear_conditions, normalize
from ..symcore.ansatz import build, laurent_monomials, log_extended
from ..symcore.linsolve import is_affine, solve_linear
from .prolong import (
    JETS,
    add_forms,
    form_total_derivative,
    geometric_eta,
    jet,
    multiplier_eta,
    order,
    scale_form,
)

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from ..models import PointSymmetry
    from .prolong import LinearForm

LOGGER = logging.getLogger(__name__)

TT, TX, XX, TD, XD, ZERO = (2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)


def coefficient_map(pde: LinearPde2) -> dict[tuple[int, int], sp.Expr]:
    """Coefficients keyed by the jet index they multiply."""
    return dict(zip((TT, TX, XX, TD, XD, ZERO), pde.coefficients, strict=True))


def leading_index(coeffs: Mapping[tuple[int, int], sp.Expr]) -> tuple[int, int]:
    """Jet solved for when restricting to solutions: psi_tt, else psi_t."""
    if coeffs[TT] != 0:
        return TT
    if coeffs[TX] == 0 and coeffs[TD] != 0:
        return TD
    msg = "c_tt vanishes and psi_t cannot be eliminated"
    raise ZeroDenominatorError(msg)


def _on_shell(
    form: LinearForm, coeffs: Mapping[tuple[int, int], sp.Expr]
) -> LinearForm:
    lead = leading_index(coeffs)
    equation = {jet(*k): c for k, c in coeffs.items() if c != 0 and k != lead}
    value = scale_form(equation, -1 / coeffs[lead])
    form = dict(form)
    if lead == TD:
        if jet(*TT) in form:
            msg = "psi_tt survives in an evolution equation"
            raise ZeroDenominatorError(msg)
        mixed = form.pop(jet(*TX), None)
        if mixed is not None:
            form = add_forms(form, scale_form(form_total_derivative(value, 1), mixed))
    coefficient = form.pop(jet(*lead), None)
    if coefficient is not None:
        form = add_forms(form, scale_form(value, coefficient))
    return form


def symmetry_condition(
    coeffs: Mapping[tuple[int, int], sp.Expr],
    tau: sp.Expr,
    xi: sp.Expr,
    lam: sp.Expr,
) -> LinearForm:
    """
    Prolonged generator applied to the equation, restricted to solutions.

    The result is linear in the jets that remain after eliminating the
    leading derivative; every coefficient must vanish.
    """
    form: LinearForm = {}
    for index, c in coeffs.items():
        if c == 0:
            continue
        flow = tau * sp.diff(c, T) + xi * sp.diff(c, X)
        form = add_forms(
            form,
            {jet(*index): flow},
            scale_form(geometric_eta(tau, xi, index), c),
            scale_form(multiplier_eta(lam, index), c),
        )
    return _on_shell(form, coeffs)


def pde_symmetry_residual(pde: LinearPde2, sym: PdeSymmetry) -> dict[str, sp.Expr]:
    """Normalized coefficient of each remaining jet; all zero for a symmetry."""
    form = symmetry_condition(coefficient_map(pde), sym.xi_t, sym.xi_x, sym.lam)
    ordered = [s for s in JETS.values() if s in form]
    return {s.name: normalize(form[s]) for s in ordered}


def is_pde_symmetry(pde: LinearPde2, sym: PdeSymmetry) -> Verification:
    """Verdict with the first nonzero residual entry."""
    for residual in pde_symmetry_residual(pde, sym).values():
        if residual != 0:
            return Verification(ok=False, residual=residual)
    return Verification(ok=True, residual=sp.S.Zero)


def pde_symmetry_from_point(sym: PointSymmetry) -> PdeSymmetry:
    """Geometric part of a classical generator with q renamed to x."""
    return PdeSymmetry(
        xi_t=normalize(sym.v.xreplace({Q: X})),
        xi_x=normalize(sym.g.xreplace({Q: X})),
        label=sym.label,
    )


@dataclass(frozen=True)
class _Branch:
    assignments: Mapping[sp.Symbol, sp.Expr]
    unknowns: tuple[sp.Symbol, ...]
    parameters: tuple[sp.Symbol, ...] = ()
    equations: tuple[sp.Expr, ...] = ()
    stage: int = 0
    path: tuple[str, ...] = ()
    depth: int = 0

    def substitute(self, symbol: sp.Symbol, value: sp.Expr) -> _Branch:
        mapping = {symbol: value}
        assignments = {
            u: sp.expand(v.xreplace(mapping)) for u, v in self.assignments.items()
        }
        assignments[symbol] = value
        return replace(
            self,
            assignments=assignments,
            unknowns=tuple(u for u in self.unknowns if u != symbol),
            parameters=tuple(p for p in self.parameters if p != symbol),
            equations=tuple(sp.expand(e.xreplace(mapping)) for e in self.equations),
        )

    def bind(self, symbol: sp.Symbol, value: sp.Expr, label: str) -> _Branch:
        bound = self.substitute(symbol, value)
        return replace(bound, path=(*self.path, label), depth=self.depth + 1)


def _size(eq: sp.Expr) -> tuple[int, tuple]:
    return len(sp.Add.make_args(eq)), sp.default_sort_key(eq)


def _numerator(eq: sp.Expr) -> sp.Expr:
    return sp.expand(sp.fraction(sp.together(eq))[0])


def _linear_coefficient(
    eq: sp.Expr, unknown: sp.Symbol, live: set[sp.Symbol]
) -> sp.Expr | None:
    """Coefficient c when eq = c*unknown + (terms free of unknown), c a monomial."""
    coeff = sp.S.Zero
    for term in sp.Add.make_args(eq):
        if not term.has(unknown):
            continue
        factor, dependent = term.as_independent(*live, as_Add=False)
        if dependent != unknown:
            return None
        coeff += factor
    coeff = sp.expand(coeff)
    if coeff == 0 or len(sp.Add.make_args(coeff)) != 1:
        return None
    return coeff


class DeterminingSystem:
    """Template PDE and symmetry multipliers with undetermined coefficients."""

    def __init__(
        self,
        generators: Sequence[PdeSymmetry],
        *,
        mode: PdeMode = PdeMode.GENERAL,
        ansatz_degree: int = DEFAULT_ANSATZ_DEGREE,
        allow_log: bool = False,
        pde: LinearPde2 | None = None,
    ) -> None:
        """
        Build the template, the multiplier ansatz and the staged conditions.

        A given pde fixes the template; only the multipliers stay unknown.
        """
        if not 0 <= ansatz_degree <= MAX_ANSATZ_DEGREE:
            msg = f"ansatz degree must lie in [0, {MAX_ANSATZ_DEGREE}]"
            raise ValueError(msg)
        self.mode = mode if pde is None else pde.mode
        self.generators = tuple(generators)
        template_unknowns: list[sp.Symbol] = []
        if pde is not None:
            self.template = coefficient_map(pde)
        elif mode == PdeMode.SCHRODINGER:
            basis = laurent_monomials([X], ansatz_degree)
            self.template = {TT: sp.S.Zero, TX: sp.S.Zero, TD: 2 * sp.I}
            for index, name in ((XX, "f1"), (XD, "f2"), (ZERO, "f3")):
                self.template[index], unknowns = build(name, basis)
                template_unknowns.extend(unknowns)
        else:
            basis = laurent_monomials([T, X], ansatz_degree)
            self.template = {TT: sp.S.One}
            names = ("c_tx", "c_xx", "c_t", "c_x", "c_0")
            for index, name in zip((TX, XX, TD, XD, ZERO), names, strict=True):
                self.template[index], unknowns = build(name, basis)
                template_unknowns.extend(unknowns)
        lam_basis = laurent_monomials([T, X], ansatz_degree)
        if allow_log:
            lam_basis = log_extended(lam_basis, [T, X])
        self.multipliers: list[sp.Expr] = []
        lam_unknowns: list[sp.Symbol] = []
        for number, _ in enumerate(self.generators, start=1):
            lam, unknowns = build(f"l{number}", lam_basis)
            self.multipliers.append(lam)
            lam_unknowns.extend(unknowns)
        self.template_unknowns = frozenset(template_unknowns)
        self.unknowns = (*template_unknowns, *lam_unknowns)
        self._rank = {u: i for i, u in enumerate(self.unknowns)}
        self.stages = self._stage_sources()
        LOGGER.debug(
            "Determining system: %s template and %s multiplier unknowns, %s stages",
            len(template_unknowns),
            len(lam_unknowns),
            len(self.stages),
        )

    def _stage_sources(self) -> list[list[sp.Expr]]:
        pairs = sorted(
            zip(self.generators, self.multipliers, strict=True),
            key=lambda pair: sp.diff(pair[0].xi_t, X) != 0,
        )
        # generators with tau_x = 0 give conditions linear in the template
        forms = [
            symmetry_condition(self.template, g.xi_t, g.xi_x, lam) for g, lam in pairs
        ]
        orders = sorted({order(s) for form in forms for s in form}, reverse=True)
        return [
            [
                form[s]
                for form in forms
                for s in JETS.values()
                if s in form and order(s) == k
            ]
            for k in orders
        ]

    def solve(self) -> list[DeterminingBranch]:
        """Explore every branch depth first."""
        pending = [_Branch(assignments={}, unknowns=self.unknowns)]
        finished: list[DeterminingBranch] = []
        while pending:
            branch = pending.pop()
            outcome = self._advance(branch)
            if isinstance(outcome, DeterminingBranch):
                finished.append(outcome)
            else:
                pending.extend(reversed(outcome))
        return finished

    def _advance(self, branch: _Branch) -> DeterminingBranch | list[_Branch]:
        while True:
            branch, ok = self._settle(branch)
            if not ok:
                return self._closed(branch, BranchStatus.INCONSISTENT)
            if branch.equations:
                outcome = self._reduce(branch)
                if isinstance(outcome, _Branch):
                    branch = outcome
                    continue
                return outcome
            if branch.stage == len(self.stages):
                return self._finish(branch)
            branch, ok = self._absorb(branch)
            if not ok:
                return self._closed(branch, BranchStatus.INCONSISTENT)

    def _absorb(self, branch: _Branch) -> tuple[_Branch, bool]:
        for source in self.stages[branch.stage]:
            expression = source.xreplace(branch.assignments)
            conditions = linear_conditions(expression, [T, X])
            branch = replace(branch, equations=(*branch.equations, *conditions))
            branch, ok = self._settle(branch)
            if not ok:
                return branch, False
        return replace(branch, stage=branch.stage + 1), True

    def _settle(self, branch: _Branch) -> tuple[_Branch, bool]:
        """Solve affine equations until only nonlinear ones remain."""
        equations = list(branch.equations)
        assignments = dict(branch.assignments)
        unknowns = list(branch.unknowns)
        parameters = set(branch.parameters)
        while True:
            live = set(unknowns)
            affine: list[sp.Expr] = []
            other: list[sp.Expr] = []
            for eq in equations:
                eq = sp.expand(eq)
                if eq == 0:
                    continue
                symbols = eq.free_symbols
                if not symbols & live:
                    if not symbols & parameters:
                        state = replace(branch, equations=(eq,))
                        return state, False
                    other.append(eq)
                elif not symbols & parameters and is_affine(eq, live):
                    affine.append(eq)
                else:
                    other.append(eq)
            if not affine:
                break
            involved = [u for u in unknowns if any(eq.has(u) for eq in affine)]
            result = solve_linear(affine, involved)
            if not result.consistent:
                return replace(branch, equations=tuple(affine)), False
            solved = dict(result.assignments)
            assignments = {
                u: sp.expand(v.xreplace(solved)) for u, v in assignments.items()
            }
            assignments.update(solved)
            unknowns = [u for u in unknowns if u not in solved]
            equations = [eq.xreplace(solved) for eq in other]
        settled = replace(
            branch,
            assignments=assignments,
            unknowns=tuple(unknowns),
            equations=tuple(equations),
        )
        return settled, True

    def _reduce(self, branch: _Branch) -> _Branch | DeterminingBranch | list[_Branch]:
        """Forced root, elimination or split on the nonlinear remainder."""
        live = set(branch.unknowns)
        equations = sorted(branch.equations, key=_size)
        for index, eq in enumerate(equations):
            present = eq.free_symbols & live
            if not present:
                rest = (*equations[:index], *equations[index + 1 :])
                return self._resolve_parameters(branch, eq, rest)
            if len(present) == 1:
                return self._roots(branch, eq, present.pop())
        for eq in equations:
            ranked = sorted(eq.free_symbols & live, key=self._rank.__getitem__)
            for unknown in ranked:
                coeff = _linear_coefficient(eq, unknown, live)
                if coeff is not None:
                    value = sp.expand(-(eq - coeff * unknown) / coeff)
                    return branch.substitute(unknown, value)
        return self._split(branch)

    def _roots(
        self, branch: _Branch, eq: sp.Expr, unknown: sp.Symbol
    ) -> _Branch | DeterminingBranch | list[_Branch]:
        num = _numerator(eq)
        _, factors = sp.factor_list(num, gaussian=num.has(sp.I))
        roots: list[sp.Expr] = []
        for factor, _ in factors:
            if not factor.has(unknown):
                continue
            poly = sp.Poly(factor, unknown)
            if poly.degree() == 1:
                root = sp.expand(-poly.nth(0) / poly.nth(1))
                if root not in roots:
                    roots.append(root)
        if not roots:
            # no root in Q(i)
            return self._closed(
                replace(branch, equations=(eq,)), BranchStatus.UNRESOLVED
            )
        if len(roots) == 1:
            return branch.substitute(unknown, roots[0])
        if branch.depth >= MAX_SPLIT_DEPTH:
            return self._closed(branch, BranchStatus.UNRESOLVED)
        LOGGER.debug("Branching over %s roots of %s", len(roots), unknown)
        return [
            branch.bind(unknown, root, f"{unknown}={sp.sstr(root)}") for root in roots
        ]

    def _split(self, branch: _Branch) -> DeterminingBranch | list[_Branch]:
        if branch.depth >= MAX_SPLIT_DEPTH:
            return self._closed(branch, BranchStatus.UNRESOLVED)
        pivot = self._pivot(branch)
        if pivot is None:
            return self._closed(branch, BranchStatus.UNRESOLVED)
        zero = branch.bind(pivot, sp.S.Zero, f"{pivot}=0")
        nonzero = replace(
            branch,
            unknowns=tuple(u for u in branch.unknowns if u != pivot),
            parameters=(*branch.parameters, pivot),
            path=(*branch.path, f"{pivot}!=0"),
            depth=branch.depth + 1,
        )
        LOGGER.debug("Splitting on %s at depth %s", pivot, branch.depth)
        return [zero, nonzero]

    def _resolve_parameters(
        self, branch: _Branch, target: sp.Expr, rest: tuple[sp.Expr, ...]
    ) -> _Branch | DeterminingBranch:
        base = replace(branch, equations=rest)
        num = _numerator(target)
        for parameter in branch.parameters:
            if not num.has(parameter):
                continue
            poly = sp.Poly(num, parameter)
            if poly.degree() != 1:
                continue
            value = normalize(-poly.nth(0) / poly.nth(1))
            if value == 0 or value.free_symbols & set(branch.unknowns):
                return self._closed(base, BranchStatus.INCONSISTENT)
            return base.bind(parameter, value, f"{parameter}={sp.sstr(value)}")
        return self._closed(
            replace(branch, equations=(target,)), BranchStatus.UNRESOLVED
        )

    def _pivot(self, branch: _Branch) -> sp.Symbol | None:
        live = set(branch.unknowns)
        counts: dict[sp.Symbol, int] = dict.fromkeys(branch.unknowns, 0)
        for eq in branch.equations:
            for term in sp.Add.make_args(eq):
                present = term.free_symbols & live
                if not present:
                    continue
                if len(present) > 1 or sp.Poly(term, *present).total_degree() > 1:
                    for symbol in present:
                        counts[symbol] += 1
        candidates = [u for u, n in counts.items() if n]
        if not candidates:
            return None
        return min(
            candidates,
            key=lambda u: (u not in self.template_unknowns, -counts[u], self._rank[u]),
        )

    def _closed(self, branch: _Branch, status: BranchStatus) -> DeterminingBranch:
        LOGGER.debug("Branch %s is %s", " / ".join(branch.path) or "root", status.value)
        return DeterminingBranch(
            status=status,
            path=branch.path,
            pinned=tuple(p.name for p in branch.parameters),
            constraints=tuple(branch.equations),
        )

    def _finish(self, branch: _Branch) -> DeterminingBranch:
        fill = {u: sp.S.Zero for u in branch.unknowns}
        fill.update({p: sp.S.One for p in branch.parameters})
        values = {u: v.xreplace(fill) for u, v in branch.assignments.items()}
        values.update(fill)

        def resolve(e: sp.Expr) -> sp.Expr | None:
            e = e.xreplace(values)
            return None if e.has(sp.zoo, sp.nan) else normalize(e)

        coefficients = [resolve(self.template[k]) for k in (TT, TX, XX, TD, XD, ZERO)]
        multipliers = [resolve(lam) for lam in self.multipliers]
        if any(c is None for c in (*coefficients, *multipliers)):
            return self._closed(branch, BranchStatus.UNRESOLVED)
        try:
            pde = LinearPde2(*coefficients, mode=self.mode)
        except ValueError:
            return self._closed(branch, BranchStatus.INCONSISTENT)
        symmetries = tuple(
            replace(g, lam=lam)
            for g, lam in zip(self.generators, multipliers, strict=True)
        )
        failures = [
            check.residual
            for check in (is_pde_symmetry(pde, s) for s in symmetries)
            if not check
        ]
        if failures:
            LOGGER.warning("Pinned branch %s fails its symmetry check", branch.path)
            return replace(
                self._closed(branch, BranchStatus.UNRESOLVED),
                constraints=tuple(failures),
            )
        return DeterminingBranch(
            status=BranchStatus.SOLVED,
            path=branch.path,
            pde=pde,
            symmetries=symmetries,
            pinned=tuple(p.name for p in branch.parameters),
        )


def solve_determining(
    generators: Sequence[PdeSymmetry],
    *,
    mode: PdeMode = PdeMode.GENERAL,
    ansatz_degree: int = DEFAULT_ANSATZ_DEGREE,
    allow_log: bool = False,
) -> list[DeterminingBranch]:
    """
    Linear PDEs admitting every generator, one per consistent branch.

    General-mode PDEs are scaled to c_tt = 1. Solved branches come first;
    branches that ran out of splits follow as unresolved.
    """
    system = DeterminingSystem(
        generators, mode=mode, ansatz_degree=ansatz_degree, allow_log=allow_log
    )
    branches = system.solve()
    solved: list[DeterminingBranch] = []
    for branch in branches:
        if branch.status != BranchStatus.SOLVED:
            continue
        if any(b.pde == branch.pde for b in solved):
            continue
        solved.append(branch)
    unresolved = [b for b in branches if b.status == BranchStatus.UNRESOLVED]
    LOGGER.info(
        "Determining equations: %s solved, %s unresolved, %s inconsistent branches",
        len(solved),
        len(unresolved),
        len(branches) - len(solved) - len(unresolved),
    )
    if not solved:
        constraints = [c for b in unresolved for c in b.constraints]
        msg = "no branch solves the determining equations within the ansatz"
        raise AnsatzInsufficientError(msg, constraints)
    return solved + unresolved


def solve_multipliers(
    pde: LinearPde2,
    generators: Sequence[PdeSymmetry],
    *,
    ansatz_degree: int = DEFAULT_ANSATZ_DEGREE,
    allow_log: bool = False,
) -> DeterminingBranch:
    """
    Multipliers that make every geometric generator a symmetry of a known PDE.

    The conditions are linear; multiples of psi d/dpsi left free are dropped.
    """
    system = DeterminingSystem(
        generators, ansatz_degree=ansatz_degree, allow_log=allow_log, pde=pde
    )
    for branch in system.solve():
        if branch.status == BranchStatus.SOLVED:
            return branch
    msg = f"no multipliers within the ansatz make the generators symmetries of {pde}"
    raise AnsatzInsufficientError(msg)
