"""Stage orchestration from point symmetries to the quantized equation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from itertools import combinations
from typing import TYPE_CHECKING, Any

import sympy as sp

from .const import (
    STAGE_LAGRANGIANS,
    STAGE_MULTIPLIERS,
    STAGE_NOETHER,
    STAGE_QUANTIZE,
    STAGE_SYMMETRIES,
)
from .exceptions import (
    CharacteristicError,
    ConsistencyError,
    JlmError,
    NotParabolicError,
    ProblemConfigError,
    StageError,
)
from .lagrange import (
    canonical_straightening_check,
    gauge_equivalent,
    lagrangian_from_multiplier,
    verify_lagrangian,
)
from .models import (
    BranchOutcome,
    BranchStatus,
    Lagrangian,
    PdeMode,
    PdeType,
    QuantizeOutcome,
)
from .multiplier import distinct_multipliers, multiplier_sweep, verify_multiplier
from .noether import noether_spectrum, noether_subalgebra
from .odesym import combine, find_point_symmetries, verify_point_symmetry
from .quantizer import (
    characteristic_coordinate,
    classify,
    pde_symmetry_from_point,
    solve_determining,
    solve_euler,
    to_normal_form,
    trivial_symmetry_check,
    verify_solution,
)
from .report import (
    StageCache,
    lagrangians_report,
    multipliers_report,
    noether_report,
    quantize_report,
    restore,
    stage_key,
    symmetries_report,
    text,
)
from .symcore import ODE_CTX, QD, normalize, parse

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from .models import (
        DeterminingBranch,
        Multiplier,
        NoetherEntry,
        PdeSymmetry,
        PointSymmetry,
    )
    from .problem import Problem
    from .report import Report

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunOptions:
    """Command-line overrides of problem settings."""

    symmetry_degree: int | None = None
    gauge_bound: int | None = None
    ansatz_degree: int | None = None
    allow_log: bool | None = None
    verify_only: bool = False
    xi: sp.Expr | None = None
    use_cache: bool = True


def resolve_lagrangian(
    problem: Problem, entries: Sequence[NoetherEntry]
) -> tuple[Lagrangian, tuple[PointSymmetry, ...] | None]:
    """
    Lagrangian named by the quantize settings.

    The setting is a computed label, an expression, or absent, in which case
    the first physical candidate is taken. The second item holds the known
    Noether generators, None when they still have to be computed.
    """
    wanted = problem.quantize.lagrangian
    if wanted is None:
        for entry in entries:
            if entry.physical:
                return entry.lagrangian, tuple(c.symmetry for c in entry.certificates)
        msg = "no physical Lagrangian to quantize"
        raise ProblemConfigError(msg)
    for entry in entries:
        if entry.lagrangian.label == wanted:
            return entry.lagrangian, tuple(c.symmetry for c in entry.certificates)
    try:
        value = normalize(parse(wanted, ODE_CTX), ODE_CTX)
    except JlmError as err:
        msg = f"quantize.lagrangian {wanted!r} is neither a label nor an expression"
        raise ProblemConfigError(msg) from err
    lagrangian = Lagrangian(
        value, multiplier=normalize(sp.diff(value, QD, 2)), provenance="user"
    )
    check = verify_lagrangian(lagrangian, problem.ode)
    if not check:
        msg = f"{wanted} is not a Lagrangian of the equation: {check.residual}"
        raise ConsistencyError(msg)
    return lagrangian, None


def pde_from_lagrangian(
    problem: Problem,
    symmetries: Sequence[PointSymmetry],
    entries: Sequence[NoetherEntry] = (),
) -> tuple[str, list[PdeSymmetry]]:
    """
    Generators to impose on the linear equation, with q renamed to x.

    Explicit combinations in the quantize settings win; otherwise the
    Noether subalgebra of the chosen Lagrangian is used.
    """
    settings = problem.quantize
    if settings.generators:
        by_label = {s.label: s for s in symmetries}
        missing = {k for g in settings.generators for k, _ in g.combination} - set(
            by_label
        )
        if missing:
            msg = f"generators refer to unknown symmetries {sorted(missing)}"
            raise ProblemConfigError(msg)
        chosen = [
            combine([(c, by_label[label]) for label, c in g.combination], g.label)
            for g in settings.generators
        ]
        label = settings.lagrangian or "given"
    else:
        lagrangian, known = resolve_lagrangian(problem, entries)
        if known is None:
            known = tuple(noether_subalgebra(lagrangian, symmetries, problem.ode))
        chosen = list(known)
        label = lagrangian.label
    LOGGER.info(
        "Quantizing %s with %s", label, ", ".join(s.label for s in chosen) or "nothing"
    )
    return label, [pde_symmetry_from_point(s) for s in chosen]


def reduce_branch(
    branch: DeterminingBranch, xi: sp.Expr | None = None
) -> BranchOutcome:
    """Classify a solved branch and reduce it when it is parabolic."""
    pde = branch.pde
    if pde is None:
        return BranchOutcome(branch)
    pde_type = classify(pde)
    outcome = BranchOutcome(branch, pde_type=pde_type)
    if pde_type != PdeType.PARABOLIC:
        return replace(outcome, trivial=trivial_symmetry_check(pde))
    try:
        coordinate = characteristic_coordinate(pde, xi)
        reduction = to_normal_form(pde, coordinate)
    except (CharacteristicError, NotParabolicError) as err:
        LOGGER.warning("Branch %s not reduced: %s", branch.path, err)
        return replace(outcome, trivial=trivial_symmetry_check(pde), error=str(err))
    outcome = replace(outcome, xi=coordinate, reduction=reduction)
    if not reduction.solvable:
        return replace(
            outcome,
            trivial=trivial_symmetry_check(pde),
            error="normal form keeps a phi_xi term",
        )
    basis = solve_euler(reduction)
    solution = verify_solution(pde, reduction, basis) if basis.closed else None
    return replace(
        outcome,
        basis=basis,
        solution=solution,
        trivial=trivial_symmetry_check(pde, reduction, basis),
    )


def quantize(
    generators: Sequence[PdeSymmetry],
    *,
    label: str,
    mode: PdeMode,
    ansatz_degree: int,
    allow_log: bool,
    xi: sp.Expr | None = None,
) -> QuantizeOutcome:
    """Solve the determining equations and reduce every solved branch."""
    branches = solve_determining(
        generators, mode=mode, ansatz_degree=ansatz_degree, allow_log=allow_log
    )
    outcomes = tuple(
        reduce_branch(b, xi) if b.status == BranchStatus.SOLVED else BranchOutcome(b)
        for b in branches
    )
    return QuantizeOutcome(label, mode, tuple(generators), outcomes)


def equivalent_pairs(lagrangians: Sequence[Lagrangian]) -> list[tuple[str, str]]:
    """Label pairs whose Lagrangians differ by a total derivative."""
    return [
        (a.label, b.label)
        for a, b in combinations(lagrangians, 2)
        if gauge_equivalent(a, b)
    ]


class Pipeline:
    """Runs the stages of one problem, memoized and backed by the stage cache."""

    def __init__(self, problem: Problem, options: RunOptions | None = None) -> None:
        """Prepare an empty run."""
        self.problem = problem
        self.options = options or RunOptions()
        self.cache = StageCache.for_problem(problem) if self.options.use_cache else None
        self.reports: dict[str, Report] = {}
        self._objects: dict[str, Any] = {}
        self._keys: dict[str, str] = {}

    @property
    def symmetry_degree(self) -> int:
        """Degree of the symmetry search."""
        if self.options.symmetry_degree is not None:
            return self.options.symmetry_degree
        return self.problem.symmetry_degree

    @property
    def gauge_bound(self) -> int:
        """Bound of the gauge and completion ansatz."""
        if self.options.gauge_bound is not None:
            return self.options.gauge_bound
        return self.problem.gauge_bound

    @property
    def allow_log(self) -> bool:
        """Log atoms in the gauge ansatz."""
        return self.options.allow_log or self.problem.allow_log

    def _stage(
        self,
        stage: str,
        settings: dict[str, Any],
        compute: Callable[[], tuple[Report, Any]],
        upstream: str | None = None,
    ) -> Any:
        if stage in self._objects:
            return self._objects[stage]
        previous = self._keys.get(upstream or "", "")
        key = stage_key(self.problem.digest, stage, settings, previous)
        self._keys[stage] = key
        cached = self.cache.get(stage, key) if self.cache is not None else None
        restored = restore(stage, cached) if cached is not None else None
        if cached is not None and (restored is not None or stage == STAGE_QUANTIZE):
            report, objects = cached, restored
        else:
            try:
                report, objects = compute()
            except JlmError as err:
                LOGGER.exception("Stage %s failed", stage)
                raise StageError(stage, str(err)) from err
            if self.cache is not None:
                self.cache.put(stage, key, report)
        self.reports[stage] = report
        self._objects[stage] = objects
        if not report["ok"]:
            LOGGER.warning("Stage %s failed its verification", stage)
        return objects

    def failed(self) -> str | None:
        """First stage whose report failed verification."""
        return next((name for name, r in self.reports.items() if not r["ok"]), None)

    def symmetries(self) -> tuple[PointSymmetry, ...]:
        """Given generators verified, or a basis found by the polynomial search."""
        problem = self.problem
        search = not problem.symmetries and not self.options.verify_only

        def compute() -> tuple[Report, Any]:
            if search:
                found = tuple(find_point_symmetries(problem.ode, self.symmetry_degree))
            else:
                found = problem.symmetries
            checks = [verify_point_symmetry(s, problem.ode) for s in found]
            canonical = None
            if problem.canonical is not None and not search:
                settings = problem.canonical
                canonical = canonical_straightening_check(
                    problem.symmetry(settings.s1),
                    problem.symmetry(settings.s2),
                    settings.tnew,
                    settings.xnew,
                    ode=problem.ode,
                    target=settings.target,
                )
            report = symmetries_report(
                found, checks, searched=search, canonical=canonical
            )
            return report, found

        settings = {"degree": self.symmetry_degree if search else None}
        return self._stage(STAGE_SYMMETRIES, settings, compute)

    def multipliers(self) -> tuple[Multiplier, ...]:
        """Distinct pair multipliers followed by the problem's own."""
        symmetries = self.symmetries()

        def compute() -> tuple[Report, Any]:
            entries = multiplier_sweep(self.problem.ode, symmetries)
            found = (*distinct_multipliers(entries), *self.problem.multipliers)
            checks = [verify_multiplier(self.problem.ode, m) for m in found]
            report = multipliers_report(entries, found, checks, self.problem.expected)
            return report, found

        return self._stage(STAGE_MULTIPLIERS, {}, compute, STAGE_SYMMETRIES)

    def lagrangians(self) -> tuple[Lagrangian, ...]:
        """Lagrangian of every multiplier; any failure fails the stage."""
        multipliers = self.multipliers()

        def compute() -> tuple[Report, Any]:
            built: list[Lagrangian] = []
            failures: list[tuple[str, JlmError]] = []
            for m in multipliers:
                try:
                    built.append(
                        lagrangian_from_multiplier(
                            self.problem.ode,
                            m,
                            bound=self.gauge_bound,
                            allow_log=self.allow_log,
                        )
                    )
                except JlmError as err:
                    LOGGER.warning("No Lagrangian for %s: %s", m.label, err)
                    failures.append((m.label, err))
            report = lagrangians_report(
                built, failures, equivalent_pairs(built), self.problem.expected
            )
            return report, tuple(built)

        settings = {"bound": self.gauge_bound, "log": self.allow_log}
        return self._stage(STAGE_LAGRANGIANS, settings, compute, STAGE_MULTIPLIERS)

    def noether(self) -> tuple[NoetherEntry, ...]:
        """Noether spectrum over all Lagrangians."""
        symmetries = self.symmetries()
        lagrangians = self.lagrangians()

        def compute() -> tuple[Report, Any]:
            entries = noether_spectrum(
                lagrangians,
                symmetries,
                self.problem.ode,
                bound=self.gauge_bound,
                allow_log=self.allow_log,
            )
            return noether_report(entries, self.problem.expected), tuple(entries)

        settings = {"bound": self.gauge_bound, "log": self.allow_log}
        return self._stage(STAGE_NOETHER, settings, compute, STAGE_LAGRANGIANS)

    def quantize(self) -> QuantizeOutcome | None:
        """
        Linear equation admitting the chosen Noether generators.

        None when the report comes from the stage cache.
        """
        problem = self.problem
        settings = problem.quantize
        symmetries = self.symmetries()
        entries = self.noether() if self._needs_spectrum() else ()
        degree = settings.ansatz_degree
        if self.options.ansatz_degree is not None:
            degree = self.options.ansatz_degree
        allow_log = self.options.allow_log or settings.allow_log
        xi = self.options.xi if self.options.xi is not None else problem.xi

        def compute() -> tuple[Report, Any]:
            label, generators = pde_from_lagrangian(problem, symmetries, entries)
            outcome = quantize(
                generators,
                label=label,
                mode=settings.mode,
                ansatz_degree=degree,
                allow_log=allow_log,
                xi=xi,
            )
            return quantize_report(outcome, problem.expected), outcome

        key = {
            "mode": settings.mode.value,
            "degree": degree,
            "log": allow_log,
            "xi": text(xi),
            "lagrangian": settings.lagrangian,
            "generators": [
                [g.label, [[k, text(c)] for k, c in g.combination]]
                for g in settings.generators
            ],
        }
        upstream = STAGE_NOETHER if entries else STAGE_SYMMETRIES
        return self._stage(STAGE_QUANTIZE, key, compute, upstream)

    def _needs_spectrum(self) -> bool:
        settings = self.problem.quantize
        if settings.generators:
            return False
        if settings.lagrangian is None:
            return True
        try:
            parse(settings.lagrangian, ODE_CTX)
        except JlmError:
            return True
        return False

    def run(self, stages: Sequence[str]) -> dict[str, Report]:
        """Run stages in order, stopping after the first failed verification."""
        steps: dict[str, Callable[[], Any]] = {
            STAGE_SYMMETRIES: self.symmetries,
            STAGE_MULTIPLIERS: self.multipliers,
            STAGE_LAGRANGIANS: self.lagrangians,
            STAGE_NOETHER: self.noether,
            STAGE_QUANTIZE: self.quantize,
        }
        for stage in stages:
            steps[stage]()
            if self.failed() is not None:
                break
            if stage == STAGE_MULTIPLIERS and not self._objects[stage]:
                LOGGER.info("No multipliers; later stages skipped")
                break
        return self.reports

