"""Problem files: schema, validation and loading."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

import sympy as sp
import voluptuous as vol

from .const import (
    CONF_ALLOW_LOG,
    CONF_ANSATZ_DEGREE,
    CONF_CANONICAL,
    CONF_COMBINATION,
    CONF_EXPECTED,
    CONF_EXPONENTS,
    CONF_G,
    CONF_GAUGE_BOUND,
    CONF_GENERATORS,
    CONF_INTEGRALS,
    CONF_LABEL,
    CONF_LAGRANGIAN,
    CONF_LAGRANGIANS,
    CONF_M,
    CONF_MODE,
    CONF_MULTIPLIERS,
    CONF_NAME,
    CONF_NOETHER_COUNTS,
    CONF_ODE,
    CONF_PDE,
    CONF_QUANTIZE,
    CONF_RHS,
    CONF_S1,
    CONF_S2,
    CONF_SYMMETRIES,
    CONF_SYMMETRY_DEGREE,
    CONF_TARGET,
    CONF_TNEW,
    CONF_V,
    CONF_XI,
    CONF_XNEW,
    CONF_ZERO_CHECK_POINTS,
    DEFAULT_ANSATZ_DEGREE,
    DEFAULT_GAUGE_BOUND,
    DEFAULT_SYMMETRY_DEGREE,
    DEFAULT_ZERO_CHECK_POINTS,
    MAX_ANSATZ_DEGREE,
    MAX_GAUGE_BOUND,
    MAX_SYMMETRY_DEGREE,
    MODE_GENERAL,
    MODE_SCHRODINGER,
)
from .exceptions import JlmError, ProblemConfigError
from .models import LinearPde2, Multiplier, Ode2, PdeMode, PointSymmetry
from .symcore import ODE_CTX, PDE_CTX, normalize, parse

if TYPE_CHECKING:
    from collections.abc import Mapping

    from .models import VarCtx

LOGGER = logging.getLogger(__name__)

PDE_KEYS = ("c_tt", "c_tx", "c_xx", "c_t", "c_x", "c_0")

EXPRESSION = vol.All(vol.Any(str, int), vol.Coerce(str))
LABEL = vol.All(str, vol.Length(min=1), vol.Match(r"^[A-Za-z][A-Za-z0-9_]*$"))

SYMMETRY_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_LABEL): LABEL,
        vol.Required(CONF_V): EXPRESSION,
        vol.Required(CONF_G): EXPRESSION,
    }
)

MULTIPLIER_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_LABEL): LABEL,
        vol.Required(CONF_M): EXPRESSION,
    }
)

GENERATOR_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_LABEL): LABEL,
        vol.Required(CONF_COMBINATION): vol.All(
            {LABEL: EXPRESSION}, vol.Length(min=1)
        ),
    }
)

QUANTIZE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_LAGRANGIAN): EXPRESSION,
        vol.Optional(CONF_MODE, default=MODE_GENERAL): vol.In(
            [MODE_GENERAL, MODE_SCHRODINGER]
        ),
        vol.Optional(CONF_ANSATZ_DEGREE, default=DEFAULT_ANSATZ_DEGREE): vol.All(
            int, vol.Range(min=0, max=MAX_ANSATZ_DEGREE)
        ),
        vol.Optional(CONF_ALLOW_LOG, default=False): bool,
        vol.Optional(CONF_GENERATORS, default=list): [GENERATOR_SCHEMA],
    }
)

CANONICAL_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_S1): LABEL,
        vol.Required(CONF_S2): LABEL,
        vol.Required(CONF_TNEW): EXPRESSION,
        vol.Required(CONF_XNEW): EXPRESSION,
        vol.Optional(CONF_TARGET): EXPRESSION,
    }
)

EXPECTED_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_MULTIPLIERS, default=dict): {LABEL: EXPRESSION},
        vol.Optional(CONF_LAGRANGIANS, default=dict): {LABEL: EXPRESSION},
        vol.Optional(CONF_NOETHER_COUNTS, default=dict): {
            LABEL: vol.All(int, vol.Range(min=0))
        },
        vol.Optional(CONF_INTEGRALS, default=dict): {LABEL: [EXPRESSION]},
        vol.Optional(CONF_PDE): [{vol.In(PDE_KEYS): EXPRESSION}],
        vol.Optional(CONF_EXPONENTS, default=list): [EXPRESSION],
    }
)

PROBLEM_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_NAME): vol.All(str, vol.Length(min=1)),
        vol.Required(CONF_ODE): {vol.Required(CONF_RHS): EXPRESSION},
        vol.Optional(CONF_SYMMETRIES, default=list): [SYMMETRY_SCHEMA],
        vol.Optional(CONF_SYMMETRY_DEGREE, default=DEFAULT_SYMMETRY_DEGREE): vol.All(
            int, vol.Range(min=0, max=MAX_SYMMETRY_DEGREE)
        ),
        vol.Optional(CONF_MULTIPLIERS, default=list): [MULTIPLIER_SCHEMA],
        vol.Optional(CONF_GAUGE_BOUND, default=DEFAULT_GAUGE_BOUND): vol.All(
            int, vol.Range(min=0, max=MAX_GAUGE_BOUND)
        ),
        vol.Optional(CONF_ALLOW_LOG, default=True): bool,
        vol.Optional(CONF_QUANTIZE): QUANTIZE_SCHEMA,
        vol.Optional(CONF_CANONICAL): CANONICAL_SCHEMA,
        vol.Optional(CONF_XI): EXPRESSION,
        vol.Optional(
            CONF_ZERO_CHECK_POINTS, default=DEFAULT_ZERO_CHECK_POINTS
        ): vol.All(int, vol.Range(min=0)),
        vol.Optional(CONF_EXPECTED, default=dict): EXPECTED_SCHEMA,
    }
)


@dataclass(frozen=True)
class GeneratorSpec:
    """Named constant combination of classical generators."""

    label: str
    combination: tuple[tuple[str, sp.Expr], ...]


@dataclass(frozen=True)
class QuantizeSettings:
    """Options of the quantize stage."""

    lagrangian: str | None = None
    mode: PdeMode = PdeMode.GENERAL
    ansatz_degree: int = DEFAULT_ANSATZ_DEGREE
    allow_log: bool = False
    generators: tuple[GeneratorSpec, ...] = ()


@dataclass(frozen=True)
class CanonicalSettings:
    """Candidate straightening of two generators."""

    s1: str
    s2: str
    tnew: sp.Expr
    xnew: sp.Expr
    target: sp.Expr | None = None


@dataclass(frozen=True)
class Expected:
    """Reference values a report is compared against."""

    multipliers: Mapping[str, sp.Expr] = field(default_factory=dict)
    lagrangians: Mapping[str, sp.Expr] = field(default_factory=dict)
    noether_counts: Mapping[str, int] = field(default_factory=dict)
    integrals: Mapping[str, tuple[sp.Expr, ...]] = field(default_factory=dict)
    pdes: tuple[LinearPde2, ...] = ()
    exponents: tuple[sp.Expr, ...] = ()


@dataclass(frozen=True)
class Problem:
    """Validated problem file."""

    name: str
    ode: Ode2
    symmetries: tuple[PointSymmetry, ...] = ()
    symmetry_degree: int = DEFAULT_SYMMETRY_DEGREE
    multipliers: tuple[Multiplier, ...] = ()
    gauge_bound: int = DEFAULT_GAUGE_BOUND
    allow_log: bool = True
    quantize: QuantizeSettings = field(default_factory=QuantizeSettings)
    canonical: CanonicalSettings | None = None
    xi: sp.Expr | None = None
    zero_check_points: int = DEFAULT_ZERO_CHECK_POINTS
    expected: Expected = field(default_factory=Expected)
    digest: str = ""
    path: Path | None = None

    def symmetry(self, label: str) -> PointSymmetry:
        """Generator by label."""
        for sym in self.symmetries:
            if sym.label == label:
                return sym
        msg = f"unknown symmetry {label!r}"
        raise ProblemConfigError(msg)


def content_digest(data: Mapping[str, Any]) -> str:
    """Stable hash of the raw problem data."""
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _expr(text: str, ctx: VarCtx, where: str) -> sp.Expr:
    try:
        return normalize(parse(text, ctx), ctx)
    except JlmError as err:
        msg = f"{where}: {err}"
        raise ProblemConfigError(msg) from err


def _unique(labels: list[str], where: str) -> None:
    seen: set[str] = set()
    for label in labels:
        if label in seen:
            msg = f"{where}: duplicate label {label!r}"
            raise ProblemConfigError(msg)
        seen.add(label)


def _expected(data: Mapping[str, Any]) -> Expected:
    pdes = []
    for index, entry in enumerate(data.get(CONF_PDE, [])):
        where = f"{CONF_EXPECTED}.{CONF_PDE}[{index}]"
        values = [_expr(str(entry.get(k, 0)), PDE_CTX, where) for k in PDE_KEYS]
        try:
            pdes.append(LinearPde2(*values))
        except ValueError as err:
            msg = f"{where}: {err}"
            raise ProblemConfigError(msg) from err
    return Expected(
        multipliers={
            k: _expr(v, ODE_CTX, f"{CONF_EXPECTED}.{CONF_MULTIPLIERS}.{k}")
            for k, v in data[CONF_MULTIPLIERS].items()
        },
        lagrangians={
            k: _expr(v, ODE_CTX, f"{CONF_EXPECTED}.{CONF_LAGRANGIANS}.{k}")
            for k, v in data[CONF_LAGRANGIANS].items()
        },
        noether_counts=dict(data[CONF_NOETHER_COUNTS]),
        integrals={
            k: tuple(_expr(v, ODE_CTX, CONF_INTEGRALS) for v in vs)
            for k, vs in data[CONF_INTEGRALS].items()
        },
        pdes=tuple(pdes),
        exponents=tuple(
            _expr(v, PDE_CTX, f"{CONF_EXPECTED}.{CONF_EXPONENTS}")
            for v in data[CONF_EXPONENTS]
        ),
    )


def _quantize(data: Mapping[str, Any] | None, labels: set[str]) -> QuantizeSettings:
    if data is None:
        return QuantizeSettings()
    generators = []
    for entry in data[CONF_GENERATORS]:
        unknown = set(entry[CONF_COMBINATION]) - labels if labels else set()
        if unknown:
            msg = f"generator {entry[CONF_LABEL]} uses unknown {sorted(unknown)}"
            raise ProblemConfigError(msg)
        combination = tuple(
            (label, _expr(value, ODE_CTX, f"generator {entry[CONF_LABEL]}"))
            for label, value in entry[CONF_COMBINATION].items()
        )
        generators.append(GeneratorSpec(entry[CONF_LABEL], combination))
    _unique([g.label for g in generators], CONF_GENERATORS)
    return QuantizeSettings(
        lagrangian=data.get(CONF_LAGRANGIAN),
        mode=PdeMode(data[CONF_MODE]),
        ansatz_degree=data[CONF_ANSATZ_DEGREE],
        allow_log=data[CONF_ALLOW_LOG],
        generators=tuple(generators),
    )


def _canonical(
    data: Mapping[str, Any] | None, labels: set[str]
) -> CanonicalSettings | None:
    if data is None:
        return None
    for key in (CONF_S1, CONF_S2):
        if data[key] not in labels:
            msg = f"{CONF_CANONICAL}.{key}: unknown symmetry {data[key]!r}"
            raise ProblemConfigError(msg)
    target = data.get(CONF_TARGET)
    return CanonicalSettings(
        s1=data[CONF_S1],
        s2=data[CONF_S2],
        tnew=_expr(data[CONF_TNEW], ODE_CTX, CONF_TNEW),
        xnew=_expr(data[CONF_XNEW], ODE_CTX, CONF_XNEW),
        target=None if target is None else _expr(target, ODE_CTX, CONF_TARGET),
    )


def problem_from_dict(raw: Mapping[str, Any], path: Path | None = None) -> Problem:
    """Validate raw data and build a problem."""
    try:
        data = PROBLEM_SCHEMA(dict(raw))
    except vol.Invalid as err:
        msg = f"invalid problem file: {err}"
        raise ProblemConfigError(msg) from err
    try:
        ode = Ode2(_expr(data[CONF_ODE][CONF_RHS], ODE_CTX, CONF_RHS), data[CONF_NAME])
        symmetries = tuple(
            PointSymmetry(
                v=_expr(entry[CONF_V], ODE_CTX, entry[CONF_LABEL]),
                g=_expr(entry[CONF_G], ODE_CTX, entry[CONF_LABEL]),
                label=entry[CONF_LABEL],
            )
            for entry in data[CONF_SYMMETRIES]
        )
        multipliers = tuple(
            Multiplier(
                _expr(entry[CONF_M], ODE_CTX, entry[CONF_LABEL]), (entry[CONF_LABEL],)
            )
            for entry in data[CONF_MULTIPLIERS]
        )
    except ValueError as err:
        raise ProblemConfigError(str(err)) from err
    labels = [s.label for s in symmetries]
    _unique(labels, CONF_SYMMETRIES)
    _unique([m.provenance[0] for m in multipliers], CONF_MULTIPLIERS)
    xi = data.get(CONF_XI)
    problem = Problem(
        name=data[CONF_NAME],
        ode=ode,
        symmetries=symmetries,
        symmetry_degree=data[CONF_SYMMETRY_DEGREE],
        multipliers=multipliers,
        gauge_bound=data[CONF_GAUGE_BOUND],
        allow_log=data[CONF_ALLOW_LOG],
        quantize=_quantize(data.get(CONF_QUANTIZE), set(labels)),
        canonical=_canonical(data.get(CONF_CANONICAL), set(labels)),
        xi=None if xi is None else _expr(xi, PDE_CTX, CONF_XI),
        zero_check_points=data[CONF_ZERO_CHECK_POINTS],
        expected=_expected(data[CONF_EXPECTED]),
        digest=content_digest(raw),
        path=path,
    )
    LOGGER.debug(
        "Loaded problem %s with %s symmetries", problem.name, len(problem.symmetries)
    )
    return problem


def load_problem(path: str | Path) -> Problem:
    """Read and validate a JSON problem file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        msg = f"cannot read {path}: {err}"
        raise ProblemConfigError(msg) from err
    except json.JSONDecodeError as err:
        msg = f"{path} is not valid JSON: {err}"
        raise ProblemConfigError(msg) from err
    if not isinstance(raw, dict):
        msg = f"{path} must hold a JSON object"
        raise ProblemConfigError(msg)
    return problem_from_dict(raw, path)
