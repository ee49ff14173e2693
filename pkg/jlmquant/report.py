"""JSON stage reports, their text rendering and the stage cache."""

from __future__ import annotations

import hashlib
import json
import logging
import re
from typing import TYPE_CHECKING, Any

import sympy as sp

from .const import (
    CACHE_SUFFIX,
    REPORT_VERSION,
    STAGE_LAGRANGIANS,
    STAGE_MULTIPLIERS,
    STAGE_NOETHER,
    STAGE_QUANTIZE,
    STAGE_SYMMETRIES,
    STAGES,
)
from .exceptions import AnsatzInsufficientError, JlmError
from .lagrange import gauge_equivalent
from .models import (
    BranchStatus,
    Lagrangian,
    Multiplier,
    NoetherCertificate,
    NoetherEntry,
    PairStatus,
    PointSymmetry,
)
from .symcore import FULL_CTX, QD, Q, T, normalize, parse, proportional, to_text

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence
    from pathlib import Path

    from .models import (
        BranchOutcome,
        LinearPde2,
        PairEntry,
        PdeSymmetry,
        QuantizeOutcome,
        Verification,
    )
    from .problem import Expected, Problem

LOGGER = logging.getLogger(__name__)

PDE_FIELDS = ("c_tt", "c_tx", "c_xx", "c_t", "c_x", "c_0")
NO_MULTIPLIERS = "no multipliers derivable"

Report = dict[str, Any]


def text(e: sp.Expr | None) -> str | None:
    """Expression in the input grammar, None passed through."""
    return None if e is None else to_text(normalize(e))


def read(value: str) -> sp.Expr:
    """Inverse of text for cached reports."""
    return normalize(parse(value, FULL_CTX), FULL_CTX)


def label_key(label: str) -> list[int | str]:
    """Natural sort key so that X2 precedes X10."""
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", label)]


def _by_label(items: Iterable[Any], label: Any) -> list[Any]:
    return sorted(items, key=lambda item: (label_key(label(item[1])), item[0]))


# Reference matching


def match_multiplier(m: sp.Expr, expected: Mapping[str, sp.Expr]) -> str | None:
    """Reference label whose multiplier is a constant multiple of m."""
    for label, ref in expected.items():
        if proportional(m, ref) is not None:
            return label
    return None


def match_lagrangian(lag: Lagrangian, expected: Mapping[str, sp.Expr]) -> str | None:
    """Reference label gauge equivalent to lag up to a constant factor."""
    hessian = sp.diff(lag.l, QD, 2)
    for label, ref in expected.items():
        factor = proportional(hessian, sp.diff(ref, QD, 2))
        if factor is None:
            continue
        if gauge_equivalent(lag, Lagrangian(normalize(factor * ref))):
            return label
    return None


def _constant(e: sp.Expr) -> bool:
    return all(normalize(sp.diff(e, v)) == 0 for v in (T, Q, QD))


def match_integral(integral: sp.Expr, expected: Sequence[sp.Expr]) -> bool:
    """True when integral equals a reference up to sign and a constant."""
    return any(
        _constant(integral - sign * ref) for ref in expected for sign in (1, -1)
    )


def match_pde(pde: LinearPde2, expected: Sequence[LinearPde2]) -> int | None:
    """Index of a reference proportional to pde."""
    for index, ref in enumerate(expected):
        pivot = next(k for k, c in enumerate(ref.coefficients) if c != 0)
        factor = proportional(pde.coefficients[pivot], ref.coefficients[pivot])
        if factor is None:
            continue
        gaps = (
            normalize(a - factor * b)
            for a, b in zip(pde.coefficients, ref.coefficients, strict=True)
        )
        if all(g == 0 for g in gaps):
            return index
    return None


def match_exponents(exponents: Sequence[sp.Expr], expected: Sequence[sp.Expr]) -> bool:
    """Same exponent set."""
    return bool(expected) and {text(e) for e in exponents} == {
        text(e) for e in expected
    }


# Stage reports


def symmetry_json(sym: PointSymmetry) -> Report:
    """Generator as JSON."""
    return {"label": sym.label, "v": text(sym.v), "g": text(sym.g)}


def symmetry_from_json(data: Mapping[str, Any]) -> PointSymmetry:
    """Generator from JSON."""
    return PointSymmetry(v=read(data["v"]), g=read(data["g"]), label=data["label"])


def symmetries_report(
    symmetries: Sequence[PointSymmetry],
    checks: Sequence[Verification],
    *,
    searched: bool,
    canonical: Verification | None = None,
) -> Report:
    """Verified generators, in label order."""
    rows = []
    for _, (sym, check) in _by_label(
        enumerate(zip(symmetries, checks, strict=True)), lambda pair: pair[0].label
    ):
        row = symmetry_json(sym)
        row["verified"] = check.ok
        row["residual"] = None if check.ok else text(check.residual)
        rows.append(row)
    report: Report = {
        "stage": STAGE_SYMMETRIES,
        "searched": searched,
        "symmetries": rows,
        "canonical": None,
    }
    if canonical is not None:
        report["canonical"] = {
            "verified": canonical.ok,
            "residual": None if canonical.ok else text(canonical.residual),
        }
    report["ok"] = all(r["verified"] for r in rows) and (
        canonical is None or canonical.ok
    )
    return report


def symmetries_from_report(report: Mapping[str, Any]) -> tuple[PointSymmetry, ...]:
    """Generators of a cached symmetries report."""
    return tuple(symmetry_from_json(row) for row in report["symmetries"])


def _pair_json(entry: PairEntry) -> Report:
    row: Report = {
        "pair": list(entry.labels),
        "status": entry.status.value,
        "determinant": text(entry.determinant),
        "multiplier": None,
        "duplicate_of": None,
        "factor": None,
    }
    if entry.multiplier is not None:
        row["multiplier"] = entry.multiplier.label
    if entry.duplicate_of is not None:
        row["duplicate_of"] = list(entry.duplicate_of)
        row["factor"] = text(entry.factor)
    return row


def multipliers_report(
    entries: Sequence[PairEntry],
    multipliers: Sequence[Multiplier],
    checks: Sequence[Verification],
    expected: Expected,
) -> Report:
    """Pair sweep with the distinct multipliers."""
    rows = []
    for _, (m, check) in _by_label(
        enumerate(zip(multipliers, checks, strict=True)), lambda pair: pair[0].label
    ):
        rows.append(
            {
                "label": m.label,
                "provenance": list(m.provenance),
                "m": text(m.m),
                "verified": check.ok,
                "matches": match_multiplier(m.m, expected.multipliers),
            }
        )
    return {
        "stage": STAGE_MULTIPLIERS,
        "pairs": [_pair_json(e) for e in entries],
        "degenerate": sum(e.status == PairStatus.DEGENERATE for e in entries),
        "multipliers": rows,
        "note": None if rows else NO_MULTIPLIERS,
        "ok": all(r["verified"] for r in rows),
    }


def multipliers_from_report(report: Mapping[str, Any]) -> tuple[Multiplier, ...]:
    """Multipliers of a cached report."""
    return tuple(
        Multiplier(read(row["m"]), tuple(row["provenance"]))
        for row in report["multipliers"]
    )


def lagrangian_json(lag: Lagrangian, expected: Expected) -> Report:
    """Lagrangian as JSON, with its reference match."""
    return {
        "label": lag.label,
        "provenance": lag.provenance,
        "l": text(lag.l),
        "f1": text(lag.f1),
        "f3": text(lag.f3),
        "multiplier": text(lag.multiplier),
        "matches": match_lagrangian(lag, expected.lagrangians),
    }


def lagrangian_from_json(data: Mapping[str, Any]) -> Lagrangian:
    """Lagrangian from JSON."""
    multiplier = data["multiplier"]
    return Lagrangian(
        read(data["l"]),
        f1=read(data["f1"]),
        f3=read(data["f3"]),
        multiplier=None if multiplier is None else read(multiplier),
        provenance=data["provenance"],
    )


def lagrangians_report(
    lagrangians: Sequence[Lagrangian],
    failures: Sequence[tuple[str, JlmError]],
    equivalent: Sequence[tuple[str, str]],
    expected: Expected,
) -> Report:
    """
    Lagrangians with failed reconstructions and gauge-linked pairs.

    Any failed reconstruction fails the stage.
    """
    ordered = _by_label(enumerate(lagrangians), lambda lag: lag.label)
    count = len(lagrangians)
    return {
        "stage": STAGE_LAGRANGIANS,
        "lagrangians": [lagrangian_json(lag, expected) for _, lag in ordered],
        "failures": [
            {"label": label, "error": str(err)}
            for label, err in sorted(failures, key=lambda f: f[0])
        ],
        "pairs": count * (count - 1) // 2,
        "equivalent": [list(pair) for pair in equivalent],
        "insufficient": any(
            isinstance(err, AnsatzInsufficientError) for _, err in failures
        ),
        "ok": not failures,
    }


def lagrangians_from_report(report: Mapping[str, Any]) -> tuple[Lagrangian, ...]:
    """Lagrangians of a cached report."""
    return tuple(lagrangian_from_json(row) for row in report["lagrangians"])


def noether_report(entries: Sequence[NoetherEntry], expected: Expected) -> Report:
    """Noether subalgebra of each Lagrangian with the physical flags."""
    rows = []
    for _, entry in _by_label(enumerate(entries), lambda e: e.lagrangian.label):
        match = match_lagrangian(entry.lagrangian, expected.lagrangians)
        references = expected.integrals.get(match or "", ())
        rows.append(
            {
                "lagrangian": lagrangian_json(entry.lagrangian, expected),
                "count": entry.count,
                "physical": entry.physical,
                "expected_count": expected.noether_counts.get(match or ""),
                "certificates": [
                    {
                        **symmetry_json(cert.symmetry),
                        "gauge": text(cert.gauge),
                        "integral": text(cert.integral),
                        "matches": (
                            match_integral(cert.integral, references)
                            if references
                            else None
                        ),
                    }
                    for cert in entry.certificates
                ],
            }
        )
    return {
        "stage": STAGE_NOETHER,
        "maximum": max((e.count for e in entries), default=0),
        "entries": rows,
        "ok": all(
            row["expected_count"] is None or row["count"] == row["expected_count"]
            for row in rows
        ),
    }


def noether_from_report(report: Mapping[str, Any]) -> tuple[NoetherEntry, ...]:
    """Noether entries of a cached report."""
    entries = []
    for row in report["entries"]:
        certificates = tuple(
            NoetherCertificate(
                symmetry_from_json(cert), read(cert["gauge"]), read(cert["integral"])
            )
            for cert in row["certificates"]
        )
        entries.append(
            NoetherEntry(
                lagrangian_from_json(row["lagrangian"]),
                row["count"],
                certificates,
                physical=row["physical"],
            )
        )
    return tuple(entries)


def _pde_json(pde: LinearPde2) -> Report:
    return {
        "mode": pde.mode.value,
        **{name: text(c) for name, c in zip(PDE_FIELDS, pde.coefficients, strict=True)},
    }


def _pde_symmetry_json(sym: PdeSymmetry) -> Report:
    return {
        "label": sym.label,
        "xi_t": text(sym.xi_t),
        "xi_x": text(sym.xi_x),
        "lam": text(sym.lam),
    }


def _branch_json(outcome: BranchOutcome, expected: Expected) -> Report:
    branch = outcome.branch
    row: Report = {
        "status": branch.status.value,
        "path": list(branch.path),
        "pinned": list(branch.pinned),
        "pde": None,
        "matches": None,
        "symmetries": [_pde_symmetry_json(s) for s in branch.symmetries],
        "type": None if outcome.pde_type is None else outcome.pde_type.value,
        "xi": text(outcome.xi),
        "reduction": None,
        "basis": None,
        "solution_verified": None if outcome.solution is None else outcome.solution.ok,
        "trivial_symmetries": outcome.trivial,
        "error": outcome.error,
        "constraints": [text(c) for c in branch.constraints],
    }
    if branch.pde is not None:
        row["pde"] = _pde_json(branch.pde)
        index = match_pde(branch.pde, expected.pdes)
        row["matches"] = None if index is None else f"reference {index + 1}"
    if outcome.reduction is not None:
        red = outcome.reduction
        row["reduction"] = {
            "phi_xx": text(red.phi_xx),
            "phi_x": text(red.phi_x),
            "phi": text(red.phi),
            "phi_xi": text(red.phi_xi),
        }
    if outcome.basis is not None:
        basis = outcome.basis
        row["basis"] = {
            "indicial": text(basis.indicial),
            "exponents": [text(e) for e in basis.exponents],
            "terms": [to_text(t) for t in basis.terms],
            "slots": list(basis.slots),
            "repeated": basis.repeated,
            "matches": match_exponents(basis.exponents, expected.exponents),
        }
    return row


def quantize_report(outcome: QuantizeOutcome, expected: Expected) -> Report:
    """PDE branches with classification, reduction and solutions."""
    order = {BranchStatus.SOLVED: 0, BranchStatus.UNRESOLVED: 1}
    branches = sorted(
        outcome.branches,
        key=lambda b: (order.get(b.branch.status, 2), "/".join(b.branch.path)),
    )
    return {
        "stage": STAGE_QUANTIZE,
        "lagrangian": outcome.lagrangian,
        "mode": outcome.mode.value,
        "generators": [_pde_symmetry_json(g) for g in outcome.generators],
        "branches": [_branch_json(b, expected) for b in branches],
        "ok": outcome.ok,
    }


def build_report(problem: Problem, stages: Mapping[str, Report]) -> Report:
    """Top-level report with the stages in pipeline order."""
    return {
        "version": REPORT_VERSION,
        "problem": problem.name,
        "digest": problem.digest,
        "ode": text(problem.ode.rhs),
        "stages": {name: stages[name] for name in STAGES if name in stages},
        "ok": all(stage["ok"] for stage in stages.values()),
    }


def dump_json(report: Mapping[str, Any]) -> str:
    """Deterministic JSON text."""
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# Text rendering


def _flag(verified: bool | None) -> str:
    if verified is None:
        return ""
    return "ok" if verified else "FAILED"


def _match(value: Any) -> str:
    if value is None or value is False:
        return ""
    if value is True:
        return "  [matches reference]"
    return f"  [matches {value}]"


def _render_symmetries(stage: Mapping[str, Any]) -> list[str]:
    rows = stage["symmetries"]
    origin = "found" if stage["searched"] else "given"
    lines = [f"[symmetries] {len(rows)} {origin}"]
    for row in rows:
        line = f"  {row['label']}: ({row['v']}) d/dt + ({row['g']}) d/dq"
        line += f"  {_flag(row['verified'])}"
        if row["residual"] is not None:
            line += f", residual {row['residual']}"
        lines.append(line)
    canonical = stage["canonical"]
    if canonical is not None:
        line = f"  canonical coordinates: {_flag(canonical['verified'])}"
        if canonical["residual"] is not None:
            line += f", residual {canonical['residual']}"
        lines.append(line)
    return lines


def _render_multipliers(stage: Mapping[str, Any]) -> list[str]:
    rows = stage["multipliers"]
    pairs = stage["pairs"]
    lines = [
        f"[multipliers] {len(pairs)} pairs, {stage['degenerate']} degenerate, "
        f"{len(rows)} distinct"
    ]
    if stage["note"]:
        lines.append(f"  {stage['note']}")
    for pair in pairs:
        first, second = pair["pair"]
        if pair["status"] == PairStatus.DEGENERATE.value:
            lines.append(f"  {first} {second}: degenerate")
        elif pair["duplicate_of"] is not None:
            other = " ".join(pair["duplicate_of"])
            lines.append(f"  {first} {second}: {pair['factor']} times pair {other}")
        else:
            lines.append(f"  {first} {second}: {pair['multiplier']}")
    lines.extend(
        f"  {row['label']} = {row['m']}  {_flag(row['verified'])}"
        f"{_match(row['matches'])}"
        for row in rows
    )
    return lines


def _render_lagrangians(stage: Mapping[str, Any]) -> list[str]:
    rows = stage["lagrangians"]
    lines = [
        f"[lagrangians] {len(rows)} built, {len(stage['equivalent'])} of "
        f"{stage['pairs']} pairs gauge equivalent"
    ]
    lines.extend(
        f"  {row['label']} = {row['l']}{_match(row['matches'])}" for row in rows
    )
    lines.extend(
        f"  {row['label']}: not built, {row['error']}" for row in stage["failures"]
    )
    return lines


def _render_noether(stage: Mapping[str, Any]) -> list[str]:
    lines = [f"[noether] maximum {stage['maximum']}"]
    for entry in stage["entries"]:
        lag = entry["lagrangian"]
        line = f"  {lag['label']}: {entry['count']} symmetries"
        if entry["physical"]:
            line += ", physical candidate"
        if entry["expected_count"] is not None:
            verdict = "as" if entry["expected_count"] == entry["count"] else "not as"
            line += f" ({verdict} expected)"
        lines.append(line)
        lines.extend(
            f"    {cert['label']}: I = {cert['integral']}, gauge {cert['gauge']}"
            f"{_match(cert['matches'])}"
            for cert in entry["certificates"]
        )
    return lines


def _render_pde(pde: Mapping[str, Any]) -> str:
    jets = ("psi_tt", "psi_tx", "psi_xx", "psi_t", "psi_x", "psi")
    terms = [
        f"({pde[name]})*{jet}"
        for name, jet in zip(PDE_FIELDS, jets, strict=True)
        if pde[name] != "0"
    ]
    return " + ".join(terms) + " = 0"


def _render_quantize(stage: Mapping[str, Any]) -> list[str]:
    lines = [
        f"[quantize] {stage['mode']} mode from {stage['lagrangian']}, "
        f"{len(stage['branches'])} branches"
    ]
    lines.extend(
        f"  generator {g['label']}: ({g['xi_t']}) d/dt + ({g['xi_x']}) d/dx"
        for g in stage["generators"]
    )
    for row in stage["branches"]:
        path = " / ".join(row["path"]) or "root"
        lines.append(f"  branch {path}: {row['status']}")
        if row["pde"] is None:
            lines.extend(f"    constraint {c}" for c in row["constraints"][:5])
            continue
        lines.append(f"    {_render_pde(row['pde'])}{_match(row['matches'])}")
        if row["pinned"]:
            lines.append(f"    pinned to one: {', '.join(row['pinned'])}")
        lines.extend(
            f"    {s['label']}: lambda = {s['lam']}" for s in row["symmetries"]
        )
        lines.append(f"    type {row['type']}")
        if row["xi"] is not None:
            lines.append(f"    xi = {row['xi']}")
        red = row["reduction"]
        if red is not None:
            lines.append(
                f"    normal form ({red['phi_xx']})*phi_xx + ({red['phi_x']})*phi_x"
                f" + ({red['phi']})*phi + ({red['phi_xi']})*phi_xi = 0"
            )
        basis = row["basis"]
        if basis is not None:
            exponents = ", ".join(basis["exponents"]) or "none rational"
            lines.append(f"    exponents {exponents}{_match(basis['matches'])}")
            lines.extend(
                f"    {slot}(xi) * {term}"
                for slot, term in zip(basis["slots"], basis["terms"], strict=False)
            )
        if row["solution_verified"] is not None:
            lines.append(f"    back-substitution {_flag(row['solution_verified'])}")
        if row["trivial_symmetries"] is not None:
            lines.append(
                f"    trivial symmetries {_flag(row['trivial_symmetries'])}"
            )
        if row["error"]:
            lines.append(f"    {row['error']}")
    return lines


RENDERERS = {
    STAGE_SYMMETRIES: _render_symmetries,
    STAGE_MULTIPLIERS: _render_multipliers,
    STAGE_LAGRANGIANS: _render_lagrangians,
    STAGE_NOETHER: _render_noether,
    STAGE_QUANTIZE: _render_quantize,
}


def render_text(report: Mapping[str, Any]) -> str:
    """Plain-text rendering of a JSON report."""
    lines = [f"{report['problem']}: qdd = {report['ode']}"]
    for name, stage in report["stages"].items():
        lines.append("")
        lines.extend(RENDERERS[name](stage))
    return "\n".join(lines) + "\n"


# Stage cache


def stage_key(*parts: Any) -> str:
    """Content hash of a stage's inputs."""
    payload = json.dumps(parts, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()


class StageCache:
    """Stage reports stored as JSON next to the problem file."""

    def __init__(self, path: Path | None) -> None:
        """Open lazily; a missing path disables the cache."""
        self.path = path
        self._data: dict[str, Any] | None = None

    @classmethod
    def for_problem(cls, problem: Problem) -> StageCache:
        """Cache file beside the problem file."""
        if problem.path is None:
            return cls(None)
        return cls(problem.path.with_name(problem.path.stem + CACHE_SUFFIX))

    def _load(self) -> dict[str, Any]:
        if self._data is not None:
            return self._data
        self._data = {}
        if self.path is None or not self.path.exists():
            return self._data
        try:
            loaded = json.loads(self.path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            LOGGER.warning("Ignoring unreadable cache %s: %s", self.path, err)
            return self._data
        if isinstance(loaded, dict) and loaded.get("version") == REPORT_VERSION:
            self._data = loaded.get("stages", {})
        return self._data

    def get(self, stage: str, key: str) -> Report | None:
        """Cached report of a stage when its key matches."""
        entry = self._load().get(stage)
        if entry is None or entry.get("key") != key:
            return None
        LOGGER.debug("Cache hit for stage %s", stage)
        return entry["report"]

    def put(self, stage: str, key: str, report: Report) -> None:
        """Store a stage report and write the file."""
        data = self._load()
        data[stage] = {"key": key, "report": report}
        if self.path is None:
            return
        payload = {"version": REPORT_VERSION, "stages": data}
        try:
            self.path.write_text(dump_json(payload), encoding="utf-8")
        except OSError as err:
            LOGGER.warning("Cannot write cache %s: %s", self.path, err)


def restore(stage: str, report: Mapping[str, Any]) -> tuple[Any, ...] | None:
    """Objects needed downstream of a cached stage."""
    restorers = {
        STAGE_SYMMETRIES: symmetries_from_report,
        STAGE_MULTIPLIERS: multipliers_from_report,
        STAGE_LAGRANGIANS: lagrangians_from_report,
        STAGE_NOETHER: noether_from_report,
    }
    restorer = restorers.get(stage)
    if restorer is None:
        return None
    try:
        return restorer(report)
    except (JlmError, KeyError, TypeError, ValueError) as err:
        LOGGER.warning("Discarding cached %s report: %s", stage, err)
        return None
