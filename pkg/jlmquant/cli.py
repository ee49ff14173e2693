"""Command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import TYPE_CHECKING, Final

from .const import (
    DOMAIN,
    EXIT_ANSATZ_INSUFFICIENT,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_VERIFICATION_FAILED,
    STAGE_LAGRANGIANS,
    STAGE_MULTIPLIERS,
    STAGE_NOETHER,
    STAGE_QUANTIZE,
    STAGE_SYMMETRIES,
    STAGES,
)
from .exceptions import (
    AnsatzInsufficientError,
    ExpressionParseError,
    JlmError,
    ProblemConfigError,
    StageError,
    UnsupportedExpressionError,
    ZeroDenominatorError,
)
from .pipeline import Pipeline, RunOptions
from .problem import load_problem
from .report import build_report, dump_json, render_text
from .symcore import PDE_CTX, normalize, parse

if TYPE_CHECKING:
    from collections.abc import Sequence

LOGGER = logging.getLogger(__name__)

COMMAND_STAGES: Final = {
    "symmetries": (STAGE_SYMMETRIES,),
    "multipliers": (STAGE_SYMMETRIES, STAGE_MULTIPLIERS),
    "lagrangians": (STAGE_SYMMETRIES, STAGE_MULTIPLIERS, STAGE_LAGRANGIANS),
    "noether": (
        STAGE_SYMMETRIES,
        STAGE_MULTIPLIERS,
        STAGE_LAGRANGIANS,
        STAGE_NOETHER,
    ),
    "quantize": (STAGE_SYMMETRIES, STAGE_QUANTIZE),
    "pipeline": STAGES,
}

COMMAND_HELP: Final = {
    "symmetries": "verify the given point symmetries or search for them",
    "multipliers": "last multipliers of every symmetry pair",
    "lagrangians": "Lagrangians of the distinct multipliers",
    "noether": "Noether symmetries and physical candidates",
    "quantize": "linear equation admitting the Noether symmetries",
    "pipeline": "all stages in order",
}

CONFIG_ERRORS: Final = (
    ProblemConfigError,
    ExpressionParseError,
    UnsupportedExpressionError,
    ZeroDenominatorError,
)


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per stage."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem file (JSON)")
    common.add_argument("--json", action="store_true", help="print the JSON report")
    common.add_argument(
        "--degree",
        type=int,
        help="degree bound of the command's ansatz",
    )
    common.add_argument(
        "--allow-log", action="store_true", help="admit log atoms in the ansatz"
    )
    common.add_argument(
        "--verify-only",
        action="store_true",
        help="check supplied data without searching",
    )
    common.add_argument("--xi", help="characteristic coordinate to verify and use")
    common.add_argument("--no-cache", action="store_true", help="ignore stage cache")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser = argparse.ArgumentParser(
        prog=DOMAIN,
        description="Quantization through Jacobi last multipliers.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in COMMAND_HELP.items():
        commands.add_parser(name, parents=[common], help=text)
    return parser


def run_options(args: argparse.Namespace) -> RunOptions:
    """Overrides from the parsed flags; --degree goes to the command's ansatz."""
    degree: dict[str, int] = {}
    if args.degree is not None:
        target = {
            "symmetries": "symmetry_degree",
            "lagrangians": "gauge_bound",
            "noether": "gauge_bound",
            "quantize": "ansatz_degree",
            "pipeline": "ansatz_degree",
        }.get(args.command)
        if target is None:
            LOGGER.warning("--degree has no effect on %s", args.command)
        else:
            degree[target] = args.degree
    xi = None
    if args.xi is not None:
        xi = normalize(parse(args.xi, PDE_CTX), PDE_CTX)
    return RunOptions(
        allow_log=True if args.allow_log else None,
        verify_only=args.verify_only,
        xi=xi,
        use_cache=not args.no_cache,
        **degree,
    )


def exit_code(err: BaseException) -> int:
    """Exit code for an error, looking through stage wrappers."""
    cause = err
    if isinstance(err, StageError) and err.__cause__ is not None:
        cause = err.__cause__
    if isinstance(cause, CONFIG_ERRORS):
        return EXIT_CONFIG_ERROR
    if isinstance(cause, AnsatzInsufficientError):
        return EXIT_ANSATZ_INSUFFICIENT
    return EXIT_VERIFICATION_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    """Run a subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        options = run_options(args)
        problem = load_problem(args.problem)
        pipeline = Pipeline(problem, options)
        reports = pipeline.run(COMMAND_STAGES[args.command])
    except JlmError as err:
        sys.stderr.write(f"{DOMAIN}: {err}\n")
        return exit_code(err)
    report = build_report(problem, reports)
    sys.stdout.write(dump_json(report) if args.json else render_text(report))
    failed = pipeline.failed()
    if failed is not None:
        sys.stderr.write(f"{DOMAIN}: verification failed in stage {failed}\n")
        if pipeline.reports[failed].get("insufficient"):
            return EXIT_ANSATZ_INSUFFICIENT
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK
