"""Command-line surface for the singular value function toolkit.

Subcommands:
  eval            s(a) for the element of a document (one class or the whole table)
  battery         randomized check of the SVF properties
  realize         tower elements approximating a target function
  counterexample  the lexicographic non-semicontinuity table

Exit codes: 0 success, 1 a property or bound failed, 2 unreadable input or
bad flags, 3 any other contract violation.
"""

import argparse
import logging
import sys
from typing import List, Optional, Tuple

from . import report
from .algebra import MultiMatrixAlgebra
from .config import Settings, load_settings
from .documents import Document, load_document
from .errors import ConfigError, DocumentError, SVFError
from .k0_order import format_class
from .realize import counterexample_lex, realize
from .svf_engine import property_battery, svf, svf_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_CONTRACT = 3


def _block_sizes(text: str) -> Tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated block sizes, got {text!r}")
    if not sizes or any(n < 1 for n in sizes):
        raise argparse.ArgumentTypeError(f"block sizes must be positive, got {text!r}")
    return sizes


def _parse_args(argv: Optional[List[str]]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="svf_toolkit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--log-level", default=None, help="Logging level (default: SVF_LOG_LEVEL or WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--output", "-o", default=None, help="Write the report here instead of stdout")
        p.add_argument("--format", choices=report.FORMATS, default="csv", help="Report format (default: csv)")

    p_eval = sub.add_parser("eval", help="Evaluate s(a) for a document")
    p_eval.add_argument("--input", "-i", required=True, help="JSON document with algebra and element")
    add_output_flags(p_eval)

    p_battery = sub.add_parser("battery", help="Run the property battery")
    p_battery.add_argument("--input", "-i", default=None, help="Optional document supplying algebra, seed, trials")
    p_battery.add_argument("--trials", type=int, default=None, help="Number of random trials (default: SVF_TRIALS)")
    p_battery.add_argument("--seed", type=int, default=None, help="Random seed (default: SVF_SEED)")
    p_battery.add_argument("--sizes", type=_block_sizes, default=None, help="Fixed block sizes, e.g. 3,2")
    add_output_flags(p_battery)

    p_realize = sub.add_parser("realize", help="Realize a target function in the dyadic tower")
    p_realize.add_argument("--input", "-i", required=True, help="JSON document with a target_function")
    p_realize.add_argument("--steps", type=int, default=None, help="Rounds N (default: SVF_STEPS)")
    add_output_flags(p_realize)

    p_counter = sub.add_parser("counterexample", help="Print the lexicographic counterexample table")
    add_output_flags(p_counter)

    return parser.parse_args(argv)


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("Report written to %s", output)


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    doc = load_document(args.input)
    if doc.algebra is None or doc.element is None:
        raise DocumentError("eval needs 'algebra' and 'element'")
    if doc.k0_class is not None:
        value = svf(doc.algebra, doc.element, doc.k0_class)
        rows = [[format_class(doc.k0_class), repr(float(value))]]
    else:
        rows = report.svf_table_rows(svf_table(doc.algebra, doc.element))
    _emit(report.render(report.SVF_HEADERS, rows, args.format), args.output)
    return EXIT_OK


def cmd_battery(args: argparse.Namespace, settings: Settings) -> int:
    doc = load_document(args.input) if args.input else Document()
    trials = args.trials if args.trials is not None else doc.trials if doc.trials is not None else settings.trials
    seed = args.seed if args.seed is not None else doc.seed if doc.seed is not None else settings.seed
    if trials < 1:
        print(f"trials must be at least 1, got {trials}", file=sys.stderr)
        return EXIT_BAD_INPUT
    algebra = MultiMatrixAlgebra(args.sizes) if args.sizes else doc.algebra

    result = property_battery(algebra, trials, seed, workers=settings.workers)
    _emit(report.render(report.BATTERY_HEADERS, report.battery_rows(result), args.format), args.output)
    if not result.passed:
        logger.error("Battery failed for seed %s", seed)
        return EXIT_FAILED
    return EXIT_OK


def cmd_realize(args: argparse.Namespace, settings: Settings) -> int:
    doc = load_document(args.input)
    if doc.target is None:
        raise DocumentError("realize needs 'target_function'")
    steps = args.steps if args.steps is not None else settings.steps
    if steps < 0:
        print(f"steps must be nonnegative, got {steps}", file=sys.stderr)
        return EXIT_BAD_INPUT

    trace = realize(doc.target, steps)
    _emit(report.render(report.TRACE_HEADERS, report.trace_rows(trace), args.format), args.output)
    violations = trace.envelope_violations()
    if violations or trace.consistency_violations():
        logger.error("Envelope bounds violated at rounds %s", violations)
        return EXIT_FAILED
    return EXIT_OK


def cmd_counterexample(args: argparse.Namespace, settings: Settings) -> int:
    result = counterexample_lex()
    _emit(report.render(report.COUNTEREXAMPLE_HEADERS, report.counterexample_rows(result), args.format), args.output)
    return EXIT_OK if result.passed else EXIT_FAILED


COMMANDS = {
    "eval": cmd_eval,
    "battery": cmd_battery,
    "realize": cmd_realize,
    "counterexample": cmd_counterexample,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = _parse_args(argv)
    try:
        settings = load_settings()
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT

    level = (args.log_level or settings.log_level).upper()
    if not isinstance(logging.getLevelName(level), int):
        print(f"Unknown log level {level!r}", file=sys.stderr)
        return EXIT_BAD_INPUT
    logging.basicConfig(level=level)
    try:
        return COMMANDS[args.command](args, settings)
    except (DocumentError, ConfigError) as e:
        logger.error("Bad input: %s", e)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except SVFError as e:
        logger.error("%s: %s", type(e).__name__, e)
        print(f"Error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
