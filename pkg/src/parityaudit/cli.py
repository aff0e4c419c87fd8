"""Command-line interface.

Exit status: 0 when every group is in parity, 2 when any disparity is
found, 1 for usage or data errors. Reports go to stdout (or --output);
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional, Sequence

from ._rational import as_fraction
from ._version import __version__
from .disparity import (
    DEFAULT_METRICS,
    AuditConfig,
    AuditReport,
    ReferenceStrategy,
    Verdict,
    audit,
    audit_tables,
)
from .errors import AuditError
from .ingest import DatasetSchema, dataset_to_csv, load_dataset, load_external_benchmark, load_scenario
from .report import emit_outcomes, emit_report
from .scenarios import ScenarioSpec, builtin_scenarios, expected_tables, generate_cohort

EXIT_PARITY = 0
EXIT_ERROR = 1
EXIT_DISPARITY = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; 2 is reserved for "disparity found".
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _rational_arg(text: str):
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _list_arg(text: str) -> List[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="parityaudit", description="Group-fairness audits and screening scenario simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("audit", help="audit a scored dataset (CSV)")
    a.add_argument("--input", required=True, help="dataset CSV file")
    _add_audit_flags(a, defaults=True)
    a.add_argument("--threshold", type=_rational_arg, default=as_fraction("0.5"),
                   help="flag records with score >= threshold (default: 0.5)")
    a.add_argument("--attributes", type=_list_arg, default=None,
                   help="comma-separated attribute columns (default: every column that is not id/score/label)")
    a.add_argument("--id-column", default="entity_id")
    a.add_argument("--score-column", default="score")
    a.add_argument("--label-column", default="label_value")
    a.add_argument("--output", default=None, help="write the report here instead of stdout")

    s = sub.add_parser("simulate", help="run a screening scenario")
    s.add_argument("--scenario", required=True, help="builtin scenario name or path to a scenario JSON file")
    s.add_argument("--mode", choices=("expected", "cohort"), default="expected")
    s.add_argument("--seed", type=int, default=None, help="cohort RNG seed (default: 0)")
    s.add_argument("--out", default=None,
                   help="write the outcome table (expected) or cohort CSV (cohort) here")
    s.add_argument("--audit", action="store_true", help="audit the simulated outcomes and report")
    _add_audit_flags(s, defaults=False)

    sub.add_parser("scenarios", help="list builtin scenarios")
    sub.add_parser("version", help="print the version")
    return p


def _add_audit_flags(p: argparse.ArgumentParser, defaults: bool) -> None:
    p.add_argument("--tau", type=_rational_arg, default=None,
                   help="disparity intolerance in (0, 1] (default: 0.8)")
    p.add_argument("--reference", default=None,
                   help="majority | pooled | group:<name> | external:<path> (default: majority)")
    p.add_argument("--metrics", type=_list_arg, default=None,
                   help=f"comma-separated metrics (default: {','.join(DEFAULT_METRICS)})")
    p.add_argument("--min-group-size", type=int, default=None,
                   help="groups smaller than this are annotated small-sample (default: 30)")
    p.add_argument("--format", choices=("json", "markdown", "csv"), default="markdown")


def parse_reference(text: str, metrics: Sequence[str]) -> ReferenceStrategy:
    if text in ("majority", "predominant"):
        return ReferenceStrategy.predominant()
    if text == "pooled":
        return ReferenceStrategy.pooled()
    kind, sep, value = text.partition(":")
    if sep and value:
        if kind == "group":
            return ReferenceStrategy.custom(value)
        if kind == "external":
            return ReferenceStrategy.external(load_external_benchmark(value, metrics))
    raise UsageError(f"--reference: expected majority, pooled, group:<name> or external:<path>; got {text!r}")


def _config(args, threshold=None) -> AuditConfig:
    metrics = tuple(args.metrics) if args.metrics is not None else DEFAULT_METRICS
    kwargs = {
        "metrics": metrics,
        "reference": parse_reference(args.reference or "majority", metrics),
    }
    if args.tau is not None:
        kwargs["tau"] = args.tau
    if threshold is not None:
        kwargs["threshold"] = threshold
    if args.min_group_size is not None:
        kwargs["min_group_size"] = args.min_group_size
    return AuditConfig(**kwargs)


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _finish(report: AuditReport, fmt: str, path: Optional[str]) -> int:
    _write(emit_report(report, fmt).payload, path)
    verdict = report.overall_verdict
    print(f"overall verdict: {verdict.value}", file=sys.stderr)
    return EXIT_DISPARITY if verdict is Verdict.DISPARITY else EXIT_PARITY


def cmd_audit(args) -> int:
    if not os.path.isfile(args.input):
        raise UsageError(f"--input: no such file: {args.input}")
    schema = DatasetSchema(
        id_column=args.id_column,
        score_column=args.score_column,
        label_column=args.label_column,
        attribute_columns=tuple(args.attributes) if args.attributes is not None else None,
    )
    config = _config(args, threshold=args.threshold)
    dataset = load_dataset(args.input, schema)
    return _finish(audit(dataset, config), args.format, args.output)


def resolve_scenario(name_or_path: str) -> ScenarioSpec:
    builtins = builtin_scenarios()
    if name_or_path in builtins:
        return builtins[name_or_path]
    if os.path.isfile(name_or_path):
        return load_scenario(name_or_path)
    raise UsageError(
        f"--scenario: {name_or_path!r} is neither a builtin ({', '.join(builtins)}) nor a readable file"
    )


def cmd_simulate(args) -> int:
    if not args.audit:
        given = [f for f, v in (("--tau", args.tau), ("--reference", args.reference),
                                ("--metrics", args.metrics), ("--min-group-size", args.min_group_size))
                 if v is not None]
        if given:
            raise UsageError(f"{', '.join(given)} only apply together with --audit")
    if args.mode == "expected" and args.seed is not None:
        raise UsageError("--seed only applies to --mode cohort")

    scenario = resolve_scenario(args.scenario)

    if args.mode == "expected":
        if not args.audit:
            _write(emit_outcomes(scenario, args.format), args.out)
            return EXIT_PARITY
        if args.out:
            _write(emit_outcomes(scenario, args.format), args.out)
        report = audit_tables(expected_tables(scenario), _config(args), scenario.population)
        return _finish(report, args.format, None)

    cohort = generate_cohort(scenario, args.seed if args.seed is not None else 0)
    if not args.audit:
        _write(dataset_to_csv(cohort), args.out)
        return EXIT_PARITY
    if args.out:
        _write(dataset_to_csv(cohort), args.out)
    return _finish(audit(cohort, _config(args)), args.format, None)


def cmd_scenarios(args) -> int:
    for name, s in builtin_scenarios().items():
        print(f"{name}\t{len(s.groups)} groups by {s.attribute_name}, population {s.population:,}. {s.description}")
    return EXIT_PARITY


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "audit": cmd_audit,
        "simulate": cmd_simulate,
        "scenarios": cmd_scenarios,
        "version": lambda _: print(f"parityaudit {__version__}") or EXIT_PARITY,
    }
    try:
        return handlers[args.command](args)
    except (UsageError, AuditError, ValueError, OSError) as e:
        print(f"parityaudit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
