"""Render audit reports and scenario outcome tables as JSON, Markdown, or CSV.

JSON is the canonical, lossless form: every rational is written as a
6-significant-digit decimal plus its exact numerator and denominator, and
:func:`parse_report_json` rebuilds an equal :class:`AuditReport` from it.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from ._rational import sig6
from .crosstab import GroupStats
from .disparity import (
    AuditConfig,
    AuditReport,
    DisparityRecord,
    Reference,
    ReferenceStrategy,
    Verdict,
)
from .errors import SchemaError
from .metrics import ConfusionCounts, MetricSet
from .scenarios import ExpectedOutcome, ScenarioSpec, effective_rates, expected_outcomes, scenario_notes

SCHEMA_VERSION = "1"
FORMATS = ("json", "markdown", "csv")


@dataclass(frozen=True)
class ReportDocument:
    format: str
    payload: str


# -- exact numbers -------------------------------------------------------------


def num(x) -> Optional[dict]:
    if x is None:
        return None
    f = Fraction(x)
    return {"value": sig6(f), "numerator": f.numerator, "denominator": f.denominator}


def unnum(d) -> Optional[Fraction]:
    if d is None:
        return None
    return Fraction(d["numerator"], d["denominator"])


def _count(d):
    f = unnum(d)
    return f.numerator if f.denominator == 1 else f


# -- report -> dict --------------------------------------------------------------


def _config_to_dict(c: AuditConfig) -> dict:
    ref = c.reference
    return {
        "tau": num(c.tau),
        "metrics": list(c.metrics),
        "reference": {
            "kind": ref.kind,
            "custom_group": ref.custom_group,
            "external_metrics": (
                None if ref.external_metrics is None
                else {k: num(v) for k, v in ref.external_metrics.items()}
            ),
        },
        "threshold": num(c.threshold),
        "min_group_size": c.min_group_size,
    }


def _group_to_dict(g: GroupStats, min_size) -> dict:
    return {
        "group_value": g.group_value,
        "n": num(g.n),
        "counts": {k: num(getattr(g.counts, k)) for k in ("tp", "fp", "tn", "fn")},
        "metrics": {k: num(v) for k, v in g.metrics.as_dict().items()},
        "group_share_of_predicted_positives": num(g.group_share_of_predicted_positives),
        "small_sample": g.n < min_size,
    }


def _record_to_dict(r: DisparityRecord) -> dict:
    return {
        "metric": r.metric_name,
        "group_value": r.group_value,
        "group_metric": num(r.group_metric),
        "reference_metric": num(r.reference_metric),
        "measure": num(r.measure),
        "verdict": r.verdict.value,
    }


def report_to_dict(report: AuditReport) -> dict:
    attrs = []
    for name, groups in report.tables.items():
        ref = report.references[name]
        attrs.append({
            "name": name,
            "reference": {
                "label": ref.label,
                "group_value": ref.group_value,
                "values": {k: num(v) for k, v in ref.values.items()},
            },
            "groups": [_group_to_dict(g, report.config.min_group_size) for g in groups],
            "disparities": [_record_to_dict(r) for r in report.disparities[name]],
        })
    prov = report.provenance
    return {
        "schema_version": SCHEMA_VERSION,
        "overall_verdict": report.overall_verdict.value,
        "provenance": {
            "dataset_size": num(prov["dataset_size"]),
            "timestamp": prov["timestamp"],
            "engine_version": prov["engine_version"],
        },
        "config": _config_to_dict(report.config),
        "attributes": attrs,
        "notes": list(report.notes),
    }


# -- dict -> report --------------------------------------------------------------


def report_from_dict(doc: dict) -> AuditReport:
    if str(doc.get("schema_version")) != SCHEMA_VERSION:
        raise SchemaError(f"$.schema_version: unsupported report schema {doc.get('schema_version')!r}")
    c = doc["config"]
    r = c["reference"]
    ext = r["external_metrics"]
    config = AuditConfig(
        tau=unnum(c["tau"]),
        metrics=tuple(c["metrics"]),
        reference=ReferenceStrategy(
            kind=r["kind"],
            custom_group=r["custom_group"],
            external_metrics=None if ext is None else {k: unnum(v) for k, v in ext.items()},
        ),
        threshold=unnum(c["threshold"]),
        min_group_size=c["min_group_size"],
    )
    tables, refs, disparities = {}, {}, {}
    for a in doc["attributes"]:
        name = a["name"]
        tables[name] = tuple(
            GroupStats(
                attribute_name=name,
                group_value=g["group_value"],
                n=_count(g["n"]),
                counts=ConfusionCounts(**{k: _count(v) for k, v in g["counts"].items()}),
                metrics=MetricSet(**{k: unnum(v) for k, v in g["metrics"].items()}),
                group_share_of_predicted_positives=unnum(g["group_share_of_predicted_positives"]),
            )
            for g in a["groups"]
        )
        ref = a["reference"]
        refs[name] = Reference(
            label=ref["label"],
            values={k: unnum(v) for k, v in ref["values"].items()},
            group_value=ref["group_value"],
        )
        disparities[name] = tuple(
            DisparityRecord(
                metric_name=d["metric"],
                attribute_name=name,
                group_value=d["group_value"],
                group_metric=unnum(d["group_metric"]),
                reference_metric=unnum(d["reference_metric"]),
                measure=unnum(d["measure"]),
                verdict=Verdict(d["verdict"]),
            )
            for d in a["disparities"]
        )
    prov = doc["provenance"]
    return AuditReport(
        config=config,
        tables=tables,
        references=refs,
        disparities=disparities,
        overall_verdict=Verdict(doc["overall_verdict"]),
        provenance={
            "dataset_size": _count(prov["dataset_size"]),
            "timestamp": prov["timestamp"],
            "engine_version": prov["engine_version"],
        },
        notes=tuple(doc.get("notes", ())),
    )


def parse_report_json(text: str) -> AuditReport:
    return report_from_dict(json.loads(text))


# -- text renderings ---------------------------------------------------------------


def _dec(x, missing="undefined") -> str:
    if x is None:
        return missing
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{sig6(f):g}"


def _report_markdown(report: AuditReport) -> str:
    c = report.config
    lines = [
        "# Fairness audit",
        "",
        f"- overall verdict: **{report.overall_verdict.value}**",
        f"- tau: {_dec(c.tau)} (parity band [{_dec(c.tau)}, {_dec(1 / c.tau)}])",
        f"- metrics: {', '.join(c.metrics)}",
        f"- reference strategy: {c.reference.kind}",
        f"- records: {_dec(report.provenance['dataset_size'])}",
        f"- generated: {report.provenance['timestamp']} (engine {report.provenance['engine_version']})",
    ]
    for name, groups in report.tables.items():
        ref = report.references[name]
        sizes = {g.group_value: g.n for g in groups}
        lines += [
            "",
            f"## {name} (reference: {ref.label})",
            "",
            "| group | n | metric | value | disparity | verdict |",
            "|---|---|---|---|---|---|",
        ]
        for r in report.disparities[name]:
            label = r.group_value
            if r.verdict is Verdict.REFERENCE:
                label = f"**{label}** (ref)"
            lines.append(
                f"| {label} | {_dec(sizes[r.group_value])} | {r.metric_name} | "
                f"{_dec(r.group_metric)} | {_dec(r.measure, 'n/a')} | {r.verdict.value} |"
            )
    if report.notes:
        lines += ["", "## Notes", ""] + [f"- {n}" for n in report.notes]
    return "\n".join(lines) + "\n"


CSV_COLUMNS = ("attribute", "group", "n", "metric", "group_metric", "reference_label",
               "reference_metric", "disparity", "verdict")


def _report_csv(report: AuditReport) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf)
    w.writerow(CSV_COLUMNS)
    for name, groups in report.tables.items():
        sizes = {g.group_value: g.n for g in groups}
        ref = report.references[name]
        for r in report.disparities[name]:
            w.writerow([
                name, r.group_value, _dec(sizes[r.group_value]), r.metric_name,
                _dec(r.group_metric, ""), ref.label, _dec(r.reference_metric, ""),
                _dec(r.measure, ""), r.verdict.value,
            ])
    return buf.getvalue()


def emit_report(report: AuditReport, format: str = "json") -> ReportDocument:
    if format == "json":
        payload = json.dumps(report_to_dict(report), indent=2) + "\n"
    elif format == "markdown":
        payload = _report_markdown(report)
    elif format in ("csv", "csv-tables"):
        format = "csv"
        payload = _report_csv(report)
    else:
        raise ValueError(f"unknown report format {format!r}; expected one of {FORMATS}")
    return ReportDocument(format, payload)


# -- scenario outcomes --------------------------------------------------------------


def outcomes_to_dict(scenario: ScenarioSpec, outcomes: Sequence[ExpectedOutcome] | None = None) -> dict:
    outcomes = list(outcomes or expected_outcomes(scenario))
    rows = []
    for g, o in zip(scenario.groups, outcomes):
        sens, fpr = effective_rates(scenario, g)
        row = {
            "group": o.group,
            "population": o.population,
            "effective_sensitivity": num(sens),
            "effective_fpr": num(fpr),
        }
        for key in ("expected_cases", "detected", "missed", "false_positives", "true_negatives"):
            row[key] = {"exact": num(getattr(o, key)), "rounded": getattr(o, key + "_rounded")}
        rows.append(row)
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario.name,
        "attribute_name": scenario.attribute_name,
        "base_sensitivity": num(scenario.base_sensitivity),
        "base_specificity": num(scenario.base_specificity),
        "population": scenario.population,
        "groups": rows,
        "notes": scenario_notes(scenario, outcomes),
    }


def _cell(o: ExpectedOutcome, key: str) -> str:
    exact = getattr(o, key)
    rounded = getattr(o, key + "_rounded")
    if exact == rounded:
        return f"{rounded:,}"
    return f"{rounded:,} ({float(exact):,.6g})"


def outcomes_markdown(scenario: ScenarioSpec, outcomes: Sequence[ExpectedOutcome] | None = None) -> str:
    outcomes = list(outcomes or expected_outcomes(scenario))
    lines = [
        f"# Scenario {scenario.name}",
        "",
        scenario.description,
        "",
        f"sensitivity {_dec(scenario.base_sensitivity)}, specificity {_dec(scenario.base_specificity)}; "
        "rounded counts with exact expected values in parentheses",
        "",
        f"| {scenario.attribute_name} | population | cases | detected (TP) | missed (FN) "
        "| false positives (FP) | true negatives (TN) |",
        "|---|---|---|---|---|---|---|",
    ]
    for o in outcomes:
        lines.append(
            f"| {o.group} | {o.population:,} | {_cell(o, 'expected_cases')} | {_cell(o, 'detected')} | "
            f"{_cell(o, 'missed')} | {_cell(o, 'false_positives')} | {_cell(o, 'true_negatives')} |"
        )
    notes = scenario_notes(scenario, outcomes)
    if notes:
        lines += ["", "## Notes", ""] + [f"- {n}" for n in notes]
    return "\n".join(lines) + "\n"


def outcomes_csv(scenario: ScenarioSpec, outcomes: Sequence[ExpectedOutcome] | None = None) -> str:
    outcomes = list(outcomes or expected_outcomes(scenario))
    keys = ("expected_cases", "detected", "missed", "false_positives", "true_negatives")
    buf = io.StringIO(newline="")
    w = csv.writer(buf)
    w.writerow(["group", "population"] + [k + s for k in keys for s in ("", "_exact")])
    for o in outcomes:
        w.writerow([o.group, o.population] + [
            v for k in keys for v in (getattr(o, k + "_rounded"), _dec(getattr(o, k)))
        ])
    return buf.getvalue()


def emit_outcomes(scenario: ScenarioSpec, format: str = "markdown") -> str:
    outcomes = expected_outcomes(scenario)
    if format == "json":
        return json.dumps(outcomes_to_dict(scenario, outcomes), indent=2) + "\n"
    if format == "markdown":
        return outcomes_markdown(scenario, outcomes)
    if format == "csv":
        return outcomes_csv(scenario, outcomes)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
