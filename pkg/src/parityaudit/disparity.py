"""Reference groups, disparity measures, and parity verdicts.

A disparity measure is a group's rate divided by the reference group's rate
for the same metric. A group is in parity when the measure falls inside the
closed band ``[tau, 1/tau]``, where ``tau`` is the disparity intolerance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ._rational import Rational, as_fraction, ratio
from ._version import __version__
from .crosstab import Dataset, GroupStats, binarize, multi_crosstab
from .errors import AuditError
from .metrics import ConfusionCounts, MetricValue, metric_set

DisparityMeasure = Optional[Fraction]

# Metric name -> attribute of MetricSet. equal_parity is handled separately
# because it compares absolute flagged counts, not rates.
RATE_METRICS = {
    "fpr": "fpr",
    "fdr": "fdr",
    "fnr": "fnr",
    "for": "for_rate",
    "tpr": "tpr",
    "ppv": "ppv",
    "proportional_parity": "predicted_positive_rate_within_group",
}
METRIC_NAMES = ("fpr", "fdr", "fnr", "for", "tpr", "ppv", "equal_parity", "proportional_parity")
DEFAULT_METRICS = ("fpr", "fdr", "fnr", "for")
DEFAULT_TAU = Fraction(4, 5)
DEFAULT_MIN_GROUP_SIZE = 30


class Verdict(str, enum.Enum):
    PARITY = "parity"
    DISPARITY = "disparity"
    INSUFFICIENT_DATA = "insufficient_data"
    REFERENCE = "reference"


REFERENCE_KINDS = ("predominant", "pooled_population", "external_benchmark", "custom")


@dataclass(frozen=True)
class ReferenceStrategy:
    """How to pick the group everyone else is compared against.

    ``external_metrics`` maps metric names (as in :data:`METRIC_NAMES`) to
    benchmark values. For ``equal_parity`` the value is a flagged count,
    for every other metric it is a rate in [0, 1].
    """

    kind: str = "predominant"
    custom_group: Optional[str] = None
    external_metrics: Optional[Mapping[str, Rational]] = None

    def __post_init__(self):
        if self.kind not in REFERENCE_KINDS:
            raise AuditError(f"unknown reference kind {self.kind!r}; expected one of {REFERENCE_KINDS}")
        if (self.custom_group is not None) != (self.kind == "custom"):
            raise AuditError("custom_group is required for, and only for, kind='custom'")
        if (self.external_metrics is not None) != (self.kind == "external_benchmark"):
            raise AuditError("external_metrics is required for, and only for, kind='external_benchmark'")
        if self.external_metrics is not None:
            clean = {}
            for name, v in self.external_metrics.items():
                if name not in METRIC_NAMES:
                    raise AuditError(f"external benchmark: unknown metric {name!r}")
                try:
                    f = as_fraction(v)
                except (TypeError, ValueError, ZeroDivisionError) as e:
                    raise AuditError(f"external benchmark: metric {name!r}: {e}") from None
                if f < 0 or (name != "equal_parity" and f > 1):
                    raise AuditError(f"external benchmark: metric {name!r} out of range: {v}")
                clean[name] = f
            object.__setattr__(self, "external_metrics", clean)

    @classmethod
    def predominant(cls) -> "ReferenceStrategy":
        return cls("predominant")

    @classmethod
    def pooled(cls) -> "ReferenceStrategy":
        return cls("pooled_population")

    @classmethod
    def custom(cls, group: str) -> "ReferenceStrategy":
        return cls("custom", custom_group=group)

    @classmethod
    def external(cls, metrics: Mapping[str, Rational]) -> "ReferenceStrategy":
        return cls("external_benchmark", external_metrics=metrics)


@dataclass(frozen=True)
class Reference:
    """Resolved reference values for one attribute.

    ``group_value`` is set when the reference is one of the audited groups;
    that group is then reported with verdict ``reference``.
    """

    label: str
    values: Mapping[str, MetricValue]
    group_value: Optional[str] = None


def metric_value(group: GroupStats, metric: str) -> MetricValue:
    if metric == "equal_parity":
        return Fraction(group.counts.predicted_positive)
    try:
        return getattr(group.metrics, RATE_METRICS[metric])
    except KeyError:
        raise AuditError(f"unknown metric {metric!r}") from None


def _group_reference(group: GroupStats, metrics: Sequence[str]) -> Reference:
    return Reference(
        label=group.group_value,
        values={m: metric_value(group, m) for m in metrics},
        group_value=group.group_value,
    )


def select_reference(
    groups: Sequence[GroupStats],
    strategy: ReferenceStrategy,
    metrics: Sequence[str] = METRIC_NAMES,
) -> Reference:
    if not groups:
        raise AuditError("cannot select a reference from an empty group list")

    if strategy.kind == "predominant":
        # crosstab orders groups by descending size, so the head is the largest.
        head = min(groups, key=lambda g: (-g.n, g.group_value))
        return _group_reference(head, metrics)

    if strategy.kind == "custom":
        for g in groups:
            if g.group_value == strategy.custom_group:
                return _group_reference(g, metrics)
        available = [g.group_value for g in groups]
        raise AuditError(
            f"reference group {strategy.custom_group!r} not found among {available}"
        )

    if strategy.kind == "pooled_population":
        pooled = ConfusionCounts.sum(g.counts for g in groups)
        ms = metric_set(pooled)
        values = {}
        for m in metrics:
            if m == "equal_parity":
                # The balanced group flags an equal share of all flagged cases.
                values[m] = Fraction(pooled.predicted_positive) / len(groups)
            else:
                values[m] = getattr(ms, RATE_METRICS[m])
        return Reference(label="pooled", values=values)

    missing = [m for m in metrics if m not in strategy.external_metrics]
    if missing:
        raise AuditError(f"external benchmark is missing metric(s) {missing}")
    return Reference(label="external", values={m: strategy.external_metrics[m] for m in metrics})


def disparity(group_metric: MetricValue, reference_metric: MetricValue) -> DisparityMeasure:
    """Group rate over reference rate; None unless both are defined and the reference is positive.

    A zero group rate over a positive reference gives a measure of exactly 0,
    which lies outside every parity band.
    """
    if group_metric is None or reference_metric is None or reference_metric == 0:
        return None
    return as_fraction(group_metric) / as_fraction(reference_metric)


def _check_tau(tau: Rational) -> Fraction:
    t = as_fraction(tau)
    if not 0 < t <= 1:
        raise AuditError(f"tau must lie in (0, 1], got {tau}")
    return t


def parity_check(measure: DisparityMeasure | float, tau: Rational) -> Verdict:
    """Verdict for one measure: parity iff ``tau <= measure <= 1/tau``, both ends inclusive."""
    t = _check_tau(tau)
    if measure is None:
        return Verdict.INSUFFICIENT_DATA
    m = as_fraction(measure)
    return Verdict.PARITY if t <= m <= 1 / t else Verdict.DISPARITY


def equal_parity_measure(group: GroupStats, reference: GroupStats) -> DisparityMeasure:
    """Flagged count of ``group`` over flagged count of ``reference``."""
    return disparity(
        Fraction(group.counts.predicted_positive), Fraction(reference.counts.predicted_positive)
    )


def proportional_parity_measure(group: GroupStats, reference: GroupStats) -> DisparityMeasure:
    """Within-group flag rate of ``group`` over that of ``reference``."""
    return disparity(
        ratio(group.counts.predicted_positive, group.n),
        ratio(reference.counts.predicted_positive, reference.n),
    )


@dataclass(frozen=True)
class DisparityRecord:
    metric_name: str
    attribute_name: str
    group_value: str
    group_metric: MetricValue
    reference_metric: MetricValue
    measure: DisparityMeasure
    verdict: Verdict


@dataclass(frozen=True)
class AuditConfig:
    tau: Rational = DEFAULT_TAU
    metrics: Tuple[str, ...] = DEFAULT_METRICS
    reference: ReferenceStrategy = field(default_factory=ReferenceStrategy)
    threshold: Rational = Fraction(1, 2)
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE

    def __post_init__(self):
        object.__setattr__(self, "tau", _check_tau(self.tau))
        th = as_fraction(self.threshold)
        if not 0 <= th <= 1:
            raise AuditError(f"threshold must lie in [0, 1], got {self.threshold}")
        object.__setattr__(self, "threshold", th)
        metrics = tuple(dict.fromkeys(self.metrics))
        if not metrics:
            raise AuditError("at least one metric is required")
        unknown = [m for m in metrics if m not in METRIC_NAMES]
        if unknown:
            raise AuditError(f"unknown metric(s) {unknown}; expected a subset of {list(METRIC_NAMES)}")
        object.__setattr__(self, "metrics", metrics)
        if self.min_group_size < 0:
            raise AuditError("min_group_size must be non-negative")


@dataclass(frozen=True)
class AuditReport:
    config: AuditConfig
    tables: Dict[str, Tuple[GroupStats, ...]]
    references: Dict[str, Reference]
    disparities: Dict[str, Tuple[DisparityRecord, ...]]
    overall_verdict: Verdict
    provenance: Dict[str, object]
    notes: Tuple[str, ...] = ()

    def records(self) -> List[DisparityRecord]:
        return [r for recs in self.disparities.values() for r in recs]

    def find(self, attribute: str, group: str, metric: str) -> DisparityRecord:
        for r in self.disparities[attribute]:
            if r.group_value == group and r.metric_name == metric:
                return r
        raise KeyError((attribute, group, metric))

    def without_timestamp(self) -> "AuditReport":
        prov = dict(self.provenance)
        prov["timestamp"] = None
        return replace(self, provenance=prov)


def _disparity_records(
    attribute: str, groups: Sequence[GroupStats], ref: Reference, config: AuditConfig
) -> List[DisparityRecord]:
    out = []
    for g in groups:
        is_ref = g.group_value == ref.group_value
        for m in config.metrics:
            gv = metric_value(g, m)
            rv = ref.values[m]
            if is_ref:
                measure = None if gv is None else Fraction(1)
                verdict = Verdict.REFERENCE
            else:
                measure = disparity(gv, rv)
                verdict = parity_check(measure, config.tau)
            out.append(DisparityRecord(m, attribute, g.group_value, gv, rv, measure, verdict))
    return out


def audit_tables(
    tables: Mapping[str, Sequence[GroupStats]],
    config: AuditConfig,
    dataset_size,
    timestamp: Optional[str] = None,
) -> AuditReport:
    """Render verdicts for precomputed per-attribute group tables."""
    references = {}
    disparities = {}
    notes = []
    for attribute, groups in tables.items():
        try:
            ref = select_reference(groups, config.reference, config.metrics)
        except AuditError as e:
            raise AuditError(f"attribute {attribute!r}: {e}") from None
        references[attribute] = ref
        disparities[attribute] = tuple(_disparity_records(attribute, groups, ref, config))
        for g in groups:
            if g.n < config.min_group_size:
                notes.append(
                    f"small-sample: {attribute}={g.group_value} has n={g.n} "
                    f"(< {config.min_group_size}); rates are computed but unstable"
                )

    any_disparity = any(
        r.verdict is Verdict.DISPARITY for recs in disparities.values() for r in recs
    )
    return AuditReport(
        config=config,
        tables={a: tuple(g) for a, g in tables.items()},
        references=references,
        disparities=disparities,
        overall_verdict=Verdict.DISPARITY if any_disparity else Verdict.PARITY,
        provenance={
            "dataset_size": dataset_size,
            "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "engine_version": __version__,
        },
        notes=tuple(notes),
    )


def audit(dataset: Dataset, config: AuditConfig | None = None, timestamp: Optional[str] = None) -> AuditReport:
    config = config or AuditConfig()
    if not len(dataset):
        raise AuditError("cannot audit an empty dataset")
    ds = binarize(dataset, config.threshold)
    tables = multi_crosstab(ds, ds.attribute_names)
    return audit_tables(tables, config, len(ds), timestamp=timestamp)
