"""Records, datasets, and per-group tabulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ._rational import Rational, as_fraction, ratio
from .errors import AuditError
from .metrics import ConfusionCounts, MetricSet, MetricValue, accumulate_counts, metric_set

# Group label for records whose attribute value is the empty string.
MISSING_GROUP = "<missing>"


@dataclass(frozen=True, slots=True)
class Record:
    """One scored entity.

    ``score`` is the raw model output in [0, 1]; ``prediction`` is the flag
    (0/1) once thresholded. A record may arrive already binarized, in which
    case ``prediction`` is set and :func:`binarize` leaves it alone.
    """

    entity_id: str
    label: int
    attributes: Mapping[str, str]
    score: Optional[float] = None
    prediction: Optional[int] = None

    def __post_init__(self):
        if self.label not in (0, 1) or isinstance(self.label, float):
            raise AuditError(f"{self.entity_id}: label must be 0 or 1, got {self.label!r}")
        if self.prediction is not None and self.prediction not in (0, 1):
            raise AuditError(f"{self.entity_id}: prediction must be 0 or 1, got {self.prediction!r}")
        if self.score is None:
            if self.prediction is None:
                raise AuditError(f"{self.entity_id}: record needs a score or a prediction")
        elif not (isinstance(self.score, (int, float)) and math.isfinite(self.score)
                  and 0.0 <= self.score <= 1.0):
            raise AuditError(f"{self.entity_id}: score must lie in [0, 1], got {self.score!r}")
        for name in self.attributes:
            if not name:
                raise AuditError(f"{self.entity_id}: attribute names must be non-empty")


@dataclass(frozen=True)
class Dataset:
    records: Tuple[Record, ...]
    attribute_names: Tuple[str, ...] = ()

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        names = tuple(self.attribute_names)
        if not names and records:
            names = tuple(records[0].attributes)
        if len(set(names)) != len(names):
            raise AuditError(f"duplicate attribute names: {names}")
        object.__setattr__(self, "attribute_names", names)

        expected = set(names)
        seen = set()
        for i, rec in enumerate(records):
            if rec.entity_id in seen:
                raise AuditError(f"duplicate entity_id {rec.entity_id!r} at record {i}")
            seen.add(rec.entity_id)
            if rec.attributes.keys() != expected:
                raise AuditError(
                    f"record {rec.entity_id!r} carries attributes {sorted(rec.attributes)}, "
                    f"dataset declares {sorted(expected)}"
                )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def is_binarized(self) -> bool:
        return all(r.prediction is not None for r in self.records)

    def counts(self) -> ConfusionCounts:
        _require_binarized(self)
        return accumulate_counts((r.prediction, r.label) for r in self.records)


@dataclass(frozen=True)
class GroupStats:
    attribute_name: str
    group_value: str
    n: int
    counts: ConfusionCounts
    metrics: MetricSet
    # PP of this group over PP summed across every group of the attribute.
    group_share_of_predicted_positives: MetricValue


def binarize(dataset: Dataset, threshold: Rational) -> Dataset:
    """Flag every scored record with ``score >= threshold``.

    Records that already carry a prediction pass through untouched. The
    comparison is inclusive, so a score sitting exactly on the threshold is
    flagged.
    """
    t = as_fraction(threshold)
    if not 0 <= t <= 1:
        raise AuditError(f"threshold must lie in [0, 1], got {threshold}")
    t_float = float(t)
    changed = False
    out = []
    for rec in dataset.records:
        if rec.prediction is None:
            # Exact comparison against the rational threshold; the float
            # shortcut only decides when it is unambiguous.
            s = rec.score
            if s != t_float:
                flag = s > t_float
            else:
                flag = as_fraction(s) >= t
            rec = replace(rec, prediction=int(flag))
            changed = True
        out.append(rec)
    if not changed:
        return dataset
    return Dataset(tuple(out), dataset.attribute_names)


def _require_binarized(dataset: Dataset) -> None:
    for rec in dataset.records:
        if rec.prediction is None:
            raise AuditError(
                f"dataset is not binarized (record {rec.entity_id!r} has no prediction); "
                "call binarize() first"
            )


def group_key(value: str) -> str:
    return value if value != "" else MISSING_GROUP


def group_stats_from_counts(
    attribute: str, counts_by_group: Mapping[str, ConfusionCounts]
) -> List[GroupStats]:
    """Build ordered GroupStats from per-group counts.

    Groups come out by descending size, ties broken by group value, so the
    head of the list is always the predominant group.
    """
    total_pp = sum((c.predicted_positive for c in counts_by_group.values()), 0)
    stats = [
        GroupStats(
            attribute_name=attribute,
            group_value=value,
            n=c.total(),
            counts=c,
            metrics=metric_set(c),
            group_share_of_predicted_positives=ratio(c.predicted_positive, total_pp),
        )
        for value, c in counts_by_group.items()
    ]
    stats.sort(key=lambda g: (-g.n, g.group_value))
    return stats


def crosstab(dataset: Dataset, attribute: str) -> List[GroupStats]:
    if attribute not in dataset.attribute_names:
        raise AuditError(f"unknown attribute {attribute!r}; dataset has {list(dataset.attribute_names)}")
    _require_binarized(dataset)
    cells: Dict[str, List[int]] = {}
    for rec in dataset.records:
        key = group_key(rec.attributes[attribute])
        c = cells.get(key)
        if c is None:
            c = cells[key] = [0, 0, 0, 0]
        if rec.prediction:
            c[0 if rec.label else 1] += 1
        else:
            c[3 if rec.label else 2] += 1
    counts = {k: ConfusionCounts(tp=v[0], fp=v[1], tn=v[2], fn=v[3]) for k, v in cells.items()}
    return group_stats_from_counts(attribute, counts)


def multi_crosstab(dataset: Dataset, attributes: Sequence[str]) -> Dict[str, List[GroupStats]]:
    """Independent :func:`crosstab` per attribute, in the order given.

    Duplicates are dropped. Every name is validated before any work is done,
    so one unknown attribute fails the whole call.
    """
    attrs = list(dict.fromkeys(attributes))
    unknown = [a for a in attrs if a not in dataset.attribute_names]
    if unknown:
        raise AuditError(f"unknown attribute(s) {unknown}; dataset has {list(dataset.attribute_names)}")
    return {a: crosstab(dataset, a) for a in attrs}
