"""Confusion-matrix cells and the rate metrics derived from them.

Every rate is an exact :class:`~fractions.Fraction`, or ``None`` when its
denominator is zero. ``None`` is the explicit *undefined* state: an empty
cell must never be read as a rate of 0, because downstream that would look
like evidence of parity.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterable, Optional, Tuple, Union

from ._rational import ratio

Count = Union[int, Fraction]
MetricValue = Optional[Fraction]

__all__ = [
    "ConfusionCounts",
    "MetricSet",
    "MetricValue",
    "accumulate_counts",
    "false_positive_rate",
    "false_discovery_rate",
    "false_negative_rate",
    "false_omission_rate",
    "true_positive_rate",
    "true_negative_rate",
    "positive_predictive_value",
    "negative_predictive_value",
    "metric_set",
]


@dataclass(frozen=True)
class ConfusionCounts:
    """The four cells of a binary confusion matrix for one group.

    Observed data always yields integer cells. Expected-value scenarios may
    carry exact rational cells (e.g. 183.75 detected cases); every rate is
    defined the same way for both.
    """

    tp: Count = 0
    fp: Count = 0
    tn: Count = 0
    fn: Count = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
                raise TypeError(f"{f.name} must be an int or Fraction, got {type(v).__name__}")
            if v < 0:
                raise ValueError(f"{f.name} must be non-negative, got {v}")

    def total(self) -> Count:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def predicted_positive(self) -> Count:
        return self.tp + self.fp

    @property
    def predicted_negative(self) -> Count:
        return self.fn + self.tn

    @property
    def actual_positive(self) -> Count:
        return self.tp + self.fn

    @property
    def actual_negative(self) -> Count:
        return self.fp + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        if not isinstance(other, ConfusionCounts):
            return NotImplemented
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )

    @classmethod
    def sum(cls, items: Iterable["ConfusionCounts"]) -> "ConfusionCounts":
        out = cls()
        for c in items:
            out = out + c
        return out


def accumulate_counts(pairs: Iterable[Tuple[int, int]]) -> ConfusionCounts:
    """Tally ``(predicted, actual)`` binary pairs into confusion cells."""
    tp = fp = tn = fn = 0
    for predicted, actual in pairs:
        if predicted not in (0, 1) or actual not in (0, 1):
            raise ValueError(f"expected binary (predicted, actual) pair, got {(predicted, actual)!r}")
        if predicted:
            if actual:
                tp += 1
            else:
                fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def false_positive_rate(c: ConfusionCounts) -> MetricValue:
    """FP / (FP + TN): share of actual negatives that were flagged."""
    return ratio(c.fp, c.fp + c.tn)


def false_discovery_rate(c: ConfusionCounts) -> MetricValue:
    """FP / (FP + TP): share of flagged cases that are actually negative."""
    return ratio(c.fp, c.fp + c.tp)


def false_negative_rate(c: ConfusionCounts) -> MetricValue:
    """FN / (FN + TP): share of actual positives that were missed."""
    return ratio(c.fn, c.fn + c.tp)


def false_omission_rate(c: ConfusionCounts) -> MetricValue:
    """FN / (FN + TN): share of unflagged cases that are actually positive."""
    return ratio(c.fn, c.fn + c.tn)


def true_positive_rate(c: ConfusionCounts) -> MetricValue:
    return ratio(c.tp, c.tp + c.fn)


def true_negative_rate(c: ConfusionCounts) -> MetricValue:
    return ratio(c.tn, c.tn + c.fp)


def positive_predictive_value(c: ConfusionCounts) -> MetricValue:
    return ratio(c.tp, c.tp + c.fp)


def negative_predictive_value(c: ConfusionCounts) -> MetricValue:
    return ratio(c.tn, c.tn + c.fn)


@dataclass(frozen=True)
class MetricSet:
    fpr: MetricValue
    fdr: MetricValue
    fnr: MetricValue
    for_rate: MetricValue
    tpr: MetricValue
    tnr: MetricValue
    ppv: MetricValue
    npv: MetricValue
    predicted_positive_rate_within_group: MetricValue
    prevalence: MetricValue

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def metric_set(c: ConfusionCounts) -> MetricSet:
    total = c.total()
    return MetricSet(
        fpr=false_positive_rate(c),
        fdr=false_discovery_rate(c),
        fnr=false_negative_rate(c),
        for_rate=false_omission_rate(c),
        tpr=true_positive_rate(c),
        tnr=true_negative_rate(c),
        ppv=positive_predictive_value(c),
        npv=negative_predictive_value(c),
        predicted_positive_rate_within_group=ratio(c.predicted_positive, total),
        prevalence=ratio(c.actual_positive, total),
    )
