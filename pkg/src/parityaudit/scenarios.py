"""Screening scenarios: expected-value outcomes and seeded synthetic cohorts.

A scenario is a screened population split into groups, each with its own
size and disease prevalence, screened by one tool with a base sensitivity
and specificity. A group can be disadvantaged in two ways:

* ``fnr_ratio`` divides the tool's sensitivity for that group, so more
  cases are missed (sensitivity 0.98 with ratio 1.6 becomes 0.6125).
* ``fpr_ratio`` multiplies the tool's false positive rate for that group
  (specificity 0.96 gives FPR 0.04; ratio 1.5 makes it 0.06).

Expected outcomes are exact rationals. Rounded counts use round-half-away
on detected cases, and missed cases are derived from the rounded total so
each row still balances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from ._rational import Rational, as_fraction, round_half_away
from .crosstab import Dataset, GroupStats, Record, group_stats_from_counts
from .errors import ScenarioError
from .metrics import ConfusionCounts

SCHEMA_VERSION = "1"

# Relative gap beyond which a figure reported alongside a scenario is
# considered not derivable from the scenario's own parameters.
REPORTED_FIGURE_TOLERANCE = Fraction(1, 100)

OUTCOME_FIELDS = ("expected_cases", "detected", "missed", "false_positives", "true_negatives")


def _rational(value, path: str, lo=None, hi=None) -> Fraction:
    try:
        f = as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ScenarioError(f"expected a rational number, got {value!r}", path) from None
    if lo is not None and f < lo:
        raise ScenarioError(f"must be >= {lo}, got {value!r}", path)
    if hi is not None and f > hi:
        raise ScenarioError(f"must be <= {hi}, got {value!r}", path)
    return f


@dataclass(frozen=True)
class GroupSpec:
    name: str
    population: int
    prevalence: Fraction
    fnr_ratio: Fraction = Fraction(1)
    fpr_ratio: Fraction = Fraction(1)
    # Figures published alongside the scenario, keyed by OUTCOME_FIELDS.
    # Used only to cross-check computed outcomes; never fed back into them.
    reported: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ScenarioError(f"group name must be a non-empty string, got {self.name!r}", "$.name")
        if isinstance(self.population, bool) or not isinstance(self.population, int) or self.population < 1:
            raise ScenarioError(f"must be a positive integer, got {self.population!r}", "$.population")
        object.__setattr__(self, "prevalence", _rational(self.prevalence, "$.prevalence", 0, 1))
        for name in ("fnr_ratio", "fpr_ratio"):
            r = _rational(getattr(self, name), f"$.{name}")
            if r <= 0:
                raise ScenarioError(f"must be positive, got {getattr(self, name)!r}", f"$.{name}")
            object.__setattr__(self, name, r)
        reported = dict(self.reported)
        for key, v in reported.items():
            if key not in OUTCOME_FIELDS:
                raise ScenarioError(f"unknown outcome {key!r}; expected one of {OUTCOME_FIELDS}",
                                    f"$.reported.{key}")
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ScenarioError(f"must be a non-negative integer, got {v!r}", f"$.reported.{key}")
        object.__setattr__(self, "reported", reported)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    base_sensitivity: Fraction
    base_specificity: Fraction
    groups: Tuple[GroupSpec, ...]
    attribute_name: str
    description: str = ""
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ScenarioError("scenario name must be a non-empty string", "$.name")
        if not isinstance(self.attribute_name, str) or not self.attribute_name:
            raise ScenarioError("attribute_name must be a non-empty string", "$.attribute_name")
        object.__setattr__(self, "base_sensitivity", _rational(self.base_sensitivity, "$.base_sensitivity", 0, 1))
        object.__setattr__(self, "base_specificity", _rational(self.base_specificity, "$.base_specificity", 0, 1))
        groups = tuple(self.groups)
        if not groups:
            raise ScenarioError("at least one group is required", "$.groups")
        seen = set()
        for i, g in enumerate(groups):
            if g.name in seen:
                raise ScenarioError(f"duplicate group name {g.name!r}", f"$.groups[{i}].name")
            seen.add(g.name)
            try:
                effective_rates(self, g)
            except ScenarioError as e:
                raise e.under(f"$.groups[{i}]") from None
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def population(self) -> int:
        return sum(g.population for g in self.groups)

    def group(self, name: str) -> GroupSpec:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)


def effective_rates(scenario: ScenarioSpec, group: GroupSpec) -> Tuple[Fraction, Fraction]:
    """(sensitivity, false positive rate) the tool achieves on ``group``."""
    sens = scenario.base_sensitivity / group.fnr_ratio
    fpr = (1 - scenario.base_specificity) * group.fpr_ratio
    if sens > 1:
        raise ScenarioError(
            f"effective sensitivity {float(scenario.base_sensitivity):g}/{float(group.fnr_ratio):g} "
            f"= {float(sens):g} exceeds 1",
            "$.fnr_ratio",
        )
    if fpr > 1:
        raise ScenarioError(
            f"effective false positive rate (1 - {float(scenario.base_specificity):g}) x "
            f"{float(group.fpr_ratio):g} = {float(fpr):g} exceeds 1",
            "$.fpr_ratio",
        )
    # A ratio below 1 would favour the group; ratios only model disadvantage.
    if group.fnr_ratio < 1:
        raise ScenarioError(f"must be >= 1, got {float(group.fnr_ratio):g}", "$.fnr_ratio")
    if group.fpr_ratio < 1:
        raise ScenarioError(f"must be >= 1, got {float(group.fpr_ratio):g}", "$.fpr_ratio")
    return sens, fpr


@dataclass(frozen=True)
class ExpectedOutcome:
    group: str
    population: int
    expected_cases: Fraction
    detected: Fraction
    missed: Fraction
    false_positives: Fraction
    true_negatives: Fraction
    expected_cases_rounded: int
    detected_rounded: int
    missed_rounded: int
    false_positives_rounded: int
    true_negatives_rounded: int

    def counts(self) -> ConfusionCounts:
        """Exact (rational) confusion cells."""
        return ConfusionCounts(
            tp=self.detected, fp=self.false_positives, tn=self.true_negatives, fn=self.missed
        )

    def rounded_counts(self) -> ConfusionCounts:
        return ConfusionCounts(
            tp=self.detected_rounded,
            fp=self.false_positives_rounded,
            tn=self.true_negatives_rounded,
            fn=self.missed_rounded,
        )


def expected_outcome(scenario: ScenarioSpec, group: GroupSpec) -> ExpectedOutcome:
    sens, fpr = effective_rates(scenario, group)
    cases = group.population * group.prevalence
    tp = cases * sens
    fn = cases - tp
    healthy = group.population - cases
    fp = healthy * fpr
    tn = healthy - fp

    cases_r = round_half_away(cases)
    tp_r = min(round_half_away(tp), cases_r)
    fp_r = min(round_half_away(fp), group.population - cases_r)
    return ExpectedOutcome(
        group=group.name,
        population=group.population,
        expected_cases=cases,
        detected=tp,
        missed=fn,
        false_positives=fp,
        true_negatives=tn,
        expected_cases_rounded=cases_r,
        detected_rounded=tp_r,
        missed_rounded=cases_r - tp_r,
        false_positives_rounded=fp_r,
        true_negatives_rounded=group.population - cases_r - fp_r,
    )


def expected_outcomes(scenario: ScenarioSpec) -> List[ExpectedOutcome]:
    return [expected_outcome(scenario, g) for g in scenario.groups]


def _fmt(x) -> str:
    f = float(x)
    return f"{f:,.0f}" if f == int(f) else f"{f:,.2f}".rstrip("0").rstrip(".")


def reported_figure_notes(scenario: ScenarioSpec, outcomes: Sequence[ExpectedOutcome] | None = None) -> List[str]:
    """Cross-check each group's reported figures against the computed outcomes.

    A reported figure less than one unit, or within
    :data:`REPORTED_FIGURE_TOLERANCE` relative, of the exact value but
    different from our rounding is noted as a display-rounding difference;
    anything further away is flagged as not derivable.
    """
    outcomes = outcomes or expected_outcomes(scenario)
    by_name = {o.group: o for o in outcomes}
    notes = []
    for g in scenario.groups:
        o = by_name[g.name]
        for key, reported in g.reported.items():
            exact = getattr(o, key)
            rounded = getattr(o, key + "_rounded")
            if reported == rounded:
                continue
            diff = abs(reported - exact)
            if diff < 1 or (exact and diff / exact <= REPORTED_FIGURE_TOLERANCE):
                notes.append(
                    f"{g.name} {key}: reported figure {_fmt(reported)} differs from the rounded "
                    f"value {_fmt(rounded)} (exact {_fmt(exact)}); difference is display rounding"
                )
            else:
                notes.append(
                    f"{g.name} {key}: reported figure {_fmt(reported)} is not derivable from the "
                    f"scenario parameters; computed {_fmt(rounded)} (exact {_fmt(exact)})"
                )
    return notes


def scenario_notes(scenario: ScenarioSpec, outcomes: Sequence[ExpectedOutcome] | None = None) -> List[str]:
    return list(scenario.notes) + reported_figure_notes(scenario, outcomes)


def expected_tables(scenario: ScenarioSpec, rounded: bool = False) -> Dict[str, List[GroupStats]]:
    """Per-group stats built directly from expected outcomes, ready for auditing."""
    outcomes = expected_outcomes(scenario)
    counts = {o.group: (o.rounded_counts() if rounded else o.counts()) for o in outcomes}
    return {scenario.attribute_name: group_stats_from_counts(scenario.attribute_name, counts)}


def generate_cohort(scenario: ScenarioSpec, seed: int) -> Dataset:
    """Draw one record per person.

    Labels are Bernoulli(prevalence); predictions are Bernoulli(effective
    sensitivity) for positives and Bernoulli(effective FPR) for negatives.
    Each group draws from its own stream keyed by ``(seed, group index)``,
    so a group's records do not depend on the other groups.
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    records = []
    width = len(str(scenario.population))
    k = 0
    for idx, g in enumerate(scenario.groups):
        sens, fpr = effective_rates(scenario, g)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), idx]))
        labels = rng.random(g.population) < float(g.prevalence)
        u = rng.random(g.population)
        preds = np.where(labels, u < float(sens), u < float(fpr))
        attrs = {scenario.attribute_name: g.name}
        for label, pred in zip(labels.tolist(), preds.tolist()):
            k += 1
            p = int(pred)
            records.append(Record(f"p{k:0{width}d}", int(label), attrs, score=float(p), prediction=p))
    return Dataset(tuple(records), (scenario.attribute_name,))


# -- serialization -----------------------------------------------------------


def _rat_out(f: Fraction):
    return f.numerator if f.denominator == 1 else str(f)


def scenario_to_dict(scenario: ScenarioSpec) -> dict:
    """JSON-ready form. Rationals are written as ints or exact ``"p/q"`` strings."""
    return {
        "schema_version": SCHEMA_VERSION,
        "name": scenario.name,
        "description": scenario.description,
        "attribute_name": scenario.attribute_name,
        "base_sensitivity": _rat_out(scenario.base_sensitivity),
        "base_specificity": _rat_out(scenario.base_specificity),
        "groups": [
            {
                "name": g.name,
                "population": g.population,
                "prevalence": _rat_out(g.prevalence),
                "fnr_ratio": _rat_out(g.fnr_ratio),
                "fpr_ratio": _rat_out(g.fpr_ratio),
                "reported": dict(g.reported),
            }
            for g in scenario.groups
        ],
        "notes": list(scenario.notes),
    }


_GROUP_KEYS = {"name", "population", "prevalence", "fnr_ratio", "fpr_ratio", "reported"}
_SCENARIO_KEYS = {"schema_version", "name", "description", "attribute_name", "base_sensitivity",
                  "base_specificity", "groups", "notes"}


def _require(obj: Mapping, key: str, path: str):
    if key not in obj:
        raise ScenarioError(f"missing required field {key!r}", path)
    return obj[key]


def scenario_from_dict(doc) -> ScenarioSpec:
    if not isinstance(doc, dict):
        raise ScenarioError(f"expected an object, got {type(doc).__name__}")
    extra = set(doc) - _SCENARIO_KEYS
    if extra:
        raise ScenarioError(f"unknown field(s) {sorted(extra)}")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if str(version) != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION!r}",
                            "$.schema_version")
    raw_groups = _require(doc, "groups", "$")
    if not isinstance(raw_groups, list):
        raise ScenarioError(f"expected a list, got {type(raw_groups).__name__}", "$.groups")
    if not raw_groups:
        raise ScenarioError("at least one group is required", "$.groups")
    groups = []
    for i, rg in enumerate(raw_groups):
        path = f"$.groups[{i}]"
        if not isinstance(rg, dict):
            raise ScenarioError(f"expected an object, got {type(rg).__name__}", path)
        extra = set(rg) - _GROUP_KEYS
        if extra:
            raise ScenarioError(f"unknown field(s) {sorted(extra)}", path)
        name = _require(rg, "name", path)
        population = _require(rg, "population", path)
        prevalence = _require(rg, "prevalence", path)
        reported = rg.get("reported", {})
        if not isinstance(reported, dict):
            raise ScenarioError(f"expected an object, got {type(reported).__name__}", path + ".reported")
        try:
            groups.append(GroupSpec(
                name=name,
                population=population,
                prevalence=prevalence,
                fnr_ratio=rg.get("fnr_ratio", 1),
                fpr_ratio=rg.get("fpr_ratio", 1),
                reported=reported,
            ))
        except ScenarioError as e:
            raise e.under(path) from None
    notes = doc.get("notes", [])
    if not isinstance(notes, list) or not all(isinstance(n, str) for n in notes):
        raise ScenarioError("expected a list of strings", "$.notes")
    return ScenarioSpec(
        name=_require(doc, "name", "$"),
        base_sensitivity=_require(doc, "base_sensitivity", "$"),
        base_specificity=_require(doc, "base_specificity", "$"),
        groups=tuple(groups),
        attribute_name=_require(doc, "attribute_name", "$"),
        description=doc.get("description", ""),
        notes=tuple(notes),
    )


# -- builtins ----------------------------------------------------------------


def _per_100k(n) -> Fraction:
    return Fraction(n, 100_000)


def builtin_scenarios() -> Dict[str, ScenarioSpec]:
    tb = ScenarioSpec(
        name="tb_visa_au",
        description=(
            "Tuberculosis chest X-ray screening of student visa applicants from five "
            "countries; the tool's false positive rate is 1.5x higher for India."
        ),
        attribute_name="nationality",
        base_sensitivity=Fraction(97, 100),
        base_specificity=Fraction(96, 100),
        groups=(
            GroupSpec("China", 130_000, _per_100k(100),
                      reported={"expected_cases": 130, "detected": 126, "missed": 4, "false_positives": 5_200}),
            GroupSpec("India", 110_000, _per_100k(200), fpr_ratio=Fraction(3, 2),
                      reported={"expected_cases": 220, "detected": 213, "missed": 7, "false_positives": 16_500}),
            GroupSpec("UK", 60_000, _per_100k(10), reported={"false_positives": 2_400}),
            GroupSpec("US", 50_000, _per_100k(9), reported={"false_positives": 2_000}),
            GroupSpec("Vietnam", 40_000, _per_100k(100)),
        ),
        notes=(
            "Applicants from countries outside the five listed (110,000 of 500,000) are "
            "excluded: no prevalence is available for them.",
        ),
    )
    lung = ScenarioSpec(
        name="lung_ca_sg",
        description=(
            "Lung cancer screening of 100,000 residents by ethnicity; the tool's "
            "sensitivity is divided by 1.6 for Malay patients."
        ),
        attribute_name="ethnicity",
        base_sensitivity=Fraction(98, 100),
        base_specificity=Fraction(1),
        groups=(
            GroupSpec("Chinese", 75_900, Fraction(2, 100),
                      reported={"expected_cases": 1_518, "detected": 1_487, "missed": 31}),
            GroupSpec("Malay", 15_000, Fraction(2, 100), fnr_ratio=Fraction(8, 5),
                      reported={"expected_cases": 300, "detected": 184, "missed": 116}),
            GroupSpec("Other", 9_100, Fraction(2, 100)),
        ),
        notes=(
            "An 'Other' group of 9,100 at the same 2% prevalence closes the population to "
            "100,000 and the expected cases to 2,000.",
            "Specificity is fixed at 1.0; false positives play no part in this scenario.",
        ),
    )
    return {tb.name: tb, lung.name: lung}
