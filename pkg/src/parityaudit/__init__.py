"""Group-fairness auditing for binary screening tools.

Computes confusion-matrix rates per demographic group, compares each group
with a reference group, and renders parity verdicts under a disparity
intolerance ``tau``. Also ships expected-value and synthetic-cohort versions
of two screening scenarios (TB visa screening, lung cancer screening).
"""

from ._version import __version__
from .crosstab import MISSING_GROUP, Dataset, GroupStats, Record, binarize, crosstab, multi_crosstab
from .disparity import (
    AuditConfig,
    AuditReport,
    DisparityRecord,
    Reference,
    ReferenceStrategy,
    Verdict,
    audit,
    audit_tables,
    disparity,
    equal_parity_measure,
    parity_check,
    proportional_parity_measure,
    select_reference,
)
from .errors import AuditError, ParseError, ScenarioError, SchemaError
from .ingest import DatasetSchema, load_dataset, load_scenario, save_dataset, save_scenario
from .metrics import ConfusionCounts, MetricSet, accumulate_counts, metric_set
from .report import ReportDocument, emit_report, parse_report_json
from .scenarios import (
    ExpectedOutcome,
    GroupSpec,
    ScenarioSpec,
    builtin_scenarios,
    effective_rates,
    expected_outcomes,
    generate_cohort,
)
