"""Acceptance criteria, one marked test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints
a PASS/FAIL line for each criterion number.
"""

import json
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from oracles import naive_cells, naive_group_pairs, naive_rates, random_dataset
from parityaudit import (
    AuditConfig,
    ReferenceStrategy,
    Verdict,
    audit,
    builtin_scenarios,
    crosstab,
    effective_rates,
    emit_report,
    generate_cohort,
    parity_check,
)
from parityaudit.cli import main
from parityaudit.ingest import dataset_to_csv
from parityaudit.metrics import ConfusionCounts, false_discovery_rate

SCENARIOS = builtin_scenarios()


def _simulate_json(name):
    """Run the CLI in a fresh interpreter; return (document, wall seconds)."""
    t0 = time.perf_counter()
    r = subprocess.run(
        [sys.executable, "-m", "parityaudit", "simulate", "--scenario", name,
         "--mode", "expected", "--format", "json"],
        capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - t0
    assert r.returncode == 0, r.stderr
    doc = json.loads(r.stdout)
    return doc, {g["group"]: g for g in doc["groups"]}, elapsed


@pytest.mark.criterion(1, "lung_ca_sg expected outcomes match the reported rounded figures")
def test_criterion_1_singapore_fnr():
    doc, groups, elapsed = _simulate_json("lung_ca_sg")
    chinese, malay = groups["Chinese"], groups["Malay"]

    # Exact values are emitted alongside the rounded ones.
    assert Fraction(chinese["detected"]["exact"]["numerator"], chinese["detected"]["exact"]["denominator"]) \
        == Fraction(148764, 100)
    assert Fraction(chinese["missed"]["exact"]["numerator"], chinese["missed"]["exact"]["denominator"]) \
        == Fraction(3036, 100)
    assert malay["detected"]["exact"]["value"] == 183.75
    assert malay["missed"]["exact"]["value"] == 116.25
    assert elapsed < 1.0

    assert (malay["detected"]["rounded"], malay["missed"]["rounded"]) == (184, 116)
    # Reported figures, exact match. 1,487.64 rounds to 1,488 and 30.36 to 30
    # under any nearest-integer rule; see the notes emitted with the table.
    assert (chinese["detected"]["rounded"], chinese["missed"]["rounded"]) == (1487, 31)


@pytest.mark.criterion(2, "tb_visa_au expected TP/FN and FP figures")
def test_criterion_2_tb_fpr():
    _, groups, _ = _simulate_json("tb_visa_au")
    assert groups["China"]["detected"]["rounded"] == 126
    assert groups["China"]["missed"]["rounded"] == 4
    for name, reported in (("UK", 2400), ("US", 2000), ("China", 5200)):
        fp = groups[name]["false_positives"]["exact"]
        exact = Fraction(fp["numerator"], fp["denominator"])
        assert abs(exact - reported) <= Fraction(2, 1000) * reported, (name, exact)
    fp = groups["China"]["false_positives"]["exact"]
    assert Fraction(fp["numerator"], fp["denominator"]) == Fraction(51948, 10)


@pytest.mark.criterion(3, "India false positives follow the oracle; 16,500 flagged in notes")
def test_criterion_3_india():
    doc, groups, _ = _simulate_json("tb_visa_au")
    tb = SCENARIOS["tb_visa_au"]
    india = tb.group("India")
    cases = india.population * india.prevalence
    oracle = (india.population - cases) * (1 - tb.base_specificity) * india.fpr_ratio
    assert oracle == Fraction(65868, 10) == 109_780 * Fraction(6, 100)

    fp = groups["India"]["false_positives"]
    assert Fraction(fp["exact"]["numerator"], fp["exact"]["denominator"]) == oracle
    assert fp["rounded"] == 6587
    flagged = [n for n in doc["notes"] if "India" in n and "16,500" in n]
    assert flagged and "not derivable" in flagged[0]


@pytest.mark.criterion(4, "effective sensitivity 0.98 / 1.6 = 0.6125 exactly")
def test_criterion_4_effective_rate():
    lung = SCENARIOS["lung_ca_sg"]
    assert lung.base_sensitivity == Fraction(98, 100)
    assert lung.group("Malay").fnr_ratio == Fraction(16, 10)
    sens, _ = effective_rates(lung, lung.group("Malay"))
    assert sens == Fraction(6125, 10000)


@pytest.mark.criterion(5, "lung_ca_sg cohort audit recovers the Malay FNR disparity")
def test_criterion_5_fnr_round_trip():
    t0 = time.perf_counter()
    cohort = generate_cohort(SCENARIOS["lung_ca_sg"], seed=0)
    report = audit(cohort, AuditConfig(tau=Fraction(4, 5), metrics=("fnr",),
                                       reference=ReferenceStrategy.custom("Chinese")))
    elapsed = time.perf_counter() - t0
    assert len(cohort) == 100_000
    rec = report.find("ethnicity", "Malay", "fnr")
    assert abs(float(rec.group_metric) - 0.3875) <= 0.15 * 0.3875
    assert abs(float(rec.measure) - 19.375) <= 0.20 * 19.375
    assert rec.verdict is Verdict.DISPARITY
    assert elapsed < 5.0


@pytest.mark.criterion(6, "tb_visa_au cohort audit recovers the India FPR ratio")
def test_criterion_6_fpr_round_trip():
    cohort = generate_cohort(SCENARIOS["tb_visa_au"], seed=0)
    report = audit(cohort, AuditConfig(metrics=("fpr",), reference=ReferenceStrategy.custom("China")))
    measure = report.find("nationality", "India", "fpr").measure
    assert abs(float(measure) - 1.5) <= 0.05 * 1.5


@pytest.mark.criterion(7, "parity band boundaries are exact and inclusive")
def test_criterion_7_parity_band():
    for m in (0.8, 1.0, 1.25):
        assert parity_check(m, 0.8) is Verdict.PARITY, m
    for m in (0.7999, 1.2501):
        assert parity_check(m, 0.8) is Verdict.DISPARITY, m
    for m in (0.8, 1.25, 0.7999, 1.2501, 0.9999, 1.0001):
        assert parity_check(m, 1.0) is Verdict.DISPARITY, m
    assert parity_check(1.0, 1.0) is Verdict.PARITY


@pytest.mark.criterion(8, "1,000 random datasets match the naive per-record oracle")
def test_criterion_8_oracle_equivalence():
    rnd = random.Random(20240101)
    complements = (("fpr", "tnr"), ("fnr", "tpr"), ("fdr", "ppv"), ("for_rate", "npv"))
    for _ in range(1000):
        ds = random_dataset(rnd, n=rnd.randint(0, 200))
        for attr in ds.attribute_names:
            for g in crosstab(ds, attr):
                pairs = naive_group_pairs(ds.records, attr, g.group_value)
                assert (g.counts.tp, g.counts.fp, g.counts.tn, g.counts.fn) == naive_cells(pairs)
                got = g.metrics.as_dict()
                for name, want in naive_rates(pairs).items():
                    assert got[name] == want, (attr, g.group_value, name)
                for a, b in complements:
                    if got[a] is not None:
                        assert abs(float(got[a]) + float(got[b]) - 1) <= 1e-12


@pytest.mark.criterion(9, "FDR worked example: FP=30, TP=70 gives 0.30")
def test_criterion_9_fdr():
    assert false_discovery_rate(ConfusionCounts(tp=70, fp=30)) == Fraction(3, 10)


@pytest.mark.criterion(10, "cohorts and reports are deterministic")
def test_criterion_10_determinism(tmp_path):
    for name in SCENARIOS:
        paths = [tmp_path / f"{name}-{i}.csv" for i in range(2)]
        for p in paths:
            assert main(["simulate", "--scenario", name, "--mode", "cohort", "--seed", "11",
                         "--out", str(p)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    ds = generate_cohort(SCENARIOS["lung_ca_sg"], seed=3)
    cfg = AuditConfig(metrics=("fpr", "fdr", "fnr", "for", "equal_parity", "proportional_parity"))
    a = json.loads(emit_report(audit(ds, cfg, timestamp="2020-01-01T00:00:00+00:00")).payload)
    b = json.loads(emit_report(audit(ds, cfg, timestamp="2030-06-06T06:06:06+00:00")).payload)
    assert a["provenance"].pop("timestamp") != b["provenance"].pop("timestamp")
    assert a == b
    assert dataset_to_csv(ds) == dataset_to_csv(generate_cohort(SCENARIOS["lung_ca_sg"], seed=3))
