import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_cells, naive_group_pairs, random_dataset
from parityaudit import MISSING_GROUP, AuditError, Dataset, Record, binarize, crosstab, multi_crosstab
from parityaudit.metrics import ConfusionCounts


def _scored(scores):
    return Dataset(tuple(Record(f"r{i}", 0, {"g": "a"}, score=s) for i, s in enumerate(scores)))


class TestBinarize:
    def test_inclusive_threshold(self):
        out = binarize(_scored([0.2, 0.5, 0.9]), 0.5)
        assert [r.prediction for r in out.records] == [0, 1, 1]

    def test_zero_threshold_flags_all(self):
        assert all(r.prediction == 1 for r in binarize(_scored([0.0, 0.3, 1.0]), 0.0).records)

    @pytest.mark.parametrize("t", [1.1, -0.1])
    def test_out_of_range(self, t):
        with pytest.raises(AuditError):
            binarize(_scored([0.5]), t)

    def test_prebinarized_pass_through(self):
        ds = Dataset((Record("a", 1, {"g": "x"}, score=0.1, prediction=1),))
        assert binarize(ds, 0.5) is ds

    def test_decimal_boundary(self):
        # 0.3 is not exactly representable; the boundary must still be inclusive.
        assert binarize(_scored([0.3]), "0.3").records[0].prediction == 1
        assert binarize(_scored([0.1 + 0.2]), 0.3).records[0].prediction == 1


class TestDataset:
    def test_duplicate_ids(self):
        with pytest.raises(AuditError, match="duplicate entity_id"):
            Dataset((Record("a", 0, {"g": "x"}, prediction=0), Record("a", 1, {"g": "y"}, prediction=1)))

    def test_attribute_sets_must_match(self):
        with pytest.raises(AuditError):
            Dataset((Record("a", 0, {"g": "x"}, prediction=0), Record("b", 1, {"h": "y"}, prediction=1)))

    def test_record_validation(self):
        with pytest.raises(AuditError):
            Record("a", 2, {"g": "x"}, prediction=0)
        with pytest.raises(AuditError):
            Record("a", 1, {"g": "x"}, score=1.5)
        with pytest.raises(AuditError):
            Record("a", 1, {"g": "x"})


class TestCrosstab:
    def test_single_group(self):
        ds = random_dataset(random.Random(1), n=50, n_attrs=1, n_groups=1)
        (g,) = crosstab(ds, "attr0")
        assert g.n == 50 and g.counts == ds.counts()

    def test_singapore_order(self):
        sizes = {"Chinese": 75_900, "Malay": 15_000, "Other": 9_100}
        # Shrunk 100x; ordering only depends on relative size.
        recs = []
        for name, n in sizes.items():
            recs += [Record(f"{name}{i}", 0, {"ethnicity": name}, prediction=0) for i in range(n // 100)]
        groups = crosstab(Dataset(tuple(reversed(recs))), "ethnicity")
        assert [g.group_value for g in groups] == ["Chinese", "Malay", "Other"]

    def test_ties_break_lexicographically(self):
        recs = [Record(f"{v}{i}", 0, {"a": v}, prediction=0) for v in ("b", "a", "c") for i in range(3)]
        assert [g.group_value for g in crosstab(Dataset(tuple(recs)), "a")] == ["a", "b", "c"]

    def test_missing_value_sentinel(self):
        ds = Dataset((Record("x", 1, {"a": ""}, prediction=1), Record("y", 0, {"a": "k"}, prediction=0)))
        values = {g.group_value for g in crosstab(ds, "a")}
        assert values == {MISSING_GROUP, "k"}

    def test_errors(self):
        ds = random_dataset(random.Random(2), n=5, n_attrs=1)
        with pytest.raises(AuditError, match="unknown attribute"):
            crosstab(ds, "nope")
        with pytest.raises(AuditError, match="not binarized"):
            crosstab(random_dataset(random.Random(2), n=5, binarized=False), "attr0")

    def test_matches_naive_filter_loop(self):
        rnd = random.Random(3)
        ds = random_dataset(rnd, n=200, n_attrs=2, n_groups=4)
        for attr in ds.attribute_names:
            for g in crosstab(ds, attr):
                pairs = naive_group_pairs(ds.records, attr, g.group_value)
                assert (g.counts.tp, g.counts.fp, g.counts.tn, g.counts.fn) == naive_cells(pairs)
                assert g.n == len(pairs)

    @settings(max_examples=100)
    @given(st.randoms(use_true_random=False))
    def test_partition_and_additivity(self, rnd):
        ds = random_dataset(rnd)
        total = ds.counts()
        pp_total = total.predicted_positive
        for attr in ds.attribute_names:
            groups = crosstab(ds, attr)
            assert sum(g.n for g in groups) == len(ds)
            assert ConfusionCounts.sum(g.counts for g in groups) == total
            shares = [g.group_share_of_predicted_positives for g in groups]
            if pp_total:
                assert sum(shares) == 1
            else:
                assert all(s is None for s in shares)

    @settings(max_examples=50)
    @given(st.randoms(use_true_random=False))
    def test_order_invariance(self, rnd):
        ds = random_dataset(rnd)
        recs = list(ds.records)
        rnd.shuffle(recs)
        shuffled = Dataset(tuple(recs), ds.attribute_names)
        for attr in ds.attribute_names:
            assert crosstab(ds, attr) == crosstab(shuffled, attr)


class TestMultiCrosstab:
    def test_empty(self):
        assert multi_crosstab(random_dataset(random.Random(4), n=5), []) == {}

    def test_two_attributes_sum_to_size(self):
        ds = random_dataset(random.Random(5), n=120, n_attrs=2)
        tables = multi_crosstab(ds, ["attr1", "attr0"])
        assert list(tables) == ["attr1", "attr0"]
        for groups in tables.values():
            assert sum(g.n for g in groups) == 120

    def test_duplicates_collapse(self):
        ds = random_dataset(random.Random(6), n=20, n_attrs=2)
        tables = multi_crosstab(ds, ["attr0", "attr0"])
        assert list(tables) == ["attr0"]
        assert tables["attr0"] == crosstab(ds, "attr0")

    def test_unknown_aborts(self):
        ds = random_dataset(random.Random(6), n=20, n_attrs=2)
        with pytest.raises(AuditError):
            multi_crosstab(ds, ["attr0", "zzz"])


def test_share_of_predicted_positives_exact():
    recs = [Record(f"a{i}", 1, {"g": "a"}, prediction=1) for i in range(3)]
    recs += [Record(f"b{i}", 0, {"g": "b"}, prediction=int(i == 0)) for i in range(4)]
    shares = {g.group_value: g.group_share_of_predicted_positives for g in crosstab(Dataset(tuple(recs)), "g")}
    assert shares == {"a": Fraction(3, 4), "b": Fraction(1, 4)}
