"""Naive reference implementations used as independent test oracles."""

from fractions import Fraction


def naive_cells(pairs):
    """Count each confusion cell by scanning the records once per cell."""
    tp = sum(1 for p, a in pairs if p == 1 and a == 1)
    fp = sum(1 for p, a in pairs if p == 1 and a == 0)
    tn = sum(1 for p, a in pairs if p == 0 and a == 0)
    fn = sum(1 for p, a in pairs if p == 0 and a == 1)
    return tp, fp, tn, fn


def naive_rates(pairs):
    """Each rate as the mean of an indicator over the records it conditions on."""

    def cond_mean(hit, given):
        sel = [hit(p, a) for p, a in pairs if given(p, a)]
        return Fraction(sum(sel), len(sel)) if sel else None

    return {
        "fpr": cond_mean(lambda p, a: p == 1, lambda p, a: a == 0),
        "tnr": cond_mean(lambda p, a: p == 0, lambda p, a: a == 0),
        "fnr": cond_mean(lambda p, a: p == 0, lambda p, a: a == 1),
        "tpr": cond_mean(lambda p, a: p == 1, lambda p, a: a == 1),
        "fdr": cond_mean(lambda p, a: a == 0, lambda p, a: p == 1),
        "ppv": cond_mean(lambda p, a: a == 1, lambda p, a: p == 1),
        "for_rate": cond_mean(lambda p, a: a == 1, lambda p, a: p == 0),
        "npv": cond_mean(lambda p, a: a == 0, lambda p, a: p == 0),
        "predicted_positive_rate_within_group": cond_mean(lambda p, a: p == 1, lambda p, a: True),
        "prevalence": cond_mean(lambda p, a: a == 1, lambda p, a: True),
    }


def naive_group_pairs(records, attribute, value):
    return [(r.prediction, r.label) for r in records if (r.attributes[attribute] or "<missing>") == value]


def random_dataset(rnd, n=None, n_attrs=None, n_groups=None, binarized=True):
    """Random dataset with up to 3 attributes of up to 4 groups each."""
    from parityaudit import Dataset, Record

    n = rnd.randint(0, 200) if n is None else n
    n_attrs = rnd.randint(1, 3) if n_attrs is None else n_attrs
    names = [f"attr{i}" for i in range(n_attrs)]
    levels = {a: [f"g{j}" for j in range(n_groups or rnd.randint(1, 4))] for a in names}
    records = []
    for i in range(n):
        attrs = {a: rnd.choice(levels[a]) for a in names}
        label = rnd.randint(0, 1)
        if binarized:
            records.append(Record(f"e{i}", label, attrs, prediction=rnd.randint(0, 1)))
        else:
            records.append(Record(f"e{i}", label, attrs, score=rnd.random()))
    return Dataset(tuple(records), tuple(names))
