import numpy as np

from posthoc.tabular import CATEGORICAL, NUMERIC, Dataset, Feature, FeatureSchema


def make_schema(spec, target=None, exposure=None, weight=None):
    """spec: list of (name, "numeric") or (name, "categorical", levels)."""
    feats = []
    for item in spec:
        if item[1] == NUMERIC:
            feats.append(Feature(item[0], NUMERIC))
        else:
            feats.append(Feature(item[0], CATEGORICAL, tuple(item[2])))
    return FeatureSchema(tuple(feats), target=target, exposure=exposure, weight=weight)


def make_dataset(spec, columns, target=None, exposure=None, weight=None):
    schema = make_schema(
        spec,
        target="y" if target is not None else None,
        exposure="exposure" if exposure is not None else None,
        weight="w" if weight is not None else None,
    )
    return Dataset(schema, columns, target=target, exposure=exposure, weight=weight)


def numeric_dataset(arrays: dict, target=None, **kw):
    """All-numeric dataset from a dict of column arrays."""
    spec = [(name, NUMERIC) for name in arrays]
    return make_dataset(spec, {k: np.asarray(v, float) for k, v in arrays.items()}, target=target, **kw)


# Age/Power prediction tables: one additive, one with a +100 Young&High bump.
AGE_POWER_SPEC = [("Age", "categorical", ["Young", "Old"]), ("Power", "categorical", ["High", "Low"])]
ADDITIVE_CELLS = {("Young", "High"): 300.0, ("Young", "Low"): 200.0,
                  ("Old", "High"): 250.0, ("Old", "Low"): 150.0}
INTERACTION_CELLS = {("Young", "High"): 400.0, ("Young", "Low"): 200.0,
                     ("Old", "High"): 250.0, ("Old", "Low"): 150.0}


def age_power_schema():
    return make_schema(AGE_POWER_SPEC)


def age_power_table(cells, schema=None):
    from posthoc.models import RuleTable

    schema = schema or age_power_schema()
    rules = [({"Age": a, "Power": p}, v) for (a, p), v in cells.items()]
    return RuleTable(schema, ["Age", "Power"], rules)


def balanced_age_power_dataset(schema=None):
    """One row per cell of the Age x Power cross."""
    from posthoc.tabular import Dataset

    schema = schema or age_power_schema()
    return Dataset(schema, {"Age": [0, 0, 1, 1], "Power": [0, 1, 0, 1]})
