"""Exact lookup models defined by a total rule table on categorical features."""

from __future__ import annotations

import itertools
import json

import numpy as np

from ..errors import ModelError
from ..tabular import FeatureSchema
from .base import CONCURRENT_SAFE, Predictor


class RuleTable:
    """A total map from categorical feature combinations to predictions.

    Construction fails unless every combination on the cross-product of the
    listed features is covered exactly once.
    """

    def __init__(self, schema: FeatureSchema, features, rules):
        self.schema = schema
        self.features = tuple(features)
        feats = []
        for name in self.features:
            f = schema.feature(name)
            if not f.is_categorical:
                raise ModelError(f"rule-table feature {name!r} must be categorical")
            feats.append(f)
        shape = tuple(f.n_levels for f in feats)
        table = np.full(shape, np.nan)
        for when, prediction in rules:
            if set(when) != set(self.features):
                raise ModelError(f"rule condition {when!r} must name exactly {self.features}")
            idx = tuple(f.level_id(when[f.name]) for f in feats)
            if not np.isnan(table[idx]):
                raise ModelError(f"duplicate rule for combination {when!r}")
            table[idx] = float(prediction)
        if np.any(np.isnan(table)):
            missing = next(
                combo
                for combo in itertools.product(*(range(s) for s in shape))
                if np.isnan(table[combo])
            )
            labels = {f.name: f.levels[i] for f, i in zip(feats, missing)}
            raise ModelError(f"uncovered combination: {labels}")
        self._table = table

    @classmethod
    def from_dict(cls, doc: dict, schema: FeatureSchema) -> "RuleTable":
        rules = [(r["when"], r["prediction"]) for r in doc["rules"]]
        return cls(schema, doc["features"], rules)

    @classmethod
    def from_json_file(cls, path, schema: FeatureSchema) -> "RuleTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), schema)

    def to_dict(self) -> dict:
        feats = [self.schema.feature(n) for n in self.features]
        rules = []
        for combo in itertools.product(*(range(f.n_levels) for f in feats)):
            rules.append({
                "when": {f.name: f.levels[i] for f, i in zip(feats, combo)},
                "prediction": float(self._table[combo]),
            })
        return {"features": list(self.features), "rules": rules}


class RuleTablePredictor(Predictor):
    concurrency = CONCURRENT_SAFE

    def __init__(self, table: RuleTable):
        self.table = table
        self._cols = tuple(table.schema.index(n) for n in table.features)
        self.description = f"rule table on {table.features}"

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        idx = tuple(X[:, c].astype(np.int64) for c in self._cols)
        return self.table._table[idx]


def rule_table_model(table: RuleTable) -> Predictor:
    """Exact lookup predictor over the table's feature cross-product."""
    return RuleTablePredictor(table)
