"""One-hot design-matrix construction for the reference models."""

from __future__ import annotations

import numpy as np

from ..tabular import FeatureSchema


class DesignEncoder:
    """Expand schema-space rows into a numeric design matrix.

    Numeric features pass through; a categorical feature with L levels becomes
    L indicator columns, or L-1 with ``drop_first`` (reference level dropped
    for identifiability when nothing regularizes the redundancy).
    """

    def __init__(self, schema: FeatureSchema, drop_first: bool = False):
        self.schema = schema
        self.drop_first = drop_first
        self._plan = []  # (feature_index, None) or (feature_index, level_id)
        names = []
        for j, feat in enumerate(schema.features):
            if feat.is_categorical:
                start = 1 if drop_first else 0
                for lev in range(start, feat.n_levels):
                    self._plan.append((j, lev))
                    names.append(f"{feat.name}={feat.levels[lev]}")
            else:
                self._plan.append((j, None))
                names.append(feat.name)
        self.column_names = tuple(names)

    @property
    def width(self) -> int:
        return len(self._plan)

    def encode(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((X.shape[0], self.width), dtype=np.float64)
        for c, (j, lev) in enumerate(self._plan):
            out[:, c] = X[:, j] if lev is None else (X[:, j] == lev)
        return out
