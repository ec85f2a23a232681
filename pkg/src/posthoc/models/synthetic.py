"""Benchmark generator: a signal whose averaged effect hides a strong local one.

The target mixes a small linear trend with a slope on the second feature that
flips sign with the third: y = 0.2 x1 - 5 x2 + 10 x2 1{x3 >= 0} + eps. On
average x2 looks uninformative, while conditional on the sign of x3 its slope
is +-5. All three inputs are iid U(-1, 1), eps is standard normal.
"""

from __future__ import annotations

import numpy as np

from ..tabular import CATEGORICAL, NUMERIC, Dataset, Feature, FeatureSchema
from .base import FunctionPredictor, Predictor


def hidden_slope_signal(X: np.ndarray) -> np.ndarray:
    """Noiseless target function of columns (x1, x2, x3)."""
    x1, x2, x3 = X[:, 0], X[:, 1], X[:, 2]
    return 0.2 * x1 - 5.0 * x2 + 10.0 * x2 * (x3 >= 0)


def _draw(n: int, seed: int):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, 3))
    eps = rng.standard_normal(n)
    y = hidden_slope_signal(X) + eps
    return X, y


def synthetic_pdp_example(n: int, seed: int = 0) -> tuple[Dataset, Predictor]:
    """Seeded sample from the hidden-slope law plus the exact true function.

    The predictor is the noiseless data-generating function itself, so curve
    behaviour can be asserted without fitting noise.
    """
    X, y = _draw(n, seed)
    schema = FeatureSchema(
        features=(
            Feature("x1", NUMERIC),
            Feature("x2", NUMERIC),
            Feature("x3", NUMERIC),
        ),
        target="y",
    )
    data = Dataset(schema, {"x1": X[:, 0], "x2": X[:, 1], "x3": X[:, 2]}, target=y)
    model = FunctionPredictor(hidden_slope_signal, description="hidden-slope true function")
    return data, model


def synthetic_grouping_example(n: int, seed: int = 0) -> tuple[Dataset, Predictor]:
    """Same sample with an extra categorical feature marking sign(x3).

    The predictor ignores the added column; it exists so curves can be grouped
    by the sign that controls the local slope of x2.
    """
    X, y = _draw(n, seed)
    schema = FeatureSchema(
        features=(
            Feature("x1", NUMERIC),
            Feature("x2", NUMERIC),
            Feature("x3", NUMERIC),
            Feature("x3_sign", CATEGORICAL, ("neg", "nonneg")),
        ),
        target="y",
    )
    sign = (X[:, 2] >= 0).astype(np.int64)
    data = Dataset(
        schema,
        {"x1": X[:, 0], "x2": X[:, 1], "x3": X[:, 2], "x3_sign": sign},
        target=y,
    )
    model = FunctionPredictor(
        lambda M: hidden_slope_signal(M[:, :3]),
        description="hidden-slope true function (sign column ignored)",
    )
    return data, model
