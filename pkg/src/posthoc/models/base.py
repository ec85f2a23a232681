"""The black-box predictor contract."""

from __future__ import annotations

import numpy as np

from ..errors import ModelError

CONCURRENT_SAFE = "concurrent-safe"
SERIALIZED = "serialized"


class Predictor:
    """Batch prediction contract: schema-ordered rows -> real-valued outputs.

    ``predict`` must be deterministic for fixed input, return one value per
    row, and never mutate its argument. ``concurrency`` declares whether
    callers may issue overlapping predict calls.
    """

    concurrency: str = CONCURRENT_SAFE
    description: str = ""

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def check_prediction(out, n: int) -> np.ndarray:
    out = np.asarray(out, dtype=np.float64).reshape(-1)
    if out.shape[0] != n:
        raise ModelError(f"predictor returned {out.shape[0]} values for {n} rows")
    if not np.all(np.isfinite(out)):
        raise ModelError("predictor returned non-finite values")
    return out


class FunctionPredictor(Predictor):
    """Wrap a plain function of the (n, p) feature matrix as a predictor."""

    def __init__(self, fn, description: str = "", concurrency: str = CONCURRENT_SAFE):
        self._fn = fn
        self.description = description
        self.concurrency = concurrency

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return check_prediction(self._fn(X), X.shape[0])


def constant_predictor(value: float, description: str = "") -> FunctionPredictor:
    return FunctionPredictor(
        lambda X: np.full(X.shape[0], float(value)),
        description=description or f"constant {value}",
    )
