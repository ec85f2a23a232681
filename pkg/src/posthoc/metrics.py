"""Loss functions for permutation importance and model comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

MSE = "mse"
MAE = "mae"
POISSON_DEVIANCE = "poisson_deviance"
_KINDS = (MSE, MAE, POISSON_DEVIANCE)


@dataclass(frozen=True)
class LossKind:
    """A loss function name plus whether predictions are scaled by exposure."""

    kind: str
    use_exposure: bool = False

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DataError(f"unknown loss kind {self.kind!r}; expected one of {_KINDS}")

    @classmethod
    def parse(cls, name: str, use_exposure: bool = False) -> "LossKind":
        return cls(name.strip().lower().replace("-", "_"), use_exposure)


def loss(kind: LossKind, y, yhat, exposure=None) -> float:
    """Evaluate a loss; with exposure given, yhat is frequency times exposure.

    Poisson deviance is the mean unit deviance (2/n) sum [y log(y/yhat)
    - (y - yhat)], with the log term defined as 0 when y = 0.
    """
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise DataError(f"length mismatch: y has {y.shape}, yhat has {yhat.shape}")
    if exposure is not None:
        exposure = np.asarray(exposure, dtype=np.float64)
        if exposure.shape != y.shape:
            raise DataError("length mismatch: exposure")
        yhat = yhat * exposure
    n = y.shape[0]
    if n == 0:
        raise DataError("empty inputs")

    if kind.kind == MSE:
        return float(np.mean((y - yhat) ** 2))
    if kind.kind == MAE:
        return float(np.mean(np.abs(y - yhat)))
    if np.any(y < 0):
        raise DataError("Poisson deviance requires nonnegative targets")
    if np.any(yhat <= 0):
        raise DataError("Poisson deviance requires strictly positive predictions")
    term = np.zeros(n)
    pos = y > 0
    # Difference of logs: y/yhat can underflow to 0 for denormal y.
    term[pos] = y[pos] * (np.log(y[pos]) - np.log(yhat[pos]))
    return float((2.0 / n) * np.sum(term - (y - yhat)))
