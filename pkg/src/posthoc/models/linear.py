"""Weighted ridge regression and the fitted linear reference model."""

from __future__ import annotations

import numpy as np

from ..errors import ModelError
from ..tabular import Dataset, FeatureSchema
from .base import CONCURRENT_SAFE, Predictor
from .encoding import DesignEncoder


def weighted_ridge(design, y, weights=None, lam: float = 0.0, check_gradient: bool = True):
    """Minimize sum w_i (y_i - b0 - d_i @ b)^2 + lam * ||b||^2.

    The intercept is unpenalized. Solved as an augmented least-squares system
    (sqrt-weight rows plus sqrt(lam) penalty rows), so callers comparing
    against normal equations exercise an independent path.

    Returns (intercept, coef).
    """
    design = np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, m = design.shape
    if y.shape[0] != n:
        raise ModelError("design/target length mismatch")
    if lam < 0:
        raise ModelError("ridge penalty must be nonnegative")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != n:
            raise ModelError("weight length mismatch")
        if np.any(w < 0):
            raise ModelError("negative sample weight")
    if not (np.all(np.isfinite(design)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        raise ModelError("non-finite inputs")
    if w.sum() <= 0:
        raise ModelError("all sample weights are zero")

    sw = np.sqrt(w)
    A = np.empty((n, m + 1))
    A[:, 0] = sw
    A[:, 1:] = design * sw[:, None]
    b = sw * y
    if lam > 0:
        pen = np.zeros((m, m + 1))
        pen[:, 1:] = np.sqrt(lam) * np.eye(m)
        A = np.vstack([A, pen])
        b = np.concatenate([b, np.zeros(m)])

    sol, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if lam == 0 and rank < m + 1:
        raise ModelError("design matrix is rank-deficient at lambda=0")
    if check_gradient:
        grad = 2.0 * (A.T @ (A @ sol - b))
        scale = max(1.0, float(np.linalg.norm(A.T @ b)))
        if float(np.linalg.norm(grad)) > 1e-8 * scale:
            raise ModelError("ridge solve failed the gradient check (ill-conditioned system)")
    return float(sol[0]), sol[1:]


class FittedLinear(Predictor):
    """Linear model over a one-hot encoded design, with optional ridge penalty."""

    concurrency = CONCURRENT_SAFE

    def __init__(self, intercept: float, coef: np.ndarray, encoder: DesignEncoder, ridge_lambda: float = 0.0):
        coef = np.asarray(coef, dtype=np.float64)
        if coef.shape != (encoder.width,):
            raise ModelError(
                f"coefficient count {coef.shape[0]} does not match encoded width {encoder.width}"
            )
        self.intercept = float(intercept)
        self.coef = coef
        self.encoder = encoder
        self.ridge_lambda = float(ridge_lambda)
        self.description = f"linear model (lambda={ridge_lambda})"

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_encoded(self.encoder.encode(X))

    def predict_encoded(self, E: np.ndarray) -> np.ndarray:
        return self.intercept + E @ self.coef

    def to_dict(self) -> dict:
        return {
            "kind": "linear",
            "intercept": self.intercept,
            "coef": self.coef.tolist(),
            "ridge_lambda": self.ridge_lambda,
            "drop_first": self.encoder.drop_first,
            "schema": self.encoder.schema.to_dict(),
            "columns": list(self.encoder.column_names),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FittedLinear":
        schema = FeatureSchema.from_dict(doc["schema"])
        encoder = DesignEncoder(schema, drop_first=doc["drop_first"])
        return cls(doc["intercept"], np.array(doc["coef"]), encoder, doc.get("ridge_lambda", 0.0))


def fit_ridge(data: Dataset, lam: float = 0.0, sample_weights=None) -> FittedLinear:
    """Fit a (weighted) ridge regression of the target on the encoded features.

    With lam=0 the first level of each categorical is dropped and the design
    must be full rank; with lam>0 all levels stay in (the penalty handles the
    redundancy).
    """
    if data.target is None:
        raise ModelError("dataset declares no target")
    weights = sample_weights if sample_weights is not None else data.weight
    encoder = DesignEncoder(data.schema, drop_first=(lam == 0))
    E = encoder.encode(data.matrix)
    intercept, coef = weighted_ridge(E, data.target, weights, lam)
    return FittedLinear(intercept, coef, encoder, ridge_lambda=lam)
