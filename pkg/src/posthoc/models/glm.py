"""Poisson GLM with log link, fitted by iteratively reweighted least squares."""

from __future__ import annotations

import numpy as np

from ..errors import ModelError
from ..tabular import Dataset, FeatureSchema
from .base import CONCURRENT_SAFE, Predictor
from .encoding import DesignEncoder


def poisson_deviance_total(y, mu, weights=None) -> float:
    """Total Poisson deviance 2 * sum w [y log(y/mu) - (y - mu)], 0 log 0 := 0."""
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=np.float64)
    term = np.zeros_like(y)
    pos = y > 0
    term[pos] = y[pos] * (np.log(y[pos]) - np.log(mu[pos]))
    return float(2.0 * np.sum(w * (term - (y - mu))))


class FittedGlm(Predictor):
    """Fitted Poisson regression; ``predict`` returns per-unit frequency."""

    concurrency = CONCURRENT_SAFE
    link = "log"

    def __init__(self, intercept, coef, encoder: DesignEncoder, deviance, iterations, converged):
        self.intercept = float(intercept)
        self.coef = np.asarray(coef, dtype=np.float64)
        self.encoder = encoder
        self.deviance = float(deviance)
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.description = "Poisson GLM (log link)"

    def linear_predictor(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + self.encoder.encode(X) @ self.coef

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.exp(self.linear_predictor(X))

    def predict_counts(self, X: np.ndarray, exposure) -> np.ndarray:
        """Expected counts: exp(linear predictor + log exposure)."""
        return np.exp(self.linear_predictor(X) + np.log(np.asarray(exposure, dtype=np.float64)))

    def predict_encoded(self, E: np.ndarray) -> np.ndarray:
        return np.exp(self.intercept + E @ self.coef)

    def to_dict(self) -> dict:
        return {
            "kind": "glm-poisson",
            "intercept": self.intercept,
            "coef": self.coef.tolist(),
            "drop_first": self.encoder.drop_first,
            "schema": self.encoder.schema.to_dict(),
            "columns": list(self.encoder.column_names),
            "deviance": self.deviance,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FittedGlm":
        schema = FeatureSchema.from_dict(doc["schema"])
        encoder = DesignEncoder(schema, drop_first=doc["drop_first"])
        return cls(
            doc["intercept"], np.array(doc["coef"]), encoder,
            doc.get("deviance", float("nan")), doc.get("iterations", 0), doc.get("converged", True),
        )


def fit_poisson_glm(data: Dataset, max_iter: int = 25, tol: float = 1e-8) -> FittedGlm:
    """Fit a Poisson GLM by IRLS; exposure enters as an additive log offset.

    Stops when the relative deviance change drops below ``tol`` or after
    ``max_iter`` iterations; the converged flag records which.
    """
    if data.target is None:
        raise ModelError("dataset declares no target")
    y = data.target
    if np.any(y < 0):
        raise ModelError("negative targets are invalid for a Poisson model")
    exposure = data.exposure if data.exposure is not None else np.ones(data.n_rows)
    offset = np.log(exposure)
    w = data.weight if data.weight is not None else np.ones(data.n_rows)

    encoder = DesignEncoder(data.schema, drop_first=True)
    E = encoder.encode(data.matrix)

    # Start from the homogeneous rate; robust even when all targets are zero.
    intercept = float(np.log((np.sum(w * y) + 0.5) / (np.sum(w * exposure) + 1.0)))
    coef = np.zeros(encoder.width)

    def _deviance(b0, b):
        mu = np.exp(b0 + E @ b + offset)
        return poisson_deviance_total(y, mu, w), mu

    deviance, _ = _deviance(intercept, coef)
    converged = False
    iterations = 0
    from .linear import weighted_ridge

    for iterations in range(1, max_iter + 1):
        eta = intercept + E @ coef + offset
        mu = np.exp(eta)
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            raise ModelError("IRLS diverged: non-finite working weights")
        ww = w * mu
        if not np.all(np.isfinite(ww)):
            raise ModelError("IRLS diverged: non-finite working weights")
        z = (eta - offset) + (y - mu) / mu
        intercept, coef = weighted_ridge(E, z, ww, 0.0, check_gradient=False)
        new_deviance, _ = _deviance(intercept, coef)
        if not np.isfinite(new_deviance):
            raise ModelError("IRLS diverged: non-finite deviance")
        if abs(deviance - new_deviance) < tol * (abs(new_deviance) + 1e-12):
            deviance = new_deviance
            converged = True
            break
        deviance = new_deviance

    return FittedGlm(intercept, coef, encoder, deviance, iterations, converged)
