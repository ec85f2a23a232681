"""Per-feature contribution container shared by all local explainers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Attribution:
    """Contributions of each feature to one prediction, against a baseline.

    ``baseline`` is the mean prediction over the reference data. For exact
    Shapley values the contributions sum to prediction - baseline; for the
    Monte-Carlo estimate the gap is bounded by the reported standard errors;
    for surrogate methods it is a diagnostic, not a guarantee.
    """

    method: str
    features: tuple[str, ...]
    contributions: np.ndarray
    baseline: float
    prediction: float
    diagnostics: dict = field(default_factory=dict)
    seed: int | None = None
    parameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "feature_contributions": {
                name: float(phi) for name, phi in zip(self.features, self.contributions)
            },
            "baseline": self.baseline,
            "prediction": self.prediction,
            "diagnostics": self.diagnostics,
            "seed": self.seed,
            "parameters": self.parameters,
        }


def efficiency_gap(att: Attribution) -> float:
    """sum(contributions) - (prediction - baseline); zero for exact Shapley."""
    return float(np.sum(att.contributions) - (att.prediction - att.baseline))
