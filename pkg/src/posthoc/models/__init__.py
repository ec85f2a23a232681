"""Predictor contract and reference models (explanation targets and oracles)."""

from .base import (
    CONCURRENT_SAFE,
    SERIALIZED,
    FunctionPredictor,
    Predictor,
    constant_predictor,
)
from .encoding import DesignEncoder
from .external import ExternalPredictor, external_predictor
from .glm import FittedGlm, fit_poisson_glm, poisson_deviance_total
from .linear import FittedLinear, fit_ridge, weighted_ridge
from .rules import RuleTable, RuleTablePredictor, rule_table_model
from .synthetic import (
    hidden_slope_signal,
    synthetic_grouping_example,
    synthetic_pdp_example,
)

__all__ = [
    "CONCURRENT_SAFE",
    "SERIALIZED",
    "Predictor",
    "FunctionPredictor",
    "constant_predictor",
    "DesignEncoder",
    "FittedLinear",
    "fit_ridge",
    "weighted_ridge",
    "FittedGlm",
    "fit_poisson_glm",
    "poisson_deviance_total",
    "RuleTable",
    "RuleTablePredictor",
    "rule_table_model",
    "ExternalPredictor",
    "external_predictor",
    "hidden_slope_signal",
    "synthetic_pdp_example",
    "synthetic_grouping_example",
]
