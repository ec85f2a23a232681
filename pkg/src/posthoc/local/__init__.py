"""Per-instance explainers: surrogate fits and Shapley attributions."""

from .attribution import Attribution, efficiency_gap
from .neighborhoods import (
    GowerKernel,
    Neighborhood,
    RbfKernel,
    kernel_weights,
    lime_sample_neighborhood,
    live_neighborhood,
    parse_kernel,
)
from .shapley import shap_mc, shapley_exact
from .surrogate import lime_explain, live_explain

__all__ = [
    "Attribution",
    "efficiency_gap",
    "Neighborhood",
    "RbfKernel",
    "GowerKernel",
    "parse_kernel",
    "kernel_weights",
    "lime_sample_neighborhood",
    "live_neighborhood",
    "lime_explain",
    "live_explain",
    "shap_mc",
    "shapley_exact",
]
