"""Local surrogate explainers: weighted ridge fits on synthetic neighborhoods."""

from __future__ import annotations

import numpy as np

from ..errors import ModelError
from ..models.base import Predictor, check_prediction
from ..models.linear import weighted_ridge
from ..tabular import Dataset, Instance
from .attribution import Attribution
from .neighborhoods import (
    RbfKernel,
    kernel_weights,
    lime_sample_neighborhood,
    live_neighborhood,
    parse_kernel,
)


def _surrogate_design(schema, rows: np.ndarray, x: Instance) -> np.ndarray:
    """One regressor per feature: raw value (numeric) or a same-level-as-x
    indicator (categorical), so each coefficient maps to one feature."""
    design = np.empty_like(rows)
    for j, feat in enumerate(schema.features):
        if feat.is_categorical:
            design[:, j] = rows[:, j] == x.values[j]
        else:
            design[:, j] = rows[:, j]
    return design


def _encoded_instance(schema, x: Instance) -> np.ndarray:
    return np.array([
        1.0 if f.is_categorical else x.values[j] for j, f in enumerate(schema.features)
    ])


def _weighted_r2(y, yhat, w) -> float:
    sw = w.sum()
    ybar = float((w * y).sum() / sw)
    ss_res = float((w * (y - yhat) ** 2).sum())
    ss_tot = float((w * (y - ybar) ** 2).sum())
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def _fit_surrogate(schema, rows, preds, weights, x: Instance, lam: float, k_features):
    if lam < 0:
        raise ModelError("ridge strength must be nonnegative")
    if int(np.sum(weights > 0)) < 2:
        raise ModelError("degenerate weighted design: all weight on one point")
    design = _surrogate_design(schema, rows, x)
    intercept, coef = weighted_ridge(design, preds, weights, lam, check_gradient=False)
    selected = None
    if k_features is not None and k_features < schema.n_features:
        # Hard sparsity: keep the k strongest coefficients on the weighted
        # scale, then refit on those columns alone.
        sw = weights / weights.sum()
        centered = design - (sw[:, None] * design).sum(axis=0)
        col_scale = np.sqrt((sw[:, None] * centered ** 2).sum(axis=0))
        strength = np.abs(coef) * col_scale
        keep = np.sort(np.argsort(-strength)[:k_features])
        intercept, sub_coef = weighted_ridge(design[:, keep], preds, weights, lam, check_gradient=False)
        coef = np.zeros(schema.n_features)
        coef[keep] = sub_coef
        selected = [schema.features[int(i)].name for i in keep]
    fitted = intercept + design @ coef
    r2 = _weighted_r2(preds, fitted, weights)
    contributions = coef * _encoded_instance(schema, x)
    return intercept, coef, contributions, r2, selected


def lime_explain(model: Predictor, data: Dataset, x: Instance, n_sim: int = 5000,
                 kernel="gower", lam: float = 1.0, k_features: int | None = None,
                 seed: int = 0) -> Attribution:
    """Fit a kernel-weighted ridge surrogate around the instance and read the
    coefficients as local contributions.

    With lam=0 and a black box that is itself linear in the features, the
    surrogate reproduces its slopes regardless of kernel or width.
    """
    kernel = parse_kernel(kernel)
    nb = lime_sample_neighborhood(data, x, n_sim, seed)
    preds = check_prediction(model.predict(nb.rows), n_sim)
    weights = kernel_weights(data.schema, nb.rows, x, kernel)
    intercept, coef, contributions, r2, selected = _fit_surrogate(
        data.schema, nb.rows, preds, weights, x, lam, k_features
    )
    baseline = float(check_prediction(model.predict(data.matrix), data.n_rows).mean())
    prediction = float(check_prediction(model.predict(x.values[None, :]), 1)[0])
    kernel_info = (
        {"kind": "rbf", "width": kernel.width} if isinstance(kernel, RbfKernel) else {"kind": "gower"}
    )
    return Attribution(
        method="lime",
        features=data.schema.names,
        contributions=contributions,
        baseline=baseline,
        prediction=prediction,
        diagnostics={
            "kernel": kernel_info,
            "intercept": intercept,
            "local_r2": r2,
            "selected_features": selected,
        },
        seed=seed,
        parameters={"n_sim": n_sim, "lambda": lam, "k_features": k_features},
    )


def live_explain(model: Predictor, data: Dataset, x: Instance, n_sim: int = 5000,
                 lam: float = 1.0, k_features: int | None = None, seed: int = 0) -> Attribution:
    """Surrogate fit on the single-feature-replacement neighborhood.

    All rows are treated as equidistant, so no kernel enters; otherwise the
    surrogate and its reading are the same as in ``lime_explain``.
    """
    nb = live_neighborhood(data, x, n_sim, seed)
    preds = check_prediction(model.predict(nb.rows), n_sim)
    intercept, coef, contributions, r2, selected = _fit_surrogate(
        data.schema, nb.rows, preds, nb.weights, x, lam, k_features
    )
    baseline = float(check_prediction(model.predict(data.matrix), data.n_rows).mean())
    prediction = float(check_prediction(model.predict(x.values[None, :]), 1)[0])
    return Attribution(
        method="live",
        features=data.schema.names,
        contributions=contributions,
        baseline=baseline,
        prediction=prediction,
        diagnostics={"intercept": intercept, "local_r2": r2, "selected_features": selected},
        seed=seed,
        parameters={"n_sim": n_sim, "lambda": lam, "k_features": k_features},
    )
