"""Shapley-value attribution: exact enumeration and the Monte-Carlo estimate.

The coalition value of a feature subset S is interventional: the mean model
prediction over the background data with the features in S overwritten by the
explained instance's values, minus the mean prediction itself. Independence
between features is assumed, as flagged in the output metadata.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DataError, ModelError
from ..models.base import Predictor, check_prediction
from ..tabular import Dataset, Instance
from .attribution import Attribution

EXACT_LIMIT = 12


def shap_mc(model: Predictor, data: Dataset, x: Instance, M: int = 500,
            seed: int = 0, background_size: int | None = None) -> Attribution:
    """Monte-Carlo Shapley estimate from M sampled permutation chains.

    Each iteration draws one background row and one feature permutation, then
    walks the permutation switching features from the background row to the
    instance; the prediction difference at each step is that feature's sample.
    Pairing both evaluations on common draws keeps the variance down. The
    per-feature ``sd`` diagnostic is the standard error of the estimate.
    """
    if M < 1:
        raise DataError("M must be at least 1")
    p = data.schema.n_features
    rng = np.random.default_rng(seed)
    if background_size is not None and background_size < data.n_rows:
        idx = rng.choice(data.n_rows, size=background_size, replace=False)
        background = data.matrix[np.sort(idx)]
    else:
        background = data.matrix
    n_bg = background.shape[0]
    baseline = float(check_prediction(model.predict(background), n_bg).mean())
    xv = x.values

    rows = np.empty((M * (p + 1), p))
    feat_at = np.empty((M, p), dtype=np.int64)
    for m in range(M):
        z = background[rng.integers(n_bg)].copy()
        perm = rng.permutation(p)
        base = m * (p + 1)
        rows[base] = z
        for t, j in enumerate(perm):
            z[j] = xv[j]
            rows[base + t + 1] = z
        feat_at[m] = perm

    preds = check_prediction(model.predict(rows), M * (p + 1)).reshape(M, p + 1)
    diffs = preds[:, 1:] - preds[:, :-1]
    samples = np.empty((M, p))
    rows_idx = np.repeat(np.arange(M), p)
    samples[rows_idx, feat_at.reshape(-1)] = diffs.reshape(-1)

    phi = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(M) if M > 1 else np.zeros(p)
    prediction = float(check_prediction(model.predict(xv[None, :]), 1)[0])
    return Attribution(
        method="shap-mc",
        features=data.schema.names,
        contributions=phi,
        baseline=baseline,
        prediction=prediction,
        diagnostics={"M": M, "sd": se.tolist(), "background_n": n_bg,
                     "value_function": "interventional (features assumed independent)"},
        seed=seed,
        parameters={"M": M, "background_size": background_size},
    )


def shapley_exact(model: Predictor, background: Dataset, x: Instance) -> Attribution:
    """Exact Shapley values by enumerating all feature subsets.

    Guarded to at most 12 features (2^p coalition evaluations). Satisfies the
    efficiency, symmetry, dummy and additivity axioms up to float error.
    """
    p = background.schema.n_features
    if p > EXACT_LIMIT:
        raise ModelError(f"exact Shapley enumeration is limited to {EXACT_LIMIT} features, got {p}")
    B = background.matrix
    n = B.shape[0]
    baseline = float(check_prediction(model.predict(B), n).mean())
    xv = x.values

    delta = np.empty(2 ** p)
    delta[0] = 0.0
    for mask in range(1, 2 ** p):
        Xmod = B.copy()
        for j in range(p):
            if mask >> j & 1:
                Xmod[:, j] = xv[j]
        delta[mask] = float(check_prediction(model.predict(Xmod), n).mean()) - baseline

    fact = [math.factorial(i) for i in range(p + 1)]
    phi = np.zeros(p)
    for j in range(p):
        bit = 1 << j
        for mask in range(2 ** p):
            if mask & bit:
                continue
            s = bin(mask).count("1")
            weight = fact[p - s - 1] * fact[s] / fact[p]
            phi[j] += weight * (delta[mask | bit] - delta[mask])

    prediction = float(check_prediction(model.predict(xv[None, :]), 1)[0])
    return Attribution(
        method="shapley-exact",
        features=background.schema.names,
        contributions=phi,
        baseline=baseline,
        prediction=prediction,
        diagnostics={"background_n": n, "subsets": 2 ** p,
                     "value_function": "interventional (features assumed independent)"},
        parameters={},
    )
