"""Interaction strength via variance ratios of partial dependence functions.

The pairwise statistic compares the joint dependence of two features against
the sum of their individual dependences; the total statistic compares the
model against the split into one feature versus all the others. Dependence
functions are evaluated at each row's own observed values, averaging over the
(sub)sampled rows, and every function is centered empirically to mean zero
before the ratio is formed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, UndefinedInteractionError
from .models.base import Predictor, check_prediction
from .tabular import Dataset, sample_rows

logger = logging.getLogger(__name__)

RANGE_TOL = 1e-9
SUBSAMPLE_WARN = 1000


@dataclass
class InteractionMatrix:
    """All pairwise and total interaction statistics on one subsample."""

    features: tuple[str, ...]
    pairwise: np.ndarray              # symmetric, NaN on diagonal/undefined
    total: np.ndarray                 # NaN where undefined
    undefined: list                   # entry names whose denominator vanished
    flagged: list                     # entries clipped back into [0, 1]
    subsample_n: int
    seed: int
    level_counts: dict
    pairwise_sd: np.ndarray | None = None
    total_sd: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def cell(v):
            return None if np.isnan(v) else float(v)

        p = len(self.features)
        return {
            "method": "h-statistic",
            "features": list(self.features),
            "pairwise": [[cell(self.pairwise[i, j]) for j in range(p)] for i in range(p)],
            "total": [cell(v) for v in self.total],
            "undefined": self.undefined,
            "flagged": self.flagged,
            "subsample_n": self.subsample_n,
            "seed": self.seed,
            "level_counts": self.level_counts,
            "pairwise_sd": None if self.pairwise_sd is None else [
                [cell(self.pairwise_sd[i, j]) for j in range(p)] for i in range(p)
            ],
            "total_sd": None if self.total_sd is None else [cell(v) for v in self.total_sd],
            "metadata": self.metadata,
        }


def _subsampled(data: Dataset, subsample: int, seed: int) -> Dataset:
    if subsample < 2:
        raise DataError("subsample must be at least 2")
    if data.n_rows <= subsample:
        sub = data
    else:
        sub = sample_rows(data, subsample, seed)
    if sub.n_rows > SUBSAMPLE_WARN:
        logger.warning(
            "H-statistic on %d rows needs O(n^2) predictions; consider a smaller subsample",
            sub.n_rows,
        )
    return sub


def _centered(values: np.ndarray) -> np.ndarray:
    return values - values.mean()


def _pd_at_rows(model: Predictor, X: np.ndarray, cols: tuple) -> np.ndarray:
    """Dependence of the features in ``cols`` at each row's own values.

    Deduplicates identical value combinations, so categorical features cost
    one pass per level rather than per row.
    """
    uniq, inverse = np.unique(X[:, cols], axis=0, return_inverse=True)
    vals = np.empty(len(uniq))
    for u, combo in enumerate(uniq):
        Xmod = X.copy()
        Xmod[:, cols] = combo
        vals[u] = check_prediction(model.predict(Xmod), X.shape[0]).mean()
    return vals[inverse.reshape(-1)]


def _pd_complement_at_rows(model: Predictor, X: np.ndarray, col: int) -> np.ndarray:
    """Dependence of all features except ``col`` at each row's own values."""
    n = X.shape[0]
    column = X[:, col].copy()
    out = np.empty(n)
    for i in range(n):
        Xmod = np.tile(X[i], (n, 1))
        Xmod[:, col] = column
        out[i] = check_prediction(model.predict(Xmod), n).mean()
    return out


def _clip(raw: float, entry: str, flagged: list) -> float:
    if raw > 1.0 + RANGE_TOL:
        flagged.append(entry)
    return float(min(max(raw, 0.0), 1.0))


def _h_pairwise_core(model, X, c_j, c_k, pd_cache=None):
    lo, hi = (c_j, c_k) if c_j < c_k else (c_k, c_j)
    if pd_cache is not None:
        pd_lo, pd_hi = pd_cache[lo], pd_cache[hi]
    else:
        pd_lo = _centered(_pd_at_rows(model, X, (lo,)))
        pd_hi = _centered(_pd_at_rows(model, X, (hi,)))
    pd_joint = _centered(_pd_at_rows(model, X, (lo, hi)))
    denom = float(np.sum(pd_joint ** 2))
    if denom == 0.0:
        raise UndefinedInteractionError("undefined: no joint variance")
    num = float(np.sum((pd_joint - pd_lo - pd_hi) ** 2))
    return num / denom


def _h_total_core(model, X, c_j, pd_cache=None, f_centered=None):
    if f_centered is None:
        f_centered = _centered(check_prediction(model.predict(X), X.shape[0]))
    denom = float(np.sum(f_centered ** 2))
    if denom == 0.0:
        raise UndefinedInteractionError("undefined: constant model")
    pd_j = pd_cache[c_j] if pd_cache is not None else _centered(_pd_at_rows(model, X, (c_j,)))
    pd_rest = _centered(_pd_complement_at_rows(model, X, c_j))
    num = float(np.sum((f_centered - pd_j - pd_rest) ** 2))
    return num / denom


def h_pairwise(model: Predictor, data: Dataset, j: str, k: str,
               subsample: int = 1000, seed: int = 0) -> float:
    """Share of the joint dependence variance not explained additively.

    0 means the two features act additively, 1 means the joint dependence is
    pure interaction. Symmetric in (j, k) by construction.
    """
    if j == k:
        raise DataError("pairwise interaction needs two distinct features")
    sub = _subsampled(data, subsample, seed)
    c_j, c_k = sub.schema.index(j), sub.schema.index(k)
    raw = _h_pairwise_core(model, sub.matrix, c_j, c_k)
    return _clip(raw, f"{j},{k}", [])


def h_total(model: Predictor, data: Dataset, j: str,
            subsample: int = 1000, seed: int = 0) -> float:
    """Share of model variance due to interactions of one feature with the rest."""
    sub = _subsampled(data, subsample, seed)
    c_j = sub.schema.index(j)
    raw = _h_total_core(model, sub.matrix, c_j)
    return _clip(raw, j, [])


def _matrix_once(model, sub: Dataset):
    X = sub.matrix
    p = sub.schema.n_features
    pd_cache = {c: _centered(_pd_at_rows(model, X, (c,))) for c in range(p)}
    f_centered = _centered(check_prediction(model.predict(X), X.shape[0]))
    pairwise = np.full((p, p), np.nan)
    total = np.full(p, np.nan)
    undefined, flagged = [], []
    names = sub.schema.names
    for a in range(p):
        for b in range(a + 1, p):
            entry = f"{names[a]},{names[b]}"
            try:
                raw = _h_pairwise_core(model, X, a, b, pd_cache)
            except UndefinedInteractionError:
                undefined.append(entry)
                continue
            pairwise[a, b] = pairwise[b, a] = _clip(raw, entry, flagged)
    for a in range(p):
        try:
            raw = _h_total_core(model, X, a, pd_cache, f_centered)
        except UndefinedInteractionError:
            undefined.append(names[a])
            continue
        total[a] = _clip(raw, names[a], flagged)
    return pairwise, total, undefined, flagged


def h_matrix(model: Predictor, data: Dataset, subsample: int = 1000, seed: int = 0,
             n_bootstrap: int = 0) -> InteractionMatrix:
    """All pairwise and total statistics, with subsample provenance recorded.

    ``n_bootstrap`` > 0 additionally reports the sd of each entry over that
    many reseeded subsamples, a cheap read on subsampling instability. The
    statistic is known to overstate interactions involving categorical
    features, so level counts ride along in the output.
    """
    sub = _subsampled(data, subsample, seed)
    pairwise, total, undefined, flagged = _matrix_once(model, sub)

    pairwise_sd = total_sd = None
    if n_bootstrap > 0:
        p = sub.schema.n_features
        pw = np.full((n_bootstrap, p, p), np.nan)
        tt = np.full((n_bootstrap, p), np.nan)
        for b in range(n_bootstrap):
            resampled = sample_rows(data, sub.n_rows, seed + 1 + b)
            pw[b], tt[b], _, _ = _matrix_once(model, resampled)

        def _sd(samples):
            vals = samples[~np.isnan(samples)]
            return float(vals.std()) if vals.size else np.nan

        pairwise_sd = np.full((p, p), np.nan)
        total_sd = np.full(p, np.nan)
        for a in range(p):
            total_sd[a] = _sd(tt[:, a])
            for b in range(a + 1, p):
                pairwise_sd[a, b] = pairwise_sd[b, a] = _sd(pw[:, a, b])

    level_counts = {
        f.name: (f.n_levels if f.is_categorical else None) for f in sub.schema.features
    }
    return InteractionMatrix(
        features=sub.schema.names,
        pairwise=pairwise,
        total=total,
        undefined=undefined,
        flagged=flagged,
        subsample_n=sub.n_rows,
        seed=seed,
        level_counts=level_counts,
        pairwise_sd=pairwise_sd,
        total_sd=total_sd,
        metadata={"n_bootstrap": n_bootstrap},
    )
