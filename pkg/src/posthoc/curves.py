"""Dataset-level effect curves: PDP, ICE, ALE, M-plot and grouped variants.

All operations intervene on copies of the dataset's feature matrix; the
dataset itself is never mutated. Evaluation order is fixed, so results are
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .models.base import Predictor, check_prediction
from .tabular import Dataset, bin_indices, quantile_bins

PDP = "pdp"
ALE = "ale"
MPLOT = "mplot"


@dataclass
class CurveSeries:
    """Grid points and values of one effect curve."""

    kind: str
    features: tuple[str, ...]
    grid: np.ndarray          # (m,) or (m, 2) for two-feature PDP
    values: np.ndarray
    n_used: int
    grid_labels: tuple[str, ...] | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.kind,
            "features": list(self.features),
            "grid": self.grid.tolist(),
            "grid_labels": None if self.grid_labels is None else list(self.grid_labels),
            "values": self.values.tolist(),
            "n_used": self.n_used,
            "metadata": self.metadata,
        }


@dataclass
class IceBundle:
    """Per-instance prediction curves on a shared grid."""

    feature: str
    grid: np.ndarray
    curves: np.ndarray        # (n_curves, m)
    centered: bool
    row_indices: np.ndarray
    grid_labels: tuple[str, ...] | None = None
    metadata: dict = field(default_factory=dict)

    def mean_curve(self) -> np.ndarray:
        return self.curves.mean(axis=0)

    def to_dict(self) -> dict:
        return {
            "method": "ice",
            "feature": self.feature,
            "grid": self.grid.tolist(),
            "grid_labels": None if self.grid_labels is None else list(self.grid_labels),
            "curves": self.curves.tolist(),
            "centered": self.centered,
            "row_indices": self.row_indices.tolist(),
            "metadata": self.metadata,
        }


@dataclass
class GroupedCurves:
    """One curve per level of a grouping feature; empty levels are skipped."""

    kind: str
    feature: str
    group_by: str
    curves: dict
    warnings: list

    def to_dict(self) -> dict:
        return {
            "method": f"grouped-{self.kind}",
            "feature": self.feature,
            "group_by": self.group_by,
            "curves": {label: c.to_dict() for label, c in self.curves.items()},
            "warnings": self.warnings,
        }


def _feature_grid(data: Dataset, name: str, grid_size: int):
    """Grid for one feature: equi-quantile points (numeric) or all levels."""
    feat = data.schema.feature(name)
    if feat.is_categorical:
        return np.arange(feat.n_levels, dtype=np.float64), feat.levels
    if grid_size < 2:
        raise DataError("grid_size must be at least 2 for numeric features")
    col = data.column(name)
    uniq = np.unique(col)
    if uniq.size <= grid_size:
        return uniq.astype(np.float64), None
    qs = np.linspace(0.0, 1.0, grid_size)
    return np.unique(np.quantile(col, qs)), None


def _predict_with_column(model: Predictor, X: np.ndarray, col: int, value: float) -> np.ndarray:
    Xmod = X.copy()
    Xmod[:, col] = value
    return check_prediction(model.predict(Xmod), X.shape[0])


def pdp(model: Predictor, data: Dataset, features, grid_size: int = 20) -> CurveSeries:
    """Partial dependence: average prediction with the feature(s) forced to
    each grid value, the other columns kept at their observed rows."""
    names = (features,) if isinstance(features, str) else tuple(features)
    if not 1 <= len(names) <= 2:
        raise DataError("pdp supports 1 or 2 features")
    if data.n_rows == 0:
        raise DataError("empty dataset")
    X = data.matrix

    if len(names) == 1:
        col = data.schema.index(names[0])
        grid, labels = _feature_grid(data, names[0], grid_size)
        values = np.array([
            _predict_with_column(model, X, col, v).mean() for v in grid
        ])
        return CurveSeries(PDP, names, grid, values, data.n_rows, labels,
                           metadata={"grid_size": grid_size})

    c0, c1 = (data.schema.index(n) for n in names)
    g0, _ = _feature_grid(data, names[0], grid_size)
    g1, _ = _feature_grid(data, names[1], grid_size)
    pairs = np.array([(a, b) for a in g0 for b in g1])
    values = np.empty(len(pairs))
    for i, (a, b) in enumerate(pairs):
        Xmod = X.copy()
        Xmod[:, c0] = a
        Xmod[:, c1] = b
        values[i] = check_prediction(model.predict(Xmod), X.shape[0]).mean()
    return CurveSeries(PDP, names, pairs, values, data.n_rows,
                       metadata={"grid_size": grid_size})


def ice(model: Predictor, data: Dataset, feature: str, grid_size: int = 20,
        center: bool = False, max_curves: int = 1000, seed: int = 0) -> IceBundle:
    """Per-instance dependence curves; their mean is the PDP.

    When the dataset exceeds ``max_curves`` rows, a seeded subsample is drawn
    (the plot gets unreadable long before that point anyway). ``center``
    anchors every curve at 0 on the leftmost grid point.
    """
    grid, labels = _feature_grid(data, feature, grid_size)
    col = data.schema.index(feature)
    if data.n_rows > max_curves:
        rng = np.random.default_rng(seed)
        rows = np.sort(rng.choice(data.n_rows, size=max_curves, replace=False))
    else:
        rows = np.arange(data.n_rows)
    X = data.matrix[rows]
    curves = np.empty((len(rows), len(grid)))
    for i, v in enumerate(grid):
        curves[:, i] = _predict_with_column(model, X, col, v)
    if center:
        curves = curves - curves[:, :1]
    return IceBundle(feature, grid, curves, center, rows, labels,
                     metadata={"grid_size": grid_size, "max_curves": max_curves, "seed": seed})


def ale(model: Predictor, data: Dataset, feature: str, bins: int = 20) -> CurveSeries:
    """Accumulated local effects over quantile bins, weighted-mean centered.

    Within each bin the prediction difference between the bin edges is
    averaged over the bin's own members, then partial sums accumulate across
    bins and the observation-weighted mean is subtracted, so the curve reads
    as an effect relative to the average prediction. Bins left empty by the
    quantile construction are merged into their successor.
    """
    feat = data.schema.feature(feature)
    if feat.is_categorical:
        raise DataError("ALE requires a numeric feature")
    if bins < 1:
        raise DataError("bins must be at least 1")
    if data.n_rows == 0:
        raise DataError("empty dataset")
    edges = quantile_bins(data, feature, bins)
    col = data.schema.index(feature)
    X = data.matrix
    k_idx = bin_indices(edges, data.column(feature))
    n_bins = len(edges) - 1
    counts = np.bincount(k_idx, minlength=n_bins)

    grid = [edges[0]]
    accumulated = [0.0]
    effects_per_row = np.empty(data.n_rows)
    total = 0.0
    for k in range(n_bins):
        if counts[k] == 0:
            continue
        members = np.flatnonzero(k_idx == k)
        hi = _predict_with_column(model, X[members], col, edges[k + 1])
        lo = _predict_with_column(model, X[members], col, edges[k])
        total += float(np.mean(hi - lo))
        grid.append(edges[k + 1])
        accumulated.append(total)
        effects_per_row[members] = total
    assert len(grid) >= 2, "all quantile bins empty, impossible for nonempty data"

    centering = float(effects_per_row.mean())
    values = np.array(accumulated) - centering
    return CurveSeries(
        ALE, (feature,), np.array(grid), values, data.n_rows,
        metadata={"bins": bins, "bin_counts": counts[counts > 0].tolist()},
    )


def mplot(model: Predictor, data: Dataset, feature: str, bins: int = 20) -> CurveSeries:
    """Conditional-average prediction per quantile bin (no intervention)."""
    feat = data.schema.feature(feature)
    if feat.is_categorical:
        raise DataError("M-plot requires a numeric feature")
    if bins < 1:
        raise DataError("bins must be at least 1")
    edges = quantile_bins(data, feature, bins)
    colv = data.column(feature)
    k_idx = bin_indices(edges, colv)
    X = data.matrix
    grid, values, counts = [], [], []
    for k in range(len(edges) - 1):
        members = np.flatnonzero(k_idx == k)
        if members.size == 0:
            continue
        preds = check_prediction(model.predict(X[members]), members.size)
        grid.append(float(colv[members].mean()))
        values.append(float(preds.mean()))
        counts.append(int(members.size))
    return CurveSeries(
        MPLOT, (feature,), np.array(grid), np.array(values), data.n_rows,
        metadata={"bins": bins, "bin_counts": counts, "edges": edges.tolist()},
    )


def grouped_curves(model: Predictor, data: Dataset, feature: str, group_by: str,
                   kind: str = PDP, bins_or_grid: int = 20) -> GroupedCurves:
    """Compute a PDP or ALE separately within each level of a categorical
    feature; differing shapes across groups reveal how an interaction acts."""
    group_feat = data.schema.feature(group_by)
    if not group_feat.is_categorical:
        raise DataError("group_by must be a categorical feature")
    if kind not in (PDP, ALE):
        raise DataError(f"grouped curves support 'pdp' or 'ale', got {kind!r}")
    group_col = data.column(group_by)
    curves = {}
    warnings = []
    for lev, label in enumerate(group_feat.levels):
        members = np.flatnonzero(group_col == lev)
        if members.size == 0:
            warnings.append(f"group level {label!r} absent from data; omitted")
            continue
        sub = data.select_rows(members)
        if kind == PDP:
            series = pdp(model, sub, feature, grid_size=bins_or_grid)
        else:
            series = ale(model, sub, feature, bins=bins_or_grid)
        series.metadata["group"] = label
        curves[label] = series
    return GroupedCurves(kind, feature, group_by, curves, warnings)
