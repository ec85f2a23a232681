"""Permutation feature importance with optional joint feature grouping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ModelError
from .metrics import LossKind, loss
from .models.base import Predictor, check_prediction
from .tabular import Dataset, split_dataset


@dataclass(frozen=True)
class ImportanceRow:
    name: str
    fi_mean: float
    fi_sd: float
    ratios: tuple[float, ...]


@dataclass
class ImportanceTable:
    """Per-feature(-group) loss ratios after permutation, sorted descending."""

    rows: list
    base_error: float
    loss: str
    repeats: int
    seed: int
    split: str | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": "permutation-importance",
            "rows": [
                {"name": r.name, "fi_mean": r.fi_mean, "fi_sd": r.fi_sd, "ratios": list(r.ratios)}
                for r in self.rows
            ],
            "base_error": self.base_error,
            "loss": self.loss,
            "repeats": self.repeats,
            "seed": self.seed,
            "split": self.split,
            "metadata": self.metadata,
        }


def _eval_split(data: Dataset, split, split_fraction: float, seed: int) -> Dataset:
    if split in (None, "none"):
        return data
    train, test = split_dataset(data, split_fraction, seed)
    if split == "train":
        return train
    if split == "test":
        return test
    raise DataError(f"unknown split {split!r}; expected 'train' or 'test'")


def _rows_from_ratios(ratios_by_name: dict) -> list:
    rows = []
    for name, ratios in ratios_by_name.items():
        arr = np.asarray(ratios)
        rows.append(ImportanceRow(name, float(arr.mean()), float(arr.std()), tuple(float(r) for r in arr)))
    rows.sort(key=lambda r: (-r.fi_mean, r.name))
    return rows


def permutation_importance(model: Predictor, data: Dataset, loss_kind: LossKind,
                           groups: dict | None = None, repeats: int = 5, seed: int = 0,
                           split: str | None = None, split_fraction: float = 0.8) -> ImportanceTable:
    """Loss ratio err_permuted / err_base per feature or feature group.

    A group's columns are permuted jointly with one shared permutation, so a
    categorical split across several columns still gets a single score. The
    ratio is 1 for a feature the model ignores and grows with reliance on it.
    """
    if repeats < 1:
        raise DataError("repeats must be at least 1")
    data = _eval_split(data, split, split_fraction, seed)
    if data.target is None:
        raise ModelError("dataset declares no target")
    X = data.matrix
    y = data.target
    exposure = data.exposure if loss_kind.use_exposure else None

    base_pred = check_prediction(model.predict(X), data.n_rows)
    err_base = loss(loss_kind, y, base_pred, exposure)
    if err_base == 0:
        raise ModelError("degenerate fit: base error is zero, importance ratios are undefined")

    if groups is None:
        group_items = [(f.name, [f.name]) for f in data.schema.features]
    else:
        group_items = [(name, list(feats)) for name, feats in groups.items()]
        seen = []
        for _, feats in group_items:
            for f in feats:
                data.schema.index(f)
                if f in seen:
                    raise DataError(f"feature {f!r} appears in more than one group")
                seen.append(f)

    rng = np.random.default_rng(seed)
    ratios = {name: [] for name, _ in group_items}
    for _ in range(repeats):
        for name, feats in group_items:
            sigma = rng.permutation(data.n_rows)
            Xp = X.copy()
            for f in feats:
                c = data.schema.index(f)
                Xp[:, c] = X[sigma, c]
            err = loss(loss_kind, y, check_prediction(model.predict(Xp), data.n_rows), exposure)
            ratios[name].append(err / err_base)

    return ImportanceTable(
        rows=_rows_from_ratios(ratios),
        base_error=err_base,
        loss=loss_kind.kind,
        repeats=repeats,
        seed=seed,
        split=split,
    )


def permutation_importance_per_modality(model, data: Dataset, loss_kind: LossKind,
                                        repeats: int = 5, seed: int = 0,
                                        split: str | None = None, split_fraction: float = 0.8) -> ImportanceTable:
    """Permute each encoded design column separately (one score per modality).

    Requires a model exposing its encoder (the fitted reference models do);
    permuting a single indicator column can produce multi-hot rows, which is
    exactly what makes the per-modality view noisy and hard to read.
    """
    if repeats < 1:
        raise DataError("repeats must be at least 1")
    encoder = getattr(model, "encoder", None)
    predict_encoded = getattr(model, "predict_encoded", None)
    if encoder is None or predict_encoded is None:
        raise ModelError("per-modality importance needs a model with an encoded design")
    data = _eval_split(data, split, split_fraction, seed)
    if data.target is None:
        raise ModelError("dataset declares no target")
    y = data.target
    exposure = data.exposure if loss_kind.use_exposure else None

    E = encoder.encode(data.matrix)
    base_pred = check_prediction(predict_encoded(E), data.n_rows)
    err_base = loss(loss_kind, y, base_pred, exposure)
    if err_base == 0:
        raise ModelError("degenerate fit: base error is zero, importance ratios are undefined")

    rng = np.random.default_rng(seed)
    ratios = {name: [] for name in encoder.column_names}
    for _ in range(repeats):
        for c, name in enumerate(encoder.column_names):
            sigma = rng.permutation(data.n_rows)
            Ep = E.copy()
            Ep[:, c] = E[sigma, c]
            err = loss(loss_kind, y, check_prediction(predict_encoded(Ep), data.n_rows), exposure)
            ratios[name].append(err / err_base)

    return ImportanceTable(
        rows=_rows_from_ratios(ratios),
        base_error=err_base,
        loss=loss_kind.kind,
        repeats=repeats,
        seed=seed,
        split=split,
        metadata={"per_modality": True},
    )
