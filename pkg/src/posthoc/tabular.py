"""Typed tabular data model, CSV ingestion, and sampling/binning utilities.

Datasets are immutable column stores: numeric columns hold float64, categorical
columns hold dense level ids (0..L-1) whose dictionary lives on the schema.
Every explainer in this package consumes the schema-ordered float matrix
exposed by :attr:`Dataset.matrix`.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, SchemaError

logger = logging.getLogger(__name__)

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Feature:
    """One column of the feature schema."""

    name: str
    kind: str
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"unknown feature kind {self.kind!r} for {self.name!r}")
        if self.kind == CATEGORICAL:
            if not self.levels:
                raise SchemaError(f"categorical feature {self.name!r} declares no levels")
            if len(set(self.levels)) != len(self.levels):
                raise SchemaError(f"duplicate levels in feature {self.name!r}")
        elif self.levels:
            raise SchemaError(f"numeric feature {self.name!r} cannot declare levels")

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def level_id(self, label: str) -> int:
        try:
            return self.levels.index(label)
        except ValueError:
            raise SchemaError(f"unseen level {label!r} for feature {self.name!r}") from None


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature list plus optional target / exposure / weight columns."""

    features: tuple[Feature, ...]
    target: str | None = None
    exposure: str | None = None
    weight: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        extras = [c for c in (self.target, self.exposure, self.weight) if c is not None]
        all_names = names + extras
        if len(set(all_names)) != len(all_names):
            raise SchemaError("feature/target/exposure/weight names must be unique")
        if not self.features:
            raise SchemaError("schema declares no features")

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise SchemaError(f"unknown feature {name!r}")

    def feature(self, name: str) -> Feature:
        return self.features[self.index(name)]

    def to_dict(self) -> dict:
        return {
            "features": [
                {"name": f.name, "kind": f.kind, **({"levels": list(f.levels)} if f.is_categorical else {})}
                for f in self.features
            ],
            "target": self.target,
            "exposure": self.exposure,
            "weight": self.weight,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureSchema":
        try:
            feats = tuple(
                Feature(name=f["name"], kind=f["kind"], levels=tuple(f.get("levels", ())))
                for f in doc["features"]
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema document: {exc}") from exc
        return cls(
            features=feats,
            target=doc.get("target"),
            exposure=doc.get("exposure"),
            weight=doc.get("weight"),
        )

    @classmethod
    def from_json_file(cls, path) -> "FeatureSchema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Instance:
    """A single observation in schema space (categoricals as level ids)."""

    schema: FeatureSchema
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.schema.n_features,):
            raise SchemaError(
                f"instance has {vals.size} values, schema has {self.schema.n_features} features"
            )
        for j, feat in enumerate(self.schema.features):
            v = vals[j]
            if not np.isfinite(v):
                raise SchemaError(f"non-finite value for feature {feat.name!r}")
            if feat.is_categorical and not (float(v).is_integer() and 0 <= v < feat.n_levels):
                raise SchemaError(f"invalid level id {v!r} for feature {feat.name!r}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_raw(cls, schema: FeatureSchema, raw) -> "Instance":
        """Build an instance from python values, mapping level labels to ids."""
        if len(raw) != schema.n_features:
            raise SchemaError(f"expected {schema.n_features} values, got {len(raw)}")
        vals = []
        for feat, v in zip(schema.features, raw):
            if feat.is_categorical:
                vals.append(float(feat.level_id(v)) if isinstance(v, str) else float(v))
            else:
                vals.append(float(v))
        return cls(schema, np.array(vals))

    def label(self, name: str):
        """Display value of one feature (level label for categoricals)."""
        feat = self.schema.feature(name)
        v = self.values[self.schema.index(name)]
        return feat.levels[int(v)] if feat.is_categorical else float(v)


class Dataset:
    """Immutable column-major table with typed columns.

    Columns are validated against the schema at construction and frozen;
    concurrent reads are safe.
    """

    def __init__(self, schema: FeatureSchema, columns: dict, target=None, exposure=None, weight=None):
        self.schema = schema
        missing = [f.name for f in schema.features if f.name not in columns]
        if missing:
            raise SchemaError(f"columns missing for features: {missing}")

        arrays = []
        n_rows = None
        for feat in schema.features:
            arr = np.asarray(columns[feat.name])
            arr = arr.astype(np.int64) if feat.is_categorical else arr.astype(np.float64)
            if arr.ndim != 1:
                raise DataError(f"column {feat.name!r} is not 1-dimensional")
            if n_rows is None:
                n_rows = arr.shape[0]
            elif arr.shape[0] != n_rows:
                raise DataError(f"column {feat.name!r} has length {arr.shape[0]}, expected {n_rows}")
            if feat.is_categorical:
                if arr.size and (arr.min() < 0 or arr.max() >= feat.n_levels):
                    raise DataError(f"level id out of range in column {feat.name!r}")
            elif not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite value in column {feat.name!r}")
            arr.flags.writeable = False
            arrays.append(arr)
        if n_rows is None or n_rows == 0:
            raise DataError("no rows")

        self.n_rows = n_rows
        self._arrays = tuple(arrays)
        self._index = {f.name: i for i, f in enumerate(schema.features)}

        def _aux(arr, name, positive=False, nonnegative=False):
            if arr is None:
                return None
            a = np.asarray(arr, dtype=np.float64)
            if a.shape != (n_rows,):
                raise DataError(f"{name} column has wrong length")
            if not np.all(np.isfinite(a)):
                raise DataError(f"non-finite value in {name} column")
            if positive and np.any(a <= 0):
                raise DataError(f"non-positive {name} value")
            if nonnegative and np.any(a < 0):
                raise DataError(f"negative {name} value")
            a.flags.writeable = False
            return a

        self.target = _aux(target, "target")
        self.exposure = _aux(exposure, "exposure", positive=True)
        self.weight = _aux(weight, "weight", nonnegative=True)
        if schema.target is not None and self.target is None:
            raise SchemaError("schema declares a target but no target column given")
        if schema.exposure is not None and self.exposure is None:
            raise SchemaError("schema declares an exposure but no exposure column given")
        if schema.weight is not None and self.weight is None:
            raise SchemaError("schema declares a weight but no weight column given")

        mat = np.column_stack([a.astype(np.float64) for a in self._arrays])
        mat.flags.writeable = False
        self._matrix = mat

    @property
    def matrix(self) -> np.ndarray:
        """Read-only (n_rows, n_features) float matrix in schema order."""
        return self._matrix

    def column(self, name: str) -> np.ndarray:
        return self._arrays[self._index[name]]

    def instance(self, i: int) -> Instance:
        if not 0 <= i < self.n_rows:
            raise DataError(f"row index {i} out of range (n_rows={self.n_rows})")
        return Instance(self.schema, self._matrix[i].copy())

    def select_rows(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        cols = {f.name: self._arrays[j][idx] for j, f in enumerate(self.schema.features)}
        return Dataset(
            self.schema,
            cols,
            target=None if self.target is None else self.target[idx],
            exposure=None if self.exposure is None else self.exposure[idx],
            weight=None if self.weight is None else self.weight[idx],
        )

    def checksum(self) -> str:
        h = hashlib.sha256()
        for arr in self._arrays:
            h.update(arr.tobytes())
        for arr in (self.target, self.exposure, self.weight):
            if arr is not None:
                h.update(arr.tobytes())
        return h.hexdigest()


def _parse_numeric(text: str, row: int, col: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"row {row}: malformed numeric value {text!r} in column {col!r}") from None
    if not math.isfinite(v):
        raise DataError(f"row {row}: non-finite value in column {col!r}")
    return v


def load_csv(path, schema: FeatureSchema, delimiter: str = ",", missing_policy: str = "reject") -> Dataset:
    """Load an RFC-4180 CSV file against an explicit schema.

    The header must contain every schema-declared column (extra columns are
    ignored). Missing cells (empty strings) are rejected by default; with
    ``missing_policy="impute"`` numeric columns take their median and
    categorical columns their modal level, with the imputed count logged.
    Rows are reported 1-based (header excluded) in error messages.
    """
    if missing_policy not in ("reject", "impute"):
        raise DataError(f"unknown missing policy {missing_policy!r}")
    declared = list(schema.names) + [
        c for c in (schema.target, schema.exposure, schema.weight) if c is not None
    ]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None:
            raise DataError("empty file: no header row")
        positions = {}
        for name in declared:
            if name not in header:
                raise DataError(f"column {name!r} missing from CSV header")
            positions[name] = header.index(name)
        raw = {name: [] for name in declared}
        n = 0
        for lineno, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
            for name in declared:
                raw[name].append(row[positions[name]])
            n += 1
    if n == 0:
        raise DataError("no rows")

    columns = {}
    for feat in schema.features:
        cells = raw[feat.name]
        missing_rows = [i for i, c in enumerate(cells) if c == ""]
        if missing_rows and missing_policy == "reject":
            raise DataError(
                f"row {missing_rows[0] + 1}: missing value in column {feat.name!r}"
            )
        if feat.is_categorical:
            ids = np.empty(n, dtype=np.int64)
            for i, c in enumerate(cells):
                if c == "":
                    ids[i] = -1
                    continue
                try:
                    ids[i] = feat.levels.index(c)
                except ValueError:
                    raise DataError(
                        f"row {i + 1}: unseen level {c!r} in column {feat.name!r}"
                    ) from None
            if missing_rows:
                observed = ids[ids >= 0]
                if observed.size == 0:
                    raise DataError(f"column {feat.name!r} is entirely missing")
                mode = int(np.bincount(observed, minlength=feat.n_levels).argmax())
                ids[ids < 0] = mode
                logger.warning("imputed %d missing values in column %r (mode)", len(missing_rows), feat.name)
            columns[feat.name] = ids
        else:
            vals = np.empty(n, dtype=np.float64)
            for i, c in enumerate(cells):
                vals[i] = np.nan if c == "" else _parse_numeric(c, i + 1, feat.name)
            if missing_rows:
                observed = vals[~np.isnan(vals)]
                if observed.size == 0:
                    raise DataError(f"column {feat.name!r} is entirely missing")
                vals[np.isnan(vals)] = float(np.median(observed))
                logger.warning("imputed %d missing values in column %r (median)", len(missing_rows), feat.name)
            columns[feat.name] = vals

    def _aux_column(name, label):
        if name is None:
            return None
        vals = np.empty(n, dtype=np.float64)
        for i, c in enumerate(raw[name]):
            if c == "":
                raise DataError(f"row {i + 1}: missing value in column {name!r}")
            vals[i] = _parse_numeric(c, i + 1, name)
        if label == "exposure" and np.any(vals <= 0):
            bad = int(np.argmax(vals <= 0))
            raise DataError(f"row {bad + 1}: non-positive exposure value in column {name!r}")
        return vals

    return Dataset(
        schema,
        columns,
        target=_aux_column(schema.target, "target"),
        exposure=_aux_column(schema.exposure, "exposure"),
        weight=_aux_column(schema.weight, "weight"),
    )


def write_csv(data: Dataset, path, delimiter: str = ",") -> None:
    """Write a dataset back to CSV; numeric values keep full precision.

    ``load_csv`` on the result reproduces the columns bit for bit.
    """
    schema = data.schema
    header = list(schema.names) + [
        c for c in (schema.target, schema.exposure, schema.weight) if c is not None
    ]
    aux = [a for a in (data.target, data.exposure, data.weight) if a is not None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(header)
        for i in range(data.n_rows):
            row = []
            for feat in schema.features:
                v = data.column(feat.name)[i]
                row.append(feat.levels[int(v)] if feat.is_categorical else repr(float(v)))
            row.extend(repr(float(a[i])) for a in aux)
            writer.writerow(row)


def empirical_moments(data: Dataset, feature: str) -> tuple[float, float]:
    """Mean and sample standard deviation (n-1 divisor) of a numeric column."""
    feat = data.schema.feature(feature)
    if feat.is_categorical:
        raise DataError(f"feature {feature!r} is categorical")
    if data.n_rows < 2:
        raise DataError("need at least 2 rows to compute moments")
    col = data.column(feature)
    mean = math.fsum(col) / data.n_rows
    var = math.fsum((v - mean) ** 2 for v in col) / (data.n_rows - 1)
    return mean, math.sqrt(var)


def quantile_bins(data: Dataset, feature: str, k: int) -> np.ndarray:
    """Bin edges at i/k quantiles (linear interpolation), duplicates merged.

    Returns sorted edges z_0 < ... < z_K with z_0 = min, z_K = max and K <= k.
    Rows partition into half-open bins [z_{i-1}, z_i), the last bin closed.
    """
    feat = data.schema.feature(feature)
    if feat.is_categorical:
        raise DataError(f"feature {feature!r} is categorical")
    if k < 1:
        raise DataError("k must be at least 1")
    col = data.column(feature)
    lo, hi = float(col.min()), float(col.max())
    if lo == hi:
        raise DataError(f"feature {feature!r} has zero range")
    interior = np.quantile(col, [i / k for i in range(1, k)]) if k > 1 else np.array([])
    edges = np.unique(np.concatenate(([lo], interior, [hi])))
    return edges


def bin_indices(edges: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Map values to bin indices 0..K-1 for edges z_0..z_K (last bin closed)."""
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def sample_rows(data: Dataset, n: int, seed: int) -> Dataset:
    """Draw n rows: without replacement when n <= n_rows, else with replacement."""
    if n < 1:
        raise DataError("n must be at least 1")
    rng = np.random.default_rng(seed)
    replace = n > data.n_rows
    idx = rng.choice(data.n_rows, size=n, replace=replace)
    return data.select_rows(idx)


def split_dataset(data: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic train/test split; row order preserved within each side."""
    if not 0 < fraction < 1:
        raise DataError("split fraction must be in (0, 1)")
    n_train = int(round(data.n_rows * fraction))
    if n_train < 1 or n_train >= data.n_rows:
        raise DataError("empty split")
    perm = np.random.default_rng(seed).permutation(data.n_rows)
    return (
        data.select_rows(np.sort(perm[:n_train])),
        data.select_rows(np.sort(perm[n_train:])),
    )
