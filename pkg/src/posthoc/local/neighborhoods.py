"""Synthetic neighborhoods and proximity kernels for local surrogate models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..tabular import Dataset, FeatureSchema, Instance, empirical_moments

LIME_GAUSSIAN = "lime-gaussian"
LIVE = "live"


@dataclass
class Neighborhood:
    """Synthetic rows around an instance, with fitting weights."""

    rows: np.ndarray
    weights: np.ndarray
    provenance: str


@dataclass(frozen=True)
class RbfKernel:
    """exp(-d^2 / (2 width^2)) on standardized numeric distance.

    ``width=None`` defaults to 0.75 * sqrt(p) at evaluation time. Categorical
    mismatches add 1 each to the squared distance.
    """

    width: float | None = None


@dataclass(frozen=True)
class GowerKernel:
    """1 - Gower distance: range-normalized numeric gaps and 0/1 categorical
    mismatches, averaged over features."""


def parse_kernel(spec) -> RbfKernel | GowerKernel:
    if isinstance(spec, (RbfKernel, GowerKernel)):
        return spec
    text = str(spec).strip().lower()
    if text == "gower":
        return GowerKernel()
    if text == "rbf":
        return RbfKernel()
    if text.startswith("rbf:"):
        try:
            return RbfKernel(width=float(text.split(":", 1)[1]))
        except ValueError:
            raise DataError(f"bad RBF width in kernel spec {spec!r}") from None
    raise DataError(f"unknown kernel {spec!r}; expected 'gower' or 'rbf[:WIDTH]'")


def lime_sample_neighborhood(data: Dataset, x: Instance, n_sim: int, seed: int = 0) -> Neighborhood:
    """Independent per-feature draws matching the data's marginals.

    Numeric features are sampled normal with the column's empirical mean and
    sd (n-1 divisor); categorical features are sampled from their empirical
    level frequencies. A zero-variance column stays constant.
    """
    p = data.schema.n_features
    if n_sim < p + 2:
        raise DataError(f"n_sim must be at least p + 2 = {p + 2}")
    rng = np.random.default_rng(seed)
    rows = np.empty((n_sim, p))
    for j, feat in enumerate(data.schema.features):
        if feat.is_categorical:
            freqs = np.bincount(data.column(feat.name), minlength=feat.n_levels) / data.n_rows
            rows[:, j] = rng.choice(feat.n_levels, size=n_sim, p=freqs)
        else:
            mean, sd = empirical_moments(data, feat.name)
            rows[:, j] = rng.normal(mean, sd, size=n_sim) if sd > 0 else mean
    return Neighborhood(rows, np.ones(n_sim), LIME_GAUSSIAN)


def live_neighborhood(data: Dataset, x: Instance, n_sim: int, seed: int = 0) -> Neighborhood:
    """Copies of the instance, each with one feature redrawn empirically.

    Every copy picks one feature index uniformly and replaces its value by a
    uniform draw from that feature's observed column; all copies carry equal
    weight, so no kernel choice is involved.
    """
    if n_sim < 1:
        raise DataError("n_sim must be at least 1")
    p = data.schema.n_features
    rng = np.random.default_rng(seed)
    rows = np.tile(x.values, (n_sim, 1))
    which = rng.integers(0, p, size=n_sim)
    donor = rng.integers(0, data.n_rows, size=n_sim)
    X = data.matrix
    rows[np.arange(n_sim), which] = X[donor, which]
    return Neighborhood(rows, np.ones(n_sim), LIVE)


def kernel_weights(schema: FeatureSchema, rows: np.ndarray, x: Instance, kernel) -> np.ndarray:
    """Proximity weight of each row to the instance under the chosen kernel.

    RBF distances standardize numeric columns against the supplied rows;
    Gower normalizes numeric gaps by the observed range (rows plus instance).
    A row identical to the instance gets weight 1 under both kernels.
    """
    kernel = parse_kernel(kernel)
    rows = np.asarray(rows, dtype=np.float64)
    xv = x.values
    p = schema.n_features
    num = [j for j, f in enumerate(schema.features) if not f.is_categorical]
    cat = [j for j, f in enumerate(schema.features) if f.is_categorical]

    if isinstance(kernel, RbfKernel):
        width = kernel.width if kernel.width is not None else 0.75 * math.sqrt(p)
        if width <= 0:
            raise DataError("kernel width must be positive")
        d2 = np.zeros(rows.shape[0])
        for j in num:
            sd = rows[:, j].std(ddof=1) if rows.shape[0] > 1 else 0.0
            scale = sd if sd > 0 else 1.0
            d2 += ((rows[:, j] - xv[j]) / scale) ** 2
        for j in cat:
            d2 += rows[:, j] != xv[j]
        return np.exp(-d2 / (2.0 * width ** 2))

    dist = np.zeros(rows.shape[0])
    for j in num:
        lo = min(rows[:, j].min(), xv[j])
        hi = max(rows[:, j].max(), xv[j])
        if hi > lo:
            dist += np.abs(rows[:, j] - xv[j]) / (hi - lo)
    for j in cat:
        dist += rows[:, j] != xv[j]
    return 1.0 - dist / p
