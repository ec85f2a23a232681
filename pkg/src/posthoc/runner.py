"""Configuration-driven execution shared by the CLI and the HTTP service.

A RunConfig names the inputs (data, schema, model spec), the method and its
parameters, and the seed; ``execute`` turns it into a JSON-ready artifact that
embeds the resolved configuration, so any artifact can be reproduced from its
own header.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .curves import ale, grouped_curves, ice, mplot, pdp
from .errors import DataError, ModelError
from .importance import permutation_importance, permutation_importance_per_modality
from .interactions import h_matrix, h_pairwise
from .local import lime_explain, live_explain, shap_mc, shapley_exact
from .metrics import LossKind, loss
from .models import (
    FittedGlm,
    FittedLinear,
    FunctionPredictor,
    RuleTable,
    external_predictor,
    fit_poisson_glm,
    fit_ridge,
    hidden_slope_signal,
    rule_table_model,
    synthetic_grouping_example,
)
from .tabular import Dataset, FeatureSchema, load_csv, split_dataset

METHODS = (
    "importance", "pdp", "ice", "ale", "mplot", "hstat",
    "lime", "live-explain", "shap", "shapley-exact",
    "fit", "evaluate", "demo",
)

DEMO_SEED = 0


@dataclass
class RunConfig:
    """One invocation: inputs, method, parameters, seed, output sink."""

    method: str
    data: str | None = None
    schema: str | None = None
    model: str | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "."
    format: str = "json"

    def __post_init__(self):
        if self.method not in METHODS:
            raise DataError(f"unknown method {self.method!r}")
        if self.format not in ("json", "csv", "both"):
            raise DataError(f"unknown format {self.format!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        return cls(**doc)


def load_dataset(config: RunConfig) -> Dataset:
    if not config.data or not config.schema:
        raise DataError(f"method {config.method!r} needs --data and --schema")
    schema = FeatureSchema.from_json_file(config.schema)
    return load_csv(config.data, schema)


def _parse_external(spec: str):
    rest = spec.split(":", 1)[1]
    batch = 1000
    head, _, tail = rest.partition(":")
    if head.isdigit() and tail:
        return int(head), tail
    return batch, rest


def build_model(spec: str, data: Dataset | None, fit_data: Dataset | None = None):
    """Resolve a model spec string against the (training) data.

    Returns (predictor, closer) where closer releases any child process.
    """
    if not spec:
        raise ModelError("no model spec given")
    fit_data = fit_data if fit_data is not None else data
    if spec == "glm":
        return fit_poisson_glm(fit_data), None
    if spec == "ridge" or spec.startswith("ridge:"):
        lam = float(spec.split(":", 1)[1]) if ":" in spec else 0.0
        return fit_ridge(fit_data, lam), None
    if spec.startswith("rule-table:"):
        table = RuleTable.from_json_file(spec.split(":", 1)[1], data.schema)
        return rule_table_model(table), None
    if spec == "synthetic":
        for name in ("x1", "x2", "x3"):
            feat = data.schema.feature(name)
            if feat.is_categorical:
                raise ModelError("synthetic model needs numeric features x1, x2, x3")
        cols = [data.schema.index(n) for n in ("x1", "x2", "x3")]
        return (
            FunctionPredictor(lambda X: hidden_slope_signal(X[:, cols]),
                              description="hidden-slope true function"),
            None,
        )
    if spec.startswith("file:"):
        with open(spec.split(":", 1)[1], encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("kind") == "glm-poisson":
            return FittedGlm.from_dict(doc), None
        if doc.get("kind") == "linear":
            return FittedLinear.from_dict(doc), None
        raise ModelError(f"unknown model dump kind {doc.get('kind')!r}")
    if spec.startswith("external:"):
        batch, command = _parse_external(spec)
        model = external_predictor(command, data.schema, batch_size=batch)
        return model, model.close
    raise ModelError(f"unknown model spec {spec!r}")


def _loss_kind(data: Dataset, params: dict) -> LossKind:
    name = params.get("loss", "mse")
    use_exposure = params.get("use_exposure")
    if use_exposure is None:
        use_exposure = data.exposure is not None
    return LossKind.parse(name, use_exposure=bool(use_exposure))


def _instance(data: Dataset, params: dict):
    return data.instance(int(params.get("row", 0)))


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _curve_summary(series) -> list:
    lo, hi = float(np.min(series.values)), float(np.max(series.values))
    return [f"{series.kind} of {'/'.join(series.features)}: "
            f"{len(series.values)} grid points, values in [{_fmt(lo)}, {_fmt(hi)}]"]


def _attribution_summary(att) -> list:
    lines = [f"{att.method}: prediction {_fmt(att.prediction)}, baseline {_fmt(att.baseline)}"]
    order = np.argsort(-np.abs(att.contributions))
    for j in order[:5]:
        lines.append(f"  {att.features[j]}: {_fmt(att.contributions[j])}")
    return lines


def run_importance(config: RunConfig, data: Dataset, model) -> tuple[dict, list]:
    p = config.params
    kind = _loss_kind(data, p)
    kwargs = dict(
        loss_kind=kind,
        repeats=int(p.get("repeats", 5)),
        seed=config.seed,
        split=p.get("split"),
        split_fraction=float(p.get("split_fraction", 0.8)),
    )
    if p.get("per_modality"):
        table = permutation_importance_per_modality(model, data, **kwargs)
    else:
        groups = p.get("groups")
        table = permutation_importance(model, data, groups=groups, **kwargs)
    lines = [f"permutation importance ({kind.kind}), base error {_fmt(table.base_error)}"]
    for row in table.rows[:8]:
        lines.append(f"  {row.name}: FI {row.fi_mean:.4f} (sd {row.fi_sd:.4f})")
    return table.to_dict(), lines


def run_curve(config: RunConfig, data: Dataset, model) -> tuple[dict, list]:
    p = config.params
    method = config.method
    if not p.get("feature") and not (method == "pdp" and p.get("features")):
        raise DataError(f"method {method!r} needs a feature")
    group_by = p.get("group_by")
    if group_by and method in ("pdp", "ale"):
        out = grouped_curves(model, data, p["feature"], group_by, kind=method,
                             bins_or_grid=int(p.get("grid", p.get("bins", 20))))
        lines = [f"grouped {method} of {p['feature']} by {group_by}: "
                 f"{len(out.curves)} groups"]
        lines += [f"  warning: {w}" for w in out.warnings]
        return out.to_dict(), lines
    if method == "pdp":
        features = p.get("features") or p["feature"]
        series = pdp(model, data, features, grid_size=int(p.get("grid", 20)))
        return series.to_dict(), _curve_summary(series)
    if method == "ice":
        bundle = ice(model, data, p["feature"], grid_size=int(p.get("grid", 20)),
                     center=bool(p.get("center", False)),
                     max_curves=int(p.get("max_curves", 1000)), seed=config.seed)
        lines = [f"ice of {p['feature']}: {bundle.curves.shape[0]} curves "
                 f"on {bundle.curves.shape[1]} grid points (centered={bundle.centered})"]
        return bundle.to_dict(), lines
    if method == "ale":
        series = ale(model, data, p["feature"], bins=int(p.get("bins", 20)))
        return series.to_dict(), _curve_summary(series)
    series = mplot(model, data, p["feature"], bins=int(p.get("bins", 20)))
    return series.to_dict(), _curve_summary(series)


def run_hstat(config: RunConfig, data: Dataset, model) -> tuple[dict, list]:
    p = config.params
    subsample = int(p.get("subsample", 1000))
    pair = p.get("features")
    if pair:
        names = list(pair) if isinstance(pair, (list, tuple)) else [s.strip() for s in pair.split(",")]
        if len(names) != 2:
            raise DataError("hstat --features takes exactly one pair j,k")
        j, k = names
        value = h_pairwise(model, data, j, k, subsample=subsample, seed=config.seed)
        result = {"method": "h-statistic-pair", "features": [j, k], "h2": value,
                  "subsample_n": min(subsample, data.n_rows), "seed": config.seed}
        return result, [f"H2({j},{k}) = {value:.6f}"]
    matrix = h_matrix(model, data, subsample=subsample, seed=config.seed,
                      n_bootstrap=int(p.get("bootstrap", 0)))
    lines = ["pairwise interaction strengths (top entries):"]
    feats = matrix.features
    entries = []
    for i in range(len(feats)):
        for j in range(i + 1, len(feats)):
            v = matrix.pairwise[i, j]
            if not np.isnan(v):
                entries.append((v, f"  H2({feats[i]},{feats[j]}) = {v:.4f}"))
    entries.sort(key=lambda t: -t[0])
    lines += [text for _, text in entries[:8]]
    return matrix.to_dict(), lines


def run_local(config: RunConfig, data: Dataset, model) -> tuple[dict, list]:
    p = config.params
    x = _instance(data, p)
    if config.method == "lime":
        att = lime_explain(model, data, x, n_sim=int(p.get("n_sim", 5000)),
                           kernel=p.get("kernel", "gower"), lam=float(p.get("lam", 1.0)),
                           k_features=p.get("k_features"), seed=config.seed)
    elif config.method == "live-explain":
        att = live_explain(model, data, x, n_sim=int(p.get("n_sim", 5000)),
                           lam=float(p.get("lam", 1.0)),
                           k_features=p.get("k_features"), seed=config.seed)
    elif config.method == "shap":
        att = shap_mc(model, data, x, M=int(p.get("M", 500)), seed=config.seed,
                      background_size=p.get("background"))
    else:
        att = shapley_exact(model, data, x)
    return att.to_dict(), _attribution_summary(att)


def run_fit(config: RunConfig, data: Dataset, model) -> tuple[dict, list]:
    if not hasattr(model, "to_dict"):
        raise ModelError("fit supports the glm and ridge reference models")
    doc = model.to_dict()
    lines = [f"fitted {doc['kind']}: {len(doc['coef'])} coefficients"]
    if "deviance" in doc:
        lines.append(f"  deviance {_fmt(doc['deviance'])} in {doc['iterations']} iterations "
                     f"(converged={doc['converged']})")
    return doc, lines


def evaluate_model(model, train: Dataset, test: Dataset, metric_names) -> dict:
    """Train/test losses plus relative gains over the intercept-only model.

    The trivial baseline predicts the training data's homogeneous rate
    (total target over total exposure); gains are (base - value) / base.
    """
    if train.target is None or test.target is None:
        raise ModelError("evaluate needs a declared target")
    expo_train = train.exposure if train.exposure is not None else np.ones(train.n_rows)
    rate = float(train.target.sum() / expo_train.sum())

    rows = []
    for name in metric_names:
        use_expo = train.exposure is not None
        kind = LossKind.parse(name, use_exposure=use_expo)
        vals = {}
        gains = {}
        for side, part in (("train", train), ("test", test)):
            expo = part.exposure if use_expo else None
            pred = model.predict(part.matrix)
            base_pred = np.full(part.n_rows, rate)
            vals[side] = loss(kind, part.target, pred, expo)
            base = loss(kind, part.target, base_pred, expo)
            gains[side] = (base - vals[side]) / base if base != 0 else 0.0
        rows.append({
            "metric": kind.kind,
            "train": vals["train"],
            "test": vals["test"],
            "gain_train": gains["train"],
            "gain_test": gains["test"],
        })
    return {"method": "evaluate", "metrics": rows, "baseline_rate": rate,
            "n_train": train.n_rows, "n_test": test.n_rows}


def run_evaluate(config: RunConfig, data: Dataset) -> tuple[dict, list]:
    p = config.params
    fraction = float(p.get("split", 0.8))
    train, test = split_dataset(data, fraction, config.seed)
    model, closer = build_model(config.model, data, fit_data=train)
    try:
        names = p.get("metrics") or ["poisson_deviance", "mse", "mae"]
        result = evaluate_model(model, train, test, names)
    finally:
        if closer:
            closer()
    lines = [f"evaluate ({result['n_train']} train / {result['n_test']} test rows), "
             f"baseline rate {_fmt(result['baseline_rate'])}"]
    for m in result["metrics"]:
        lines.append(f"  {m['metric']}: train {_fmt(m['train'])} ({m['gain_train']:+.2%}), "
                     f"test {_fmt(m['test'])} ({m['gain_test']:+.2%})")
    return result, lines


def run_demo(config: RunConfig) -> tuple[dict, list]:
    name = config.params.get("name", "pdp-flatness")
    if name != "pdp-flatness":
        raise DataError(f"unknown demo {name!r}; available: pdp-flatness")
    data, model = synthetic_grouping_example(1000, seed=config.seed)
    series = pdp(model, data, "x2", grid_size=20)
    grouped = grouped_curves(model, data, "x2", "x3_sign", kind="pdp", bins_or_grid=20)
    max_abs = float(np.max(np.abs(series.values)))
    slopes = {
        label: float(np.polyfit(c.grid, c.values, 1)[0])
        for label, c in grouped.curves.items()
    }
    result = {
        "method": "demo-pdp-flatness",
        "n": 1000,
        "max_abs_pdp_x2": max_abs,
        "group_slopes": slopes,
        "pdp": series.to_dict(),
        "grouped": grouped.to_dict(),
    }
    lines = [
        f"hidden-slope demo (n=1000, seed={config.seed})",
        f"  max |PDP(x2)| = {max_abs:.4f}  (flat on average)",
    ] + [f"  slope within x3 {label}: {slope:+.3f}" for label, slope in slopes.items()]
    return result, lines


def execute(config: RunConfig) -> tuple[dict, list]:
    """Run one configuration; returns (artifact, summary lines)."""
    if config.method == "demo":
        result, lines = run_demo(config)
    elif config.method == "evaluate":
        data = load_dataset(config)
        result, lines = run_evaluate(config, data)
    else:
        data = load_dataset(config)
        model, closer = build_model(config.model, data)
        try:
            if config.method == "importance":
                result, lines = run_importance(config, data, model)
            elif config.method in ("pdp", "ice", "ale", "mplot"):
                result, lines = run_curve(config, data, model)
            elif config.method == "hstat":
                result, lines = run_hstat(config, data, model)
            elif config.method in ("lime", "live-explain", "shap", "shapley-exact"):
                result, lines = run_local(config, data, model)
            elif config.method == "fit":
                result, lines = run_fit(config, data, model)
            else:  # pragma: no cover - guarded by RunConfig validation
                raise DataError(f"unhandled method {config.method!r}")
        finally:
            if closer:
                closer()
    artifact = {"config": config.to_dict(), "result": result}
    return artifact, lines


def artifact_stem(config: RunConfig) -> str:
    parts = [config.method]
    p = config.params
    if config.method == "demo":
        parts.append(p.get("name", "pdp-flatness"))
    feature = p.get("feature") or p.get("features")
    if feature and config.method not in ("hstat",):
        if isinstance(feature, str):
            parts.append(feature)
        else:
            parts.extend(feature)
    if p.get("group_by"):
        parts.append(f"by-{p['group_by']}")
    if config.method in ("lime", "live-explain", "shap", "shapley-exact"):
        parts.append(f"row{int(p.get('row', 0))}")
    return "_".join(str(s).replace(":", "-").replace("/", "-").replace(",", "-") for s in parts)
