"""FastAPI service wrapping the interpretability engine.

Datasets and models register once and stay in memory, so repeated explanation
requests (multiple clients, one deployed model) skip reloading and refitting.
``POST /run`` executes a full CLI-equivalent run configuration in one shot.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException

from ..errors import PosthocError
from ..runner import (
    RunConfig,
    build_model,
    evaluate_model,
    execute,
    run_curve,
    run_hstat,
    run_importance,
    run_local,
)
from ..tabular import FeatureSchema, load_csv, split_dataset
from .schemas import (
    AttributionRequest,
    CurveRequest,
    DatasetInfo,
    EvaluateRequest,
    HstatRequest,
    ImportanceRequest,
    ModelInfo,
    RegisterDatasetRequest,
    RegisterModelRequest,
    ResultResponse,
    RunRequest,
    RunResponse,
)


class Registry:
    def __init__(self):
        self.lock = threading.Lock()
        self.datasets = {}
        self.models = {}   # name -> (predictor, closer)

    def dataset(self, name: str):
        try:
            return self.datasets[name]
        except KeyError:
            raise HTTPException(404, f"unknown dataset {name!r}") from None

    def model(self, name: str):
        try:
            return self.models[name][0]
        except KeyError:
            raise HTTPException(404, f"unknown model {name!r}") from None


def create_app() -> FastAPI:
    app = FastAPI(title="posthoc", description=__doc__)
    registry = Registry()
    app.state.registry = registry

    def guarded(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PosthocError as exc:
            raise HTTPException(400, str(exc)) from exc

    @app.get("/health")
    def health():
        return {"status": "ok", "datasets": len(registry.datasets), "models": len(registry.models)}

    @app.post("/run", response_model=RunResponse)
    def run(request: RunRequest):
        config = guarded(RunConfig.from_dict, request.config)
        artifact, summary = guarded(execute, config)
        return RunResponse(artifact=artifact, summary=summary)

    @app.post("/datasets", response_model=DatasetInfo)
    def register_dataset(request: RegisterDatasetRequest):
        if request.schema_inline is not None:
            schema = guarded(FeatureSchema.from_dict, request.schema_inline)
        elif request.schema_path:
            schema = guarded(FeatureSchema.from_json_file, request.schema_path)
        else:
            raise HTTPException(400, "schema_path or schema_inline required")
        data = guarded(load_csv, request.data_path, schema)
        with registry.lock:
            registry.datasets[request.name] = data
        return _dataset_info(request.name, data)

    @app.get("/datasets", response_model=list[DatasetInfo])
    def list_datasets():
        return [_dataset_info(name, d) for name, d in sorted(registry.datasets.items())]

    @app.post("/models", response_model=ModelInfo)
    def register_model(request: RegisterModelRequest):
        data = registry.dataset(request.dataset)
        model, closer = guarded(build_model, request.spec, data)
        with registry.lock:
            old = registry.models.pop(request.name, None)
            registry.models[request.name] = (model, closer)
        if old and old[1]:
            old[1]()
        return ModelInfo(name=request.name, description=model.description,
                         concurrency=model.concurrency)

    @app.get("/models", response_model=list[ModelInfo])
    def list_models():
        return [
            ModelInfo(name=name, description=m.description, concurrency=m.concurrency)
            for name, (m, _) in sorted(registry.models.items())
        ]

    @app.delete("/models/{name}")
    def delete_model(name: str):
        with registry.lock:
            entry = registry.models.pop(name, None)
        if entry is None:
            raise HTTPException(404, f"unknown model {name!r}")
        if entry[1]:
            entry[1]()
        return {"deleted": name}

    def _explain(method: str, dataset: str, model: str, params: dict, seed: int):
        data = registry.dataset(dataset)
        predictor = registry.model(model)
        config = RunConfig(method=method, params=params, seed=seed)
        if method == "importance":
            result, _ = guarded(run_importance, config, data, predictor)
        elif method in ("pdp", "ice", "ale", "mplot"):
            result, _ = guarded(run_curve, config, data, predictor)
        elif method == "hstat":
            result, _ = guarded(run_hstat, config, data, predictor)
        else:
            result, _ = guarded(run_local, config, data, predictor)
        return ResultResponse(result=result)

    @app.post("/explain/importance", response_model=ResultResponse)
    def explain_importance(request: ImportanceRequest):
        params = {"loss": request.loss, "repeats": request.repeats, "split": request.split,
                  "per_modality": request.per_modality}
        if request.groups is not None:
            params["groups"] = request.groups
        return _explain("importance", request.dataset, request.model, params, request.seed)

    def _curve_params(request: CurveRequest, method: str) -> dict:
        params = {"feature": request.feature, "grid": request.grid, "bins": request.bins}
        if method == "pdp" and request.features:
            params["features"] = request.features
        if method in ("pdp", "ale") and request.group_by:
            params["group_by"] = request.group_by
        if method == "ice":
            params["center"] = request.center
            params["max_curves"] = request.max_curves
        return params

    @app.post("/explain/pdp", response_model=ResultResponse)
    def explain_pdp(request: CurveRequest):
        return _explain("pdp", request.dataset, request.model,
                        _curve_params(request, "pdp"), request.seed)

    @app.post("/explain/ice", response_model=ResultResponse)
    def explain_ice(request: CurveRequest):
        return _explain("ice", request.dataset, request.model,
                        _curve_params(request, "ice"), request.seed)

    @app.post("/explain/ale", response_model=ResultResponse)
    def explain_ale(request: CurveRequest):
        return _explain("ale", request.dataset, request.model,
                        _curve_params(request, "ale"), request.seed)

    @app.post("/explain/mplot", response_model=ResultResponse)
    def explain_mplot(request: CurveRequest):
        return _explain("mplot", request.dataset, request.model,
                        _curve_params(request, "mplot"), request.seed)

    @app.post("/explain/hstat", response_model=ResultResponse)
    def explain_hstat(request: HstatRequest):
        params = {"subsample": request.subsample, "bootstrap": request.bootstrap}
        if request.features:
            params["features"] = request.features
        return _explain("hstat", request.dataset, request.model, params, request.seed)

    def _attribution_params(request: AttributionRequest) -> dict:
        return {"row": request.row, "n_sim": request.n_sim, "kernel": request.kernel,
                "lam": request.lam, "k_features": request.k_features,
                "M": request.M, "background": request.background}

    @app.post("/explain/lime", response_model=ResultResponse)
    def explain_lime(request: AttributionRequest):
        return _explain("lime", request.dataset, request.model,
                        _attribution_params(request), request.seed)

    @app.post("/explain/live", response_model=ResultResponse)
    def explain_live(request: AttributionRequest):
        return _explain("live-explain", request.dataset, request.model,
                        _attribution_params(request), request.seed)

    @app.post("/explain/shap", response_model=ResultResponse)
    def explain_shap(request: AttributionRequest):
        return _explain("shap", request.dataset, request.model,
                        _attribution_params(request), request.seed)

    @app.post("/explain/shapley-exact", response_model=ResultResponse)
    def explain_shapley_exact(request: AttributionRequest):
        return _explain("shapley-exact", request.dataset, request.model,
                        _attribution_params(request), request.seed)

    @app.post("/evaluate", response_model=ResultResponse)
    def evaluate(request: EvaluateRequest):
        data = registry.dataset(request.dataset)
        train, test = guarded(split_dataset, data, request.split, request.seed)
        model, closer = guarded(build_model, request.model_spec, data, train)
        try:
            result = guarded(evaluate_model, model, train, test, request.metrics)
        finally:
            if closer:
                closer()
        return ResultResponse(result=result)

    return app


def _dataset_info(name, data) -> DatasetInfo:
    return DatasetInfo(
        name=name,
        n_rows=data.n_rows,
        features=list(data.schema.names),
        target=data.schema.target,
        exposure=data.schema.exposure,
    )


app = create_app()
