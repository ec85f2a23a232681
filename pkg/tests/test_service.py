import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from posthoc.curves import pdp
from posthoc.models import fit_ridge
from posthoc.service.app import create_app
from posthoc.tabular import FeatureSchema, load_csv


@pytest.fixture()
def files(tmp_path):
    rng = np.random.default_rng(1)
    n = 80
    x1 = rng.standard_normal(n)
    x2 = rng.standard_normal(n)
    y = x1 - 2.0 * x2 + rng.normal(0, 0.05, n)
    data_path = tmp_path / "data.csv"
    rows = ["x1,x2,y"] + [
        f"{float(x1[i])!r},{float(x2[i])!r},{float(y[i])!r}" for i in range(n)
    ]
    data_path.write_text("\n".join(rows) + "\n")
    schema_doc = {
        "features": [
            {"name": "x1", "kind": "numeric"},
            {"name": "x2", "kind": "numeric"},
        ],
        "target": "y",
    }
    schema_path = tmp_path / "schema.json"
    schema_path.write_text(json.dumps(schema_doc))
    return data_path, schema_path, schema_doc


@pytest.fixture()
def client():
    return TestClient(create_app())


def register(client, files, name="d", model="m", spec="ridge:0.0"):
    data_path, schema_path, _ = files
    r = client.post("/datasets", json={"name": name, "data_path": str(data_path),
                                       "schema_path": str(schema_path)})
    assert r.status_code == 200, r.text
    r = client.post("/models", json={"name": model, "spec": spec, "dataset": name})
    assert r.status_code == 200, r.text


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_register_and_list(client, files):
    register(client, files)
    datasets = client.get("/datasets").json()
    assert datasets[0]["name"] == "d" and datasets[0]["n_rows"] == 80
    models = client.get("/models").json()
    assert models[0]["name"] == "m"
    assert models[0]["concurrency"] == "concurrent-safe"


def test_explain_pdp_matches_library(client, files):
    register(client, files)
    r = client.post("/explain/pdp", json={"dataset": "d", "model": "m",
                                          "feature": "x1", "grid": 10})
    assert r.status_code == 200, r.text
    result = r.json()["result"]

    data_path, schema_path, _ = files
    data = load_csv(data_path, FeatureSchema.from_json_file(schema_path))
    series = pdp(fit_ridge(data, 0.0), data, "x1", grid_size=10)
    assert result["grid"] == series.grid.tolist()
    assert result["values"] == pytest.approx(series.values.tolist(), abs=1e-12)


def test_explain_importance_and_shap(client, files):
    register(client, files)
    r = client.post("/explain/importance", json={"dataset": "d", "model": "m",
                                                 "loss": "mse", "repeats": 2})
    assert r.status_code == 200
    rows = r.json()["result"]["rows"]
    assert {row["name"] for row in rows} == {"x1", "x2"}

    r = client.post("/explain/shap", json={"dataset": "d", "model": "m",
                                           "row": 1, "M": 50, "seed": 3})
    assert r.status_code == 200
    phi = r.json()["result"]["feature_contributions"]
    assert set(phi) == {"x1", "x2"}


def test_run_endpoint_matches_cli_execution(client, files, tmp_path):
    data_path, schema_path, _ = files
    config = {
        "method": "pdp",
        "data": str(data_path),
        "schema": str(schema_path),
        "model": "ridge:0.0",
        "params": {"feature": "x2", "grid": 8},
        "seed": 0,
        "out": str(tmp_path),
        "format": "json",
    }
    r = client.post("/run", json={"config": config})
    assert r.status_code == 200, r.text
    remote = r.json()["artifact"]

    from posthoc.runner import RunConfig, execute

    local, _ = execute(RunConfig.from_dict(config))
    assert remote == json.loads(json.dumps(local))


def test_unknown_names_are_404(client, files):
    register(client, files)
    r = client.post("/explain/pdp", json={"dataset": "nope", "model": "m", "feature": "x1"})
    assert r.status_code == 404
    r = client.post("/explain/pdp", json={"dataset": "d", "model": "nope", "feature": "x1"})
    assert r.status_code == 404


def test_bad_requests_are_400(client, files):
    register(client, files)
    r = client.post("/explain/ale", json={"dataset": "d", "model": "m", "feature": "nope"})
    assert r.status_code == 400
    r = client.post("/run", json={"config": {"method": "not-a-method"}})
    assert r.status_code == 400


def test_evaluate_endpoint(client, files):
    register(client, files)
    r = client.post("/evaluate", json={"dataset": "d", "model_spec": "ridge:0.0",
                                       "split": 0.75, "metrics": ["mse", "mae"]})
    assert r.status_code == 200
    result = r.json()["result"]
    assert {m["metric"] for m in result["metrics"]} == {"mse", "mae"}
    for m in result["metrics"]:
        assert set(m) == {"metric", "train", "test", "gain_train", "gain_test"}
        assert m["gain_train"] > 0  # fitted model beats the trivial baseline


def test_cli_as_thin_client_over_http(files, tmp_path, monkeypatch):
    """The CLI --server path posts the same RunConfig to a live service."""
    import socket
    import threading
    import time

    import uvicorn

    from posthoc.cli import run

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]

    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.05)
    try:
        data_path, schema_path, _ = files
        out = tmp_path / "remote_out"
        code = run([
            "pdp", "--data", str(data_path), "--schema", str(schema_path),
            "--model", "ridge:0.0", "--feature", "x1", "--grid", "6",
            "--out", str(out), "--server", f"http://127.0.0.1:{port}",
        ])
        assert code == 0
        artifact = json.loads((out / "pdp_x1.json").read_text())
        assert artifact["result"]["method"] == "pdp"
        assert len(artifact["result"]["grid"]) == 6
    finally:
        server.should_exit = True
        thread.join(timeout=5)
