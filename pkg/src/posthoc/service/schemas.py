"""Pydantic request/response models for the explanation service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    """One-shot execution of a full run configuration (CLI parity)."""

    config: dict[str, Any]


class RunResponse(BaseModel):
    artifact: dict[str, Any]
    summary: list[str]


class RegisterDatasetRequest(BaseModel):
    name: str
    data_path: str
    schema_path: str | None = None
    schema_inline: dict[str, Any] | None = Field(
        default=None, description="schema document, alternative to schema_path"
    )


class DatasetInfo(BaseModel):
    name: str
    n_rows: int
    features: list[str]
    target: str | None
    exposure: str | None


class RegisterModelRequest(BaseModel):
    name: str
    spec: str = Field(description="glm | ridge[:LAMBDA] | rule-table:FILE | synthetic | "
                                  "file:DUMP.json | external[:BATCH]:COMMAND")
    dataset: str = Field(description="registered dataset used to fit/bind the model")


class ModelInfo(BaseModel):
    name: str
    description: str
    concurrency: str


class ImportanceRequest(BaseModel):
    dataset: str
    model: str
    loss: str = "mse"
    repeats: int = 5
    split: str | None = None
    groups: dict[str, list[str]] | None = None
    per_modality: bool = False
    seed: int = 0


class CurveRequest(BaseModel):
    dataset: str
    model: str
    feature: str | None = None
    features: list[str] | None = None
    grid: int = 20
    bins: int = 20
    center: bool = False
    max_curves: int = 1000
    group_by: str | None = None
    seed: int = 0


class HstatRequest(BaseModel):
    dataset: str
    model: str
    features: list[str] | None = None
    subsample: int = 1000
    bootstrap: int = 0
    seed: int = 0


class AttributionRequest(BaseModel):
    dataset: str
    model: str
    row: int = 0
    n_sim: int = 5000
    kernel: str = "gower"
    lam: float = Field(default=1.0, alias="lambda")
    k_features: int | None = None
    M: int = 500
    background: int | None = None
    seed: int = 0

    model_config = {"populate_by_name": True}


class EvaluateRequest(BaseModel):
    dataset: str
    model_spec: str
    split: float = 0.8
    metrics: list[str] = ["poisson_deviance", "mse", "mae"]
    seed: int = 0


class ResultResponse(BaseModel):
    result: dict[str, Any]
