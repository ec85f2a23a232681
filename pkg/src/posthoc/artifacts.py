"""JSON/CSV artifact emission for every explainer output.

JSON artifacts are written with sorted keys and a fixed layout so a rerun of
the same configuration is byte-identical.
"""

from __future__ import annotations

import json
import os

from .curves import CurveSeries, GroupedCurves, IceBundle
from .importance import ImportanceTable
from .interactions import InteractionMatrix
from .local.attribution import Attribution


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(obj))


def write_csv_rows(path, rows) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)


def csv_rows(result: dict) -> list | None:
    """Flat CSV view of a result payload, or None when none is defined."""
    method = result.get("method", "")
    if method in ("pdp", "ale", "mplot"):
        header = ["grid", "value"] if len(result["features"]) == 1 else ["grid_1", "grid_2", "value"]
        rows = [header]
        labels = result.get("grid_labels")
        for g, v in zip(result["grid"], result["values"]):
            if isinstance(g, list):
                rows.append([*g, v])
            elif labels is not None:
                rows.append([labels[int(g)], v])
            else:
                rows.append([g, v])
        return rows
    if method.startswith("grouped-"):
        rows = [["group", "grid", "value"]]
        for label, series in result["curves"].items():
            grid_labels = series.get("grid_labels")
            for g, v in zip(series["grid"], series["values"]):
                g_out = grid_labels[int(g)] if grid_labels is not None else g
                rows.append([label, g_out, v])
        return rows
    if method == "ice":
        rows = [["row", "grid", "value"]]
        for r, curve in zip(result["row_indices"], result["curves"]):
            for g, v in zip(result["grid"], curve):
                rows.append([r, g, v])
        return rows
    if method == "permutation-importance":
        rows = [["name", "fi_mean", "fi_sd"]]
        rows += [[r["name"], r["fi_mean"], r["fi_sd"]] for r in result["rows"]]
        return rows
    if method == "h-statistic":
        rows = [["feature_j", "feature_k", "h2"]]
        feats = result["features"]
        for i, a in enumerate(feats):
            for j in range(i + 1, len(feats)):
                rows.append([a, feats[j], result["pairwise"][i][j]])
        for i, a in enumerate(feats):
            rows.append([a, "", result["total"][i]])
        return rows
    if method == "h-statistic-pair":
        j, k = result["features"]
        return [["feature_j", "feature_k", "h2"], [j, k, result["h2"]]]
    if "feature_contributions" in result:
        rows = [["feature", "phi"]]
        rows += [[k, v] for k, v in result["feature_contributions"].items()]
        return rows
    if method == "evaluate":
        rows = [["metric", "train", "test", "gain_train", "gain_test"]]
        rows += [
            [m["metric"], m["train"], m["test"], m["gain_train"], m["gain_test"]]
            for m in result["metrics"]
        ]
        return rows
    return None


def result_payload(obj) -> dict:
    """Normalize any explainer output object to its artifact dict."""
    if isinstance(obj, (CurveSeries, IceBundle, GroupedCurves, ImportanceTable,
                        InteractionMatrix, Attribution)):
        return obj.to_dict()
    if isinstance(obj, dict):
        return obj
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_artifact(out_dir, stem: str, artifact: dict, fmt: str = "json") -> list:
    """Write the artifact in the requested format(s); returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, f"{stem}.json")
        write_json(path, artifact)
        written.append(path)
    if fmt in ("csv", "both"):
        rows = csv_rows(artifact["result"])
        if rows is not None:
            path = os.path.join(out_dir, f"{stem}.csv")
            write_csv_rows(path, rows)
            written.append(path)
    return written
