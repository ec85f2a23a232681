"""Command-line front end: parse flags into a RunConfig, execute it (in
process by default, or against a running service with --server), write the
JSON/CSV artifacts, and print a one-screen summary.

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .artifacts import write_artifact
from .errors import PosthocError
from .runner import RunConfig, artifact_stem, execute

LOCAL_METHODS = ("lime", "live-explain", "shap", "shapley-exact")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--data", help="CSV data file")
    p.add_argument("--schema", help="JSON schema file")
    p.add_argument("--model", help="model spec: glm | ridge[:LAMBDA] | rule-table:FILE | "
                                   "synthetic | file:DUMP.json | external[:BATCH]:COMMAND")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory for artifacts")
    p.add_argument("--format", choices=("json", "csv", "both"), default="json")
    p.add_argument("--server", help="delegate execution to a running service URL")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posthoc",
        description="Model-agnostic post-hoc explanations for tabular black boxes.",
    )
    sub = parser.add_subparsers(dest="method", required=True)

    p = sub.add_parser("importance", help="permutation feature importance")
    _add_common(p)
    p.add_argument("--loss", default="mse", help="mse | mae | poisson_deviance")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--split", choices=("train", "test"), default=None)
    p.add_argument("--groups", help="JSON object mapping group name to feature list")
    p.add_argument("--per-modality", action="store_true",
                   help="score each encoded column separately (reference models only)")

    for name, help_text in (("pdp", "partial dependence curve"),
                            ("ice", "individual conditional expectation curves"),
                            ("ale", "accumulated local effects curve"),
                            ("mplot", "conditional-average curve")):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.add_argument("--feature", help="feature to vary")
        if name == "pdp":
            p.add_argument("--features", help="two features, comma separated")
        if name in ("pdp", "ice"):
            p.add_argument("--grid", type=int, default=20)
        else:
            p.add_argument("--bins", type=int, default=20)
        if name in ("pdp", "ale"):
            p.add_argument("--group-by", help="categorical feature to group curves by")
        if name == "ice":
            p.add_argument("--center", action="store_true")
            p.add_argument("--max-curves", type=int, default=1000)

    p = sub.add_parser("hstat", help="pairwise and total interaction statistics")
    _add_common(p)
    p.add_argument("--features", help="one pair j,k (default: full matrix)")
    p.add_argument("--subsample", type=int, default=1000)
    p.add_argument("--bootstrap", type=int, default=0)

    for name in ("lime", "live-explain"):
        p = sub.add_parser(name, help=f"{name} local surrogate explanation")
        _add_common(p)
        p.add_argument("--row", type=int, default=0, help="row of --data to explain")
        p.add_argument("--n-sim", type=int, default=5000)
        p.add_argument("--lambda", dest="lam", type=float, default=1.0)
        p.add_argument("--k-features", type=int, default=None)
        if name == "lime":
            p.add_argument("--kernel", default="gower", help="gower | rbf[:WIDTH]")

    p = sub.add_parser("shap", help="Monte-Carlo Shapley attribution")
    _add_common(p)
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--M", type=int, default=500)
    p.add_argument("--background", type=int, default=None,
                   help="subsample size for the reference data")

    p = sub.add_parser("shapley-exact", help="exact Shapley attribution (p <= 12)")
    _add_common(p)
    p.add_argument("--row", type=int, default=0)

    p = sub.add_parser("fit", help="fit a reference model, dump coefficients")
    _add_common(p)

    p = sub.add_parser("evaluate", help="train/test metrics vs the trivial model")
    _add_common(p)
    p.add_argument("--split", type=float, default=0.8, help="train fraction")
    p.add_argument("--metrics", default="poisson_deviance,mse,mae")

    p = sub.add_parser("demo", help="built-in end-to-end demonstrations")
    p.add_argument("name", nargs="?", default="pdp-flatness")
    _add_common(p)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    method = args.method
    params = {}
    if method == "importance":
        params = {"loss": args.loss, "repeats": args.repeats, "split": args.split,
                  "per_modality": bool(args.per_modality)}
        if args.groups:
            params["groups"] = json.loads(args.groups)
    elif method in ("pdp", "ice", "ale", "mplot"):
        params = {"feature": args.feature}
        if method in ("pdp", "ice"):
            params["grid"] = args.grid
        else:
            params["bins"] = args.bins
        if method == "pdp" and args.features:
            params["features"] = [s.strip() for s in args.features.split(",")]
        if method in ("pdp", "ale") and args.group_by:
            params["group_by"] = args.group_by
        if method == "ice":
            params["center"] = bool(args.center)
            params["max_curves"] = args.max_curves
    elif method == "hstat":
        params = {"subsample": args.subsample, "bootstrap": args.bootstrap}
        if args.features:
            params["features"] = [s.strip() for s in args.features.split(",")]
    elif method in ("lime", "live-explain"):
        params = {"row": args.row, "n_sim": args.n_sim, "lam": args.lam,
                  "k_features": args.k_features}
        if method == "lime":
            params["kernel"] = args.kernel
    elif method == "shap":
        params = {"row": args.row, "M": args.M, "background": args.background}
    elif method == "shapley-exact":
        params = {"row": args.row}
    elif method == "evaluate":
        params = {"split": args.split,
                  "metrics": [s.strip() for s in args.metrics.split(",") if s.strip()]}
    elif method == "demo":
        params = {"name": args.name}
    return RunConfig(
        method=method,
        data=args.data,
        schema=args.schema,
        model=args.model,
        params=params,
        seed=args.seed,
        out=args.out,
        format=args.format,
    )


def _execute_remote(server: str, config: RunConfig):
    import httpx

    response = httpx.post(
        server.rstrip("/") + "/run",
        json={"config": config.to_dict()},
        timeout=600.0,
    )
    if response.status_code != 200:
        raise PosthocError(f"service error {response.status_code}: {response.text}")
    body = response.json()
    return body["artifact"], body["summary"]


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        if getattr(args, "server", None):
            artifact, summary = _execute_remote(args.server, config)
        else:
            artifact, summary = execute(config)
        paths = write_artifact(config.out, artifact_stem(config), artifact, config.format)
        for line in summary:
            print(line)
        for path in paths:
            print(f"wrote {path}")
        return 0
    except (PosthocError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
