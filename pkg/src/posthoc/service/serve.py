"""Entry point for running the explanation service under uvicorn."""

from __future__ import annotations

import argparse


def main() -> None:
    import uvicorn

    parser = argparse.ArgumentParser(prog="posthoc-serve",
                                     description="Run the posthoc explanation service.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    uvicorn.run("posthoc.service.app:app", host=args.host, port=args.port)


if __name__ == "__main__":
    main()
