"""Command line entry points: extract, stats, sweep, serve."""

from __future__ import annotations

import argparse
import json
import sys

from .pipeline import (
    ConfigError,
    PipelineConfig,
    ProviderSpec,
    StageError,
    run_pipeline,
    run_eps_sweep,
    stats,
)
from .provider import ProviderError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_STAGE = 2
EXIT_PROVIDER = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="litkg",
        description="Extract a character knowledge graph from novel text",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    extract = sub.add_parser("extract", help="run the full pipeline from a config file")
    extract.add_argument("config", help="JSON config file")
    extract.add_argument("--k", type=int, help="override cluster count")
    extract.add_argument("--seed", type=int, help="override random seed")
    extract.add_argument("--algorithm", choices=["kmeans", "dbscan"])
    extract.add_argument("--metric", choices=["euclidean", "cosine"])
    extract.add_argument("--provider", help="external embedding provider endpoint")
    extract.add_argument("--from-stage", default="corpus", help="resume from this stage")
    extract.add_argument("--out", help="override output directory")

    st = sub.add_parser("stats", help="recompute the report for a finished run")
    st.add_argument("run_dir")

    sweep = sub.add_parser("sweep", help="DBSCAN eps sweep over a finished run")
    sweep.add_argument("run_dir")
    sweep.add_argument("--eps", required=True, help="comma-separated eps values")
    sweep.add_argument("--min-pts", type=int, default=1)

    serve = sub.add_parser("serve", help="serve the annotation review API")
    serve.add_argument("run_dir")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--ui", help="directory with the built review UI")
    return parser


def _cmd_extract(args: argparse.Namespace) -> int:
    config = PipelineConfig.from_file(args.config)
    if args.out:
        config.out_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    if args.k is not None:
        config.clustering.k = args.k
    if args.algorithm:
        config.clustering.algorithm = args.algorithm
    if args.metric:
        config.clustering.metric = args.metric
    if args.provider:
        config.embedding = ProviderSpec(kind="external", endpoint=args.provider)
    report = run_pipeline(config, from_stage=args.from_stage)
    print(report.suitable_line)
    print(
        f"{report.clusters} clusters, {report.noise} noise instances, "
        f"{report.components} graph components -> {config.out_dir}"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "extract":
            return _cmd_extract(args)
        if args.command == "stats":
            print(json.dumps(stats(args.run_dir).to_json_obj(), indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "sweep":
            eps_values = [float(x) for x in args.eps.split(",") if x.strip()]
            rows = run_eps_sweep(args.run_dir, eps_values, min_pts=args.min_pts)
            print(json.dumps(rows, indent=2))
            return EXIT_OK
        if args.command == "serve":
            import uvicorn

            from .server import create_app

            app = create_app(args.run_dir, ui_dir=args.ui)
            uvicorn.run(app, host=args.host, port=args.port)
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except StageError as exc:
        if "provider" in str(exc):
            print(f"provider error: {exc}", file=sys.stderr)
            return EXIT_PROVIDER
        print(f"stage error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
