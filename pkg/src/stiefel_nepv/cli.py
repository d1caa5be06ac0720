"""Command-line entry point.

``stiefel-nepv run --config FILE [--out DIR] [--seed-override N] [--no-timing] [--jobs J]``
runs a benchmark grid and writes CSV outputs; ``stiefel-nepv demo`` runs
one solver on one generated problem and prints its summary row.

Exit codes: 0 success, 1 configuration error, 2 some runs failed.
"""
import argparse
import logging
import sys

from . import bench
from .errors import ConfigError
from .solvers import SolverKind

log = logging.getLogger("stiefel_nepv")


def _build_parser():
    parser = argparse.ArgumentParser(prog="stiefel-nepv", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (overrides out_dir)")
    run.add_argument("--seed-override", type=int, help="replace the seed list by one seed")
    run.add_argument("--no-timing", action="store_true", help="write zeros in timing columns")
    run.add_argument("--jobs", type=int, default=None,
                     help=f"parallel workers (default ${bench.JOBS_ENV} or 1)")
    run.add_argument("--max-iters", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--beta", type=float)

    demo = sub.add_parser("demo", help="one-shot run printing a summary row")
    demo.add_argument("--problem", default="sparse_pca",
                      choices=["sparse_pca", "compressed_modes", "feature_select"])
    demo.add_argument("--n", type=int, default=300)
    demo.add_argument("--p", type=int, default=5)
    demo.add_argument("--mu", type=float, default=0.5)
    demo.add_argument("--solver", default=SolverKind.NEPV_ADMM.value,
                      choices=[k.value for k in SolverKind])
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--beta", type=float, default=20.0)
    demo.add_argument("--max-iters", type=int, default=5000)
    demo.add_argument("--tol", type=float, default=1e-8)
    return parser


def _load_run_config(args):
    cfg = bench.ExperimentConfig.from_json(args.config).__dict__.copy()
    if args.out is not None:
        cfg["out_dir"] = args.out
    if args.seed_override is not None:
        cfg["seeds"] = [args.seed_override]
    if args.no_timing:
        cfg["no_timing"] = True
    for key in ("max_iters", "tol", "beta"):
        if getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    cfg["jobs"] = args.jobs if args.jobs is not None else max(cfg.get("jobs", 1), bench.default_jobs())
    config = bench.ExperimentConfig.from_dict(cfg)
    if config.out_dir is None:
        raise ConfigError("no output directory: set out_dir in the config or pass --out")
    return config


def _cmd_run(args):
    config = _load_run_config(args)
    rows, traces = bench.run_experiment(config)
    bench.write_outputs(config, rows, traces, config.out_dir)
    failed = sum(1 for r in rows if r.error)
    log.info("%d runs, %d failed, outputs in %s", len(rows), failed, config.out_dir)
    return 2 if failed else 0


def _cmd_demo(args):
    config = bench.ExperimentConfig(
        problem=args.problem, grid=[(args.n, args.p)], mu=[args.mu], solvers=[args.solver],
        seeds=[args.seed], beta=args.beta, max_iters=args.max_iters, tol=args.tol,
    )
    rows, _ = bench.run_experiment(config)
    print(",".join(bench.SUMMARY_HEADER))
    for r in rows:
        print(",".join(bench._fmt(getattr(r, k)) for k in bench.SUMMARY_HEADER))
        if r.error:
            print(f"error: {r.error}", file=sys.stderr)
    return 2 if any(r.error for r in rows) else 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_demo(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
