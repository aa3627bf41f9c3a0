"""Command-line reproduction harness.

    racbox list
    racbox run <experiment> [--seed S] [--episodes T] [--out DIR] [...]
    racbox verify <manifest.json>

``run`` writes plot-ready CSVs plus a manifest with checksums and pass/fail
verdicts; ``verify`` rechecks both.  Defaults can be kept in an INI config
file (one section per experiment); command-line flags override the file.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

from .experiments import (DEFAULT_SEED, OUTPUT_ROOT_ENV, REGISTRY, ExperimentConfig,
                          output_root, run_experiment, verify_manifest)


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _parse_grid_item(item: str) -> tuple[str, object]:
    if "=" not in item:
        raise argparse.ArgumentTypeError(f"grid items look like key=v1,v2 (got {item!r})")
    key, _, raw = item.partition("=")
    values = [_parse_scalar(v) for v in raw.split(",") if v != ""]
    if not values:
        raise argparse.ArgumentTypeError(f"grid item {item!r} has no values")
    return key.strip().replace("-", "_"), values if len(values) > 1 else values[0]


def _load_config_file(path: str, experiment: str) -> dict:
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    merged: dict = {}
    for section in ("defaults", experiment):
        if parser.has_section(section):
            for key, raw in parser.items(section):
                merged[key.replace("-", "_")] = _parse_grid_item(f"{key}={raw}")[1]
    return merged


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="racbox",
                                     description="reproduction experiments for "
                                                 "one-bit random-access coding")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write CSV + manifest")
    run.add_argument("experiment", choices=sorted(REGISTRY))
    run.add_argument("--seed", type=int, default=None, help="master seed")
    run.add_argument("--episodes", type=int, default=None,
                     help="episode count for stochastic experiments")
    run.add_argument("--out", default=None,
                     help=f"output root (default ${OUTPUT_ROOT_ENV} or ./results)")
    run.add_argument("--interval", choices=["wilson", "cp", "hoeffding"], default=None)
    run.add_argument("--level", type=float, default=None, help="confidence level")
    run.add_argument("--workers", type=int, default=None,
                     help="worker pool size (default: CPU count)")
    run.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2",
                     help="override an experiment parameter; repeatable")
    run.add_argument("--n-max", type=int, default=None,
                     help="shorthand for --grid n_max=<value>")
    run.add_argument("--config", default=None, help="INI file with per-experiment defaults")

    ver = sub.add_parser("verify", help="recheck a manifest's files and verdicts")
    ver.add_argument("manifest")

    sub.add_parser("list", help="list experiments and the exhibit each reproduces")
    return parser


def _assemble_config(args) -> ExperimentConfig:
    file_params = _load_config_file(args.config, args.experiment) if args.config else {}

    def pick(flag, key, default):
        if flag is not None:
            return flag
        return file_params.pop(key, default)

    seed = int(pick(args.seed, "seed", DEFAULT_SEED))
    episodes = pick(args.episodes, "episodes", None)
    interval = pick(args.interval, "interval", "wilson")
    level = float(pick(args.level, "level", 0.95))
    workers = int(pick(args.workers, "workers", os.cpu_count() or 1))
    params = dict(file_params)  # remaining file keys are experiment parameters
    if args.n_max is not None:
        params["n_max"] = args.n_max
    for item in args.grid:
        key, value = _parse_grid_item(item)
        params[key] = value
    interval = {"cp": "clopper_pearson"}.get(interval, interval)
    return ExperimentConfig(experiment=args.experiment, seed=seed,
                            episodes=None if episodes is None else int(episodes),
                            interval=interval, level=level, workers=workers,
                            params=params)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list":
        width = max(len(name) for name in REGISTRY)
        for name in sorted(REGISTRY):
            print(f"{name:<{width}}  {REGISTRY[name].exhibit}")
        return 0

    if args.command == "verify":
        ok, messages = verify_manifest(args.manifest)
        for msg in messages:
            print(msg)
        print("VERIFY:", "PASS" if ok else "FAIL")
        return 0 if ok else 1

    config = _assemble_config(args)
    manifest = run_experiment(config, out_root=output_root(args.out))
    for v in manifest["verdicts"]:
        status = "PASS" if v["passed"] else "FAIL"
        measured = "" if v["measured"] is None else f"  measured={v['measured']:.6g}"
        expected = f"  expected={v['expected']}" if v["expected"] else ""
        print(f"{status}  {v['name']}{measured}{expected}")
    where = os.path.join(output_root(args.out), config.experiment)
    print(f"wrote {', '.join(sorted(manifest['outputs']))} and manifest.json to {where}")
    print(f"config={manifest['config_hash']}  wall={manifest['wall_clock_s']:.2f}s  "
          f"{'ALL PASS' if manifest['all_passed'] else 'FAILURES PRESENT'}")
    return 0 if manifest["all_passed"] else 2


if __name__ == "__main__":
    sys.exit(main())
