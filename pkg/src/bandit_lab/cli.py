"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 I/O error.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import env as envmod
from .gradient import GradientConfig, gradient_norm_table
from .runner import (
    ConfigError,
    DataFormatError,
    emit_outputs,
    load_run_config,
    read_replay_csv,
    run_diagnostics,
    run_replay,
    run_simulation,
    write_diagnostics_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_IO = 4

TABLE_DISTRIBUTIONS = {
    "gaussian": lambda: envmod.FeatureDistribution.iid(envmod.GaussianFamily(0.0, 1.0)),
    "uniform": lambda: envmod.FeatureDistribution.iid(envmod.UniformFamily(-1.0, 1.0)),
    "laplace": lambda: envmod.FeatureDistribution.iid(envmod.LaplaceFamily(0.0, 1.0)),
    "exponential": lambda: envmod.FeatureDistribution.iid(envmod.ExponentialFamily(1.0)),
    "lognormal": lambda: envmod.FeatureDistribution.iid(envmod.LogNormalFamily(0.0, 1.0)),
    "mixture_gaussian": lambda: envmod.FeatureDistribution.iid(
        envmod.MixtureFamily(0.3, envmod.GaussianFamily(10.0, 1.0), envmod.GaussianFamily(-10.0, 1.0))
    ),
    "mixture_uniform": lambda: envmod.FeatureDistribution.iid(
        envmod.MixtureFamily(0.3, envmod.UniformFamily(9.0, 11.0), envmod.UniformFamily(-11.0, -9.0))
    ),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandit-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate configured policies and write results.csv")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--charts", action="store_true", help="also write per-metric SVG charts")

    replay = sub.add_parser("replay", help="score configured policies on a logged dataset")
    replay.add_argument("--data", required=True)
    replay.add_argument("--config", required=True)
    replay.add_argument("--out", required=True)

    grad = sub.add_parser("gradtable", help="gradient norms at the closed-form coefficient")
    grad.add_argument("--config", required=True)
    grad.add_argument("--out", required=True)

    diag = sub.add_parser("diagnose", help="spectral-norm concentration checkpoints")
    diag.add_argument("--config", required=True)
    diag.add_argument("--out", required=True)
    return parser


def _cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    paths = emit_outputs(run_simulation(cfg), args.out, charts=args.charts)
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_replay(args) -> int:
    cfg = load_run_config(args.config)
    dataset = read_replay_csv(args.data)
    records = run_replay(dataset, cfg.policies, cfg.seeds)
    for path in emit_outputs(records, args.out):
        print(path)
    return EXIT_OK


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return doc


def _cmd_gradtable(args) -> int:
    doc = _load_json(args.config)
    names = doc.get("distributions", list(TABLE_DISTRIBUTIONS))
    try:
        distributions = [(name, TABLE_DISTRIBUTIONS[name]()) for name in names]
    except KeyError as exc:
        raise ConfigError(f"unknown distribution {exc}") from exc
    d = int(doc.get("d", 10))
    noise_diag = doc.get("noise_diag", [0.1 * (i + 1) for i in range(d)])
    if len(noise_diag) != d:
        raise ConfigError("noise_diag length must equal d")
    cfg = GradientConfig(
        mc_noise_samples=int(doc.get("mc_noise_samples", 1000)),
        fd_step=float(doc.get("fd_step", 1e-2)),
        feature_samples=int(doc.get("feature_samples", 10_000)),
    )
    rows = gradient_norm_table(
        distributions,
        theta_star_seed=int(doc.get("theta_star_seed", 0)),
        noise_cov=np.diag(np.asarray(noise_diag, dtype=float)),
        cfg=cfg,
        k_arms=int(doc.get("K", 5)),
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["distribution", "l2_norm"])
        for label, norm in rows:
            writer.writerow([label, repr(norm)])
    print(out)
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    cfg = load_run_config(args.config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_diagnostics_csv(out, run_diagnostics(cfg))
    print(out)
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "replay": _cmd_replay,
    "gradtable": _cmd_gradtable,
    "diagnose": _cmd_diagnose,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
