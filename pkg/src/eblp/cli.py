"""Command-line interface.

Subcommands: ``denoise`` (in-sample fit of a matrix with missing or
weighted entries), ``oos`` (stream fresh rows through a saved model),
``simulate`` (dump a synthetic dataset), ``benchmark`` (method comparison
grid producing a results table).

Exit codes: 0 success, 2 parse/usage, 3 degenerate data, 4 numeric.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .benchmark import parse_benchmark_config, run_benchmark
from .errors import (
    DegenerateCoordinateError,
    EblpError,
    NotFittedError,
    ParseError,
    RankError,
    ShapeError,
    SpectrumDomainError,
)
from . import matio
from .pipeline import (
    TransformedObservation,
    dataset_from_arrays,
    estimated_amse,
    fit_in_sample,
    predict_out_of_sample,
)
from .simulate import simulate_dataset

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_NUMERIC = 4


def _load_observations(path, mask_path, na_token):
    values, observed = matio.read_matrix(path, na_token=na_token)
    if mask_path is not None:
        mask = matio.read_mask(mask_path)
        if values.size and mask.shape != values.shape:
            raise ShapeError(
                f"mask shape {mask.shape} does not match input {values.shape}"
            )
        observed = mask
        values = values * mask
    return values, observed


def _write_report(path, model):
    lines = [
        "# per-component estimates (fitting coordinates)",
        "component sigma_obs ell_hat c2_hat ct2_hat lambda_star supercritical",
    ]
    for k, est in enumerate(model.estimates, start=1):
        lines.append(
            f"{k} {est.sigma_obs:.17g} {est.ell_hat:.17g} {est.c2_hat:.17g} "
            f"{est.ct2_hat:.17g} {est.lambda_star:.17g} {int(est.supercritical)}"
        )
    lines.append(f"amse_est {estimated_amse(model):.17g}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def cmd_denoise(args) -> int:
    values, observed = _load_observations(args.input, args.mask, args.na_token)
    if values.size == 0:
        raise ParseError(f"{args.input}: empty input matrix")
    dataset = dataset_from_arrays(values, observed)
    if args.rank < 1:
        raise RankError("rank must be at least 1")
    model, x_hat = fit_in_sample(
        dataset, args.rank, whiten=args.whiten, mode=args.mode
    )
    matio.write_matrix(args.output, x_hat)
    _write_report(args.output + ".report", model)
    if args.save_model:
        matio.write_model(args.save_model, model)
    return EXIT_OK


def cmd_oos(args) -> int:
    model = matio.read_model(args.model)
    values, observed = _load_observations(args.input, args.mask, args.na_token)
    if values.size == 0:
        matio.write_matrix(args.output, np.zeros((0, 0)))
        return EXIT_OK
    if values.shape[1] != model.p:
        raise ShapeError(
            f"input has {values.shape[1]} columns, model expects {model.p}"
        )
    predictions = np.stack(
        [
            predict_out_of_sample(model, TransformedObservation(y=y, d=d))
            for y, d in zip(values, observed)
        ]
    )
    matio.write_matrix(args.output, predictions)
    return EXIT_OK


def cmd_simulate(args) -> int:
    experiments = parse_benchmark_config(args.config, seed_override=args.seed)
    exp = experiments[0]
    # Reproduce benchmark replicate 0 at the first grid noise level.
    cfg = replace(
        exp.config, noise=replace(exp.config.noise, sigma=exp.sigma_grid[0])
    )
    rng = np.random.default_rng(np.random.SeedSequence([exp.config.seed, 0, 0]))
    data = simulate_dataset(cfg, rng)
    matio.write_matrix(args.prefix + ".y.txt", data.y, observed=data.masks,
                       na_token=args.na_token)
    matio.write_matrix(args.prefix + ".mask.txt", data.masks)
    matio.write_matrix(args.prefix + ".x.txt", data.x)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    experiments = parse_benchmark_config(args.config, seed_override=args.seed)
    rows = run_benchmark(experiments, jobs=args.jobs, timings=args.timings)
    matio.write_results(args.output, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eblp",
        description="Optimal low-rank prediction for transformed/missing-data "
        "observations via singular-value shrinkage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    denoise = sub.add_parser("denoise", help="denoise an observed matrix in-sample")
    denoise.add_argument("input", help="matrix file (rows are samples)")
    denoise.add_argument("output", help="where to write the denoised matrix")
    denoise.add_argument("--rank", type=int, required=True)
    denoise.add_argument("--mask", help="0/1 mask file (default: NA tokens)")
    denoise.add_argument("--na-token", default="NA")
    denoise.add_argument("--mode", choices=("plugin", "white"), default="plugin")
    denoise.add_argument("--save-model", help="save the fitted model as JSON")
    whiten = denoise.add_mutually_exclusive_group()
    whiten.add_argument("--whiten", dest="whiten", action="store_true", default=True)
    whiten.add_argument("--no-whiten", dest="whiten", action="store_false")
    denoise.set_defaults(func=cmd_denoise)

    oos = sub.add_parser("oos", help="predict fresh rows with a saved model")
    oos.add_argument("input", help="matrix file of new observations")
    oos.add_argument("output", help="where to write the predictions")
    oos.add_argument("--model", required=True, help="model JSON from denoise")
    oos.add_argument("--mask", help="0/1 mask file (default: NA tokens)")
    oos.add_argument("--na-token", default="NA")
    oos.set_defaults(func=cmd_oos)

    simulate = sub.add_parser("simulate", help="dump one synthetic dataset")
    simulate.add_argument("config", help="experiment config (first section used)")
    simulate.add_argument("prefix", help="output prefix for .y/.mask/.x files")
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--na-token", default="NA")
    simulate.set_defaults(func=cmd_simulate)

    bench = sub.add_parser("benchmark", help="run a method-comparison grid")
    bench.add_argument("config", help="experiment config file")
    bench.add_argument("output", help="where to write the results table")
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--seed", type=int, default=None)
    timings = bench.add_mutually_exclusive_group()
    timings.add_argument(
        "--timings", dest="timings", action="store_true", default=True
    )
    timings.add_argument(
        "--no-timings",
        dest="timings",
        action="store_false",
        help="write 0 in the seconds column for byte-identical reruns",
    )
    bench.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"eblp: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ShapeError as exc:
        print(f"eblp: input mismatch: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateCoordinateError as exc:
        print(f"eblp: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (RankError, SpectrumDomainError, NotFittedError) as exc:
        print(f"eblp: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (np.linalg.LinAlgError, EblpError, ValueError) as exc:
        print(f"eblp: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
