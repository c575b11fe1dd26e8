"""Benchmark campaigns over (method x noise level x replicate) grids.

Experiments are described in an INI-style config file, one section per
experiment::

    [uneven]
    p = 300
    gamma = 0.8
    ell = 10,9,8,7,6,5,4,3,2,1
    rank = 10
    sparsity = dense            ; or sparse:<m>
    sampling = linear:0.1       ; or uniform:<delta>
    noise = white               ; or colored:<kappa>
    sigma_grid = 1,2,4
    replicates = 40
    seed = 42
    methods = eblp,unwhitened,nnrls
    random_mean = true

Grid points run concurrently up to a jobs bound; output rows are ordered
deterministically regardless of scheduling, and every row derives its
data from a seed sequence keyed by (experiment seed, sigma index,
replicate), so methods see identical draws.
"""

from __future__ import annotations

import configparser
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .baselines import NnrlsConfig, nnrls, nnrls_weight_colored, nnrls_weight_white
from .errors import ParseError
from .pipeline import estimated_amse, fit_in_sample
from .simulate import (
    ExperimentConfig,
    NoiseSpec,
    SamplingSpec,
    generate_masks,
    generate_noise,
    rmse,
    simulate_dataset,
)

__all__ = ["BenchmarkExperiment", "parse_benchmark_config", "run_benchmark"]

KNOWN_METHODS = ("eblp", "unwhitened", "nnrls")

_KEYS = {
    "p": True,
    "gamma": True,
    "ell": True,
    "rank": True,
    "sigma_grid": True,
    "replicates": True,
    "seed": True,
    "methods": True,
    "sparsity": False,
    "sampling": False,
    "noise": False,
    "random_mean": False,
    "nnrls_max_iters": False,
    "nnrls_tol": False,
    "weight_replicates": False,
}

# Entropy tag mixed into the seed sequence used for weight calibration so
# it never collides with a (sigma index, replicate) pair.
_WEIGHT_SEED_TAG = 0x57454947


@dataclass(frozen=True)
class BenchmarkExperiment:
    name: str
    config: ExperimentConfig          # noise sigma used as the grid base
    sigma_grid: tuple[float, ...]
    methods: tuple[str, ...]
    rank: int
    nnrls_max_iters: int = 500
    nnrls_tol: float = 1e-7
    weight_replicates: int = 20


def _parse_spec(value: str, kinds: dict[str, bool]) -> tuple[str, float | None]:
    """Parse 'kind' or 'kind:number' where kinds maps kind -> needs value."""
    kind, sep, arg = value.partition(":")
    kind = kind.strip()
    if kind not in kinds:
        raise ParseError(f"unknown kind {kind!r} (expected one of {sorted(kinds)})")
    if kinds[kind]:
        if not sep:
            raise ParseError(f"{kind!r} needs a value, e.g. {kind}:0.5")
        try:
            return kind, float(arg)
        except ValueError as exc:
            raise ParseError(f"bad numeric value in {value!r}") from exc
    if sep:
        raise ParseError(f"{kind!r} takes no value")
    return kind, None


def _floats(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in value.split(",") if tok.strip())
    except ValueError as exc:
        raise ParseError(f"bad numeric list {value!r}") from exc


def parse_benchmark_config(path, seed_override: int | None = None) -> list[BenchmarkExperiment]:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except (OSError, configparser.Error) as exc:
        raise ParseError(f"cannot parse config {path}: {exc}") from exc
    if not parser.sections():
        raise ParseError(f"{path}: no experiment sections")

    experiments = []
    for section in parser.sections():
        items = dict(parser.items(section))
        unknown = sorted(set(items) - set(_KEYS))
        if unknown:
            raise ParseError(f"{path}: [{section}] has unknown keys: {', '.join(unknown)}")
        missing = sorted(k for k, req in _KEYS.items() if req and k not in items)
        if missing:
            raise ParseError(f"{path}: [{section}] is missing keys: {', '.join(missing)}")

        try:
            sampling_kind, sampling_val = _parse_spec(
                items.get("sampling", "uniform:1"), {"uniform": True, "linear": True}
            )
            noise_kind, noise_val = _parse_spec(
                items.get("noise", "white"), {"white": False, "colored": True}
            )
            sparsity_kind, sparsity_val = _parse_spec(
                items.get("sparsity", "dense"), {"dense": False, "sparse": True}
            )
            config = ExperimentConfig(
                p=int(items["p"]),
                gamma=float(items["gamma"]),
                ell=_floats(items["ell"]),
                pc_sparsity=None if sparsity_kind == "dense" else int(sparsity_val),
                sampling=SamplingSpec(sampling_kind, sampling_val),
                noise=NoiseSpec(noise_kind, 1.0, noise_val if noise_val else 1.0),
                replicates=int(items["replicates"]),
                seed=int(items["seed"]) if seed_override is None else seed_override,
                random_mean=items.get("random_mean", "false").strip().lower()
                in ("1", "true", "yes", "on"),
            )
            methods = tuple(m.strip() for m in items["methods"].split(",") if m.strip())
            for m in methods:
                if m not in KNOWN_METHODS:
                    raise ParseError(
                        f"unknown method {m!r} (expected one of {KNOWN_METHODS})"
                    )
            experiment = BenchmarkExperiment(
                name=section,
                config=config,
                sigma_grid=_floats(items["sigma_grid"]),
                methods=methods,
                rank=int(items["rank"]),
                nnrls_max_iters=int(items.get("nnrls_max_iters", 500)),
                nnrls_tol=float(items.get("nnrls_tol", 1e-7)),
                weight_replicates=int(items.get("weight_replicates", 20)),
            )
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(f"{path}: [{section}]: {exc}") from exc
        if not experiment.sigma_grid:
            raise ParseError(f"{path}: [{section}]: empty sigma_grid")
        experiments.append(experiment)
    return experiments


def _nnrls_calibration(exp: BenchmarkExperiment) -> tuple[float | None, np.ndarray | None]:
    """Base regularization weight at sigma = 1 and the column weights.

    Uniform sampling with white noise uses the closed formula per
    replicate (returns None); anything else is calibrated by Monte Carlo
    on masked pure noise, with C^-1 applied for the weighted variant.
    """
    cfg = exp.config
    column_weights = None
    if cfg.sampling.kind == "linear":
        column_weights = np.sqrt(cfg.sampling.column_probabilities(cfg.p))
    if cfg.noise.kind == "white" and column_weights is None:
        return None, None
    base_cfg = replace(cfg, noise=replace(cfg.noise, sigma=1.0))
    n = base_cfg.n
    rng = np.random.default_rng(
        np.random.SeedSequence([base_cfg.seed, _WEIGHT_SEED_TAG])
    )
    w_base = nnrls_weight_colored(
        lambda g: generate_noise(base_cfg, n, g),
        lambda g: generate_masks(base_cfg, n, g),
        replicates=exp.weight_replicates,
        rng=rng,
        column_weights=column_weights,
    )
    return w_base, column_weights


@dataclass(frozen=True)
class _Task:
    experiment: BenchmarkExperiment
    sigma_index: int
    replicate: int
    w_base: float | None
    column_weights: np.ndarray | None
    timings: bool


def _run_task(task: _Task) -> list[dict]:
    exp = task.experiment
    sigma = exp.sigma_grid[task.sigma_index]
    cfg = replace(exp.config, noise=replace(exp.config.noise, sigma=sigma))
    seed = np.random.SeedSequence(
        [exp.config.seed, task.sigma_index, task.replicate]
    )
    data = simulate_dataset(cfg, np.random.default_rng(seed))

    noise_profile = (
        cfg.noise.variance_profile(cfg.p) if cfg.noise.kind == "colored" else None
    )
    rows = []
    for method in exp.methods:
        t0 = time.perf_counter()
        amse_est = float("nan")
        if method == "eblp":
            model, x_hat = fit_in_sample(
                data.dataset, exp.rank, whiten=True, mode="plugin",
                noise_var_diag=noise_profile,
            )
            amse_est = estimated_amse(model)
        elif method == "unwhitened":
            model, x_hat = fit_in_sample(
                data.dataset, exp.rank, whiten=False, mode="plugin"
            )
            amse_est = estimated_amse(model)
        elif method == "nnrls":
            if task.w_base is None:
                w = nnrls_weight_white(
                    sigma, cfg.p, cfg.n, int(data.masks.sum())
                )
            else:
                w = sigma * task.w_base
            result = nnrls(
                data.y,
                data.masks,
                NnrlsConfig(
                    w=w,
                    max_iters=exp.nnrls_max_iters,
                    tol=exp.nnrls_tol,
                    column_weights=task.column_weights,
                ),
            )
            x_hat = result.x_hat
        else:  # pragma: no cover - guarded at parse time
            raise ValueError(f"unknown method {method!r}")
        seconds = time.perf_counter() - t0 if task.timings else 0.0
        rows.append(
            {
                "experiment": exp.name,
                "method": method,
                "sigma": sigma,
                "delta": cfg.sampling.delta,
                "kappa": cfg.noise.kappa,
                "sparsity": "dense" if cfg.pc_sparsity is None else str(cfg.pc_sparsity),
                "replicate": task.replicate,
                "rmse": rmse(x_hat, data.x),
                "seconds": seconds,
                "amse_est": amse_est,
            }
        )
    return rows


def run_benchmark(
    experiments: list[BenchmarkExperiment],
    jobs: int = 1,
    timings: bool = True,
) -> list[dict]:
    """Run every (experiment, sigma, replicate) point and return the rows
    in deterministic order."""
    tasks = []
    for exp in experiments:
        w_base, column_weights = (
            _nnrls_calibration(exp) if "nnrls" in exp.methods else (None, None)
        )
        for sigma_index in range(len(exp.sigma_grid)):
            for replicate in range(exp.config.replicates):
                tasks.append(
                    _Task(exp, sigma_index, replicate, w_base, column_weights, timings)
                )

    if jobs <= 1:
        results = [_run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    return [row for rows in results for row in rows]
