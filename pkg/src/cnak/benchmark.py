"""Method runner shared by the CLI and the benchmark suites."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from . import _rng, simgen
from ._parallel import ordered_map
from .baselines import DEFAULT_DEPTH, bootstrap_averaging, refine_seeds, rpkm
from .core import DataError, Dataset
from .indices import METHODS as INDEX_METHODS
from .indices import DEFAULT_RESTARTS, Sweep, select
from .pipeline import CnakConfig, cnak_cluster, estimate_k
from .metrics import gs_score
from .report import RunReport, aggregate, quality_metrics, write_csv

CLUSTER_METHODS = ("cnak", "ba", "rpkm", "rs")
SUITES = ("tables", "overlap", "dims", "noise")


@dataclass
class RunOptions:
    k_min: Optional[int] = None
    k_max: int = 10
    trials: Optional[int] = None
    sample_fraction: Union[str, float] = "auto"
    tau: Optional[int] = None
    restarts: int = DEFAULT_RESTARTS
    threads: int = 1
    k: Optional[int] = None
    depth: int = DEFAULT_DEPTH
    samples: int = 10
    B: int = 10
    C: int = 10
    extra: dict = field(default_factory=dict)


def _cnak_config(opts: RunOptions, seed: int) -> CnakConfig:
    return CnakConfig(
        k_min=opts.k_min or 1, k_max=opts.k_max, trials=opts.trials or 50,
        sample_fraction=opts.sample_fraction, seed=seed, tau=opts.tau, threads=opts.threads,
    )


def estimate(data: Dataset, method: str, seed: int, opts: RunOptions) -> RunReport:
    """Predict the number of clusters with CNAK or one of the indices."""
    t0 = time.perf_counter()
    k_true = data.n_true_clusters
    if method == "cnak":
        curve = estimate_k(data, _cnak_config(opts, seed))
        k, curve_dict = curve.argmin_k, curve.to_dict()
        metrics = {}
        params = {"trials": opts.trials or 50, "sample_fraction": opts.sample_fraction,
                  "sample_size": curve.sample_size}
    elif method in INDEX_METHODS:
        extra = {"B": opts.B} if method == "gap" else {"C": opts.C} if method == "cva" else {}
        ic = select(method, data, opts.k_min, opts.k_max, seed=seed, restarts=opts.restarts,
                    threads=opts.threads, **extra)
        k, curve_dict = ic.selected_k, ic.to_dict()
        metrics = {}
        params = {"restarts": opts.restarts, **extra}
    else:
        raise ValueError(f"unknown estimation method {method!r}")
    if k_true is not None and k is not None:
        metrics["gs"] = gs_score(k_true, k)
    return RunReport(method, data.name, k, curve_dict, metrics, time.perf_counter() - t0, seed, params)


def cluster(data: Dataset, method: str, seed: int, opts: RunOptions) -> RunReport:
    """Partition the data; CNAK picks k itself, the baselines need ``opts.k``."""
    t0 = time.perf_counter()
    curve_dict = None
    if method == "cnak":
        curve, res = cnak_cluster(data, _cnak_config(opts, seed))
        curve_dict = curve.to_dict()
        params = {"trials": opts.trials or 50, "sample_fraction": opts.sample_fraction,
                  "sample_size": curve.sample_size}
    else:
        k = opts.k or data.n_true_clusters
        if k is None:
            raise ValueError(f"method {method!r} needs k (no ground truth to take it from)")
        if method == "ba":
            res = bootstrap_averaging(data, k, t=opts.trials or 10, seed=seed, threads=opts.threads)
            params = {"k": k, "trials": opts.trials or 10}
        elif method == "rpkm":
            res = rpkm(data, k, depth=opts.depth, seed=seed)
            params = {"k": k, "depth": opts.depth}
        elif method == "rs":
            res = refine_seeds(data, k, J=opts.samples, seed=seed, threads=opts.threads)
            params = {"k": k, "samples": opts.samples}
        else:
            raise ValueError(f"unknown clustering method {method!r}")
    wall = time.perf_counter() - t0
    metrics = {}
    if data.labels is not None:
        metrics = quality_metrics(data, data.labels, res.labels, data.n_true_clusters, res.k)
    return RunReport(method, data.name, res.k, curve_dict, metrics, wall, seed, params,
                     labels=res.labels.tolist())


def _index_cluster(data: Dataset, method: str, seed: int, opts: RunOptions) -> RunReport:
    """Index estimate plus the metrics of the k-means partition at the chosen k."""
    t0 = time.perf_counter()
    sweep = Sweep(data, seed=seed, restarts=opts.restarts, threads=opts.threads)
    extra = {"B": opts.B} if method == "gap" else {"C": opts.C} if method == "cva" else {}
    ic = select(method, data, opts.k_min, opts.k_max, seed=seed, restarts=opts.restarts,
                threads=opts.threads, sweep=None if method == "cva" else sweep, **extra)
    metrics = {}
    if ic.selected_k is not None and data.labels is not None:
        labels = sweep.result(ic.selected_k).labels
        metrics = quality_metrics(data, data.labels, labels, data.n_true_clusters, ic.selected_k)
    return RunReport(method, data.name, ic.selected_k, ic.to_dict(), metrics,
                     time.perf_counter() - t0, seed, {"restarts": opts.restarts, **extra})


def _suite_jobs(suite: str) -> list:
    """(dataset factory, methods, options) for every benchmark entry."""
    estimators = ["cnak", *INDEX_METHODS]
    baselines = ["ba", "rpkm", "rs"]
    jobs = []
    if suite == "tables":
        for sid in [f"sim{i}" for i in range(1, 10)]:
            jobs.append((lambda s, sid=sid: simgen.generate(sid, s), estimators + baselines,
                         RunOptions(trials=20)))
        jobs.append((lambda s: simgen.generate("sim10", s), ["cnak", "ch", "rpkm"], RunOptions(trials=20)))
    elif suite == "overlap":
        for kind, levels in (("distance", simgen.DIST_LEVELS), ("covariance", simgen.COV_LEVELS)):
            for lv in levels:
                jobs.append((lambda s, kind=kind, lv=lv: simgen.overlap_series(kind, lv, s),
                             estimators + baselines, RunOptions(trials=20)))
    elif suite == "dims":
        for d in (32, 64, 128, 256, 512, 1024):
            tau = 4 if d <= 128 else 3
            jobs.append((lambda s, d=d: simgen.dims_fixture(d, s),
                         ["cnak", "ch", "jump", "hartigan", "curvature", "silhouette"] + baselines,
                         RunOptions(k_max=20, trials=20, tau=tau)))
    elif suite == "noise":
        for level in (3, 10, 30):
            jobs.append((lambda s, level=level: _noisy(simgen.generate("sim2", s), "cov_scale", level, s),
                         ["cnak", *baselines], RunOptions(trials=20)))
        for db in (100, 70, 50, 30):
            jobs.append((lambda s, db=db: _noisy(simgen.dims_fixture(32, s), "snr", db, s),
                         ["cnak", *baselines], RunOptions(k_max=20, trials=20, tau=4)))
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    return jobs


def _noisy(data: Dataset, kind: str, level: float, seed: int) -> Dataset:
    noisy = simgen.add_noise(data, kind, level, _rng.stream(seed, _rng.NOISE))
    tag = f"s{level:g}" if kind == "cov_scale" else f"snr{level:g}dB"
    return Dataset(noisy.points, noisy.labels, f"{data.name}-{tag}")


def run_benchmark(suite: str, seeds: list, out_dir: Union[str, Path], threads: int = 1,
                  methods: Optional[list] = None, trials: Optional[int] = None) -> list:
    """Run every (dataset, method, seed) of a suite; write one JSON report per
    run under ``out_dir/reports`` and the aggregate table to ``out_dir/<suite>.csv``."""
    if not seeds:
        raise ValueError("seed list is empty")
    out = Path(out_dir)
    try:
        (out / "reports").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from None
    tasks = []
    for make, meths, opts in _suite_jobs(suite):
        if trials is not None:
            opts.trials = trials
        for seed in seeds:
            for m in meths:
                if methods is None or m in methods:
                    tasks.append((make, m, seed, opts))

    def run(task):
        make, m, seed, opts = task
        data = make(seed)
        if m == "cnak" or m in CLUSTER_METHODS:
            return cluster(data, m, seed, opts)
        return _index_cluster(data, m, seed, opts)

    reports = ordered_map(run, tasks, threads)
    for r in reports:
        r.save(out / "reports" / f"{r.dataset}_{r.method}_seed{r.seed}.json")
    write_csv(aggregate(reports), out / f"{suite}.csv")
    return reports
