"""Seeded Monte Carlo experiments writing tidy CSV records.

Replicate ``r`` at leaf count ``n`` always draws from stream
``stream_id(n, r)`` of the master seed, so output does not depend on the
number of worker processes (``MASTLAB_THREADS``).
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .blobify import comb_leaf_count, greedy_comb_scaffold, matched_blob_agreement, matched_intersections
from .bounds import ONE_MINUS_INV_E, mast_lower_bound, mast_upper_bound
from .mast import mast_size
from .random_trees import RngSeed, SameShape, sample_pair, uniform_tree

RECORD_FIELDS = ("experiment", "n", "replicate", "stream_seed", "statistic", "value")
SUMMARY_FIELDS = ("experiment", "n", "statistic", "mean", "stderr", "count")

COMB_GRID = tuple(2 ** e for e in range(4, 12))
SANDWICH_GRID = (64, 256, 1024)


class FitError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    n_values: Sequence[int]
    replicates: int = 1000
    seed: int = 1
    k: int | None = None  # None: ceil(sqrt(n))
    lam: float = 4.0
    workers: int | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not self.n_values:
            raise ValueError("n_values must be non-empty")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("n_values must be strictly increasing")

    def k_for(self, n: int) -> int:
        return self.k if self.k is not None else math.ceil(math.sqrt(n))


@dataclass(frozen=True)
class ExperimentRecord:
    experiment: str
    n: int
    replicate: int
    stream_seed: int
    statistic: str
    value: float

    def row(self):
        return (self.experiment, self.n, self.replicate, self.stream_seed,
                self.statistic, _fmt(self.value))


@dataclass(frozen=True)
class SummaryRow:
    experiment: str
    n: int
    statistic: str
    mean: float
    stderr: float
    count: int

    def row(self):
        return (self.experiment, self.n, self.statistic, _fmt(self.mean),
                _fmt(self.stderr), self.count)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    points: int


@dataclass
class ExperimentResult:
    records: list[ExperimentRecord]
    summary: list[SummaryRow] = field(default_factory=list)
    fit: FitResult | None = None


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    value = float(value)
    return str(int(value)) if value.is_integer() and abs(value) < 2 ** 53 else repr(value)


def stream_id(n: int, replicate: int) -> int:
    return (n << 32) | replicate


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("MASTLAB_THREADS")
    return max(1, int(env)) if env else 1


# -- per-replicate kernels (module level so they pickle) ---------------------

def _comb_replicate(args):
    n, k, seed = args
    v = greedy_comb_scaffold(uniform_tree(n, seed), k)
    full, conservative = comb_leaf_count(v, k)
    return [("comb_conservative", conservative), ("comb_full", full)]


def _same_shape_pair(n, seed):
    rng = seed.generator()
    base = uniform_tree(n, rng)
    return sample_pair(SameShape(base), rng)


def _sandwich_replicate(args):
    n, k, seed = args
    t1, t2 = _same_shape_pair(n, seed)
    return [("mast", mast_size(t1, t2)),
            ("witness", len(matched_blob_agreement(t1, t2, k)))]


def _intersect_replicate(args):
    n, k, seed = args
    t1, t2 = _same_shape_pair(n, seed)
    pairs = matched_intersections(t1, t2, k)
    hits = sum(1 for x in pairs if x)
    return [("blob_pairs", len(pairs)), ("intersecting", hits),
            ("fraction", hits / len(pairs) if pairs else 0.0)]


def _run(config: ExperimentConfig, kernel: Callable) -> list[ExperimentRecord]:
    jobs = []
    for n in config.n_values:
        k = config.k_for(n)
        for r in range(config.replicates):
            jobs.append((n, r, (n, k, RngSeed(config.seed, stream_id(n, r)))))
    workers = worker_count(config.workers)
    payloads = [job[2] for job in jobs]
    if workers == 1:
        results = map(kernel, payloads)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(kernel, payloads, chunksize=max(1, len(jobs) // (8 * workers)))
    records = []
    for (n, r, payload), stats in zip(jobs, results):
        for name, value in stats:
            records.append(ExperimentRecord(config.name, n, r, payload[2].stream, name, value))
    if workers != 1:
        pool.shutdown()
    return records


def summarize(records: Iterable[ExperimentRecord]) -> list[SummaryRow]:
    """Mean and standard error per (experiment, n, statistic), in first-seen order."""
    groups: dict[tuple, list[float]] = {}
    for rec in records:
        # summarize the values exactly as they are written to the CSV
        groups.setdefault((rec.experiment, rec.n, rec.statistic), []).append(float(_fmt(rec.value)))
    out = []
    for (exp, n, stat), values in groups.items():
        count = len(values)
        mean = math.fsum(values) / count
        if count > 1:
            var = math.fsum((x - mean) ** 2 for x in values) / (count - 1)
            stderr = math.sqrt(var / count)
        else:
            stderr = 0.0
        out.append(SummaryRow(exp, n, stat, mean, stderr, count))
    return out


def linear_fit(points: Sequence[tuple[float, float]]) -> FitResult:
    """Ordinary least squares line through ``points``."""
    if len(points) < 2:
        raise FitError("need at least two points")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    mx = math.fsum(xs) / len(xs)
    my = math.fsum(ys) / len(ys)
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise FitError("all x values are equal")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    syy = math.fsum((y - my) ** 2 for y in ys)
    slope = sxy / sxx
    intercept = my - slope * mx
    r2 = 1.0 if syy == 0 else sxy * sxy / (sxx * syy)
    return FitResult(slope, intercept, r2, len(points))


def run_comb_slope(config: ExperimentConfig) -> ExperimentResult:
    """Greedy comb scaffold size on uniform trees; log2-log2 slope of the mean
    conservative count against the leaf count."""
    if len(config.n_values) < 2:
        raise FitError("need at least two leaf counts to fit a slope")
    records = _run(config, _comb_replicate)
    summary = summarize(records)
    points = [(math.log2(row.n), math.log2(row.mean)) for row in summary
              if row.statistic == "comb_conservative"]
    if any(not math.isfinite(y) for _, y in points):
        raise FitError("a mean comb count is zero; cannot take logarithms")
    return ExperimentResult(records, summary, linear_fit(points))


def run_mast_sandwich(config: ExperimentConfig) -> ExperimentResult:
    """Exact MAST and the matched-blob witness for same-shape pairs, with the
    lower and upper bound curves per leaf count."""
    mast_upper_bound(1, config.lam)  # validate lambda before any work
    records = _run(config, _sandwich_replicate)
    summary = summarize(records)
    for n in config.n_values:
        summary.append(SummaryRow(config.name, n, "lower_bound", mast_lower_bound(n), 0.0, 1))
        summary.append(SummaryRow(config.name, n, "upper_bound", mast_upper_bound(n, config.lam), 0.0, 1))
    return ExperimentResult(records, summary)


def run_blob_intersect(config: ExperimentConfig) -> ExperimentResult:
    """Fraction of aligned blob pairs of same-shape trees that share a leaf."""
    records = _run(config, _intersect_replicate)
    summary = summarize(records)
    for n in config.n_values:
        pairs = sum(r.value for r in records if r.n == n and r.statistic == "blob_pairs")
        hits = sum(r.value for r in records if r.n == n and r.statistic == "intersecting")
        summary.append(SummaryRow(config.name, n, "pooled_frequency",
                                  hits / pairs if pairs else 0.0, 0.0, pairs))
        summary.append(SummaryRow(config.name, n, "floor", ONE_MINUS_INV_E, 0.0, 1))
    return ExperimentResult(records, summary)


EXPERIMENTS = {
    "comb-slope": (run_comb_slope, COMB_GRID),
    "mast-sandwich": (run_mast_sandwich, SANDWICH_GRID),
    "blob-intersect": (run_blob_intersect, (1024,)),
}


def records_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    writer.writerows(rec.row() for rec in records)
    return buf.getvalue()


def summary_csv(rows: Iterable[SummaryRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    writer.writerows(row.row() for row in rows)
    return buf.getvalue()
