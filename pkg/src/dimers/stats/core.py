"""Replication plumbing shared by the estimators.

Replication ``i`` always uses PRNG stream ``first_stream + i``, and results
are collected in replication order, so every estimator is a deterministic
function of ``(graph, reps, seed)`` whatever the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy import stats as sps

from ..engine import Configuration, WakeupAssignment, run_rsa, sample_wakeups
from ..graphs import Graph, parse_graph_spec

THREADS_ENV = "DIMERS_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def as_graph(graph: Graph | str) -> Graph:
    return parse_graph_spec(graph) if isinstance(graph, str) else graph


@dataclass(frozen=True)
class EstimateWithCI:
    estimate: float
    se: float
    reps: int
    seed: int | None = None

    def __post_init__(self):
        if self.se < 0:
            raise ValueError("standard error must be non-negative")

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        return self.estimate - z * self.se, self.estimate + z * self.se

    def excludes_zero(self, level: float = 0.99) -> bool:
        z = sps.norm.ppf(0.5 + level / 2)
        lo, hi = self.interval(z)
        return lo > 0 or hi < 0

    def within(self, target: float, z: float = 3.0) -> bool:
        return abs(self.estimate - target) <= z * self.se

    def to_dict(self) -> dict:
        return asdict(self)


def mean_estimate(values, seed=None) -> EstimateWithCI:
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 2:
        raise ValueError("need at least 2 replications for a standard error")
    return EstimateWithCI(float(values.mean()), float(values.std(ddof=1) / np.sqrt(n)), n, seed)


def jackknife_variance(values) -> tuple[float, float]:
    """Sample variance of ``values`` and its delete-one jackknife SE."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 3:
        raise ValueError("jackknife needs at least 3 values")
    x = x - x.mean()  # shift for numerical stability; variance is shift invariant
    s1, s2 = x.sum(), (x * x).sum()
    loo_mean = (s1 - x) / (n - 1)
    loo_var = ((s2 - x * x) - (n - 1) * loo_mean**2) / (n - 2)
    var = (s2 - s1 * s1 / n) / (n - 1)
    se = np.sqrt((n - 1) / n * ((loo_var - loo_var.mean()) ** 2).sum())
    return float(var), float(se)


def replicate(g: Graph, reps: int, seed: int,
              fn: Callable[[WakeupAssignment, Configuration], object],
              threads: int | None = None, first_stream: int = 0) -> list:
    """``[fn(w_i, run_rsa(g, w_i)) for i in range(reps)]`` with ``w_i`` drawn
    from stream ``first_stream + i``."""
    threads = default_threads() if threads is None else threads

    def one(i: int):
        w = sample_wakeups(g, seed, first_stream + i)
        return fn(w, run_rsa(g, w))

    if threads <= 1 or reps < 2:
        return [one(i) for i in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(reps)))
