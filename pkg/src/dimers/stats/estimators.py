from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from ..engine import _words, dependence_radii, stream_generator, truncated_indicators, vertex_radii
from ..graphs import Graph
from .core import EstimateWithCI, as_graph, jackknife_variance, mean_estimate, replicate


def density_estimate(graph: Graph | str, reps: int, seed: int, threads=None) -> EstimateWithCI:
    """Mean fraction of uncovered vertices over ``reps`` independent runs."""
    g = as_graph(graph)
    if reps < 2:
        raise ValueError("reps must be >= 2")
    fr = replicate(g, reps, seed, lambda w, c: c.monomer_count / g.vertex_count, threads)
    return mean_estimate(fr, seed)


def monomer_counts(graph: Graph | str, reps: int, seed: int, threads=None) -> np.ndarray:
    g = as_graph(graph)
    return np.array(replicate(g, reps, seed, lambda w, c: c.monomer_count, threads),
                    dtype=np.int64)


def variance_per_site_estimate(graph: Graph | str, reps: int, seed: int,
                               threads=None) -> EstimateWithCI:
    """``Var(total uncovered) / |V|`` with a jackknife standard error."""
    g = as_graph(graph)
    if reps < 30:
        raise ValueError("reps must be >= 30")
    var, se = jackknife_variance(monomer_counts(g, reps, seed, threads))
    return EstimateWithCI(var / g.vertex_count, se / g.vertex_count, reps, seed)


BLOCK = 1 << 16


@nb.njit(cache=True, nogil=True)
def _reversed_hits(n, count, words):
    # Fisher-Yates as in the engine, one permutation per replication; a hit is
    # the order (e_n, ..., e_1), i.e. ranks strictly decreasing along the path.
    hits = 0
    k = 0
    m = len(words)
    low = np.uint64(0xFFFFFFFF)
    perm = np.empty(n, dtype=np.int64)
    for _ in range(count):
        for i in range(n):
            perm[i] = i
        for i in range(n - 1, 0, -1):
            s = np.uint64(i + 1)
            while True:
                if k >= m:
                    return -1
                prod = np.uint64(words[k]) * s
                k += 1
                if (prod & low) >= (np.uint64(4294967296) - s) % s:
                    break
            j = np.int64(prod >> np.uint64(32))
            t = perm[i]
            perm[i] = perm[j]
            perm[j] = t
        ok = True
        for i in range(n):
            if perm[i] != n - 1 - i:
                ok = False
                break
        if ok:
            hits += 1
    return hits


def monotone_path_probability_mc(n: int, reps: int, seed: int) -> EstimateWithCI:
    """Fraction of replications in which a fixed ``n``-edge path has strictly
    decreasing wakeup ranks.

    Replications are drawn in blocks of ``2**16``, block ``b`` on stream ``b``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if reps < 2:
        raise ValueError("reps must be >= 2")
    hits = 0
    for b, start in enumerate(range(0, reps, BLOCK)):
        count = min(BLOCK, reps - start)
        rng = stream_generator(seed, b)
        words = _words(rng.bit_generator, count * n // 2 + 64)
        while True:
            h = _reversed_hits(n, count, words)
            if h >= 0:
                break
            words = np.concatenate([words, _words(rng.bit_generator, 64)])
        hits += h
    p = hits / reps
    return EstimateWithCI(p, math.sqrt(p * (1 - p) / (reps - 1)), reps, seed)


@dataclass(frozen=True)
class TailRow:
    r: int
    probability: float
    se: float
    bound: float
    exceedances: int


def radius_tail(graph: Graph | str, reps: int, seed: int, r_max: int | None = None,
                threads=None) -> list[TailRow]:
    """Empirical ``P(dependence radius >= r)`` over all edges and replications
    next to the union bound ``d**r / r!`` (``d`` the degree bound).

    Standard errors come from the spread of per-replication tail fractions.
    """
    g = as_graph(graph)
    if reps < 2:
        raise ValueError("reps must be >= 2")
    d = g.degree_bound
    if r_max is None:
        r_max = 1
        while d**r_max / math.factorial(r_max) >= 1e-6:
            r_max += 1
        r_max += 2

    def per_rep(w, c):
        rad = dependence_radii(g, w)
        return np.bincount(np.minimum(rad, r_max + 1), minlength=r_max + 2)

    counts = np.array(replicate(g, reps, seed, per_rep, threads))
    # tail[:, r] = #edges with radius >= r
    tail = counts[:, ::-1].cumsum(axis=1)[:, ::-1]
    frac = tail / g.edge_count
    rows = []
    for r in range(1, r_max + 1):
        rows.append(TailRow(r, float(frac[:, r].mean()),
                            float(frac[:, r].std(ddof=1) / math.sqrt(reps)),
                            d**r / math.factorial(r), int(tail[:, r].sum())))
    return rows


@dataclass(frozen=True)
class StabilizationReport:
    pairs: int
    violations: int
    max_radius: int


def stabilization_check(graph: Graph | str, reps: int, seed: int, threads=None) -> StabilizationReport:
    """For every vertex of every replication, rerun the process on the ball of
    radius ``R_v`` (largest dependence radius at ``v``) and on ``R_v + 1``; a
    violation is any disagreement with the full run."""
    g = as_graph(graph)
    vs = np.arange(g.vertex_count)

    def per_rep(w, c):
        R = vertex_radii(g, w)
        y0 = truncated_indicators(g, w, vs, R)
        y1 = truncated_indicators(g, w, vs, R + 1)
        x = c.monomer
        return int(np.sum((y0 != x) | (y1 != x))), int(R.max())

    out = replicate(g, reps, seed, per_rep, threads)
    return StabilizationReport(reps * g.vertex_count, sum(v for v, _ in out),
                               max(m for _, m in out))
