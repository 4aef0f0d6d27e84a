"""Covariance decay, the variance constant and normality of box sums for the
monomer field ``X_v`` on lattice boxes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats as sps

from ..engine import stream_generator
from ..graphs import Graph
from .core import EstimateWithCI, as_graph, jackknife_variance, replicate

SIGMA2_CUTOFF = 1e-12
JITTER_STREAM = 2**63  # never used by a replication
AD_LEVEL_INDEX = 4  # scipy.stats.anderson critical values: 15, 10, 5, 2.5, 1 %


def _displacement_geometry(g: Graph):
    """Per-displacement graph distance and ordered-pair counts in FFT layout."""
    if g.shape is None:
        raise ValueError("covariance needs a lattice box (path, cycle or lattice)")
    shape = g.shape
    if g.periodic:
        axes = [np.minimum(np.arange(L), L - np.arange(L)) for L in shape]
        fshape = shape
    else:
        axes = [np.abs(np.fft.fftfreq(2 * L, 1 / (2 * L))).astype(int) for L in shape]
        fshape = tuple(2 * L for L in shape)
    dist = np.zeros(fshape, dtype=np.int64)
    for k, a in enumerate(axes):
        view = [1] * len(shape)
        view[k] = -1
        dist = dist + a.reshape(view)
    if g.periodic:
        pairs = np.full(fshape, float(g.vertex_count))
    else:
        pairs = np.ones(fshape)
        for k, L in enumerate(shape):
            view = [1] * len(shape)
            view[k] = -1
            pairs = pairs * np.maximum(L - axes[k], 0).reshape(view)
    return fshape, dist, pairs


def _autocorr(y: np.ndarray, fshape) -> np.ndarray:
    axes = tuple(range(len(fshape)))
    f = np.fft.rfftn(y, s=fshape, axes=axes)
    return np.fft.irfftn(f * np.conj(f), s=fshape, axes=axes)


@dataclass(frozen=True)
class CovarianceCurve:
    separations: list[int]
    covariances: list[EstimateWithCI]
    bounds: list[float]
    sigma2: EstimateWithCI
    sigma2_radius: int
    density: float


def _sigma2_radius(g: Graph, cap: int) -> int:
    d = g.degree_bound
    r = 0
    while d**r / math.factorial(r) >= SIGMA2_CUTOFF:
        r += 1
    return min(r, cap)


def _max_valid_sep(g: Graph) -> int:
    L = min(g.shape)
    return (L - 1) // 2 if g.periodic else L - 1


def covariance_curve(graph: Graph | str, reps: int, seed: int, max_sep: int,
                     threads=None) -> CovarianceCurve:
    """Empirical ``Cov(X_u, X_v)`` against graph distance ``r = |u - v|``,
    averaged over all ordered pairs at that distance, plus the truncated
    covariance sum ``sigma^2`` over ``|rho| <= R`` (``R`` the first radius with
    ``d**R / R! < 1e-12``, capped by the box).

    Periodic boxes are centered with the pooled density (one pass); free boxes
    with per-site pooled means, which needs a second pass over the same
    streams. Standard errors come from per-replication spread.
    """
    g = as_graph(graph)
    if reps < 2:
        raise ValueError("reps must be >= 2")
    if not 0 <= max_sep <= _max_valid_sep(g):
        raise ValueError(f"max_sep must lie in [0, {_max_valid_sep(g)}] for this box")
    fshape, dist, pairs = _displacement_geometry(g)
    R = _sigma2_radius(g, _max_valid_sep(g))
    window = dist <= R
    n = g.vertex_count
    shape = g.shape
    seps = np.arange(max_sep + 1)
    bins = [dist == r for r in seps]
    bin_pairs = np.array([pairs[b].sum() for b in bins])

    if g.periodic:
        def per_rep(w, c):
            x = c.monomer.reshape(shape).astype(float)
            acf = _autocorr(x, fshape) / n  # mean_v X_v X_{v+rho}
            curve = np.array([acf[b].mean() for b in bins])
            return x.mean(), curve, acf[window].sum(), window.sum()

        out = replicate(g, reps, seed, per_rep, threads)
        m = np.array([o[0] for o in out])
        p = m.mean()
        # mean_v (X_v - p)(X_{v+rho} - p) = acf(rho) - 2 p m + p^2 on a torus
        curves = np.array([o[1] for o in out]) - (2 * p * m - p * p)[:, None]
        sig = np.array([o[2] for o in out]) - window.sum() * (2 * p * m - p * p)
        scale = 1.0
    else:
        site = np.mean(replicate(g, reps, seed, lambda w, c: c.monomer.astype(float),
                                 threads), axis=0)
        p = site.mean()
        valid = pairs > 0

        def per_rep(w, c):
            y = (c.monomer - site).reshape(shape)
            acf = _autocorr(y, fshape)  # sum over ordered pairs at each rho
            curve = np.array([acf[b].sum() for b in bins]) / bin_pairs
            return curve, acf[window & valid].sum() / n

        out = replicate(g, reps, seed, per_rep, threads)
        curves = np.array([o[0] for o in out])
        sig = np.array([o[1] for o in out])
        scale = reps / (reps - 1)  # site means estimated from the same runs

    root = math.sqrt(reps)
    covs = [EstimateWithCI(float(scale * curves[:, k].mean()),
                           float(scale * curves[:, k].std(ddof=1) / root), reps, seed)
            for k in range(len(seps))]
    d = g.degree_bound
    sigma2 = EstimateWithCI(float(scale * sig.mean()), float(scale * sig.std(ddof=1) / root),
                            reps, seed)
    return CovarianceCurve(seps.tolist(), covs, [d**int(r) / math.factorial(int(r)) for r in seps],
                           sigma2, R, float(p))


def sigma2_estimate(graph: Graph | str, reps: int, seed: int, threads=None) -> EstimateWithCI:
    """``sum_rho Cov(X_0, X_rho)`` truncated where the radius tail bound
    drops below ``1e-12``."""
    return covariance_curve(graph, reps, seed, 0, threads).sigma2


@dataclass
class CLTReport:
    reps: int
    sigma2: EstimateWithCI
    skewness: float
    excess_kurtosis: float
    ad_statistic: float
    ad_critical: float
    passed: bool
    normalized: np.ndarray = field(repr=False)
    lattice_span: int = 1

    def to_dict(self) -> dict:
        return {"reps": self.reps, "sigma2": self.sigma2.to_dict(),
                "skewness": self.skewness, "excess_kurtosis": self.excess_kurtosis,
                "ad_statistic": self.ad_statistic, "ad_critical_1pct": self.ad_critical,
                "lattice_span": self.lattice_span,
                "skew_ok": abs(self.skewness) < 0.25,
                "kurtosis_ok": abs(self.excess_kurtosis) < 0.5,
                "ad_ok": self.ad_statistic < self.ad_critical, "passed": self.passed}


class DegenerateVariance(ArithmeticError):
    pass


def lattice_span(totals) -> int:
    """Largest integer step shared by all pairwise differences (0 if constant)."""
    t = np.asarray(totals, dtype=np.int64)
    return int(np.gcd.reduce(np.abs(t - t[0]))) if len(t) else 0


def normalized_sums(totals: np.ndarray, n_sites: int) -> np.ndarray:
    """``sqrt(|V|) * S`` per replication, each centered with the pooled mean
    of the other replications."""
    totals = np.asarray(totals, dtype=float)
    reps = len(totals)
    loo = (totals.sum() - totals) / ((reps - 1) * n_sites)
    return (totals - n_sites * loo) / math.sqrt(n_sites)


def clt_check(graph: Graph | str, reps: int, seed: int, threads=None,
              sampler: Callable[[int], np.ndarray] | None = None) -> CLTReport:
    """Normality of box sums: ``|skew| < 0.25``, ``|excess kurtosis| < 0.5``
    and an Anderson-Darling test not rejecting at 1 %.

    ``sampler(i)``, if given, replaces the simulated field of replication
    ``i`` (used to feed a control field through the same harness).
    """
    g = as_graph(graph)
    if reps < 500:
        raise ValueError("reps must be >= 500")
    if sampler is None:
        totals = np.array(replicate(g, reps, seed, lambda w, c: c.monomer_count, threads))
    else:
        totals = np.array([int(np.sum(sampler(i))) for i in range(reps)])
    # Totals live on a lattice (even on an even torus), which an EDF test
    # detects at this sample size; spreading each value uniformly over its
    # lattice cell is the usual continuity correction.
    span = lattice_span(totals)
    jitter = stream_generator(seed, JITTER_STREAM).uniform(-span / 2, span / 2, len(totals))
    z = normalized_sums(totals + jitter, g.vertex_count)
    var, se = jackknife_variance(z)
    sigma2 = EstimateWithCI(var, se, reps, seed)
    if not sigma2.excludes_zero(0.99):
        raise DegenerateVariance("variance CI includes 0; refusing to normalize")
    u = z / math.sqrt(var)
    skew = float(sps.skew(u))
    kurt = float(sps.kurtosis(u))
    ad = sps.anderson(u, "norm")
    crit = float(ad.critical_values[AD_LEVEL_INDEX])
    passed = bool(abs(skew) < 0.25 and abs(kurt) < 0.5 and ad.statistic < crit)
    return CLTReport(reps, sigma2, skew, kurt, float(ad.statistic), crit, passed, u, span)


def bernoulli_sampler(n_sites: int, p: float, seed: int) -> Callable[[int], np.ndarray]:
    """I.i.d. Bernoulli(p) control field; replication ``i`` uses stream ``i``."""
    return lambda i: stream_generator(seed, i).random(n_sites) < p
