"""Wakeup sampling and random sequential dimer placement.

Only the order of the wakeup times matters, so a realization is stored as a
permutation: ``rank[e]`` is the position of edge ``e`` when edges are sorted
by wakeup time, and ``order`` is the inverse (``order[i]`` wakes i-th).

Randomness
----------
Replication ``stream`` under ``seed`` draws from numpy's PCG64 seeded with
``SeedSequence(seed, spawn_key=(stream,))``. Raw 64-bit outputs are split into
two 32-bit words (low half first) and consumed by a Fisher-Yates shuffle with
Lemire's multiply-and-reject bounded draws. Nothing depends on platform endianness or on
which thread runs a stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels as K
from .graphs import Graph

SEED_MAX = 2**64


def stream_generator(seed: int, stream: int) -> np.random.Generator:
    if not 0 <= seed < SEED_MAX:
        raise ValueError("seed must be a 64-bit unsigned integer")
    if stream < 0:
        raise ValueError("stream must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def _words(bitgen: np.random.BitGenerator, count: int) -> np.ndarray:
    raw = bitgen.random_raw(count)
    out = np.empty(2 * count, dtype=np.uint32)
    out[0::2] = raw & np.uint64(0xFFFFFFFF)
    out[1::2] = raw >> np.uint64(32)
    return out


def random_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Fisher-Yates permutation of ``0..n-1`` driven by ``rng``'s raw stream."""
    if n <= 1:
        return np.arange(n)
    words = _words(rng.bit_generator, n // 2 + 8)
    while True:
        perm, used = K.fisher_yates(n, words)
        if used >= 0:
            return perm
        words = np.concatenate([words, _words(rng.bit_generator, 8)])


@dataclass(frozen=True, eq=False)
class WakeupAssignment:
    rank: np.ndarray
    order: np.ndarray
    seed: int | None = None
    stream: int | None = None

    @classmethod
    def from_order(cls, order: Iterable[int], seed=None, stream=None,
                   validate: bool = True) -> "WakeupAssignment":
        order = np.asarray(order if isinstance(order, np.ndarray) else list(order),
                           dtype=np.int64)
        if validate and not np.array_equal(np.bincount(order, minlength=len(order)),
                                           np.ones(len(order), dtype=np.int64)):
            raise ValueError("order must be a permutation of the edge ids")
        return cls(K.inverse_permutation(order), order, seed, stream)

    @classmethod
    def from_ranks(cls, rank: Iterable[int]) -> "WakeupAssignment":
        rank = np.asarray(rank, dtype=np.int64)
        if not np.array_equal(np.sort(rank), np.arange(len(rank))):
            raise ValueError("ranks must be a permutation of 0..E-1")
        return cls.from_order(K.inverse_permutation(rank), validate=False)

    @classmethod
    def from_times(cls, times: np.ndarray) -> "WakeupAssignment":
        """Ranks of real wakeup times; ties go to the smaller edge id."""
        return cls.from_order(np.argsort(np.asarray(times), kind="stable"))

    def __len__(self) -> int:
        return len(self.rank)


def sample_wakeups(g: Graph, seed: int, stream: int = 0) -> WakeupAssignment:
    perm = random_permutation(g.edge_count, stream_generator(seed, stream))
    return WakeupAssignment.from_order(perm, seed, stream, validate=False)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Final state: placed dimers (a maximal matching) and covered vertices."""

    placed_mask: np.ndarray
    covered: np.ndarray

    @property
    def placed(self) -> np.ndarray:
        return np.flatnonzero(self.placed_mask)

    @property
    def monomer(self) -> np.ndarray:
        return ~self.covered

    @property
    def monomer_count(self) -> int:
        return int(len(self.covered) - self.covered.sum())

    def to_json(self, **extra) -> str:
        body = {"placed_edges": self.placed.tolist(),
                "monomer_vertices": np.flatnonzero(self.monomer).tolist()}
        body.update(extra)
        return json.dumps(body, sort_keys=True)


def _check(g: Graph, w: WakeupAssignment) -> None:
    if len(w) != g.edge_count:
        raise ValueError(f"wakeup assignment has {len(w)} edges, graph has {g.edge_count}")


def run_rsa(g: Graph, w: WakeupAssignment) -> Configuration:
    """Wake edges in rank order; place a dimer when both endpoints are free."""
    _check(g, w)
    placed, covered = K.greedy_matching(g.eu, g.ev, w.order, g.vertex_count)
    return Configuration(placed, covered)


def is_maximal_matching(g: Graph, c: Configuration) -> bool:
    eu, ev = g.edges[:, 0], g.edges[:, 1]
    ends = np.concatenate([eu[c.placed_mask], ev[c.placed_mask]])
    if len(np.unique(ends)) != len(ends):
        return False
    cov = np.zeros(g.vertex_count, dtype=bool)
    cov[ends] = True
    if not np.array_equal(cov, c.covered):
        return False
    return bool(np.all(cov[eu] | cov[ev]))


def truncated_indicator(g: Graph, w: WakeupAssignment, v: int, r: int) -> bool:
    """Is ``v`` uncovered when only edges inside its radius-``r`` ball play?"""
    return bool(truncated_indicators(g, w, [v], [r])[0])


def truncated_indicators(g: Graph, w: WakeupAssignment, vertices, radii) -> np.ndarray:
    _check(g, w)
    vertices = np.asarray(vertices, dtype=np.int64)
    radii = np.broadcast_to(np.asarray(radii, dtype=np.int64), vertices.shape).copy()
    if np.any(radii < 0):
        raise ValueError("radius must be non-negative")
    return K.truncated_uncovered(g.eu, g.ev, g.indptr, g.nbr, g.eid,
                                 w.rank, vertices, radii)


def dependence_radius(g: Graph, w: WakeupAssignment, e: int) -> int:
    """Length in edges of the longest monotone path starting at ``e``.

    A monotone path moves from an edge to an earlier-waking edge sharing the
    current exit vertex; the first step may use either endpoint of ``e``.
    Plain memoized depth-first search; :func:`dependence_radii` computes all
    edges at once.
    """
    _check(g, w)
    rank = w.rank
    memo: dict[tuple[int, int], int] = {}

    def longest(f: int, x: int) -> int:
        key = (f, x)
        if key not in memo:
            best = 0
            for y, h in g.adjacency(x):
                if h != f and rank[h] < rank[f]:
                    best = max(best, longest(h, y))
            memo[key] = best + 1
        return memo[key]

    a, b = (int(t) for t in g.edges[e])
    return max(longest(e, a), longest(e, b))


def dependence_radii(g: Graph, w: WakeupAssignment) -> np.ndarray:
    _check(g, w)
    _, radius = K.longest_monotone(g.eu, g.ev, g.indptr, g.eid,
                                   w.order, w.rank)
    return radius


def vertex_radii(g: Graph, w: WakeupAssignment, edge_radii: np.ndarray | None = None) -> np.ndarray:
    """Per vertex, the largest dependence radius among its incident edges
    (0 for isolated vertices). Truncating at this radius reproduces the full
    run's state of the vertex."""
    if edge_radii is None:
        edge_radii = dependence_radii(g, w)
    out = np.zeros(g.vertex_count, dtype=np.int64)
    np.maximum.at(out, g.edges[:, 0], edge_radii)
    np.maximum.at(out, g.edges[:, 1], edge_radii)
    return out


def bulk_mask(g: Graph, w: WakeupAssignment, boundary_vertices) -> np.ndarray:
    """True for vertices whose state cannot depend on anything beyond
    ``boundary_vertices``: no monotone path from an incident edge reaches an
    edge touching the boundary."""
    _check(g, w)
    boundary = np.zeros(g.vertex_count, dtype=np.bool_)
    boundary[np.asarray(list(boundary_vertices), dtype=np.int64)] = True
    hit = K.reaches_boundary(g.eu, g.ev, g.indptr, g.eid,
                             w.order, w.rank, boundary)
    bad = np.zeros(g.vertex_count, dtype=bool)
    bad[g.edges[hit, 0]] = True
    bad[g.edges[hit, 1]] = True
    return ~bad
