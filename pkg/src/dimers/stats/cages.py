"""Cages on 2-D lattice boxes.

A cage around the horizontal segment ``I = {(r, c), ..., (r, c+3)}`` is the
event that the 14 perimeter sites of the enclosing 6x3 rectangle are covered
by 7 dimers lying on the perimeter, all of which wake before every edge
touching ``I``. The interior then evolves as an isolated 4-vertex path.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .. import _kernels as K
from ..engine import Configuration, WakeupAssignment
from ..graphs import Graph, lattice_box
from .core import EstimateWithCI, mean_estimate, replicate

INTERIOR = 4


@dataclass(frozen=True, eq=False)
class CageTable:
    """All candidate cages of a graph, one row per interior segment."""

    anchors: np.ndarray  # (Q, 2) coordinates of the leftmost interior site
    frame: np.ndarray  # (Q, 14) frame-cycle edge ids in cycle order
    interior_edges: np.ndarray  # (Q, 13)
    interior_vertices: np.ndarray  # (Q, 4)
    ring: np.ndarray  # (Q, 22) sites at sup-distance 1 outside the 6x3 box


def _perimeter(r: int, c: int) -> list[tuple[int, int]]:
    top = [(r - 1, c - 1 + k) for k in range(6)]
    bottom = [(r + 1, c + 4 - k) for k in range(6)]
    return top + [(r, c + 4)] + bottom + [(r, c - 1)]


@functools.lru_cache(maxsize=16)
def _table(g: Graph) -> CageTable:
    if g.shape is None or len(g.shape) != 2:
        raise ValueError("cages are defined on 2-D lattice boxes only")
    rows, cols = g.shape
    if g.periodic:
        if min(rows, cols) < 8:
            raise ValueError("periodic box must have side >= 8 for cages")
        anchors = [(r, c) for r in range(rows) for c in range(cols)]
    else:
        anchors = [(r, c) for r in range(1, rows - 1) for c in range(1, cols - 4)]
    frame, inner_e, inner_v, ring = [], [], [], []
    for r, c in anchors:
        per = [g.vertex_at(p) for p in _perimeter(r, c)]
        frame.append([g.edge_between(per[k], per[(k + 1) % 14]) for k in range(14)])
        iv = [g.vertex_at((r, c + k)) for k in range(INTERIOR)]
        inner_v.append(iv)
        inner_e.append(sorted({int(e) for v in iv for e in g.incident_edges(v)}))
        box = [(r + dr, c + dc) for dr in range(-2, 3) for dc in range(-2, 6)
               if abs(dr) == 2 or dc in (-2, 5)]
        ring.append([g.vertex_at(p) if g.periodic or (0 <= p[0] < rows and 0 <= p[1] < cols)
                     else -1 for p in box])
    as_arr = lambda x: np.asarray(x, dtype=np.int64).reshape(len(anchors), -1)
    return CageTable(np.asarray(anchors, dtype=np.int64).reshape(-1, 2), as_arr(frame),
                     as_arr(inner_e), as_arr(inner_v), as_arr(ring))


@dataclass(frozen=True)
class CageScan:
    count: int
    locations: list[tuple[int, int]]
    interior_monomers: list[int]


def _scan(g: Graph, c: Configuration, w: WakeupAssignment):
    t = _table(g)
    hits, counts = K.cage_hits(t.frame, t.interior_edges, t.interior_vertices,
                               c.placed_mask, w.rank, c.covered)
    return t, hits, counts


def cage_scan(g: Graph, c: Configuration, w: WakeupAssignment) -> CageScan:
    """Locate all caged interior segments, reported by their leftmost site."""
    t, hits, counts = _scan(g, c, w)
    locs = [tuple(int(x) for x in t.anchors[q]) for q in hits]
    return CageScan(len(hits), locs, counts.tolist())


def _ring_monomers(t: CageTable, hits, c: Configuration) -> np.ndarray:
    ring = t.ring[hits]
    mono = c.monomer
    return np.where(ring >= 0, mono[np.maximum(ring, 0)], False).sum(axis=1)


@dataclass
class CageStudy:
    density: EstimateWithCI
    caged: int
    law: dict[int, EstimateWithCI]
    per_cage_variance: float
    independence_p: float | None
    interior_counts: np.ndarray
    ring_counts: np.ndarray

    def to_dict(self) -> dict:
        return {"density": self.density.to_dict(), "caged_samples": self.caged,
                "interior_law": {str(k): v.to_dict() for k, v in self.law.items()},
                "per_cage_variance": self.per_cage_variance,
                "independence_p": self.independence_p}


def independence_test(interior, ring, min_expected: float = 5.0) -> float | None:
    """Chi-square p-value for independence of the interior monomer count and
    the outside ring count. Ring counts are pooled from the top until every
    expected cell is at least ``min_expected``; ``None`` if fewer than two
    columns or rows survive."""
    interior = np.asarray(interior)
    ring = np.asarray(ring)
    rows = np.unique(interior)
    if len(rows) < 2:
        return None
    top = int(ring.max()) if len(ring) else 0
    while top > 0:
        binned = np.minimum(ring, top)
        table = np.array([[np.sum((interior == a) & (binned == b)) for b in range(top + 1)]
                          for a in rows])
        table = table[:, table.sum(axis=0) > 0]
        if table.shape[1] >= 2:
            expected = np.outer(table.sum(1), table.sum(0)) / table.sum()
            if expected.min() >= min_expected:
                return float(sps.chi2_contingency(table, correction=False)[1])
        top -= 1
    return None


def _summarize(per_site, interior, ring, seed) -> CageStudy:
    density = mean_estimate(per_site, seed)
    m = len(interior)
    law = {}
    for k in (0, 2):
        p = float(np.mean(interior == k)) if m else 0.0
        se = float(np.sqrt(p * (1 - p) / (m - 1))) if m > 1 else 0.0
        law[k] = EstimateWithCI(p, se, m, seed)
    var = float(interior.var(ddof=1)) if m > 1 else float("nan")
    return CageStudy(density, m, law, var, independence_test(interior, ring), interior, ring)


def _cage_runs(g: Graph, reps: int, seed: int, threads, first_stream: int = 0):
    def per_rep(w, c):
        t, hits, counts = _scan(g, c, w)
        ring = _ring_monomers(t, hits, c) if len(hits) else np.zeros(0, dtype=np.int64)
        return len(hits), counts, ring

    out = replicate(g, reps, seed, per_rep, threads, first_stream)
    per_site = [h / g.vertex_count for h, _, _ in out]
    interior = np.concatenate([o[1] for o in out]).astype(np.int64)
    ring = np.concatenate([o[2] for o in out]).astype(np.int64)
    return per_site, interior, ring


def cage_density_estimate(side: int, reps: int, seed: int, threads=None,
                          graph: Graph | None = None) -> CageStudy:
    """Cages per site on the ``side x side`` torus, plus the law of caged
    interiors, their variance and an independence test against the
    monomer count in the ring just outside each cage footprint."""
    g = graph if graph is not None else lattice_box(2, side, "periodic")
    if reps < 2:
        raise ValueError("reps must be >= 2")
    _table(g)
    return _summarize(*_cage_runs(g, reps, seed, threads), seed)


def cage_study_until(side: int, min_caged: int, seed: int, threads=None,
                     chunk: int = 50_000, max_reps: int = 10**8) -> CageStudy:
    """Like :func:`cage_density_estimate`, but keeps adding chunks of
    replications (streams ``0, 1, 2, ...`` in order) until at least
    ``min_caged`` cages have been seen."""
    g = lattice_box(2, side, "periodic")
    _table(g)
    per_site, interior, ring = [], [], []
    done = 0
    while sum(len(x) for x in interior) < min_caged:
        if done >= max_reps:
            raise RuntimeError(f"fewer than {min_caged} cages in {done} replications")
        a, b, c = _cage_runs(g, chunk, seed, threads, first_stream=done)
        per_site += a
        interior.append(b)
        ring.append(c)
        done += chunk
    return _summarize(per_site, np.concatenate(interior), np.concatenate(ring), seed)
