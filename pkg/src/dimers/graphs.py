"""Finite bounded-degree graphs for the dimer placement process.

Vertices are dense integers ``0..vertex_count-1`` and edges get dense ids in
constructor order; every source of randomness downstream is indexed by edge
id. Lattice boxes use row-major coordinates, so vertex ``(c_0, ..., c_{k-1})``
of a box with side ``L`` has id ``sum(c_i * L**(k-1-i))``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph stored as an edge array plus CSR adjacency.

    ``indptr``/``nbr``/``eid`` hold, for vertex ``v``, the neighbors
    ``nbr[indptr[v]:indptr[v+1]]`` and the ids of the connecting edges.
    ``shape``/``periodic`` are set for lattice boxes (paths and cycles
    included) and ``None`` otherwise.
    """

    vertex_count: int
    edges: np.ndarray
    degree_bound: int
    indptr: np.ndarray = field(repr=False)
    nbr: np.ndarray = field(repr=False)
    eid: np.ndarray = field(repr=False)
    shape: tuple[int, ...] | None = None
    periodic: bool = False
    name: str = ""
    eu: np.ndarray = field(init=False, repr=False)
    ev: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        # contiguous endpoint columns for the compiled kernels
        for attr, col in (("eu", 0), ("ev", 1)):
            arr = np.ascontiguousarray(self.edges[:, col])
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int]],
                   degree_bound: int | None = None, **meta) -> "Graph":
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= vertex_count):
            raise ValueError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        keys = {tuple(sorted(map(int, e))) for e in arr}
        if len(keys) != len(arr):
            raise ValueError("duplicate edges are not allowed")

        deg = np.bincount(arr.ravel(), minlength=vertex_count) if arr.size \
            else np.zeros(vertex_count, dtype=np.int64)
        max_deg = int(deg.max()) if vertex_count else 0
        if degree_bound is None:
            degree_bound = max_deg
        elif max_deg > degree_bound:
            raise ValueError(f"vertex degree {max_deg} exceeds bound {degree_bound}")

        indptr = np.zeros(vertex_count + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        nbr = np.empty(2 * len(arr), dtype=np.int64)
        eid = np.empty(2 * len(arr), dtype=np.int64)
        fill = indptr[:-1].copy()
        for k, (a, b) in enumerate(arr):
            nbr[fill[a]], eid[fill[a]] = b, k
            fill[a] += 1
            nbr[fill[b]], eid[fill[b]] = a, k
            fill[b] += 1
        for a in (arr, indptr, nbr, eid):
            a.setflags(write=False)
        return cls(vertex_count, arr, int(degree_bound), indptr, nbr, eid, **meta)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def adjacency(self, v: int) -> list[tuple[int, int]]:
        """``(neighbor, edge_id)`` pairs of vertex ``v``."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return list(zip(self.nbr[lo:hi].tolist(), self.eid[lo:hi].tolist()))

    def incident_edges(self, v: int) -> np.ndarray:
        return self.eid[self.indptr[v]:self.indptr[v + 1]]

    def edge_between(self, u: int, w: int) -> int | None:
        for x, e in self.adjacency(u):
            if x == w:
                return e
        return None

    def distances_from(self, sources: Iterable[int], cutoff: int | None = None) -> np.ndarray:
        """BFS graph distance to the nearest source; ``-1`` if unreached."""
        dist = np.full(self.vertex_count, -1, dtype=np.int64)
        queue = deque()
        for s in sources:
            if dist[s] < 0:
                dist[s] = 0
                queue.append(s)
        while queue:
            v = queue.popleft()
            if cutoff is not None and dist[v] >= cutoff:
                continue
            for x in self.nbr[self.indptr[v]:self.indptr[v + 1]]:
                if dist[x] < 0:
                    dist[x] = dist[v] + 1
                    queue.append(int(x))
        return dist

    def coords(self, v: int) -> tuple[int, ...]:
        if self.shape is None:
            raise ValueError("graph has no lattice coordinates")
        return tuple(int(c) for c in np.unravel_index(v, self.shape))

    def vertex_at(self, coords: Iterable[int]) -> int:
        if self.shape is None:
            raise ValueError("graph has no lattice coordinates")
        c = tuple(coords)
        if self.periodic:
            c = tuple(x % s for x, s in zip(c, self.shape))
        return int(np.ravel_multi_index(c, self.shape))

    def boundary_vertices(self) -> np.ndarray:
        """Vertices of a free lattice box with fewer than ``2*dim`` neighbors.

        These are exactly the vertices where an enclosing larger box attaches
        extra edges.
        """
        if self.shape is None:
            raise ValueError("boundary is defined for lattice boxes only")
        deg = np.diff(self.indptr)
        return np.flatnonzero(deg < 2 * len(self.shape))

    def to_edge_list(self) -> str:
        lines = [f"{self.vertex_count} {self.edge_count}"]
        lines += [f"{a} {b}" for a, b in self.edges.tolist()]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EdgeBall:
    center_edge: int
    radius: int
    vertices: frozenset[int]
    edges: frozenset[int]


def from_edge_list(text: str) -> Graph:
    """Parse the debugging dump written by :meth:`Graph.to_edge_list`."""
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty edge list")
    nv, ne = int(rows[0][0]), int(rows[0][1])
    edges = [(int(a), int(b)) for a, b in rows[1:]]
    if len(edges) != ne:
        raise ValueError(f"header announces {ne} edges, found {len(edges)}")
    return Graph.from_edges(nv, edges)


def path_graph(n: int) -> Graph:
    if n < 0:
        raise ValueError("n must be non-negative")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], 2,
                            shape=(n,), periodic=False, name=f"path:{n}")


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], 2,
                            shape=(n,), periodic=True, name=f"cycle:{n}")


def lattice_box(dim: int, side: int, boundary: str = "free") -> Graph:
    """Nearest-neighbor box ``{0..side-1}^dim``.

    Edges are listed vertex by vertex in row-major order, and for each vertex
    axis by axis towards ``+1``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if boundary not in ("free", "periodic"):
        raise ValueError(f"unknown boundary {boundary!r}")
    periodic = boundary == "periodic"
    if side < 2 or (periodic and side < 3):
        raise ValueError("side must be >= 2 (>= 3 for periodic boxes)")
    shape = (side,) * dim
    n = side ** dim
    ids = np.arange(n).reshape(shape)
    per_axis = []
    for axis in range(dim):
        if periodic:
            other = np.roll(ids, -1, axis=axis)
            src = ids
        else:
            sl = [slice(None)] * dim
            sl[axis] = slice(0, side - 1)
            src = np.full(shape, -1)
            src[tuple(sl)] = ids[tuple(sl)]
            other = np.roll(ids, -1, axis=axis)
        per_axis.append((src.ravel(), other.ravel()))
    edges = []
    for v in range(n):
        for axis in range(dim):
            src, other = per_axis[axis]
            if src[v] >= 0:
                edges.append((v, int(other[v])))
    return Graph.from_edges(n, edges, 2 * dim, shape=shape, periodic=periodic,
                            name=f"lattice:{dim}:{side}:{boundary}")


def regular_tree(degree: int, depth: int) -> Graph:
    """Tree whose root has ``degree`` children and other internal vertices
    ``degree - 1``; leaves sit at distance ``depth``. Ids follow BFS order."""
    if degree < 2 or depth < 0:
        raise ValueError("need degree >= 2 and depth >= 0")
    edges = []
    level = [0]
    nxt_id = 1
    for d in range(depth):
        children = degree if d == 0 else degree - 1
        new_level = []
        for parent in level:
            for _ in range(children):
                edges.append((parent, nxt_id))
                new_level.append(nxt_id)
                nxt_id += 1
        level = new_level
    return Graph.from_edges(nxt_id, edges, degree, name=f"tree:{degree}:{depth}")


def edge_ball(g: Graph, e: int, r: int) -> EdgeBall:
    """Induced subgraph on ``B_r(u) | B_r(v)`` for edge ``e = (u, v)``."""
    if not 0 <= e < g.edge_count:
        raise ValueError(f"invalid edge id {e}")
    if r < 0:
        raise ValueError("radius must be non-negative")
    u, v = (int(x) for x in g.edges[e])
    dist = g.distances_from((u, v), cutoff=r)
    inside = dist >= 0
    verts = frozenset(np.flatnonzero(inside).tolist())
    mask = inside[g.edges[:, 0]] & inside[g.edges[:, 1]]
    return EdgeBall(e, r, verts, frozenset(np.flatnonzero(mask).tolist()))


def parse_graph_spec(spec: str) -> Graph:
    """Build a graph from ``path:N``, ``cycle:N``, ``lattice:DIM:SIDE:BOUNDARY``
    or ``tree:DEGREE:DEPTH``."""
    parts = spec.strip().split(":")
    family, args = parts[0], parts[1:]
    try:
        if family == "path" and len(args) == 1:
            return path_graph(int(args[0]))
        if family == "cycle" and len(args) == 1:
            return cycle_graph(int(args[0]))
        if family == "lattice" and len(args) in (2, 3):
            boundary = args[2] if len(args) == 3 else "free"
            return lattice_box(int(args[0]), int(args[1]), boundary)
        if family == "tree" and len(args) == 2:
            return regular_tree(int(args[0]), int(args[1]))
    except ValueError as exc:
        raise ValueError(f"bad graph spec {spec!r}: {exc}") from None
    raise ValueError(f"bad graph spec {spec!r}")
