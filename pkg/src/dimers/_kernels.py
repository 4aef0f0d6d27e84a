"""Compiled inner loops. All kernels release the GIL and touch only their
arguments, so replications can run on worker threads."""

from __future__ import annotations

import numba as nb
import numpy as np

_jit = nb.njit(cache=True, nogil=True)


@_jit
def fisher_yates(n, words):
    """Uniform permutation of ``0..n-1`` from a buffer of uint32 words.

    Position ``i`` (from the top) swaps with ``j`` uniform on ``0..i``, drawn
    with Lemire's multiply-and-reject method (exactly uniform; a rejection
    costs one extra word and has probability below ``n / 2**32``). Returns
    ``(perm, words_used)``; ``words_used == -1`` means the buffer ran dry.
    """
    perm = np.arange(n)
    k = 0
    m = len(words)
    low = np.uint64(0xFFFFFFFF)
    for i in range(n - 1, 0, -1):
        s = np.uint64(i + 1)
        if k >= m:
            return perm, -1
        prod = np.uint64(words[k]) * s
        k += 1
        if (prod & low) < s:
            thresh = (np.uint64(4294967296) - s) % s
            while (prod & low) < thresh:
                if k >= m:
                    return perm, -1
                prod = np.uint64(words[k]) * s
                k += 1
        j = np.int64(prod >> np.uint64(32))
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
    return perm, k


@_jit
def inverse_permutation(perm):
    inv = np.empty_like(perm)
    for i in range(len(perm)):
        inv[perm[i]] = i
    return inv


@_jit
def greedy_matching(eu, ev, order, nv):
    placed = np.zeros(len(eu), dtype=np.bool_)
    covered = np.zeros(nv, dtype=np.bool_)
    for e in order:
        a = eu[e]
        b = ev[e]
        if not covered[a] and not covered[b]:
            covered[a] = True
            covered[b] = True
            placed[e] = True
    return placed, covered


@_jit
def longest_monotone(eu, ev, indptr, eid, order, rank):
    """Longest monotone walk starting at each edge.

    ``half[e, s]`` is the longest walk that starts with ``e`` and leaves it
    through endpoint ``s`` (0 -> ``eu[e]``, 1 -> ``ev[e]``); each step moves
    to an earlier edge at the current exit vertex and exits through that
    edge's far end. Edges are processed in rank order so every earlier edge is
    already final.
    """
    ne = len(eu)
    half = np.zeros((ne, 2), dtype=np.int32)
    radius = np.zeros(ne, dtype=np.int32)
    for e in order:
        re = rank[e]
        for s in range(2):
            x = eu[e] if s == 0 else ev[e]
            best = 0
            for p in range(indptr[x], indptr[x + 1]):
                f = eid[p]
                if f != e and rank[f] < re:
                    sf = 1 if eu[f] == x else 0
                    if half[f, sf] > best:
                        best = half[f, sf]
            half[e, s] = best + 1
        radius[e] = max(half[e, 0], half[e, 1])
    return half, radius


@_jit
def reaches_boundary(eu, ev, indptr, eid, order, rank, boundary):
    """Per edge: does some monotone walk starting at it hit an edge that
    touches a boundary vertex (itself included)?"""
    ne = len(eu)
    half = np.zeros((ne, 2), dtype=np.bool_)
    hit = np.zeros(ne, dtype=np.bool_)
    for e in order:
        touches = boundary[eu[e]] or boundary[ev[e]]
        re = rank[e]
        for s in range(2):
            x = eu[e] if s == 0 else ev[e]
            h = touches
            if not h:
                for p in range(indptr[x], indptr[x + 1]):
                    f = eid[p]
                    if f != e and rank[f] < re:
                        sf = 1 if eu[f] == x else 0
                        if half[f, sf]:
                            h = True
                            break
            half[e, s] = h
        hit[e] = half[e, 0] or half[e, 1]
    return hit


@_jit
def truncated_uncovered(eu, ev, indptr, nbr, eid, rank, vertices, radii):
    """For each query ``(v, r)``: run the greedy process on the subgraph
    induced by the radius-``r`` ball of ``v`` and report whether ``v`` stays
    uncovered."""
    nv = len(indptr) - 1
    dist = np.full(nv, -1, dtype=np.int64)
    covered = np.zeros(nv, dtype=np.bool_)
    queue = np.empty(nv, dtype=np.int64)
    out = np.empty(len(vertices), dtype=np.bool_)
    for q in range(len(vertices)):
        v = vertices[q]
        r = radii[q]
        dist[v] = 0
        queue[0] = v
        head = 0
        tail = 1
        while head < tail:
            x = queue[head]
            head += 1
            if dist[x] >= r:
                continue
            for p in range(indptr[x], indptr[x + 1]):
                y = nbr[p]
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    queue[tail] = y
                    tail += 1
        # induced edges, each counted once from its lower endpoint
        cnt = 0
        for i in range(tail):
            x = queue[i]
            for p in range(indptr[x], indptr[x + 1]):
                if nbr[p] > x and dist[nbr[p]] >= 0:
                    cnt += 1
        ball_edges = np.empty(cnt, dtype=np.int64)
        ball_ranks = np.empty(cnt, dtype=np.int64)
        cnt = 0
        for i in range(tail):
            x = queue[i]
            for p in range(indptr[x], indptr[x + 1]):
                if nbr[p] > x and dist[nbr[p]] >= 0:
                    ball_edges[cnt] = eid[p]
                    ball_ranks[cnt] = rank[eid[p]]
                    cnt += 1
        for i in np.argsort(ball_ranks):
            f = ball_edges[i]
            a = eu[f]
            b = ev[f]
            if not covered[a] and not covered[b]:
                covered[a] = True
                covered[b] = True
        out[q] = not covered[v]
        for i in range(tail):
            dist[queue[i]] = -1
            covered[queue[i]] = False
    return out


@_jit
def cage_hits(frame, interior_edges, interior_vertices, placed, rank, covered):
    """Scan candidate cages.

    Row ``q`` of ``frame`` lists the 14 frame-cycle edges of candidate ``q``
    in cycle order, so the two perfect matchings of the frame are the even
    and the odd positions. A cage needs one of them fully placed with every
    rank below all ranks in ``interior_edges[q]``. Returns the candidate
    indices and the number of uncovered interior vertices of each hit.
    """
    nq = frame.shape[0]
    hits = np.empty(nq, dtype=np.int64)
    counts = np.empty(nq, dtype=np.int64)
    nh = 0
    for q in range(nq):
        for parity in range(2):
            ok = True
            top = -1
            for t in range(parity, 14, 2):
                f = frame[q, t]
                if not placed[f]:
                    ok = False
                    break
                if rank[f] > top:
                    top = rank[f]
            if not ok:
                continue
            for t in range(interior_edges.shape[1]):
                if rank[interior_edges[q, t]] < top:
                    ok = False
                    break
            if ok:
                c = 0
                for t in range(interior_vertices.shape[1]):
                    if not covered[interior_vertices[q, t]]:
                        c += 1
                hits[nh] = q
                counts[nh] = c
                nh += 1
                break
    return hits[:nh], counts[:nh]
