"""Exact law of the uncovered-vertex count on small graphs.

Given the set of still-uncovered vertices, the next dimer that actually gets
placed is uniform over the edges whose endpoints are both uncovered, whatever
the full wakeup permutation looks like. So the process is a Markov chain on
alive-vertex bitmasks and the law follows from a memoized recursion

    f(mask) = mean over placeable (u, v) of f(mask without u, v),

absorbed when no edge is placeable. :func:`permutation_distribution` sums over
all ``|E|!`` wakeup orders instead and exists to cross-check that claim.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Hashable

from .graphs import Graph

MAX_VERTICES = 26


class GraphTooLarge(ValueError):
    pass


def _check(g: Graph, cap: int) -> None:
    if g.vertex_count > min(cap, 63):
        raise GraphTooLarge(
            f"exact oracle is capped at {cap} vertices, graph has {g.vertex_count}")


def _absorption_law(g: Graph, payoff: Callable[[int], Hashable],
                    cap: int = MAX_VERTICES) -> dict:
    """Law of ``payoff(final alive mask)`` as ``{value: Fraction}``."""
    _check(g, cap)
    edge_masks = [(1 << int(a)) | (1 << int(b)) for a, b in g.edges]
    memo: dict[int, dict] = {}

    def solve(mask: int) -> dict:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        live = [m for m in edge_masks if mask & m == m]
        if not live:
            out = {payoff(mask): Fraction(1)}
        else:
            acc: dict = defaultdict(Fraction)
            for m in live:
                for key, p in solve(mask & ~m).items():
                    acc[key] += p
            w = len(live)
            out = {k: p / w for k, p in acc.items()}
        memo[mask] = out
        return out

    return solve((1 << g.vertex_count) - 1)


def exact_distribution(g: Graph, cap: int = MAX_VERTICES) -> dict[int, Fraction]:
    """``{m: P(m vertices stay uncovered)}`` with exact rational weights."""
    law = _absorption_law(g, lambda mask: mask.bit_count(), cap)
    return dict(sorted(law.items()))


def exact_moment(g: Graph, k: int, cap: int = MAX_VERTICES) -> Fraction:
    if k < 0:
        raise ValueError("k must be non-negative")
    return sum((Fraction(m) ** k * p for m, p in exact_distribution(g, cap).items()),
               Fraction(0))


def exact_variance(g: Graph, cap: int = MAX_VERTICES) -> Fraction:
    law = exact_distribution(g, cap)
    mean = sum(m * p for m, p in law.items())
    return sum(m * m * p for m, p in law.items()) - mean * mean


def exact_mgf(g: Graph, lam: float, cap: int = MAX_VERTICES) -> float:
    """``E[exp(lam * X)]`` with ``X`` the number of uncovered vertices."""
    return math.fsum(float(p) * math.exp(lam * m)
                     for m, p in exact_distribution(g, cap).items())


def exact_uncovered_probability(g: Graph, u: int, cap: int = MAX_VERTICES) -> Fraction:
    law = _absorption_law(g, lambda mask: bool(mask >> u & 1), cap)
    return law.get(True, Fraction(0))


def exact_pair_uncovered(g: Graph, u: int, v: int, cap: int = MAX_VERTICES) -> Fraction:
    """``P(u and v both end uncovered)``."""
    if u == v:
        raise ValueError("u and v must differ")
    both = (1 << u) | (1 << v)
    law = _absorption_law(g, lambda mask: mask & both == both, cap)
    return law.get(True, Fraction(0))


def permutation_distribution(g: Graph, max_edges: int = 8) -> dict[int, Fraction]:
    """Same law by brute force over every wakeup order (tiny graphs only)."""
    if g.edge_count > max_edges:
        raise GraphTooLarge(f"permutation summation capped at {max_edges} edges")
    counts: dict[int, int] = defaultdict(int)
    edges = g.edges.tolist()
    total = 0
    for order in itertools.permutations(range(len(edges))):
        covered = [False] * g.vertex_count
        for e in order:
            a, b = edges[e]
            if not covered[a] and not covered[b]:
                covered[a] = covered[b] = True
        counts[covered.count(False)] += 1
        total += 1
    return {m: Fraction(c, total) for m, c in sorted(counts.items())}
