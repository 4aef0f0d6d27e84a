"""The finite-box concentration bound for ``S_n`` and an empirical check of it."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..exact1d import expected_monomers
from ..graphs import lattice_box, path_graph
from .core import replicate


def concentration_bound(n: int, dim: int, r: int, eps: float) -> float:
    """Upper bound on ``P(|S_n| > eps)`` for the box of side ``n`` in ``dim``
    dimensions, truncating at radius ``r``.

    ``d = 2*dim`` is the degree bound and the number of residue classes is
    ``r**dim``. The last term is 1 while the tail ``d**r/r!`` still exceeds
    ``eps/3``, which makes the bound vacuous there.
    """
    if n < 1 or r < 1 or dim < 1:
        raise ValueError("n, r and dim must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    d = 2 * dim
    tail = math.exp(r * math.log(d) - math.lgamma(r + 1))
    blocks = (n // r) ** dim
    return (r**dim * math.exp(-((eps / 3) ** 2) * blocks)
            + (3 / eps) * tail + (1.0 if tail > eps / 3 else 0.0))


def default_radius(n: int) -> int:
    return max(1, math.ceil(math.log(n)))


@dataclass(frozen=True)
class BoundRow:
    dim: int
    n: int
    eps: float
    r: int
    bound: float
    reps: int
    exceedances: int
    empirical: float | None
    ok: bool | None

    def to_dict(self) -> dict:
        return asdict(self)


def _centered_sums(dim: int, n: int, reps: int, seed: int, threads) -> np.ndarray:
    """Per-replication ``S_n``; the 1-D path uses its exact mean, boxes the
    leave-one-out pooled mean."""
    g = path_graph(n) if dim == 1 else lattice_box(dim, n, "free")
    counts = np.array(replicate(g, reps, seed, lambda w, c: c.monomer_count, threads),
                      dtype=float)
    size = g.vertex_count
    if dim == 1:
        mean = float(expected_monomers(n))
    else:
        mean = (counts.sum() - counts) / (reps - 1)
    return (counts - mean) / size


def bound_check(dim: int, ns, epss, reps: int, seed: int, threads=None,
                r: int | None = None) -> list[BoundRow]:
    """For each ``(n, eps)`` (with ``r = ceil(log n)`` unless given), evaluate
    the bound and, where it is below 1, the Monte Carlo frequency of
    ``|S_n| > eps``."""
    fixed_r = r
    rows = []
    for n in ns:
        r = default_radius(n) if fixed_r is None else fixed_r
        sums = None
        for eps in epss:
            b = concentration_bound(n, dim, r, eps)
            if b >= 1:
                rows.append(BoundRow(dim, n, eps, r, b, 0, 0, None, None))
                continue
            if sums is None:
                sums = _centered_sums(dim, n, reps, seed, threads)
            exc = int(np.sum(np.abs(sums) > eps))
            rows.append(BoundRow(dim, n, eps, r, b, reps, exc, exc / reps, exc / reps <= b))
    return rows
