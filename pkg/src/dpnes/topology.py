"""Undirected weighted communication graphs for the consensus step.

The weight matrix L has positive symmetric off-diagonal entries on edges and
diagonal entries equal to minus the row sum of the rest, so every row and
column sums to zero.  With this sign convention all eigenvalues are <= 0 and
the second largest one (rho2, negative for a connected graph) measures the
consensus contraction strength.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = ["Topology", "build", "complete", "path", "ring", "second_eigenvalue"]

# Edge indices are 0-based throughout.


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable weighted graph with precomputed spectral data."""

    n: int
    weights: np.ndarray  # the zero-row-sum weight matrix L
    rho2: float

    @property
    def spectral_radius(self) -> float:
        """Largest |eigenvalue| of L; the consensus map I + g*L is
        nonexpansive only while g * spectral_radius <= 2."""
        return float(np.abs(np.linalg.eigvalsh(self.weights)).max())

    def neighbors(self, i: int) -> tuple[int, ...]:
        row = self.weights[i]
        return tuple(j for j in range(self.n) if j != i and row[j] > 0.0)

    def neighbor_weights(self, i: int) -> tuple[tuple[int, float], ...]:
        row = self.weights[i]
        return tuple((j, float(row[j])) for j in range(self.n) if j != i and row[j] > 0.0)


def _connected(n: int, adjacency: dict[int, set[int]]) -> bool:
    if n == 1:
        return True
    seen = {0}
    stack = [0]
    while stack:
        cur = stack.pop()
        for nxt in adjacency.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == n


def build(n: int, edges: Iterable[Sequence[float]]) -> Topology:
    """Build a topology from ``(i, j, weight)`` triples (0-based, i != j).

    Rejects self-loops, nonpositive weights, duplicate edges and disconnected
    graphs.  The diagonal is set to minus the off-diagonal row sum, which
    makes both row and column sums exactly zero.
    """
    if n < 1:
        raise ValueError("need at least one node")
    weights = np.zeros((n, n))
    adjacency: dict[int, set[int]] = {}
    seen: set[tuple[int, int]] = set()
    for edge in edges:
        if len(edge) == 2:
            i, j, w = int(edge[0]), int(edge[1]), 1.0
        else:
            i, j, w = int(edge[0]), int(edge[1]), float(edge[2])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for n={n}")
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        if w <= 0.0:
            raise ValueError(f"edge ({i},{j}) has nonpositive weight {w}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValueError(f"duplicate edge ({i},{j})")
        seen.add(key)
        weights[i, j] = weights[j, i] = w
        adjacency.setdefault(i, set()).add(j)
        adjacency.setdefault(j, set()).add(i)
    if not _connected(n, adjacency):
        raise ValueError("graph is not connected")
    for i in range(n):
        weights[i, i] = -weights[i].sum()
    if n == 1:
        rho2 = 0.0
    else:
        eigs = np.sort(np.linalg.eigvalsh(weights))
        rho2 = float(eigs[-2])
    return Topology(n=n, weights=weights, rho2=rho2)


def second_eigenvalue(topo: Topology) -> float:
    """Second largest eigenvalue of the weight matrix (negative iff connected,
    zero for the single-node graph)."""
    return topo.rho2


def ring(n: int, weight: float = 1.0) -> Topology:
    if n < 3:
        raise ValueError("a ring needs at least 3 nodes")
    return build(n, [(i, (i + 1) % n, weight) for i in range(n)])


def path(n: int, weight: float = 1.0) -> Topology:
    if n < 2:
        raise ValueError("a path needs at least 2 nodes")
    return build(n, [(i, i + 1, weight) for i in range(n - 1)])


def complete(n: int, weight: float = 1.0) -> Topology:
    if n < 2:
        raise ValueError("a complete graph needs at least 2 nodes")
    return build(n, [(i, j, weight) for i in range(n) for j in range(i + 1, n)])
