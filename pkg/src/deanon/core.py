"""Fundamental graph, community, and mapping types shared by every solver.

All types are immutable after construction (backing arrays are frozen), so
they are safe to share across threads; the operations below are pure.
Node ids are 0-based internally; file formats are free to use any tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .cost import WeightMatrix


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph held as a dense symmetric boolean adjacency."""

    n: int
    adj: np.ndarray
    edge_count: int = field(init=False)

    def __post_init__(self):
        adj = np.asarray(self.adj, dtype=bool)
        if adj.shape != (self.n, self.n):
            raise ValueError(f"adjacency shape {adj.shape} does not match n={self.n}")
        if np.any(adj != adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diagonal(adj)):
            raise ValueError("self-loops are not allowed")
        object.__setattr__(self, "adj", _freeze(adj))
        iu = np.triu_indices(self.n, k=1)
        object.__setattr__(self, "edge_count", int(adj[iu].sum()))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop ({u},{v}) not allowed")
            adj[u, v] = True
            adj[v, u] = True
        return cls(n, adj)

    def edges(self) -> np.ndarray:
        """Edge list as an (m, 2) array with u < v, lexicographically sorted."""
        iu = np.triu_indices(self.n, k=1)
        mask = self.adj[iu]
        return np.column_stack((iu[0][mask], iu[1][mask]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and np.array_equal(self.adj, other.adj)


@dataclass(frozen=True)
class CommunityAssignment:
    """Node -> community label map; labels are dense integers 1..kappa."""

    labels: np.ndarray
    kappa: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-d array")
        if labels.min(initial=1) < 1 or labels.max(initial=self.kappa) > self.kappa:
            raise ValueError(f"labels must lie in 1..{self.kappa}")
        counts = np.bincount(labels, minlength=self.kappa + 1)[1:]
        if np.any(counts == 0):
            empty = int(np.flatnonzero(counts == 0)[0]) + 1
            raise ValueError(f"community {empty} is empty")
        object.__setattr__(self, "labels", _freeze(labels))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.kappa + 1)[1:]

    def members(self, label: int) -> np.ndarray:
        """Sorted node ids carrying the given label."""
        return np.flatnonzero(self.labels == label)


@dataclass(frozen=True)
class ModelParams:
    """Block affinity matrix {p_ab} plus the two edge sampling probabilities."""

    affinity: np.ndarray
    s1: float
    s2: float

    def __post_init__(self):
        aff = np.asarray(self.affinity, dtype=float)
        if aff.ndim != 2 or aff.shape[0] != aff.shape[1]:
            raise ValueError("affinity must be a square matrix")
        if np.any(aff != aff.T):
            raise ValueError("affinity must be symmetric")
        if np.any(aff <= 0.0) or np.any(aff >= 1.0):
            raise ValueError("affinity entries must lie strictly inside (0, 1)")
        if not (0.0 < self.s1 < 1.0 and 0.0 < self.s2 < 1.0):
            raise ValueError("sampling probabilities must lie strictly inside (0, 1)")
        object.__setattr__(self, "affinity", _freeze(aff))

    @property
    def kappa(self) -> int:
        return self.affinity.shape[0]

    @property
    def alpha(self) -> float:
        """Smallest affinity entry."""
        return float(self.affinity.min())

    @property
    def beta(self) -> float:
        """Largest affinity entry."""
        return float(self.affinity.max())

    @property
    def gamma(self) -> float:
        """log(alpha)/log(beta); equals 1 for a constant affinity matrix."""
        return float(np.log(self.alpha) / np.log(self.beta))


@dataclass(frozen=True)
class Mapping:
    """Bijection on {0..n-1}, stored as forward[i] = image of node i."""

    forward: np.ndarray

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.int64)
        n = fwd.size
        if not np.array_equal(np.sort(fwd), np.arange(n)):
            raise ValueError("forward array is not a bijection on {0..n-1}")
        object.__setattr__(self, "forward", _freeze(fwd))

    @property
    def n(self) -> int:
        return self.forward.size

    @classmethod
    def identity(cls, n: int) -> "Mapping":
        return cls(np.arange(n))

    def matrix(self) -> np.ndarray:
        """Permutation-matrix view P with P[i, forward[i]] = 1."""
        P = np.zeros((self.n, self.n))
        P[np.arange(self.n), self.forward] = 1.0
        return P

    def __eq__(self, other) -> bool:
        return isinstance(other, Mapping) and np.array_equal(self.forward, other.forward)


def apply_mapping(g: Graph, m: Mapping) -> Graph:
    """Relabel g's nodes through m: edge (i,j) becomes (m(i), m(j))."""
    if m.n != g.n:
        raise ValueError(f"mapping size {m.n} does not match graph size {g.n}")
    adj = np.zeros_like(g.adj)
    ix = np.ix_(m.forward, m.forward)
    adj[ix] = g.adj
    return Graph(g.n, adj)


def invert(m: Mapping) -> Mapping:
    inv = np.empty_like(m.forward)
    inv[m.forward] = np.arange(m.n)
    return Mapping(inv)


def observes_communities(m: Mapping, c1: CommunityAssignment, c2: CommunityAssignment) -> bool:
    """True iff every node keeps its community label under the mapping."""
    if not (m.n == c1.n == c2.n):
        raise ValueError("mapping and community assignments must have equal sizes")
    return bool(np.all(c1.labels == c2.labels[m.forward]))


@dataclass(frozen=True)
class DeanonInstance:
    """One experiment unit: a correlated graph pair plus its side information.

    g (underlying graph) and truth are present for synthetic instances and for
    ingested data shipped with a ground-truth correspondence; c2 is absent in
    unilateral mode.
    """

    g1: Graph
    g2: Graph
    c1: CommunityAssignment
    params: ModelParams
    weights: "WeightMatrix"
    g: Graph | None = None
    truth: Mapping | None = None
    c2: CommunityAssignment | None = None

    def __post_init__(self):
        if self.g1.n != self.g2.n:
            raise ValueError("published and auxiliary graphs must have equal node counts")
        if self.c1.n != self.g1.n:
            raise ValueError("community assignment size does not match the graphs")
        if self.truth is not None and self.truth.n != self.g1.n:
            raise ValueError("ground-truth mapping size does not match the graphs")
        if self.c2 is not None:
            if self.c2.n != self.g1.n:
                raise ValueError("auxiliary community assignment size does not match")
            if self.truth is not None and not observes_communities(self.truth, self.c1, self.c2):
                raise ValueError("ground truth does not observe the community assignments")

    @property
    def n(self) -> int:
        return self.g1.n
