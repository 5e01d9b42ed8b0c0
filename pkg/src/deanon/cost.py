"""MAP-derived edge-disagreement costs for both information regimes.

Weights are in nats. A pair (i,j) carries
w_ij = log((1 - p(s1+s2-s1*s2)) / (p(1-s1)(1-s2))) with p the affinity of the
endpoint communities; the numerator exceeds the denominator by exactly 1-p,
so every weight is strictly positive. The ``xor`` overlap variant replaces
s1+s2-s1*s2 (edge survives into at least one sample) with s1+s2-2*s1*s2 (edge
survives into exactly one sample); it is consumed only by the tail-bound
evaluator in :mod:`deanon.theory`.

Costs are summed over unordered node pairs i < j with math.fsum, so O(n^2)
sums are exactly rounded and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import CommunityAssignment, Graph, Mapping, ModelParams


def weight(p: float, s1: float, s2: float, overlap: str = "union") -> float:
    """Disagreement weight for a node pair with affinity p.

    ``overlap`` selects the sampling-overlap term inside the log: "union"
    (s1+s2-s1*s2, the cost-function form) or "xor" (s1+s2-2*s1*s2, used by
    the tail-bound evaluator only).
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"affinity p={p} must lie strictly inside (0, 1)")
    if not (0.0 < s1 < 1.0 and 0.0 < s2 < 1.0):
        raise ValueError("sampling probabilities must lie strictly inside (0, 1)")
    if overlap == "union":
        q = s1 + s2 - s1 * s2
    elif overlap == "xor":
        q = s1 + s2 - 2.0 * s1 * s2
    else:
        raise ValueError(f"unknown overlap variant {overlap!r}")
    return math.log((1.0 - p * q) / (p * (1.0 - s1) * (1.0 - s2)))


@dataclass(frozen=True)
class WeightMatrix:
    """Pair weights, stored as a kappa x kappa table plus the node labels.

    The full n x n view is materialized lazily; weights depend only on the
    unordered pair of community labels, so the table is the canonical form.
    """

    table: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if np.any(table != table.T):
            raise ValueError("weight table must be symmetric")
        if np.any(table <= 0.0):
            raise ValueError("weights must be strictly positive")
        labels = np.asarray(self.labels, dtype=np.int64)
        table.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_params(cls, params: ModelParams, c: CommunityAssignment,
                    overlap: str = "union") -> "WeightMatrix":
        k = params.kappa
        table = np.empty((k, k))
        for a in range(k):
            for b in range(a, k):
                table[a, b] = table[b, a] = weight(params.affinity[a, b], params.s1, params.s2, overlap)
        return cls(table, c.labels)

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "WeightMatrix":
        return cls(np.array([[value]]), np.ones(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.labels.size

    @cached_property
    def full(self) -> np.ndarray:
        """Dense n x n weight matrix (zero diagonal is NOT applied)."""
        w = self.table[np.ix_(self.labels - 1, self.labels - 1)]
        w.flags.writeable = False
        return w

    def relabel(self, c: CommunityAssignment) -> "WeightMatrix":
        """Same table bound to another labeling (e.g. the auxiliary graph's)."""
        return WeightMatrix(self.table, c.labels)

    @property
    def max(self) -> float:
        return float(self.table.max())

    @property
    def min(self) -> float:
        return float(self.table.min())


def _check_sizes(g1: Graph, g2: Graph, m: Mapping, w: WeightMatrix | None = None):
    if not (g1.n == g2.n == m.n):
        raise ValueError("graphs and mapping must have equal sizes")
    if w is not None and w.n != g1.n:
        raise ValueError("weight matrix size does not match the graphs")


def bilateral_cost(g1: Graph, g2: Graph, w: WeightMatrix, m: Mapping) -> float:
    """Weighted count of edge disagreements over unordered pairs i < j.

    Zero exactly when m carries E1 onto E2.
    """
    _check_sizes(g1, g2, m, w)
    mapped = g2.adj[np.ix_(m.forward, m.forward)]
    iu = np.triu_indices(g1.n, k=1)
    disagree = g1.adj[iu] != mapped[iu]
    return math.fsum(w.full[iu][disagree])


def unilateral_cost(g1: Graph, g2: Graph, w: WeightMatrix, m: Mapping) -> float:
    """Single-sided cost: weight of pairs absent in E1 whose images are E2 edges."""
    _check_sizes(g1, g2, m, w)
    mapped = g2.adj[np.ix_(m.forward, m.forward)]
    iu = np.triu_indices(g1.n, k=1)
    offending = ~g1.adj[iu] & mapped[iu]
    return math.fsum(w.full[iu][offending])


def unweighted_cost(g1: Graph, g2: Graph, m: Mapping) -> float:
    """Bilateral cost with every pair weight equal to 1."""
    _check_sizes(g1, g2, m)
    mapped = g2.adj[np.ix_(m.forward, m.forward)]
    iu = np.triu_indices(g1.n, k=1)
    return float(np.count_nonzero(g1.adj[iu] != mapped[iu]))


def accuracy(m: Mapping, truth: Mapping) -> float:
    """Fraction of nodes mapped identically to the ground truth."""
    if m.n != truth.n:
        raise ValueError("mappings must have equal sizes")
    return float(np.count_nonzero(m.forward == truth.forward)) / m.n


def relative_value(delta: float, delta_ref: float) -> float:
    """(delta - delta_ref) / delta_ref, with a 0/+inf rule for delta_ref == 0."""
    if delta < 0 or delta_ref < 0:
        raise ValueError("cost values must be nonnegative")
    if delta_ref == 0.0:
        return 0.0 if delta == 0.0 else math.inf
    return (delta - delta_ref) / delta_ref


def total_pair_weight(w: WeightMatrix) -> float:
    """Sum of w_ij over all unordered node pairs i < j."""
    iu = np.triu_indices(w.n, k=1)
    return math.fsum(w.full[iu])


def total_edge_weight(g: Graph, w: WeightMatrix) -> float:
    """Sum of w_ij over the graph's edges (unordered)."""
    if g.n != w.n:
        raise ValueError("weight matrix size does not match the graph")
    iu = np.triu_indices(g.n, k=1)
    return math.fsum(w.full[iu][g.adj[iu]])


@dataclass(frozen=True)
class CostReport:
    """Cost of one candidate mapping, plus optional ground-truth metrics."""

    delta: float
    mode: str
    mapping_id: str
    accuracy: float | None = None
    relative_value: float | None = None

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.accuracy is not None and not (0.0 <= self.accuracy <= 1.0):
            raise ValueError("accuracy must lie in [0, 1]")
