"""Stochastic block model generation and experiment-instance assembly.

Every stochastic operation takes an explicit seed and derives its streams
from a numpy SeedSequence, so instances are bit-reproducible and independent
calls may run in parallel.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import CommunityAssignment, DeanonInstance, Graph, Mapping, ModelParams, apply_mapping
from .cost import WeightMatrix

PROB_FLOOR = 1e-6
PROB_CEIL = 1.0 - 1e-6


@dataclass(frozen=True)
class DegreePreset:
    """Family of expected-degree profiles realized through block affinities."""

    kind: str  # poisson | powerlaw | exponential
    target_mean_degree: float
    kappa: int

    def __post_init__(self):
        if self.kind not in ("poisson", "powerlaw", "exponential"):
            raise ValueError(f"unknown degree preset {self.kind!r}")
        if self.target_mean_degree <= 0:
            raise ValueError("target mean degree must be positive")
        if self.kappa < 1:
            raise ValueError("kappa must be at least 1")


def _labels_from_sizes(sizes) -> CommunityAssignment:
    sizes = np.asarray(sizes, dtype=np.int64)
    if np.any(sizes <= 0):
        raise ValueError("every community must be non-empty")
    labels = np.repeat(np.arange(1, sizes.size + 1), sizes)
    return CommunityAssignment(labels, int(sizes.size))


def generate_sbm(params: ModelParams, sizes, seed: int) -> tuple[Graph, CommunityAssignment]:
    """Draw a block-model graph: pair (u,v) is an edge w.p. p_{c(u)c(v)}."""
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.size != params.kappa:
        raise ValueError("sizes length must equal the affinity dimension")
    c = _labels_from_sizes(sizes)
    n = c.n
    if n < 2:
        raise ValueError("need at least two nodes")
    p_full = params.affinity[np.ix_(c.labels - 1, c.labels - 1)]
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    draws = rng.random((n, n))
    upper = np.triu(draws < p_full, k=1)
    adj = upper | upper.T
    return Graph(n, adj), c


def sample_edges(g: Graph, s: float, seed: int) -> Graph:
    """Retain each edge independently with probability s; never adds edges."""
    if not (0.0 <= s <= 1.0):
        raise ValueError("sampling probability must lie in [0, 1]")
    edges = g.edges()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    keep = rng.random(len(edges)) < s
    adj = np.zeros_like(g.adj)
    kept = edges[keep]
    adj[kept[:, 0], kept[:, 1]] = True
    adj[kept[:, 1], kept[:, 0]] = True
    return Graph(g.n, adj)


def make_instance(params: ModelParams, sizes, mode: str, seed: int) -> DeanonInstance:
    """Build a full synthetic experiment unit.

    The published graph keeps the underlying labeling; the auxiliary graph is
    an independently sampled copy relabeled by a uniformly random ground-truth
    permutation. In unilateral mode the auxiliary community assignment is
    withheld from the instance.
    """
    if mode not in ("bilateral", "unilateral"):
        raise ValueError(f"unknown mode {mode!r}")
    ss = np.random.SeedSequence(seed)
    s_gen, s_g1, s_g2, s_perm = [int(c.generate_state(1)[0]) for c in ss.spawn(4)]
    g, c1 = generate_sbm(params, sizes, s_gen)
    g1 = sample_edges(g, params.s1, s_g1)
    h = sample_edges(g, params.s2, s_g2)
    truth = Mapping(np.random.default_rng(np.random.SeedSequence(s_perm)).permutation(g.n))
    g2 = apply_mapping(h, truth)
    c2_labels = np.empty_like(c1.labels)
    c2_labels[truth.forward] = c1.labels
    c2 = CommunityAssignment(c2_labels, c1.kappa)
    weights = WeightMatrix.from_params(params, c1)
    return DeanonInstance(
        g1=g1, g2=g2, c1=c1, params=params, weights=weights,
        g=g, truth=truth, c2=c2 if mode == "bilateral" else None,
    )


def community_sizes(n: int, kappa: int, seed: int) -> np.ndarray:
    """Average size n/kappa with +/-10% uniform jitter, renormalized to sum n."""
    if kappa < 1 or n < kappa:
        raise ValueError("need n >= kappa >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    raw = (n / kappa) * (1.0 + rng.uniform(-0.1, 0.1, size=kappa))
    raw *= n / raw.sum()
    sizes = np.maximum(1, np.floor(raw).astype(np.int64))
    # distribute the rounding remainder by largest fractional part
    short = n - int(sizes.sum())
    order = np.argsort(-(raw - np.floor(raw)))
    i = 0
    while short > 0:
        sizes[order[i % kappa]] += 1
        short -= 1
        i += 1
    while short < 0:
        j = int(np.argmax(sizes))
        sizes[j] -= 1
        short += 1
    return sizes


def preset_affinity(preset: DegreePreset, sizes) -> tuple[np.ndarray, bool]:
    """Affinity matrix whose expected degrees follow the preset family.

    Each community gets a target degree d_a from the family (poisson: all
    equal; powerlaw: d_a ~ a^-2.5; exponential: d_a ~ exp(-a/2)), rescaled so
    the size-weighted mean equals the requested mean degree, then
    p_ab = d_a*d_b / (dbar*(n-1)). Entries are clamped to (0,1); the second
    return value reports whether clamping fired.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.size != preset.kappa:
        raise ValueError("sizes length must equal the preset's kappa")
    if np.any(sizes <= 0):
        raise ValueError("every community must be non-empty")
    n = int(sizes.sum())
    ranks = np.arange(1, preset.kappa + 1, dtype=float)
    if preset.kind == "poisson":
        shape = np.ones(preset.kappa)
    elif preset.kind == "powerlaw":
        shape = ranks ** -2.5
    else:
        shape = np.exp(-ranks / 2.0)
    dbar = preset.target_mean_degree
    d = shape * (dbar * n / float(sizes @ shape))
    raw = np.outer(d, d) / (dbar * (n - 1))
    if raw.max() >= 1.0:
        raise ValueError(
            f"preset requires an affinity of {raw.max():.4f} >= 1; lower the mean degree"
        )
    clamped = bool(np.any(raw < PROB_FLOOR) or np.any(raw > PROB_CEIL))
    if clamped:
        warnings.warn("affinity entries were clamped into (0, 1)", stacklevel=2)
    return np.clip(raw, PROB_FLOOR, PROB_CEIL), clamped


def dense_bridge_preset(n: int, anchor_size: int = 5) -> tuple[ModelParams, np.ndarray]:
    """Three-community family with a dense bridge between the two outer blocks.

    Two constant-size anchor communities plus one bulk community of size
    n - 2*anchor_size; all affinities are 5*log(n)/n except the anchor-to-bulk
    pair p13 = log(n)/sqrt(n), and the sampling probabilities are 2/3. The
    cross pair is heavy enough that unweighted disagreement counting loses the
    signal the weighted cost retains, which makes this family the standard
    separation benchmark between the two objectives.
    """
    sizes = np.array([anchor_size, anchor_size, n - 2 * anchor_size], dtype=np.int64)
    if np.any(sizes <= 0):
        raise ValueError("n too small for the requested anchor size")
    base = 5.0 * np.log(n) / n
    bridge = np.log(n) / np.sqrt(n)
    if base >= 1.0 or bridge >= 1.0:
        raise ValueError(f"n={n} too small: affinity formulas exceed 1")
    aff = np.array([
        [base, base, bridge],
        [base, base, base],
        [bridge, base, base],
    ])
    return ModelParams(aff, 2.0 / 3.0, 2.0 / 3.0), sizes
