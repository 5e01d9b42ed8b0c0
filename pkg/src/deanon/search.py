"""Ground-truth searchers: exhaustive enumeration and a genetic algorithm.

Brute force is the oracle for tiny instances. The GA encodes a candidate
mapping as a permutation chromosome; in bilateral mode the chromosome is
block-structured (nodes only permute inside their community), so every
individual observes the community assignment by construction. Fitness is the
negated mode cost, evaluated for a whole population at once through edge-list
gathers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DeanonInstance, Mapping
from .cost import WeightMatrix, bilateral_cost, unilateral_cost

BRUTE_FORCE_CAP = 10_000_000
_UNILATERAL_BRUTE_MAX_N = 8


@dataclass(frozen=True)
class GaConfig:
    population: int = 100
    generations: int = 1000
    tournament_size: int = 4
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    seed: int = 0
    mode: str = "bilateral"
    weighted: bool = True  # False minimizes the unit-weight disagreement count
    patience: int | None = None  # stop after this many stagnant generations

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if not (0.0 <= self.crossover_rate <= 1.0 and 0.0 <= self.mutation_rate <= 1.0):
            raise ValueError("rates must lie in [0, 1]")
        if self.mode not in ("bilateral", "unilateral"):
            raise ValueError(f"unknown mode {self.mode!r}")


def _blocks(inst: DeanonInstance, mode: str) -> list[tuple[np.ndarray, np.ndarray]]:
    """(source nodes, target nodes) per community block; one global block
    when no community restriction applies."""
    if mode == "bilateral":
        if inst.c2 is None:
            raise ValueError("bilateral mode requires the auxiliary community assignment")
        out = []
        for a in range(1, inst.c1.kappa + 1):
            src = inst.c1.members(a)
            dst = inst.c2.members(a)
            if src.size != dst.size:
                raise ValueError(f"community {a} has mismatched sizes across the graphs")
            out.append((src, dst))
        return out
    return [(np.arange(inst.n), np.arange(inst.n))]


def _mode_cost(inst: DeanonInstance, mode: str, w: WeightMatrix, m: Mapping) -> float:
    if mode == "bilateral":
        return bilateral_cost(inst.g1, inst.g2, w, m)
    return unilateral_cost(inst.g1, inst.g2, w, m)


def _batched_delta(inst: DeanonInstance, mode: str, w: WeightMatrix, forwards: np.ndarray) -> np.ndarray:
    """Mode cost for a (batch, n) array of forward maps, in one numpy pass."""
    wfull = w.full
    e1 = inst.g1.edges()
    adj2 = inst.g2.adj
    if mode == "bilateral":
        # disagreement = |E1|w + |E2|w - 2 * (weight of matched edge pairs);
        # both totals are constant across community-observing candidates
        t1 = float(wfull[e1[:, 0], e1[:, 1]].sum())
        e2 = inst.g2.edges()
        w2 = w.relabel(inst.c2) if inst.c2 is not None else w
        t2 = float(w2.full[e2[:, 0], e2[:, 1]].sum())
        we = wfull[e1[:, 0], e1[:, 1]]
        match = (adj2[forwards[:, e1[:, 0]], forwards[:, e1[:, 1]]] * we).sum(axis=1)
        return t1 + t2 - 2.0 * match
    # unilateral: weight of all image edges minus the weight of matched ones
    inv = np.argsort(forwards, axis=1)
    e2 = inst.g2.edges()
    img = wfull[inv[:, e2[:, 0]], inv[:, e2[:, 1]]].sum(axis=1)
    we = wfull[e1[:, 0], e1[:, 1]]
    match = (adj2[forwards[:, e1[:, 0]], forwards[:, e1[:, 1]]] * we).sum(axis=1)
    return img - match


def brute_force(inst: DeanonInstance, mode: str) -> tuple[Mapping, float]:
    """Exact minimizer of the mode's cost; ties go to the lexicographically
    smallest forward array. Bilateral search runs over community-observing
    mappings only."""
    blocks = _blocks(inst, mode)
    space = 1
    for src, _ in blocks:
        space *= math.factorial(src.size)
    if mode == "unilateral" and inst.n > _UNILATERAL_BRUTE_MAX_N:
        raise ValueError(f"unilateral brute force capped at n={_UNILATERAL_BRUTE_MAX_N}, got n={inst.n}")
    if space > BRUTE_FORCE_CAP:
        raise ValueError(f"search space has {space} mappings, above the {BRUTE_FORCE_CAP} cap")

    def gen_forwards():
        per_block = [itertools.permutations(dst) for _, dst in blocks]
        srcs = [src for src, _ in blocks]
        for combo in itertools.product(*per_block):
            fwd = np.empty(inst.n, dtype=np.int64)
            for src, dst in zip(srcs, combo):
                fwd[src] = dst
            yield fwd

    best_fwd = None
    best_delta = math.inf
    chunk: list[np.ndarray] = []
    CHUNK = 4096

    def flush(chunk):
        nonlocal best_fwd, best_delta
        forwards = np.array(chunk)
        deltas = _batched_delta(inst, mode, inst.weights, forwards)
        for fwd, d in zip(forwards, deltas):
            if d < best_delta or (d == best_delta and best_fwd is not None and tuple(fwd) < tuple(best_fwd)):
                best_delta = float(d)
                best_fwd = fwd

    for fwd in gen_forwards():
        chunk.append(fwd)
        if len(chunk) >= CHUNK:
            flush(chunk)
            chunk = []
    if chunk:
        flush(chunk)
    m = Mapping(best_fwd)
    return m, _mode_cost(inst, mode, inst.weights, m)


def _order_crossover(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """OX: keep p1's segment in place, fill the rest in p2's order."""
    n = p1.size
    if n < 2:
        return p1.copy()
    a, b = sorted(rng.integers(0, n, size=2))
    b += 1
    child = np.empty(n, dtype=p1.dtype)
    child[a:b] = p1[a:b]
    hold = np.zeros(n, dtype=bool)
    hold[p1[a:b]] = True
    rest = p2[~hold[p2]]
    child[np.concatenate([np.arange(b, n), np.arange(0, a)])] = rest
    return child


@dataclass
class GaResult:
    mapping: Mapping
    delta: float
    history: list[float] = field(default_factory=list)  # best-ever delta per generation


def genetic_algorithm(inst: DeanonInstance, cfg: GaConfig) -> tuple[Mapping, float]:
    res = genetic_algorithm_full(inst, cfg)
    return res.mapping, res.delta


def genetic_algorithm_full(inst: DeanonInstance, cfg: GaConfig) -> GaResult:
    """Permutation GA: tournament selection, order crossover applied inside
    each community block, swap mutation within a block, elitism of one.
    Deterministic given cfg.seed."""
    blocks = _blocks(inst, cfg.mode)
    slices = []
    start = 0
    for src, _ in blocks:
        slices.append(slice(start, start + src.size))
        start += src.size
    srcs = [src for src, _ in blocks]
    dsts = [dst for _, dst in blocks]
    w = inst.weights if cfg.weighted else WeightMatrix.uniform(inst.n)

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    pop = cfg.population
    n = inst.n

    genomes = np.empty((pop, n), dtype=np.int64)
    for sl, src in zip(slices, srcs):
        for i in range(pop):
            genomes[i, sl] = rng.permutation(src.size)

    def decode(gen: np.ndarray) -> np.ndarray:
        fwd = np.empty((gen.shape[0], n), dtype=np.int64)
        for sl, src, dst in zip(slices, srcs, dsts):
            fwd[:, src] = dst[gen[:, sl]]
        return fwd

    deltas = _batched_delta(inst, cfg.mode, w, decode(genomes))
    best_i = int(np.argmin(deltas))
    best_genome = genomes[best_i].copy()
    best_delta = float(deltas[best_i])
    history = [best_delta]
    stagnant = 0

    for _ in range(cfg.generations):
        if best_delta == 0.0:
            history.append(best_delta)
            continue
        # tournament selection (vectorized): lowest delta among k contestants
        contestants = rng.integers(0, pop, size=(pop, cfg.tournament_size))
        winners = contestants[np.arange(pop), np.argmin(deltas[contestants], axis=1)]
        parents = genomes[winners]

        children = parents.copy()
        do_cx = rng.random(pop // 2) < cfg.crossover_rate
        for k in range(pop // 2):
            if not do_cx[k]:
                continue
            p1, p2 = parents[2 * k], parents[2 * k + 1]
            for sl in slices:
                children[2 * k, sl] = _order_crossover(p1[sl], p2[sl], rng)
                children[2 * k + 1, sl] = _order_crossover(p2[sl], p1[sl], rng)
        do_mut = rng.random(pop) < cfg.mutation_rate
        for k in np.flatnonzero(do_mut):
            sl = slices[rng.integers(0, len(slices))] if len(slices) > 1 else slices[0]
            width = sl.stop - sl.start
            if width < 2:
                continue
            u, v = rng.integers(0, width, size=2)
            children[k, sl.start + u], children[k, sl.start + v] = (
                children[k, sl.start + v],
                children[k, sl.start + u],
            )
        children[0] = best_genome  # elitism
        genomes = children
        deltas = _batched_delta(inst, cfg.mode, w, decode(genomes))
        gen_best = int(np.argmin(deltas))
        if deltas[gen_best] < best_delta:
            best_delta = float(deltas[gen_best])
            best_genome = genomes[gen_best].copy()
            stagnant = 0
        else:
            stagnant += 1
        history.append(best_delta)
        if cfg.patience is not None and stagnant >= cfg.patience:
            break

    fwd = decode(best_genome[None, :])[0]
    m = Mapping(fwd)
    return GaResult(mapping=m, delta=_mode_cost(inst, cfg.mode, w, m), history=history)
