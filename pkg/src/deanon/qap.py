"""Quadratic-assignment route to cost minimization.

The pipeline converts an instance into a quadratic assignment over
permutation 0/1 variables, solves it with a pluggable inner solver, and (in
bilateral mode) repairs community violations by reversing violation cycles.

Coefficients q(i,j,k,l) are computed on demand from the adjacency and weight
structures; the n^4 tensor is never materialized. Bilateral instances are
maximized (edge-pair gains of w_ij, a flat -1 for every community-violating
variable pair); unilateral instances are minimized (w_ij whenever a non-edge
of the published graph lands on an auxiliary edge).

The quasi-polynomial rounding scheme this formulation is compatible with is
deliberately not implemented; the inner-solver slot offers exhaustive search
(exact, tiny n), 2-swap local search with restarts, and simulated annealing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import CommunityAssignment, DeanonInstance, Mapping
from .cost import bilateral_cost, unilateral_cost

_EXHAUSTIVE_MAX_N = 8


@dataclass(frozen=True)
class QapInstance:
    """Lazy quadratic-assignment view of a de-anonymization instance."""

    n: int
    sense: str  # maximize | minimize
    mode: str
    wfull: np.ndarray  # n x n pair weights (published-graph communities)
    adj1: np.ndarray
    adj2: np.ndarray
    c1: np.ndarray | None  # labels, bilateral only
    c2: np.ndarray | None

    def q(self, i: int, j: int, k: int, l: int) -> float:
        """Coefficient of the x_ik * x_jl product."""
        if self.mode == "bilateral":
            if self.c1[i] != self.c2[k] or self.c1[j] != self.c2[l]:
                return -1.0
            if self.adj1[i, j] and self.adj2[k, l]:
                return float(self.wfull[i, j])
            return 0.0
        if (not self.adj1[i, j]) and self.adj2[k, l]:
            return float(self.wfull[i, j])
        return 0.0

    # -- vectorized objective helpers ------------------------------------

    def value(self, forward: np.ndarray) -> float:
        """Objective sum q(i,j,forward(i),forward(j)) over all ordered pairs."""
        mapped = self.adj2[np.ix_(forward, forward)]
        if self.mode == "bilateral":
            obs = self.c1 == self.c2[forward]
            gain = float((self.wfull * (self.adj1 & mapped))[np.ix_(obs, obs)].sum())
            v = int(np.count_nonzero(~obs))
            return gain - float(self.n * self.n - (self.n - v) ** 2)
        # diagonal terms vanish because mapped has a false diagonal
        return float((self.wfull * (~self.adj1 & mapped)).sum())

    def value_reference(self, forward: np.ndarray) -> float:
        """O(n^2) recomputation straight from the coefficient accessor."""
        total = 0.0
        for i in range(self.n):
            for j in range(self.n):
                total += self.q(i, j, int(forward[i]), int(forward[j]))
        return total

    def violations(self, forward: np.ndarray) -> int:
        if self.mode != "bilateral":
            return 0
        return int(np.count_nonzero(self.c1 != self.c2[forward]))

    def swap_value_delta(self, forward: np.ndarray, u: int, v: int) -> float:
        """Objective change from exchanging the images of u and v; O(n)."""
        if u == v:
            return 0.0
        new = forward.copy()
        new[u], new[v] = new[v], new[u]
        idx = np.array([u, v])
        # terms touching u or v: twice the two affected rows minus the 2x2
        # block counted twice (the term matrix is symmetric)
        mapped_old_rows = self.adj2[forward[idx]][:, forward]
        mapped_new_rows = self.adj2[new[idx]][:, new]
        w_rows = self.wfull[idx]
        a_rows = self.adj1[idx]
        if self.mode == "bilateral":
            obs_old = self.c1 == self.c2[forward]
            obs_new = self.c1 == self.c2[new]
            gain_old = (w_rows * (a_rows & mapped_old_rows) * (obs_old[idx][:, None] & obs_old[None, :])).sum()
            gain_new = (w_rows * (a_rows & mapped_new_rows) * (obs_new[idx][:, None] & obs_new[None, :])).sum()
            block_old = (w_rows[:, idx] * (a_rows[:, idx] & mapped_old_rows[:, idx])
                         * (obs_old[idx][:, None] & obs_old[idx][None, :])).sum()
            block_new = (w_rows[:, idx] * (a_rows[:, idx] & mapped_new_rows[:, idx])
                         * (obs_new[idx][:, None] & obs_new[idx][None, :])).sum()
            dgain = 2.0 * (gain_new - gain_old) - (block_new - block_old)
            v_old = int(np.count_nonzero(~obs_old))
            v_new = int(np.count_nonzero(~obs_new))
            dpen = float((self.n - v_new) ** 2 - (self.n - v_old) ** 2)
            return float(dgain + dpen)
        # the diagonal entries of the term matrix are zero on both sides
        old_rows = (w_rows * (~a_rows & mapped_old_rows)).sum()
        new_rows = (w_rows * (~a_rows & mapped_new_rows)).sum()
        block_old = (w_rows[:, idx] * (~a_rows[:, idx] & mapped_old_rows[:, idx])).sum()
        block_new = (w_rows[:, idx] * (~a_rows[:, idx] & mapped_new_rows[:, idx])).sum()
        return float(2.0 * (new_rows - old_rows) - (block_new - block_old))


@dataclass(frozen=True)
class AssignmentSolution:
    """A permutation assignment with its objective value and violation count."""

    mapping: Mapping
    value: float
    violations: int = 0


def build_qap(inst: DeanonInstance, mode: str) -> QapInstance:
    if mode == "bilateral":
        if inst.c2 is None:
            raise ValueError("bilateral mode requires the auxiliary community assignment")
        return QapInstance(
            n=inst.n, sense="maximize", mode=mode, wfull=inst.weights.full,
            adj1=inst.g1.adj, adj2=inst.g2.adj, c1=inst.c1.labels, c2=inst.c2.labels,
        )
    if mode != "unilateral":
        raise ValueError(f"unknown mode {mode!r}")
    return QapInstance(
        n=inst.n, sense="minimize", mode=mode, wfull=inst.weights.full,
        adj1=inst.g1.adj, adj2=inst.g2.adj, c1=None, c2=None,
    )


def _better(qi: QapInstance, a: float, b: float) -> bool:
    """True when value a beats value b under the instance's sense."""
    return a > b if qi.sense == "maximize" else a < b


def greedy_start(qi: QapInstance) -> np.ndarray:
    """Identity-seeded greedy assignment: rows in order, each taking the best
    still-free column given earlier choices, ties to the lowest index."""
    n = qi.n
    forward = np.full(n, -1, dtype=np.int64)
    free = np.ones(n, dtype=bool)
    assigned: list[int] = []
    sign = 1.0 if qi.sense == "maximize" else -1.0
    for i in range(n):
        cand = np.flatnonzero(free)
        scores = np.zeros(cand.size)
        if qi.mode == "bilateral":
            obs_i = qi.c2[cand] == qi.c1[i]
            scores -= 4.0 * n * (~obs_i)  # dominant proxy for the violation penalty
            if assigned:
                ja = np.array(assigned)
                fa = forward[ja]
                obs_a = qi.c1[ja] == qi.c2[fa]
                pair = (qi.adj1[i][ja][None, :] & qi.adj2[cand][:, fa]) * qi.wfull[i][ja][None, :]
                scores += 2.0 * (pair * (obs_a[None, :] & obs_i[:, None])).sum(axis=1)
        else:
            if assigned:
                ja = np.array(assigned)
                fa = forward[ja]
                pair = ((~qi.adj1[i][ja])[None, :] & qi.adj2[cand][:, fa]) * qi.wfull[i][ja][None, :]
                scores += 2.0 * pair.sum(axis=1)
        best = cand[int(np.argmax(sign * scores))]
        forward[i] = best
        free[best] = False
        assigned.append(i)
    return forward


def _local_search_one(qi: QapInstance, forward: np.ndarray) -> tuple[np.ndarray, float]:
    """2-swap descent/ascent to a local optimum, first-improvement in
    lexicographic (u, v) order."""
    forward = forward.copy()
    value = qi.value(forward)
    improved = True
    while improved:
        improved = False
        for u in range(qi.n - 1):
            for v in range(u + 1, qi.n):
                d = qi.swap_value_delta(forward, u, v)
                if (qi.sense == "maximize" and d > 1e-12) or (qi.sense == "minimize" and d < -1e-12):
                    forward[u], forward[v] = forward[v], forward[u]
                    value += d
                    improved = True
        value = qi.value(forward)  # resync accumulated deltas
    return forward, qi.value(forward)


def solve_qap(qi: QapInstance, inner: str, budget: int = 3, seed: int = 0) -> AssignmentSolution:
    """Solve the assignment with the selected inner solver.

    inner = "exhaustive" enumerates all permutations (n <= 8) and is exact;
    "local_search" runs `budget` restarts (greedy start first, then random)
    of 2-swap search; "annealing" runs `budget` proposed transpositions of
    simulated annealing from the greedy start. Results are deterministic
    given the seed; ties are broken toward the lexicographically smallest
    forward array.
    """
    if inner == "exhaustive":
        if qi.n > _EXHAUSTIVE_MAX_N:
            raise ValueError(f"exhaustive inner solver capped at n={_EXHAUSTIVE_MAX_N}, got n={qi.n}")
        best_fwd = None
        best_val = None
        for perm in itertools.permutations(range(qi.n)):
            fwd = np.array(perm, dtype=np.int64)
            val = qi.value(fwd)
            if best_val is None or _better(qi, val, best_val):
                best_val = val
                best_fwd = fwd
        return AssignmentSolution(Mapping(best_fwd), float(best_val), qi.violations(best_fwd))

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if inner == "local_search":
        starts = [greedy_start(qi)]
        for _ in range(max(0, budget - 1)):
            starts.append(rng.permutation(qi.n).astype(np.int64))
        best_fwd, best_val = None, None
        for s in starts:
            fwd, val = _local_search_one(qi, s)
            if (best_val is None or _better(qi, val, best_val)
                    or (val == best_val and tuple(fwd) < tuple(best_fwd))):
                best_fwd, best_val = fwd, val
        return AssignmentSolution(Mapping(best_fwd), float(best_val), qi.violations(best_fwd))

    if inner == "annealing":
        forward = greedy_start(qi)
        value = qi.value(forward)
        best_fwd, best_val = forward.copy(), value
        if budget > 0:
            scale = max(abs(value), 1.0)
            t0, t1 = 0.05 * scale, 1e-4 * scale
            cool = (t1 / t0) ** (1.0 / budget)
            temp = t0
            sign = 1.0 if qi.sense == "maximize" else -1.0
            for _ in range(budget):
                u, v = rng.integers(0, qi.n, size=2)
                if u != v:
                    d = qi.swap_value_delta(forward, int(u), int(v))
                    if sign * d > 0 or rng.random() < math.exp(min(0.0, sign * d / temp)):
                        forward[u], forward[v] = forward[v], forward[u]
                        value += d
                        if _better(qi, value, best_val):
                            best_fwd, best_val = forward.copy(), value
                temp *= cool
        best_val = qi.value(best_fwd)
        return AssignmentSolution(Mapping(best_fwd), float(best_val), qi.violations(best_fwd))

    raise ValueError(f"unknown inner solver {inner!r}")


def reverse_violation_cycles(
    sol: AssignmentSolution,
    c1: CommunityAssignment,
    c2: CommunityAssignment,
    qap: QapInstance | None = None,
    collect_trace: bool = False,
):
    """Repair community violations by walking and reversing violation cycles.

    Repeatedly takes the lowest violating entry i -> x(i), unassigns it, and
    walks rows whose source community matches the community of the dangling
    image, preferring violating rows, until the hole's community matches the
    starting row's; every reassignment along the walk is community-observing.
    Each outer pass strictly decreases the violation count, and removing
    violating variable pairs can only raise the (maximize-sense) objective.
    """
    lab1, lab2 = c1.labels, c2.labels
    if c1.kappa != c2.kappa or np.any(np.sort(c1.sizes) != np.sort(c2.sizes)) or np.any(c1.sizes != c2.sizes):
        raise ValueError("community tables are inconsistent across the two sides")
    forward = sol.mapping.forward.copy()
    n = forward.size

    def violating() -> np.ndarray:
        return lab1 != lab2[forward]

    trace = [int(np.count_nonzero(violating()))]
    while True:
        viol = violating()
        if not viol.any():
            break
        i = int(np.flatnonzero(viol)[0])
        hole = int(forward[i])
        forward[i] = -1
        while lab2[hole] != lab1[i]:
            rows = np.flatnonzero((lab1 == lab2[hole]) & (forward >= 0))
            viol_rows = rows[lab1[rows] != lab2[forward[rows]]]
            cand = viol_rows if viol_rows.size else rows
            if cand.size == 0:
                raise ValueError("community tables are inconsistent across the two sides")
            r = int(cand[0])
            nxt = int(forward[r])
            forward[r] = hole
            hole = nxt
        forward[i] = hole
        trace.append(int(np.count_nonzero(violating())))

    mapping = Mapping(forward)
    value = qap.value(forward) if qap is not None else sol.value
    out = AssignmentSolution(mapping, float(value), 0)
    if collect_trace:
        return out, trace
    return out


def additive_approximation(
    inst: DeanonInstance, mode: str, inner: str = "local_search",
    budget: int = 3, seed: int = 0,
) -> tuple[Mapping, float]:
    """Full pipeline: quadratic-assignment build, inner solve, and (bilateral
    only) community repair; returns the mapping and its mode cost."""
    qi = build_qap(inst, mode)
    sol = solve_qap(qi, inner, budget=budget, seed=seed)
    if mode == "bilateral":
        sol = reverse_violation_cycles(sol, inst.c1, inst.c2, qap=qi)
        delta = bilateral_cost(inst.g1, inst.g2, inst.weights, sol.mapping)
    else:
        delta = unilateral_cost(inst.g1, inst.g2, inst.weights, sol.mapping)
    return sol.mapping, delta
