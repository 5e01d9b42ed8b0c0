"""Convex relaxation + greedy projection route to cost minimization.

Matrix conventions: a mapping m is the permutation matrix P with
P[i, m(i)] = 1, a fractional candidate X has unit row sums, and row i of X is
the assignment distribution of node i. With weighted adjacencies
At = sqrt(W) o A and Bt = sqrt(W') o B (W from the published labels, W' the
same table bound to the auxiliary labels), the linear residual At@X - X@Bt
evaluated at a community-observing permutation satisfies

    ||At@P - P@Bt||_F^2 = ||W o (A - P B P^T)||_F^2 = 2 * bilateral cost,

the factor 2 counting each unordered pair once per orientation. Objectives
below are normalized by 1/2 so their value at an integral community-observing
candidate equals the cost exactly.

The relaxed problems are solved by projected gradient with backtracking line
search over the unit-row-sum set, with entrywise nonnegativity on by default
(the feasible set stays convex and every permutation remains feasible; a flag
restores the affine-only relaxation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CommunityAssignment, DeanonInstance, Graph, Mapping, observes_communities
from .cost import WeightMatrix, bilateral_cost, total_pair_weight, unilateral_cost


@dataclass(frozen=True)
class ConvexConfig:
    max_iterations: int = 500
    step_rule: str = "backtracking"  # backtracking | fixed
    tolerance: float = 1e-6  # gradient-projection residual threshold
    mu: float | None = None  # community penalty weight; None -> sum of all pair weights
    nonneg: bool = True
    fixed_step: float = 1e-3

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.mu is not None and self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.step_rule not in ("backtracking", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


def weighted_adjacency(g: Graph, w: WeightMatrix) -> np.ndarray:
    """Entrywise product of sqrt(w) with the adjacency; symmetric, zero diagonal."""
    if g.n != w.n:
        raise ValueError("weight matrix size does not match the graph")
    return np.sqrt(w.full) * g.adj


def residual_norm_identity(
    At: np.ndarray, Bt: np.ndarray, w: WeightMatrix,
    g1: Graph, g2: Graph, m: Mapping,
    c1: CommunityAssignment, c2: CommunityAssignment,
) -> tuple[float, float]:
    """Both sides of the weighted-residual equality for an observing mapping.

    Returns (aligned, linear) where aligned = ||W o (A - P B P^T)||_F and
    linear = ||At P - P Bt||_F; the two agree because pair weights are
    invariant inside communities and the mapping observes them.
    """
    if not observes_communities(m, c1, c2):
        raise ValueError("the identity is only claimed for community-observing mappings")
    f = m.forward
    Bp = g2.adj[np.ix_(f, f)].astype(float)
    lhs = float(np.linalg.norm(np.sqrt(w.full) * (g1.adj.astype(float) - Bp)))
    inv = np.empty_like(f)
    inv[f] = np.arange(f.size)
    rhs = float(np.linalg.norm(At[:, inv] - Bt[f, :]))
    return lhs, rhs


class RelaxedProblem:
    """Differentiable relaxed objective for one instance and mode.

    bilateral:  f(X) = 1/2 ||At X - X Bt||_F^2 + mu/2 ||X m2 - m1||^2
    unilateral: f(X) = 1/2 || min(W o (A X - X B), 0) ||_F^2
    """

    def __init__(self, inst: DeanonInstance, mode: str, mu: float | None = None):
        if mode not in ("bilateral", "unilateral"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.n = inst.n
        if mode == "bilateral":
            if inst.c2 is None:
                raise ValueError("bilateral mode requires the auxiliary community assignment")
            self.At = weighted_adjacency(inst.g1, inst.weights)
            self.Bt = weighted_adjacency(inst.g2, inst.weights.relabel(inst.c2))
            self.m1 = inst.c1.labels.astype(float)
            self.m2 = inst.c2.labels.astype(float)
            self.mu = total_pair_weight(inst.weights) if mu is None else mu
        else:
            self.A = inst.g1.adj.astype(float)
            self.B = inst.g2.adj.astype(float)
            self.W = np.sqrt(inst.weights.full)
            self.mu = 0.0

    def value(self, X: np.ndarray) -> float:
        if self.mode == "bilateral":
            R = self.At @ X - X @ self.Bt
            pen = X @ self.m2 - self.m1
            return 0.5 * float((R * R).sum()) + 0.5 * self.mu * float(pen @ pen)
        T = self.W * (self.A @ X - X @ self.B)
        Tm = np.minimum(T, 0.0)
        return 0.5 * float((Tm * Tm).sum())

    def grad(self, X: np.ndarray) -> np.ndarray:
        if self.mode == "bilateral":
            R = self.At @ X - X @ self.Bt
            pen = X @ self.m2 - self.m1
            return self.At @ R - R @ self.Bt + self.mu * np.outer(pen, self.m2)
        T = self.W * (self.A @ X - X @ self.B)
        G = self.W * np.minimum(T, 0.0)
        return self.A @ G - G @ self.B


def _project_rows(X: np.ndarray, nonneg: bool) -> np.ndarray:
    """Euclidean projection onto {unit row sums}, optionally with X >= 0."""
    if not nonneg:
        return X - (X.sum(axis=1, keepdims=True) - 1.0) / X.shape[1]
    # row-wise simplex projection (sort-based)
    n = X.shape[1]
    a = -np.sort(-X, axis=1)
    cums = (np.cumsum(a, axis=1) - 1.0) / np.arange(1, n + 1)
    k = n - 1 - np.argmax((a > cums)[:, ::-1], axis=1)
    tau = cums[np.arange(X.shape[0]), k]
    return np.maximum(X - tau[:, None], 0.0)


@dataclass
class RelaxResult:
    x: np.ndarray
    converged: bool
    iterations: int
    objective: float
    objective_trace: list[float]


def solve_relaxed(
    inst: DeanonInstance, mode: str, cfg: ConvexConfig,
    x0: np.ndarray | None = None,
) -> RelaxResult:
    """Minimize the relaxed objective over unit-row-sum matrices by projected
    gradient; stops at gradient-projection residual <= tolerance or at the
    iteration cap (reported through the converged flag)."""
    prob = RelaxedProblem(inst, mode, mu=cfg.mu)
    n = prob.n
    X = np.full((n, n), 1.0 / n) if x0 is None else _project_rows(np.asarray(x0, dtype=float), cfg.nonneg)
    fX = prob.value(X)
    if not math.isfinite(fX):
        raise ValueError("relaxed objective is not finite at the start point")
    trace = [fX]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        G = prob.grad(X)
        if cfg.step_rule == "fixed":
            Xn = _project_rows(X - cfg.fixed_step * G, cfg.nonneg)
            fn = prob.value(Xn)
            residual = float(np.linalg.norm(Xn - X)) / cfg.fixed_step
        else:
            while True:
                Xn = _project_rows(X - step * G, cfg.nonneg)
                D = Xn - X
                fn = prob.value(Xn)
                if fn <= fX + (G * D).sum() + 0.5 / step * (D * D).sum() + 1e-12:
                    break
                step *= 0.5
                if step < 1e-18:
                    Xn, fn = X, fX
                    break
            residual = float(np.linalg.norm(Xn - X)) / step
        if not math.isfinite(fn):
            raise ValueError("relaxed objective overflowed during the solve")
        X, fX = Xn, fn
        trace.append(fX)
        if residual <= cfg.tolerance:
            converged = True
            break
        step = min(step * 1.5, 1e6)
    return RelaxResult(x=X, converged=converged, iterations=it, objective=fX, objective_trace=trace)


def validate_fractional(X: np.ndarray, nonneg: bool) -> None:
    if np.any(np.abs(X.sum(axis=1) - 1.0) > 1e-8):
        raise ValueError("fractional matrix rows must sum to 1")
    if nonneg and np.any(X < -1e-10):
        raise ValueError("fractional matrix has negative entries")


def project_to_mapping(
    frac: np.ndarray,
    c1: CommunityAssignment | None = None,
    c2: CommunityAssignment | None = None,
) -> Mapping:
    """Greedy row-by-row rounding of a fractional solution.

    Row i picks the still-unmapped column with the largest fractional mass
    (restricted to columns sharing i's community label when assignments are
    given); ties go to the lowest column index.
    """
    frac = np.asarray(frac, dtype=float)
    n = frac.shape[0]
    if (c1 is None) != (c2 is None):
        raise ValueError("provide both community assignments or neither")
    mapped = np.zeros(n, dtype=bool)
    forward = np.empty(n, dtype=np.int64)
    for i in range(n):
        if c1 is not None:
            legal = ~mapped & (c2.labels == c1.labels[i])
        else:
            legal = ~mapped
        if not legal.any():
            raise ValueError(f"no legal column left for row {i} (community sizes mismatch)")
        cols = np.flatnonzero(legal)
        j = cols[int(np.argmax(frac[i, cols]))]
        forward[i] = j
        mapped[j] = True
    return Mapping(forward)


def relax_and_project(
    inst: DeanonInstance, mode: str, cfg: ConvexConfig | None = None,
    x0: np.ndarray | None = None,
) -> tuple[Mapping, float]:
    """Full pipeline: relaxed solve, then greedy projection; returns the
    mapping and its mode cost."""
    cfg = cfg or ConvexConfig()
    res = solve_relaxed(inst, mode, cfg, x0=x0)
    validate_fractional(res.x, cfg.nonneg)
    if mode == "bilateral":
        m = project_to_mapping(res.x, inst.c1, inst.c2)
        return m, bilateral_cost(inst.g1, inst.g2, inst.weights, m)
    m = project_to_mapping(res.x)
    return m, unilateral_cost(inst.g1, inst.g2, inst.weights, m)


@dataclass(frozen=True)
class SpectralReport:
    """Quantities behind the exact-recovery condition of the convex route."""

    sigma: float
    delta: float
    eps1: float
    eps2: float
    xi: float
    m_norm: float
    lhs: float
    rhs: float
    satisfied: bool
    degenerate: bool  # repeated eigenvalues: condition vacuously violated

    def __str__(self):
        state = "degenerate (repeated eigenvalues)" if self.degenerate else (
            "satisfied" if self.satisfied else "violated")
        return (f"spectral recovery condition {state}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} "
                f"(sigma={self.sigma:.4g}, delta={self.delta:.4g}, xi={self.xi:.4g})")


def spectral_recovery_report(
    At: np.ndarray, Bt: np.ndarray, p_hat: Mapping, m: np.ndarray, mu: float,
) -> SpectralReport:
    """Evaluate the spectral sufficient condition for exact recovery.

    Builds the reference matrix B' = P^T At P for the candidate permutation,
    its eigendecomposition B' = U diag(lam) U^T (ascending eigenvalues, first
    nonzero eigenvector component positive), the perturbation R = Bt - B',
    and checks

        (sigma^2 + 1) xi^2 + mu^2 M^2
            <= [delta^2 / ((2 sqrt(n)+1)(1 + sqrt(n) e1/e2)(1 + 2 e1/e2))]^2

    with sigma the spectral radius, delta the smallest eigenvalue gap,
    e1/e2 the largest/smallest absolute row sums of U, xi = ||U R U^T||_F
    and M = ||m m^T||_F.
    """
    n = At.shape[0]
    f = p_hat.forward
    inv = np.empty_like(f)
    inv[f] = np.arange(n)
    Bref = At[np.ix_(inv, inv)]
    lam, U = np.linalg.eigh(Bref)
    # deterministic eigenvector signs
    for k in range(n):
        col = U[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            U[:, k] = -col
    sigma = float(np.abs(lam).max())
    gaps = np.abs(np.subtract.outer(lam, lam))[~np.eye(n, dtype=bool)]
    delta = float(gaps.min())
    rowsums = np.abs(U).sum(axis=1)
    eps1, eps2 = float(rowsums.max()), float(rowsums.min())
    R = Bt - Bref
    E = U @ R @ U.T
    xi = float(np.linalg.norm(E))
    m = np.asarray(m, dtype=float)
    m_norm = float(np.linalg.norm(np.outer(m, m)))
    lhs = (sigma ** 2 + 1.0) * xi ** 2 + mu ** 2 * m_norm ** 2
    degenerate = delta <= 1e-12
    if degenerate:
        rhs = 0.0
        satisfied = False
    else:
        rhs = (delta ** 2 / ((2.0 * math.sqrt(n) + 1.0)
                             * (1.0 + math.sqrt(n) * eps1 / eps2)
                             * (1.0 + 2.0 * eps1 / eps2))) ** 2
        satisfied = lhs <= rhs
    return SpectralReport(sigma=sigma, delta=delta, eps1=eps1, eps2=eps2, xi=xi,
                          m_norm=m_norm, lhs=lhs, rhs=rhs, satisfied=satisfied,
                          degenerate=degenerate)


def truncated_frobenius(M: np.ndarray) -> float:
    """sqrt of the sum of squares of the nonpositive entries."""
    Mm = np.minimum(np.asarray(M, dtype=float), 0.0)
    return float(np.sqrt((Mm * Mm).sum()))
