"""Numerical evaluators for the recovery conditions and tail bounds.

These are advisory diagnostics: the underlying statements are asymptotic, so
finite-n evaluation is heuristic. Every hidden constant is an explicit caller
input, and each report says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams
from .cost import weight

ADVISORY = "asymptotic condition evaluated at finite n; treat as a heuristic diagnostic"


@dataclass(frozen=True)
class ConditionReport:
    quantities: dict[str, float]
    satisfied: bool
    advisory: str = ADVISORY

    def __str__(self):
        qs = ", ".join(f"{k}={v:.6g}" for k, v in self.quantities.items())
        return f"{'satisfied' if self.satisfied else 'violated'} ({qs}) [{self.advisory}]"


def exact_recovery_condition(params: ModelParams, n: int, constant: float = 1.0) -> ConditionReport:
    """Sufficient-condition check for full recovery by cost minimization.

    lhs = alpha (1-beta)^2 s1^2 s2^2 log(1/alpha) / (s1+s2) against
    rhs = constant * gamma * log^2(n) / n, with gamma = log(alpha)/log(beta).
    """
    if constant <= 0:
        raise ValueError("constant must be positive")
    a, b = params.alpha, params.beta
    if a >= 1.0:
        raise ValueError("alpha must be below 1")
    s1, s2 = params.s1, params.s2
    lhs = a * (1.0 - b) ** 2 * s1 ** 2 * s2 ** 2 * math.log(1.0 / a) / (s1 + s2)
    rhs = constant * params.gamma * math.log(n) ** 2 / n
    return ConditionReport(
        quantities={"alpha": a, "beta": b, "gamma": params.gamma, "lhs": lhs, "rhs": rhs, "n": n},
        satisfied=lhs >= rhs,
    )


def partial_recovery_condition(
    params: ModelParams, n: int, delta: float, constant: float = 1.0,
) -> ConditionReport:
    """Robustness check: approximate minimizers map >= (1-delta) n nodes right.

    Returns the tolerated cost slack per pair, eps = constant * (delta -
    delta^2/2) * alpha (1-beta) s1 s2 log(1/alpha), and the recovery condition
    with its n relaxed by the (1 - delta/2) factor.
    """
    if not (0.0 <= delta <= 1.0):
        raise ValueError("delta must lie in [0, 1]")
    if constant <= 0:
        raise ValueError("constant must be positive")
    a, b = params.alpha, params.beta
    s1, s2 = params.s1, params.s2
    eps = constant * (delta - delta ** 2 / 2.0) * a * (1.0 - b) * s1 * s2 * math.log(1.0 / a)
    lhs = a * (1.0 - b) ** 2 * s1 ** 2 * s2 ** 2 * math.log(1.0 / a) / (s1 + s2)
    rhs = constant * params.gamma * math.log(n) ** 2 / ((1.0 - delta / 2.0) * n)
    return ConditionReport(
        quantities={"alpha": a, "beta": b, "gamma": params.gamma, "delta": delta,
                    "eps": eps, "lhs": lhs, "rhs": rhs, "n": n},
        satisfied=lhs >= rhs,
    )


def bad_mapping_bound(params: ModelParams, n: int) -> float:
    """Upper bound on the expected number of incorrect mappings that score at
    least as well as the truth.

    Evaluates, in log space, the finite sum over k = 2..n of
    2 n^k exp(-k^2 [(n-k/2-1) w_min alpha (1-beta) s1 s2]^2 /
              (6 (nk - k^2/2 - k) w_max alpha (s1+s2)))
    where w_max/w_min use the xor-overlap weight variant at alpha/beta.
    Saturates at 1e300 instead of overflowing.
    """
    a, b = params.alpha, params.beta
    s1, s2 = params.s1, params.s2
    w_max = weight(a, s1, s2, overlap="xor")
    w_min = weight(b, s1, s2, overlap="xor")
    log_terms = []
    for k in range(2, n + 1):
        num = (k * ((n - k / 2.0 - 1.0) * w_min * a * (1.0 - b) * s1 * s2)) ** 2
        den = 6.0 * (n * k - k * k / 2.0 - k) * w_max * a * (s1 + s2)
        if den <= 0:
            continue
        log_terms.append(math.log(2.0) + k * math.log(n) - num / den)
    if not log_terms:
        return 0.0
    peak = max(log_terms)
    if peak > 690.0:  # would overflow exp; the bound is vacuous anyway
        return 1e300
    total = math.log(math.fsum(math.exp(t - peak) for t in log_terms)) + peak
    return min(math.exp(total), 1e300) if total < 690.0 else 1e300
