"""Presumed limits, divergence evidence and convergence reports.

Since D(g) > k exactly when g lies in Lambda_k \\ {e},

    E[D(X_n)] = sum_{k >= 0} P(X_n in Lambda_k \\ {e}),

and on an infinite group each term tends to 1/[G:Lambda_k] as the walk
equidistributes on G/Lambda_k. The presumed limit is therefore
2 + sum_{k >= 2} 1/[G:Lambda_k], with Lambda_0 = Lambda_1 = G supplying the 2.

Tail bounds
-----------
lcm(1..k) >= 2^k for k >= 7, so beyond any k' >= 7 the Z tail is at most
2^-k'; ``presumed_limit`` adds the explicit terms K < k <= k' to that.
For Z^d the same argument gives terms 1/m_k^d and remainder 2^(-d k').
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import groups as grp
from .errors import UsageError
from .quotients import LambdaTable, lambda_table, lcm_sequence
from .tables import FiniteGroupTable

TAIL_TERMS = 200
DIVERGENCE_THRESHOLD = 2.0
FATOU_N0 = 100
FATOU_SIGMAS = 5.0


@dataclass(frozen=True)
class SeriesEstimate:
    value: float
    exact: Fraction
    K: int
    tail_bound: float | None
    tail_method: str
    divergent: bool = False
    partial_sums: tuple = field(default=(), repr=False)

    @property
    def upper(self) -> float | None:
        return None if self.tail_bound is None else self.value + self.tail_bound


def _lattice_rank(name: str) -> int | None:
    if name == "Z":
        return 1
    m = re.fullmatch(r"Z\^(\d+)", name)
    return int(m.group(1)) if m else None


def _tail(d: int, K: int, k_far: int = TAIL_TERMS) -> float:
    """sum_{k > K} 1 / lcm(1..k)^d, bounded above."""
    k_far = max(k_far, K, 7)
    m, total = math.lcm(*range(1, K + 1)) if K >= 1 else 1, Fraction(0)
    for k in range(K + 1, k_far + 1):
        m = math.lcm(m, k)
        total += Fraction(1, m**d)
    return float(total) + 2.0 ** (-d * k_far)


def presumed_limit(table: LambdaTable, threshold: float = DIVERGENCE_THRESHOLD) -> SeriesEstimate:
    """2 + sum_{k=2}^K 1/[G:Lambda_k] with a tail bound where one is known."""
    exact, sums = Fraction(2), [Fraction(2)]
    for k in range(2, table.K + 1):
        exact += Fraction(1, table.index(k))
        sums.append(exact)
    d = _lattice_rank(table.group)
    if d is not None:
        tail, method = _tail(d, table.K), "lcm-tail" if d == 1 else "geometric"
        divergent = False
    else:
        tail, method = None, "none"
        divergent = divergence_flag(table, threshold).flag
    return SeriesEstimate(float(exact), exact, table.K, tail, method, divergent, tuple(sums))


@dataclass(frozen=True)
class DivergenceReport:
    flag: bool
    partial_sums: tuple
    last_term: Fraction
    threshold: float

    @property
    def diagnostics(self) -> str:
        tail = float(self.partial_sums[-1] - 2) if self.partial_sums else 0.0
        return f"sum_(k>=2) = {tail:.6g} vs threshold {self.threshold:g}; last term {float(self.last_term):.3g}"


def divergence_flag(table: LambdaTable, threshold: float = DIVERGENCE_THRESHOLD) -> DivergenceReport:
    """Heuristic: the k >= 2 sum passed ``threshold`` while the last term is still >= 1/K.

    Finitely many terms never prove divergence; this only reports evidence.
    """
    sums, acc = [Fraction(2)], Fraction(2)
    for k in range(2, table.K + 1):
        acc += Fraction(1, table.index(k))
        sums.append(acc)
    last = Fraction(1, table.index(table.K)) if table.K >= 2 else Fraction(0)
    flag = table.K >= 2 and float(acc - 2) > threshold and last >= Fraction(1, table.K)
    return DivergenceReport(bool(flag), tuple(sums), last, threshold)


def synthetic_table(indices: dict[int, int], name: str = "synthetic") -> LambdaTable:
    K = max(indices)
    return LambdaTable(name, K, dict(indices), dict.fromkeys(indices, "synthetic"), "none")


# -- defect bounds on Z -----------------------------------------------------


def cyclic_mu2(m: int) -> float:
    """Second lazy eigenvalue of Cay(Z/m, {+1, -1})."""
    return 0.0 if m == 2 else 0.5 + 0.5 * math.cos(2 * math.pi / m)


def integer_defect_bound(n: int, K: int, sharp: bool = True) -> float:
    """Bound on partial(K) - sum_{k<=K} P(X_n in Lambda_k minus {0}) for Z.

    Each of the K + 1 terms loses at most P(X_n = 0) to the removed point,
    and |P(X_n in m_k Z) - 1/m_k| <= mu_2(Z/m_k)^n. With ``sharp`` the
    second part is dropped: P(X_n in m Z) = (1/m) sum_j mu_j^n >= 1/m
    because every lazy eigenvalue is non-negative.
    """
    from .walks import prob_zero_integer_walk

    p0 = prob_zero_integer_walk(n)
    if sharp or K < 2:
        return (K + 1) * p0
    return (K + 1) * p0 + sum(cyclic_mu2(m) ** n for m in lcm_sequence(K))


# -- convergence report ----------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    n: int
    estimate: float
    stderr: float | None  # None for exact rows
    partial: float
    tail_bound: float | None
    defect_bound: float | None
    fatou_ok: bool
    cap_hits: int = 0

    @property
    def exact(self) -> bool:
        return self.stderr is None

    @property
    def gap(self) -> float:
        return self.partial - self.estimate


@dataclass(frozen=True)
class ConvergenceReport:
    group: str
    K: int
    limit: SeriesEstimate
    rows: tuple[ReportRow, ...]
    n0: int
    trials: int | None
    seed: int | None

    @property
    def fatou_violations(self) -> list[int]:
        return [r.n for r in self.rows if not r.fatou_ok]


def convergence_report(
    G: grp.Group,
    n_grid,
    K: int,
    trials: int = 10_000,
    seed: int = 0,
    exact: bool | None = None,
    n0: int = FATOU_N0,
    threads: int | None = None,
) -> ConvergenceReport:
    """E[D(X_n)] against the K-partial presumed limit for each n in ``n_grid``.

    Exact rows (Z only) compare E[D(X_n)] itself; Monte Carlo rows estimate
    E[min(D(X_n), K + 1)], whose limit is exactly the K-partial sum. The
    Fatou column fails a row with n >= n0 whose value sits below
    partial - allowance by more than 5 standard errors (exact rows: below
    partial - defect bound at all).
    """
    from .walks import WalkConfig, exact_expected_depth_integer, monte_carlo_expected_depth

    if isinstance(G, grp.FreeGroup2):
        raise UsageError("no intersection-growth table for F2; convergence reports are unsupported")
    if exact is None:
        exact = isinstance(G, grp.IntegerGroup)
    if exact and not isinstance(G, grp.IntegerGroup):
        raise UsageError(f"exact expected depth is only available for Z, not {G.spec}")
    table = lambda_table(G, K)
    limit = presumed_limit(table)
    rows = []
    for n in n_grid:
        if exact:
            est = float(exact_expected_depth_integer(n))
            defect = integer_defect_bound(n, K)
            ok = est >= limit.value - defect - 1e-12
            rows.append(ReportRow(n, est, None, limit.value, limit.tail_bound, defect, ok))
        else:
            mc = monte_carlo_expected_depth(WalkConfig(G, n, seed, trials), cap=K, threads=threads)
            allowance = integer_defect_bound(n, K) if isinstance(G, grp.IntegerGroup) else 0.0
            ok = n < n0 or mc.mean >= limit.value - allowance - FATOU_SIGMAS * mc.stderr
            rows.append(ReportRow(n, mc.mean, mc.stderr, limit.value, limit.tail_bound, allowance, ok, mc.cap_hits))
    return ConvergenceReport(G.spec, K, limit, tuple(rows), n0, None if exact else trials, None if exact else seed)


# -- finite-level identities ------------------------------------------------


def uniform_average_depth(table: FiniteGroupTable) -> tuple[Fraction, Fraction]:
    """Mean depth under the uniform measure, computed two ways.

    Returns (sum_k k * mu(D = k), sum_l mu(Lambda_l minus {e})); the two agree
    by swapping the order of summation.
    """
    from .depth import table_depth_array
    from .quotients import lambda_masks

    n = table.order
    depths = table_depth_array(table)
    by_value = Fraction(int(depths.sum()), n)
    top = int(depths.max())
    masks = lambda_masks(table, top)
    by_layers = sum((Fraction(int(masks[l].sum()) - 1, n) for l in range(top + 1)), Fraction(0))
    return by_value, by_layers


def domination_partial_sums(K: int, n_max: int) -> list[float]:
    """Partial sums over k = 2..K of p_k = sup_{n <= n_max} P(X_n in m_k Z minus {0})."""
    from .walks import prob_multiple_curve

    out, acc = [], 0.0
    for m in lcm_sequence(K):
        acc += float(np.max(prob_multiple_curve(m, n_max))) if m <= n_max else 0.0
        out.append(acc)
    return out
