"""Transition matrices of finite Cayley graphs, their spectra, and mixing checks.

For a symmetric generating multiset S the simple walk matrix
P(x, y) = #{s in S : y = x s} / |S| is symmetric and doubly stochastic, and
the lazy matrix L = I/2 + P/2 has spectrum in [0, 1]. Writing mu_2 for the
second largest eigenvalue of L, the walk started at the identity satisfies

    || sigma L^n - uniform ||_2 <= mu_2^n,
    | P(X_n in N) - 1/[G:N] |  <= mu_2^n,

and ``verify_mixing_bound`` checks both step by step.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, identity
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import NumericalError, UsageError
from .tables import FiniteGroupTable

FULL_SPECTRUM_CAP = 3000
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
ITERATIVE_TOL = 1e-8
MIXING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Simple-walk matrix P of Cay(table, S); ``lazy`` selects L = I/2 + P/2 in views."""

    table: FiniteGroupTable
    P: csr_matrix = field(repr=False)
    lazy: bool = True

    @property
    def order(self) -> int:
        return self.P.shape[0]

    def operator(self) -> csr_matrix:
        if not self.lazy:
            return self.P
        return (0.5 * identity(self.order, format="csr") + 0.5 * self.P).tocsr()

    def dense(self) -> np.ndarray:
        return self.operator().toarray()


def _as_table(target) -> FiniteGroupTable:
    inner = getattr(target, "target", None)
    if isinstance(inner, FiniteGroupTable):
        return inner
    inner = getattr(target, "table", None)
    if isinstance(inner, FiniteGroupTable):
        return inner
    return target


def build_lazy_transition(target, lazy: bool = True) -> TransitionMatrix:
    """Transition matrix of Cay(G, S) for a finite table (or the target of a quotient map)."""
    table = _as_table(target)
    gens = table.generators
    if not gens:
        raise UsageError(f"{table.name} has no generators")
    if Counter(gens) != Counter(int(table.inv[s]) for s in gens):
        raise UsageError(f"generating multiset of {table.name} is not closed under inverses")
    n, k = table.order, len(gens)
    rows = np.repeat(np.arange(n), k)
    cols = table.action.reshape(-1).astype(np.int64)
    P = csr_matrix((np.full(n * k, 1.0 / k), (rows, cols)), shape=(n, n))
    P.sum_duplicates()
    return TransitionMatrix(table, P, lazy)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending; only the top two in iterative mode
    mu2: float
    residual: float
    method: str


def _matrix(M) -> np.ndarray:
    A = M.dense() if isinstance(M, TransitionMatrix) else np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T, atol=1e-12, rtol=0):
        raise UsageError("matrix is not symmetric")
    return A


def jacobi_eigenvalues(A: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi rotations; returns (eigenvalues descending, off-diagonal norm reached)."""
    A = np.array(A, dtype=float)
    n = len(A)
    scale = max(np.linalg.norm(A), 1.0)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * scale:
            return np.sort(np.diag(A))[::-1], off
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                rp, rq = A[p].copy(), A[q].copy()
                A[p], A[q] = c * rp - s * rq, s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * cp - s * cq, s * cp + c * cq
    off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
    raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps", residual=off)


def _second_eigenvalue(M: TransitionMatrix, tol: float) -> Spectrum:
    """mu_2 of a lazy walk by Lanczos on L restricted to the complement of constants."""
    L = M.operator()
    n = M.order

    def apply(v):
        v = np.ravel(v)
        v = v - v.mean()
        w = L @ v
        return w - w.mean()

    op = LinearOperator((n, n), matvec=apply, dtype=float)
    v0 = np.cos(np.arange(n) + 0.5)  # fixed start vector for reproducibility
    try:
        vals, vecs = eigsh(op, k=1, which="LA", tol=tol * 1e-2, v0=v0, maxiter=20 * n)
    except ArpackNoConvergence as exc:
        raise NumericalError("Lanczos iteration for mu_2 did not converge", residual=float("nan")) from exc
    mu2, vec = float(vals[0]), vecs[:, 0]
    residual = float(np.linalg.norm(apply(vec) - mu2 * vec))
    if residual > tol:
        raise NumericalError(f"mu_2 residual {residual:.3e} above {tol:.1e}", residual=residual)
    return Spectrum(np.array([1.0, mu2]), mu2, residual, "iterative")


def symmetric_spectrum(M, method: str | None = None, cap: int = FULL_SPECTRUM_CAP) -> Spectrum:
    """Eigenvalues (descending) of a symmetric matrix or transition matrix.

    ``method`` is "eigh" (LAPACK), "jacobi" or "iterative"; by default the
    full spectrum is computed up to order ``cap`` and only mu_2 beyond it.
    """
    n = M.order if isinstance(M, TransitionMatrix) else len(M)
    if method is None:
        method = "eigh" if n <= cap else "iterative"
    if method == "iterative":
        if not isinstance(M, TransitionMatrix) or not M.lazy:
            raise UsageError("iterative mode needs a lazy TransitionMatrix")
        return _second_eigenvalue(M, ITERATIVE_TOL)
    A = _matrix(M)
    if method == "eigh":
        vals, vecs = np.linalg.eigh(A)
        vals, vecs = vals[::-1], vecs[:, ::-1]
        residual = float(np.max(np.abs(A @ vecs - vecs * vals))) if n else 0.0
    elif method == "jacobi":
        vals, residual = jacobi_eigenvalues(A)
    else:
        raise UsageError(f"unknown spectrum method {method!r}")
    mu2 = float(vals[1]) if n > 1 else float("nan")
    return Spectrum(vals, mu2, residual, method)


@dataclass(frozen=True)
class MixingReport:
    name: str
    order: int
    mu2: float
    n_max: int
    max_slack: float  # max over n and both bounds of lhs - rhs; <= tol means pass
    violations: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "group": self.name,
            "order": self.order,
            "mu2": self.mu2,
            "check": "pass" if self.passed else "fail",
            "max_slack": self.max_slack,
            "violations": [list(v) for v in self.violations],
        }


def verify_mixing_bound(target, n_max: int, tol: float = MIXING_TOL) -> MixingReport:
    """Check the l2 and kernel-probability mixing bounds for every n <= n_max."""
    from .walks import distribution_path

    table = _as_table(target)
    spec = symmetric_spectrum(build_lazy_transition(table))
    mu2 = min(max(spec.mu2, 0.0), 1.0)
    uniform = 1.0 / table.order
    worst, bad = -np.inf, []
    rhs = 1.0
    for dv in distribution_path(table, n_max):
        l2 = float(np.linalg.norm(dv.probs - uniform))
        kern = abs(dv.at_identity - uniform)
        for label, lhs in (("l2", l2), ("kernel", kern)):
            slack = lhs - rhs
            worst = max(worst, slack)
            if slack > tol:
                bad.append((dv.n, label, lhs, rhs))
        rhs *= mu2
    return MixingReport(table.name, table.order, spec.mu2, n_max, float(worst), tuple(bad))
