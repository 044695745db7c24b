"""Independent brute-force references used by the tests.

Nothing here imports the algorithms under test beyond the basic table
constructors; each oracle is the slowest obviously-correct computation.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def unitriangular(g):
    x, y, z = g
    return np.array([[1, x, z], [0, 1, y], [0, 0, 1]], dtype=object)


def from_unitriangular(M):
    return (int(M[0, 1]), int(M[1, 2]), int(M[0, 2]))


def heisenberg_mul_matrix(g, h):
    return from_unitriangular(unitriangular(g).dot(unitriangular(h)))


def normal_subgroups_by_subsets(mul: np.ndarray, identity: int = 0) -> list[frozenset]:
    """All normal subgroups by checking every subset containing the identity."""
    n = len(mul)
    inv = [int(np.flatnonzero(mul[a] == identity)[0]) for a in range(n)]
    others = [a for a in range(n) if a != identity]
    found = []
    for r in range(len(others) + 1):
        for combo in itertools.combinations(others, r):
            S = frozenset(combo) | {identity}
            if any(mul[a, b] not in S for a in S for b in S):
                continue
            if any(mul[mul[inv[g], a], g] not in S for g in range(n) for a in S):
                continue
            found.append(S)
    return found


def integer_walk_distribution(n: int) -> dict[int, Fraction]:
    """Exact law of X_n for the lazy +-1 walk by enumerating all 3^n step sequences."""
    weight = {0: Fraction(1, 2), 1: Fraction(1, 4), -1: Fraction(1, 4)}
    out: dict[int, Fraction] = {}
    counts: dict[tuple[int, int], int] = {}
    for steps in itertools.product((0, 1, -1), repeat=n):
        key = (sum(steps), steps.count(0))
        counts[key] = counts.get(key, 0) + 1
    for (x, stays), c in counts.items():
        out[x] = out.get(x, Fraction(0)) + c * Fraction(1, 2) ** stays * Fraction(1, 4) ** (n - stays)
    return out


def integer_depth_by_quotients(g: int) -> int:
    """Least m with g != 0 in Z/m."""
    if g == 0:
        return 0
    m = 2
    while g % m == 0:
        m += 1
    return m


def circulant_lazy_eigenvalues(m: int) -> np.ndarray:
    return np.sort(0.5 + 0.5 * np.cos(2 * np.pi * np.arange(m) / m))[::-1]


def lcm_direct(k: int) -> int:
    out = 1
    for j in range(1, k + 1):
        out = out * j // math.gcd(out, j)
    return out


def is_prime_power(k: int) -> bool:
    if k < 2:
        return False
    p = next(d for d in range(2, k + 1) if k % d == 0)
    while k % p == 0:
        k //= p
    return k == 1


def bfs_ball(identity, gens, mul, n):
    seen, layer = {identity}, [identity]
    balls = [1]
    for _ in range(n):
        nxt = []
        for g in layer:
            for s in gens:
                h = mul(g, s)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        layer = nxt
        balls.append(len(seen))
    return seen, balls
