"""Finite-index sublattices of Z^d through Hermite normal forms.

A sublattice of index N is the row span of a unique upper-triangular
integer matrix with positive diagonal d_1 ... d_d (product N) and entries
0 <= a_ij < d_j above the diagonal. Enumerating these gives every
subgroup (hence every normal subgroup) of Z^d of a given index, which is
the brute-force reference for the Z^d depth and Lambda formulas.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError

HNF_MAX_RANK = 3
HNF_MAX_INDEX = 12


@dataclass(frozen=True)
class Sublattice:
    basis: tuple[tuple[int, ...], ...]  # rows of the HNF

    @property
    def index(self) -> int:
        return math.prod(self.basis[i][i] for i in range(len(self.basis)))

    def __contains__(self, v) -> bool:
        # back-substitution down the triangular basis
        v = list(v)
        for i, row in enumerate(self.basis):
            if v[i] % row[i]:
                return False
            c = v[i] // row[i]
            for j in range(i, len(v)):
                v[j] -= c * row[j]
        return True


def _factorisations(n: int, d: int):
    if d == 1:
        yield (n,)
        return
    for a in range(1, n + 1):
        if n % a == 0:
            for rest in _factorisations(n // a, d - 1):
                yield (a,) + rest


@lru_cache(maxsize=None)
def sublattices(d: int, index: int) -> tuple[Sublattice, ...]:
    """All sublattices of Z^d with the given index."""
    if d > HNF_MAX_RANK or index > HNF_MAX_INDEX:
        raise CapacityError(f"HNF enumeration is limited to rank {HNF_MAX_RANK}, index {HNF_MAX_INDEX}")
    out = []
    for diag in _factorisations(index, d):
        slots = [(i, j) for i in range(d) for j in range(i + 1, d)]
        for values in itertools.product(*(range(diag[j]) for _, j in slots)):
            rows = [[0] * d for _ in range(d)]
            for i in range(d):
                rows[i][i] = diag[i]
            for (i, j), a in zip(slots, values):
                rows[i][j] = a
            out.append(Sublattice(tuple(tuple(r) for r in rows)))
    return tuple(out)


def sublattices_upto(d: int, k: int) -> list[Sublattice]:
    return [L for j in range(1, k + 1) for L in sublattices(d, j)]


def hnf_depth(v: tuple, k_max: int = HNF_MAX_INDEX) -> int | None:
    """Least index of a sublattice missing v, or None if above ``k_max``."""
    if not any(v):
        return 0
    for j in range(2, k_max + 1):
        if any(v not in L for L in sublattices(len(v), j)):
            return j
    return None


def hnf_lambda_index(d: int, k: int) -> int:
    """[Z^d : Lambda_k] by intersecting every sublattice of index <= k.

    A sublattice of index j contains j Z^d, so all of them contain
    lcm(1..k) Z^d and the intersection is read off on the box [0, lcm)^d.
    """
    m = math.lcm(*range(1, k + 1))
    box = np.array(list(itertools.product(range(m), repeat=d)), dtype=np.int64)
    keep = np.ones(len(box), dtype=bool)
    for L in sublattices_upto(d, k):
        keep &= np.array([tuple(row) in L for row in box])
    return m**d // int(keep.sum())
