"""Finite groups as index-based multiplication tables.

Elements are the integers ``0..n-1``; ``labels[i]`` is a hashable
description of element ``i`` (a residue, a coordinate triple, a matrix
flattened to a tuple, ...). The identity always has index 0 for tables
built here.

Every table carries ``action``, the right action of its generating
multiset: ``action[x, i] == x * generators[i]``. The full ``n x n``
multiplication table is optional and only built up to ``TABLE_CAP``;
random walks and transition matrices need nothing beyond ``action``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import CapacityError, UsageError

TABLE_CAP = 5000


@dataclass(frozen=True, eq=False)
class FiniteGroupTable:
    name: str
    labels: tuple
    inv: np.ndarray
    generators: tuple[int, ...]
    action: np.ndarray
    mul: np.ndarray | None = None
    identity: int = 0

    def __post_init__(self):
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})

    def __repr__(self):
        return f"FiniteGroupTable({self.name!r}, order={self.order})"

    @property
    def order(self) -> int:
        return len(self.labels)

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UsageError(f"{label!r} is not an element of {self.name}") from None

    def require_mul(self) -> np.ndarray:
        if self.mul is None:
            raise CapacityError(
                f"{self.name} has order {self.order}; full multiplication tables "
                f"are only built up to order {TABLE_CAP}"
            )
        return self.mul

    def multiply(self, a: int, b: int) -> int:
        return int(self.require_mul()[a, b])

    def is_latin(self) -> bool:
        mul = self.require_mul()
        n = self.order
        target = np.arange(n)
        rows_ok = np.all(np.sort(mul, axis=1) == target)
        cols_ok = np.all(np.sort(mul, axis=0) == target[:, None])
        return bool(rows_ok and cols_ok)


def _finish(name, labels, mul, gens, identity=0) -> FiniteGroupTable:
    mul = np.ascontiguousarray(mul, dtype=np.int32)
    inv = np.argmax(mul == identity, axis=1).astype(np.int32)
    gens = tuple(int(g) for g in gens)
    action = np.ascontiguousarray(mul[:, list(gens)]) if gens else np.zeros((len(labels), 0), np.int32)
    return FiniteGroupTable(name, tuple(labels), inv, gens, action, mul, identity)


def cyclic(m: int, name: str | None = None) -> FiniteGroupTable:
    """Z/m with generating multiset {1, -1} (so ``{1, 1}`` when m == 2)."""
    if m < 1:
        raise UsageError(f"cyclic group order must be positive, got {m}")
    if m > TABLE_CAP:
        raise CapacityError(f"Z/{m} exceeds the table cap {TABLE_CAP}")
    r = np.arange(m)
    mul = np.add.outer(r, r) % m
    return _finish(name or f"Z/{m}", range(m), mul, (1 % m, (-1) % m))


def heisenberg_mod(m: int, name: str | None = None) -> FiniteGroupTable:
    """H(Z/m): triples (x, y, z) mod m with (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y').

    Element (x, y, z) has index (x*m + y)*m + z. Generators a, a^-1, b, b^-1.
    """
    if m < 1:
        raise UsageError(f"modulus must be positive, got {m}")
    n = m**3
    if n > TABLE_CAP:
        raise CapacityError(f"H(Z/{m}) has order {n}, above the table cap {TABLE_CAP}")
    idx = np.arange(n)
    x, y, z = idx // (m * m), (idx // m) % m, idx % m
    px = (x[:, None] + x[None, :]) % m
    py = (y[:, None] + y[None, :]) % m
    pz = (z[:, None] + z[None, :] + x[:, None] * y[None, :]) % m
    mul = (px * m + py) * m + pz
    labels = [(int(a), int(b), int(c)) for a, b, c in zip(x, y, z)]

    def at(a, b, c):
        return ((a % m) * m + b % m) * m + c % m

    gens = (at(1, 0, 0), at(-1, 0, 0), at(0, 1, 0), at(0, -1, 0))
    return _finish(name or f"H/{m}", labels, mul, gens)


def direct_product(left: FiniteGroupTable, right: FiniteGroupTable, name: str | None = None) -> FiniteGroupTable:
    """G x H with generators {(s, e)} followed by {(e, t)}.

    Element (i, j) has index i * |H| + j.
    """
    n1, n2 = left.order, right.order
    if n1 * n2 > TABLE_CAP:
        raise CapacityError(f"product order {n1 * n2} exceeds the table cap {TABLE_CAP}")
    m1, m2 = left.require_mul().astype(np.int64), right.require_mul().astype(np.int64)
    mul = (m1[:, None, :, None] * n2 + m2[None, :, None, :]).reshape(n1 * n2, n1 * n2)
    labels = [(a, b) for a in left.labels for b in right.labels]
    gens = [s * n2 + right.identity for s in left.generators]
    gens += [left.identity * n2 + t for t in right.generators]
    return _finish(name or f"{left.name}x{right.name}", labels, mul, gens, left.identity * n2 + right.identity)


def regenerate(table: FiniteGroupTable, generators, name: str | None = None) -> FiniteGroupTable:
    """Same group with a different generating multiset."""
    mul = table.require_mul()
    return _finish(name or table.name, table.labels, mul, generators, table.identity)


def from_closure(
    name: str,
    identity: Hashable,
    generators: Sequence[Hashable],
    op: Callable[[Hashable, Hashable], Hashable],
    inverse: Callable[[Hashable], Hashable],
    max_order: int = 100_000,
    table_cap: int = TABLE_CAP,
) -> FiniteGroupTable:
    """Close ``generators`` under ``op`` by breadth-first search.

    Elements are indexed in BFS discovery order, so the result is
    deterministic given the generator order. The full multiplication table
    is assembled column by column from the BFS tree (x*g = (x*parent(g))*s)
    when the order is at most ``table_cap``.
    """
    labels = [identity]
    index = {identity: 0}
    parent = [(-1, -1)]
    rows = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        row = []
        for k, s in enumerate(generators):
            y = op(labels[i], s)
            j = index.get(y)
            if j is None:
                j = len(labels)
                if j >= max_order:
                    raise CapacityError(f"{name}: closure exceeds {max_order} elements")
                index[y] = j
                labels.append(y)
                parent.append((i, k))
                queue.append(j)
            row.append(j)
        rows.append(row)
    n = len(labels)
    action = np.asarray(rows, dtype=np.int32).reshape(n, len(generators))
    gens = tuple(int(g) for g in action[0])
    if n <= table_cap:
        mul = np.empty((n, n), dtype=np.int32)
        mul[:, 0] = np.arange(n)
        for g in range(1, n):
            p, k = parent[g]
            mul[:, g] = action[mul[:, p], k]
        return _finish(name, labels, mul, gens)
    inv = np.array([index[inverse(lab)] for lab in labels], dtype=np.int32)
    return FiniteGroupTable(name, tuple(labels), inv, gens, action, None, 0)


def dihedral(n: int) -> FiniteGroupTable:
    """Symmetries of the n-gon, order 2n; labels (k, f) mean r^k f^f."""

    def op(p, q):
        (a, f), (b, g) = p, q
        return ((a + (b if f == 0 else -b)) % n, f ^ g)

    def inverse(p):
        a, f = p
        return ((-a) % n, 0) if f == 0 else p

    r, f = (1 % n, 0), (0, 1)
    return from_closure(f"D{n}", (0, 0), [r, inverse(r), f, f], op, inverse)


def quaternion() -> FiniteGroupTable:
    """Q8 as unit quaternions (a, b, c, d) with generators i, -i, j, -j."""

    def op(p, q):
        a1, b1, c1, d1 = p
        a2, b2, c2, d2 = q
        return (
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def inverse(p):
        a, b, c, d = p
        return (a, -b, -c, -d)

    i, j = (0, 1, 0, 0), (0, 0, 1, 0)
    return from_closure("Q8", (1, 0, 0, 0), [i, inverse(i), j, inverse(j)], op, inverse)


def _mat3_mul(p, q, m):
    return tuple(
        (p[3 * r] * q[c] + p[3 * r + 1] * q[3 + c] + p[3 * r + 2] * q[6 + c]) % m
        for r in range(3)
        for c in range(3)
    )


def _mat3_inv_det1(p, m):
    a, b, c, d, e, f, g, h, i = p
    # adjugate; determinant is 1
    return tuple(
        v % m
        for v in (
            e * i - f * h, c * h - b * i, b * f - c * e,
            f * g - d * i, a * i - c * g, c * d - a * f,
            d * h - e * g, b * g - a * h, a * e - b * d,
        )
    )


def elementary(i: int, j: int, t: int, m: int) -> tuple:
    cells = [1 if r == c else 0 for r in range(3) for c in range(3)]
    cells[3 * i + j] = t % m
    return tuple(cells)


def sl3_mod(m: int) -> FiniteGroupTable:
    """SL_3(Z/m) generated by the elementary matrices e_ij(+1), e_ij(-1), i != j.

    For m == 2 each e_ij(1) equals e_ij(-1), so it appears twice in the
    generating multiset. Orders: 168 for m = 2, 5616 for m = 3 (the latter
    has no full multiplication table).
    """
    if m not in (2, 3):
        raise UsageError(f"SL3(Z/{m}) is supported only for m in (2, 3)")
    gens = []
    for i in range(3):
        for j in range(3):
            if i != j:
                gens += [elementary(i, j, 1, m), elementary(i, j, -1, m)]
    return from_closure(
        f"SL3/{m}",
        (1, 0, 0, 0, 1, 0, 0, 0, 1),
        gens,
        lambda p, q: _mat3_mul(p, q, m),
        lambda p: _mat3_inv_det1(p, m),
    )


def quotient_table(table: FiniteGroupTable, members: Sequence[int], name: str | None = None):
    """Quotient of ``table`` by the normal subgroup with the given members.

    Returns ``(quotient, coset_of)`` where ``coset_of[x]`` is the index of
    the coset of ``x``. Coset indices follow the order of first appearance.
    """
    mul = table.require_mul()
    members = np.asarray(sorted(members), dtype=np.int64)
    coset_of = np.full(table.order, -1, dtype=np.int64)
    reps = []
    for x in range(table.order):
        if coset_of[x] < 0:
            coset_of[mul[x, members]] = len(reps)
            reps.append(x)
    reps = np.asarray(reps)
    qmul = coset_of[mul[np.ix_(reps, reps)]]
    labels = [table.labels[r] for r in reps]
    gens = [int(coset_of[g]) for g in table.generators]
    q = _finish(name or f"{table.name}/N{len(members)}", labels, qmul, gens, int(coset_of[table.identity]))
    return q, coset_of
