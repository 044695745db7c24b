"""Normal subgroups, quotient maps and intersection-growth tables.

``lambda_table(G, K)`` returns the indices i_G(k) = [G : Lambda_k] for
2 <= k <= K, where Lambda_k is the intersection of all normal subgroups of
index at most k.

Per family:

* Z: Lambda_k = m_k Z with m_k = lcm(1..k).
* Z^d: Lambda_k = (m_k Z)^d, index m_k^d. Any quotient of order j <= k has
  exponent dividing m_k, so m_k Z^d lies in every kernel; the coordinate
  maps Z^d -> Z/j give the reverse inclusion.
* finite tables: direct enumeration.
* Heisenberg H: a normal subgroup N of index j contains a^j, b^j and c^j
  (c = [a, b] central), and these generate the kernel of H -> H(Z/j).
  So every quotient of order j <= k factors through H(Z/j), hence through
  H(Z/m_k), and Lambda_k is the preimage of Lambda_k(H(Z/m_k)). The latter
  is computed factor by factor through H(Z/m) = prod H(Z/p^a).
* products: enumeration on the product of the k-truncated quotients
  G/Lambda_k(G) x H/Lambda_k(H); every normal N of index <= k in G x H
  meets each factor in a normal subgroup of index <= k, so it contains
  Lambda_k(G) x Lambda_k(H).
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import groups as grp
from . import tables
from .errors import CapacityError, UsageError
from .tables import FiniteGroupTable

ENUMERATION_CAP = 5000
HEISENBERG_K_CAP = 16
PRODUCT_ENUMERATION_CAP = 1000  # abelian products have many normal subgroups; 60x60 takes ~1 min
LAMBDA_CSV_VERSION = "lambda-table/1"


@dataclass(frozen=True)
class NormalSubgroup:
    members: tuple[int, ...]
    ambient_order: int

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def index(self) -> int:
        return self.ambient_order // len(self.members)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.ambient_order, dtype=bool)
        m[list(self.members)] = True
        return m

    def __contains__(self, g: int) -> bool:
        return g in self._set

    @cached_property
    def _set(self) -> frozenset:
        return frozenset(self.members)


def conjugacy_classes(table: FiniteGroupTable) -> list[np.ndarray]:
    """Orbits of conjugation, ordered by smallest member."""
    mul, inv, n = table.require_mul(), table.inv, table.order
    gens = sorted(set(table.generators))
    rows = np.tile(np.arange(n), len(gens))
    cols = np.concatenate([mul[inv[s], mul[:, s]] for s in gens]) if gens else np.arange(0)
    graph = csr_matrix((np.ones(len(cols)), (rows[: len(cols)], cols)), shape=(n, n))
    _, label = connected_components(graph, directed=True, connection="weak")
    order = np.argsort(label, kind="stable")
    bounds = np.flatnonzero(np.diff(label[order])) + 1
    classes = np.split(order, bounds)
    return sorted(classes, key=lambda c: int(c[0]))


def _close(mul: np.ndarray, mask: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Right-multiplication closure of the set ``mask`` by ``seeds``.

    When ``mask`` is a normal subgroup N and ``seeds`` a normal subset C,
    this is the subgroup N<C>.
    """
    mask = mask.copy()
    frontier = np.flatnonzero(mask)
    while len(frontier):
        new = mul[np.ix_(frontier, seeds)].ravel()
        new = np.unique(new[~mask[new]])
        mask[new] = True
        frontier = new
    return mask


@lru_cache(maxsize=64)
def _enumerate_masks(table: FiniteGroupTable) -> tuple:
    mul, n = table.require_mul(), table.order
    trivial = np.zeros(n, dtype=bool)
    trivial[table.identity] = True
    closures = {}
    for cls in conjugacy_classes(table):
        m = _close(mul, trivial, cls)
        closures.setdefault(np.packbits(m).tobytes(), (m, cls))
    closures = list(closures.values())
    found = {np.packbits(trivial).tobytes(): trivial}
    stack = [trivial]
    while stack:
        base = stack.pop()
        for m, cls in closures:
            if not (m & ~base).any():
                continue
            joined = _close(mul, base, cls)
            key = np.packbits(joined).tobytes()
            if key not in found:
                found[key] = joined
                stack.append(joined)
    return tuple(found.values())


def enumerate_normal_subgroups(table: FiniteGroupTable, cap: int = ENUMERATION_CAP) -> list[NormalSubgroup]:
    """All normal subgroups, sorted by (order, members).

    Normal subgroups are unions of conjugacy classes; each is a join of
    normal closures of single classes, so a join-lattice search from the
    trivial subgroup over those closures reaches all of them.
    """
    if table.order > cap:
        raise CapacityError(f"{table.name} has order {table.order}, above the enumeration cap {cap}")
    subs = [NormalSubgroup(tuple(int(i) for i in np.flatnonzero(m)), table.order) for m in _enumerate_masks(table)]
    return sorted(subs, key=lambda s: (s.order, s.members))


def lambda_masks(table: FiniteGroupTable, K: int, cap: int = ENUMERATION_CAP) -> dict[int, np.ndarray]:
    """Membership masks of Lambda_k for 0 <= k <= K (Lambda_0 = Lambda_1 = G)."""
    subs = enumerate_normal_subgroups(table, cap)
    out = {}
    acc = np.ones(table.order, dtype=bool)
    for k in range(0, K + 1):
        for s in subs:
            if s.index == k:
                acc &= s.mask()
        out[k] = acc.copy()
    return out


def lcm_sequence(K: int) -> list[int]:
    """[m_2, ..., m_K] with m_k = lcm(1, ..., k)."""
    if K < 2:
        raise UsageError(f"K must be at least 2, got {K}")
    out, m = [], 1
    for k in range(2, K + 1):
        m = math.lcm(m, k)
        if m > grp.INT64_MAX:
            raise CapacityError(f"lcm(1..{k}) exceeds the 64-bit range", partial=out)
        out.append(m)
    return out


def lcm_upto(k: int) -> int:
    return math.lcm(*range(1, k + 1)) if k >= 1 else 1


@dataclass
class LambdaTable:
    group: str
    K: int
    indices: dict[int, int]
    provenance: dict[int, str]
    tail_note: str = ""

    def index(self, k: int) -> int:
        if k <= 1:
            return 1
        return self.indices[k]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {LAMBDA_CSV_VERSION} group={self.group} K={self.K}\n")
        if self.tail_note:
            buf.write(f"# tail: {self.tail_note}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "index", "provenance"])
        for k in range(2, self.K + 1):
            w.writerow([k, self.indices[k], self.provenance[k]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "LambdaTable":
        meta, note, rows = {}, "", []
        for line in text.splitlines():
            if line.startswith("# tail: "):
                note = line[len("# tail: ") :]
            elif line.startswith("#"):
                parts = line[1:].split()
                if parts[0] != LAMBDA_CSV_VERSION:
                    raise UsageError(f"unsupported lambda CSV version {parts[0]!r}")
                meta = dict(p.split("=", 1) for p in parts[1:])
            elif line.strip():
                rows.append(line)
        reader = csv.DictReader(rows)
        indices, prov = {}, {}
        for r in reader:
            indices[int(r["k"])] = int(r["index"])
            prov[int(r["k"])] = r["provenance"]
        return cls(meta.get("group", "?"), int(meta.get("K", max(indices, default=1))), indices, prov, note)


# -- quotient maps ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuotientMap:
    """Surjection from an infinite (or finite) group onto a finite table.

    ``target.generators`` are the images of ``source.generators`` in order,
    so the lazy walk on the source pushes forward to the lazy walk on
    Cay(target, image of S).
    """

    source: grp.Group
    target: FiniteGroupTable
    fn: Callable = field(repr=False)
    kernel: str = ""

    def __post_init__(self):
        images = tuple(self.fn(s) for s in self.source.generators)
        if images != tuple(self.target.generators):
            raise UsageError(f"quotient {self.kernel!r}: generator images {images} do not match the target generators")

    def __call__(self, g) -> int:
        return self.fn(g)


def integer_mod(m: int) -> QuotientMap:
    return QuotientMap(grp.Z, tables.cyclic(m), lambda g: g % m, f"mod {m}")


def lattice_mod(d: int, m: int) -> QuotientMap:
    target = tables.cyclic(m)
    for _ in range(d - 1):
        target = tables.direct_product(target, tables.cyclic(m))

    def fn(g):
        idx = 0
        for a in g:
            idx = idx * m + a % m
        return idx

    return QuotientMap(grp.LatticeGroup(d), target, fn, f"mod {m} coordinatewise")


def heisenberg_mod(m: int) -> QuotientMap:
    def fn(g):
        x, y, z = g
        return ((x % m) * m + y % m) * m + z % m

    return QuotientMap(grp.HEISENBERG, tables.heisenberg_mod(m), fn, f"Heisenberg mod {m}")


def table_identity(G: grp.FiniteTableGroup, kernel: str = "trivial") -> QuotientMap:
    return QuotientMap(G, G.table, lambda g: g, kernel)


def free_parity() -> QuotientMap:
    """F2 -> Z/2 by word length parity."""
    target = tables.regenerate(tables.cyclic(2), (1, 1, 1, 1), "Z/2 (F2 parity)")
    return QuotientMap(grp.F2, target, lambda w: len(w) % 2, "even word length")


def parse_quotient(spec: str) -> QuotientMap:
    """``Z/m``, ``Z^d/m``, ``H/m`` as quotients of Z, Z^d, H; other finite specs map identically."""
    m = re.fullmatch(r"Z\^(\d+)/(\d+)", spec)
    if m:
        return lattice_mod(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"Z/(\d+)", spec)
    if m:
        return integer_mod(int(m.group(1)))
    m = re.fullmatch(r"H/(\d+)", spec)
    if m:
        return heisenberg_mod(int(m.group(1)))
    G = grp.parse_group(spec)
    if not isinstance(G, grp.FiniteTableGroup):
        raise UsageError(f"{spec!r} does not name a finite quotient")
    return table_identity(G, kernel=spec)


# -- Heisenberg through congruence quotients -------------------------------


def prime_power_parts(m: int) -> list[int]:
    parts, p = [], 2
    while p * p <= m:
        if m % p == 0:
            q = 1
            while m % p == 0:
                m //= p
                q *= p
            parts.append(q)
        p += 1
    if m > 1:
        parts.append(m)
    return parts


@lru_cache(maxsize=None)
def _heisenberg_table(q: int) -> FiniteGroupTable:
    return tables.heisenberg_mod(q)


@lru_cache(maxsize=None)
def heisenberg_factor_lambda(q: int, k: int) -> np.ndarray:
    """Lambda_k of H(Z/q) as a mask over its elements (index (x*q + y)*q + z)."""
    return lambda_masks(_heisenberg_table(q), k)[k]


def heisenberg_crt_lambda(m: int, k: int) -> list[tuple[int, np.ndarray]]:
    """Lambda_k of H(Z/m) as factors [(p^a, mask over H(Z/p^a))] for p^a || m."""
    return [(q, heisenberg_factor_lambda(q, k)) for q in prime_power_parts(m)]


def _heis_index(g, q: int) -> int:
    x, y, z = g
    return ((x % q) * q + y % q) * q + z % q


def crt_contains(factors, g) -> bool:
    return all(mask[_heis_index(g, q)] for q, mask in factors)


def heisenberg_lambda_index(k: int, cap: int = HEISENBERG_K_CAP) -> int:
    if k <= 1:
        return 1
    if k > cap:
        raise CapacityError(f"Heisenberg Lambda_k is computed only up to k = {cap}")
    out = 1
    for q, mask in heisenberg_crt_lambda(lcm_upto(k), k):
        out *= q**3 // int(mask.sum())
    return out


def heisenberg_in_lambda(g, k: int, cap: int = HEISENBERG_K_CAP) -> bool:
    """g in Lambda_k(H) for the integer Heisenberg group."""
    if k <= 1:
        return True
    if k > cap:
        raise CapacityError(f"Heisenberg Lambda_k is computed only up to k = {cap}")
    return crt_contains(heisenberg_crt_lambda(lcm_upto(k), k), g)


# -- truncated quotients G / Lambda_k(G) -----------------------------------


def truncated_quotient(G: grp.Group, k: int) -> tuple[FiniteGroupTable, Callable]:
    """The finite group G / Lambda_k(G) and the projection onto it."""
    if isinstance(G, grp.IntegerGroup):
        m = lcm_upto(k)
        return tables.cyclic(m), lambda g: g % m
    if isinstance(G, grp.LatticeGroup):
        return lattice_mod(G.d, lcm_upto(k)).target, lattice_mod(G.d, lcm_upto(k)).fn
    if isinstance(G, grp.FiniteTableGroup):
        q, coset_of = tables.quotient_table(G.table, np.flatnonzero(lambda_masks(G.table, k)[k]))
        return q, lambda g: int(coset_of[g])
    if isinstance(G, grp.HeisenbergGroup):
        parts = []
        for qmod, mask in heisenberg_crt_lambda(lcm_upto(k), k):
            qt, coset_of = tables.quotient_table(_heisenberg_table(qmod), np.flatnonzero(mask))
            parts.append((qmod, qt, coset_of))
        table = parts[0][1]
        for _, qt, _ in parts[1:]:
            table = tables.direct_product(table, qt)

        def proj(g):
            idx = 0
            for qmod, qt, coset_of in parts:
                idx = idx * qt.order + int(coset_of[_heis_index(g, qmod)])
            return idx

        return table, proj
    if isinstance(G, grp.ProductGroup):
        lt, lf = truncated_quotient(G.left, k)
        rt, rf = truncated_quotient(G.right, k)
        prod = tables.direct_product(lt, rt)
        q, coset_of = tables.quotient_table(prod, np.flatnonzero(lambda_masks(prod, k)[k]))
        n2 = rt.order
        return q, lambda g: int(coset_of[lf(g[0]) * n2 + rf(g[1])])
    raise UsageError(f"no truncated quotients for family {G.family}")


def lambda_table(G: grp.Group, K: int, heisenberg_cap: int = HEISENBERG_K_CAP) -> LambdaTable:
    if K < 1:
        raise UsageError(f"K must be positive, got {K}")
    name = G.spec
    if isinstance(G, grp.IntegerGroup):
        seq = lcm_sequence(K) if K >= 2 else []
        idx = {k: m for k, m in zip(range(2, K + 1), seq)}
        return LambdaTable(name, K, idx, dict.fromkeys(idx, "formula"), "lcm-tail")
    if isinstance(G, grp.LatticeGroup):
        seq = lcm_sequence(K) if K >= 2 else []
        idx = {k: m**G.d for k, m in zip(range(2, K + 1), seq)}
        return LambdaTable(name, K, idx, dict.fromkeys(idx, "formula"), f"geometric (m_k^{G.d})")
    if isinstance(G, grp.FiniteTableGroup):
        masks = lambda_masks(G.table, K)
        idx = {k: G.table.order // int(masks[k].sum()) for k in range(2, K + 1)}
        return LambdaTable(name, K, idx, dict.fromkeys(idx, "enumeration"), "finite group: indices stabilise at |G|")
    if isinstance(G, grp.HeisenbergGroup):
        if K > heisenberg_cap:
            raise CapacityError(f"Heisenberg lambda table is capped at K = {heisenberg_cap}, got {K}")
        idx = {k: heisenberg_lambda_index(k, heisenberg_cap) for k in range(2, K + 1)}
        return LambdaTable(name, K, idx, dict.fromkeys(idx, "congruence"), "none (no tail bound known)")
    if isinstance(G, grp.ProductGroup):
        idx, prov = {}, {}
        for k in range(2, K + 1):
            try:
                lt, _ = truncated_quotient(G.left, k)
                rt, _ = truncated_quotient(G.right, k)
                if lt.order * rt.order > PRODUCT_ENUMERATION_CAP:
                    raise CapacityError("product of truncated quotients above the enumeration cap")
                q, _ = truncated_quotient(G, k)
                idx[k], prov[k] = q.order, "enumeration"
            except CapacityError:
                # Lambda_k(G x H) = Lambda_k(G) x Lambda_k(H); see module docstring
                left = lambda_table(G.left, k, heisenberg_cap)
                right = lambda_table(G.right, k, heisenberg_cap)
                idx[k], prov[k] = left.index(k) * right.index(k), "product-rule"
        return LambdaTable(name, K, idx, prov, "none")
    raise UsageError(f"no lambda table for family {G.family}")
