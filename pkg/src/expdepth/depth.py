"""Depth function D_G and residual finiteness growth F_G^S.

D_G(g) is the smallest order of a finite quotient of G in which g maps to
a non-identity element; D_G(e) = 0.

Heisenberg formula
------------------
Every finite-index normal subgroup of the integer Heisenberg group has
the form

    N(t, L, phi) = {(x, y, z) : (x, y) in L, z = phi(x, y) mod t}

with t >= 1, L a finite-index sublattice of t Z^2 and phi in Hom(L, Z/t);
its index is t * [Z^2 : L] (t is fixed by N meeting the centre in <c^t>;
the commutators [a, n], [b, n] are c^y, c^-x, which forces L into t Z^2,
and then the cocycle x*y' vanishes mod t so any phi works). Minimising the
index over subgroups missing g = (x, y, z) gives, with G = gcd(x, y):

* t = 1: the abelian quotients, depth D_Z(G).
* t >= 2, t | G: t^3 when t does not divide z; otherwise t^3 * f with f
  the least divisor of G/t such that t does not divide G/(t f).

``heisenberg_depth_scan`` computes the same quantity the slow way, by
enumerating normal subgroups of H(Z/j); the tests hold the two together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import groups as grp
from . import quotients, tables
from .errors import CapacityError, UsageError

DEFAULT_CAP = 64
BALL_BUDGET = 2_000_000
GROWTH_CAP = 10**9  # growth tables need exact values, not capped ones


@dataclass(frozen=True)
class DepthResult:
    value: int | None
    method: str
    witness: str | None = None
    upper_bound: int | None = None
    lower_bound: int = 0
    cap: int | None = None

    @property
    def exact(self) -> bool:
        return self.value is not None

    @property
    def exceeds_cap(self) -> bool:
        return self.value is None and self.cap is not None and self.lower_bound > self.cap

    def capped(self, cap: int) -> int:
        """Value with everything beyond ``cap`` collapsed to ``cap + 1``."""
        if self.value is not None and self.value <= cap:
            return self.value
        return cap + 1

    def to_json(self) -> dict:
        if self.value is not None:
            value = self.value
        elif self.exceeds_cap:
            value = f"exceeds cap {self.cap}"
        else:
            value = None
        return {
            "value": value,
            "method": self.method,
            "witness": self.witness,
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
        }


def _result(value: int, method: str, witness: str, cap: int) -> DepthResult:
    if value <= cap:
        return DepthResult(value, method, witness, value, value, cap)
    return DepthResult(None, method, witness, value, cap + 1, cap)


def smallest_nondivisor(n: int) -> int:
    """min{m >= 2 : m does not divide n}; n must be nonzero."""
    m = 2
    while n % m == 0:
        m += 1
    return m


def integer_depth(g: int, cap: int = DEFAULT_CAP) -> DepthResult:
    if g == 0:
        return DepthResult(0, "formula", None, 0, 0, cap)
    m = smallest_nondivisor(g)
    return _result(m, "formula", f"Z -> Z/{m}", cap)


def lattice_depth(g: tuple, cap: int = DEFAULT_CAP) -> DepthResult:
    content = math.gcd(*g)
    if content == 0:
        return DepthResult(0, "formula", None, 0, 0, cap)
    m = smallest_nondivisor(content)
    coord = next(i for i, a in enumerate(g) if a % m)
    return _result(m, "formula", f"Z^{len(g)} -> Z/{m} on coordinate {coord}", cap)


@lru_cache(maxsize=64)
def _by_index(table: tables.FiniteGroupTable) -> tuple:
    subs = quotients.enumerate_normal_subgroups(table)
    return tuple(sorted(subs, key=lambda s: (s.index, s.members)))


def table_depth(g: int, table: tables.FiniteGroupTable, cap: int = DEFAULT_CAP) -> DepthResult:
    """Depth by enumeration; witness is the lexicographically least detecting subgroup."""
    if g == table.identity:
        return DepthResult(0, "enumeration", None, 0, 0, cap)
    for sub in _by_index(table):
        if g not in sub:
            head = ",".join(map(str, sub.members[:8])) + ("..." if sub.order > 8 else "")
            return _result(sub.index, "enumeration", f"{table.name} / N, N = {{{head}}} (order {sub.order})", cap)
    raise AssertionError("trivial subgroup detects every non-identity element")


@lru_cache(maxsize=64)
def table_depth_array(table: tables.FiniteGroupTable) -> np.ndarray:
    """Depth of every element of a finite table."""
    out = np.zeros(table.order, dtype=np.int64)
    out[:] = -1
    out[table.identity] = 0
    for sub in sorted(_by_index(table), key=lambda s: s.index):
        outside = ~sub.mask() & (out < 0)
        out[outside] = sub.index
    return out


def _heisenberg_nonabelian(G: int, z: int, t: int):
    """Least index of a subgroup N(t, L, phi) missing (x, y, z) with gcd(x, y) = G, or None."""
    if G % t:
        return None
    if z % t:
        return t**3, 1
    rest = G // t
    if rest == 0:
        return None
    f = None
    p, tt = 2, t
    while tt > 1:
        if tt % p == 0:
            tau = 0
            while tt % p == 0:
                tt //= p
                tau += 1
            v, r = 0, rest
            while r % p == 0:
                r //= p
                v += 1
            cand = p ** max(0, v - tau + 1)
            f = cand if f is None else min(f, cand)
        p += 1
    return t**3 * f, f


def heisenberg_depth(g: tuple, cap: int = DEFAULT_CAP) -> DepthResult:
    x, y, z = g
    if g == (0, 0, 0):
        return DepthResult(0, "formula", None, 0, 0, cap)
    G = math.gcd(x, y)
    best, witness = None, None
    if G:
        best = smallest_nondivisor(G)
        coord = "x" if x % best else "y"
        witness = f"H -> Z/{best} on the {coord} coordinate"
    t = 2
    while best is None or t**3 < best:
        hit = _heisenberg_nonabelian(G, z, t)
        if hit is not None and (best is None or hit[0] < best):
            best, f = hit
            if f == 1 and z % t:
                witness = f"H -> H(Z/{t})"
            else:
                witness = f"H / N(t={t}, [Z^2:L]={t * t * f}, phi) with N meeting the centre in <c^{t}>"
        t += 1
    return _result(best, "formula", witness, cap)


SCAN_LIMIT = 17  # H(Z/j) has order j^3; 17^3 is the last one under the table cap


@lru_cache(maxsize=None)
def _index_j_subgroups(j: int) -> tuple:
    table = quotients._heisenberg_table(j)
    return tuple(s for s in _by_index(table) if s.index == j)


def heisenberg_depth_scan(g: tuple, cap: int = 8) -> DepthResult:
    """Depth by scanning H(Z/j), j = 2, 3, ..., for an index-j normal subgroup missing g.

    A quotient of order j factors through H(Z/j), so the first j with a
    detecting subgroup of index exactly j is the depth.
    """
    if cap > SCAN_LIMIT:
        raise CapacityError(f"congruence scan needs H(Z/j) tables; cap {cap} exceeds {SCAN_LIMIT}")
    if tuple(g) == (0, 0, 0):
        return DepthResult(0, "congruence", None, 0, 0, cap)
    for j in range(2, cap + 1):
        idx = quotients._heis_index(g, j)
        for sub in _index_j_subgroups(j):
            if idx not in sub:
                return DepthResult(j, "congruence", f"H(Z/{j}) / N (order {sub.order}, first members {sub.members[:4]})", j, j, cap)
    return DepthResult(None, "congruence", None, None, cap + 1, cap)


def free_depth(w: tuple, cap: int = DEFAULT_CAP) -> DepthResult:
    """Only index-2 detection: the three characters F2 -> Z/2."""
    if not w:
        return DepthResult(0, "parity", None, 0, 0, cap)
    a = sum(1 for letter in w if abs(letter) == 1)
    b = len(w) - a
    for count, name in ((len(w), "word length"), (a, "a-exponent"), (b, "b-exponent")):
        if count % 2:
            return _result(2, "parity", f"F2 -> Z/2 by {name} parity", cap)
    return DepthResult(None, "parity", None, None, 3, cap)


def combine_components(parts: list[DepthResult], cap: int) -> DepthResult:
    """min over non-identity components, tracking exactness."""
    live = [p for p in parts if p.value != 0]
    if not live:
        return DepthResult(0, "product-rule", None, 0, 0, cap)
    exact = [p for p in live if p.value is not None]
    open_lb = min((p.lower_bound for p in live if p.value is None), default=None)
    best = min(exact, key=lambda p: p.value, default=None)
    if best is not None and (open_lb is None or best.value <= open_lb):
        return DepthResult(best.value, "product-rule", best.witness, best.value, best.value, cap)
    uppers = [p.upper_bound for p in live if p.upper_bound is not None]
    lower = min(p.lower_bound for p in live)
    return DepthResult(None, "product-rule", None, min(uppers) if uppers else None, lower, cap)


def depth_product_rule(g1, g2, G: grp.Group, H: grp.Group, cap: int = DEFAULT_CAP) -> DepthResult:
    """D_{GxH}(g1, g2) as the least depth over non-identity components.

    Detecting quotients of either factor pull back to G x H; conversely a
    quotient of G x H of order j detecting (g1, g2) restricts to a quotient
    of one factor of order <= j detecting that component.
    """
    return combine_components([depth(g1, G, cap), depth(g2, H, cap)], cap)


def as_table(G: grp.Group):
    """(table, element -> index) for a finite group (finite tables and their products)."""
    if isinstance(G, grp.FiniteTableGroup):
        return G.table, lambda g: g
    if isinstance(G, grp.ProductGroup) and G.is_finite():
        lt, lf = as_table(G.left)
        rt, rf = as_table(G.right)
        table = _product_table(lt, rt)
        return table, lambda g: lf(g[0]) * rt.order + rf(g[1])
    raise UsageError(f"{G.spec} is not a finite group")


@lru_cache(maxsize=32)
def _product_table(left, right):
    return tables.direct_product(left, right)


def depth_by_enumeration(g, G: grp.Group, cap: int = DEFAULT_CAP) -> DepthResult:
    table, to_index = as_table(G)
    return table_depth(to_index(G.check(g)), table, cap)


def depth(g, G: grp.Group, cap: int = DEFAULT_CAP) -> DepthResult:
    """Depth of ``g`` in ``G``; exact whenever the value is at most ``cap``."""
    if cap < 2:
        raise UsageError(f"depth cap must be at least 2, got {cap}")
    G.check(g)
    if isinstance(G, grp.IntegerGroup):
        return integer_depth(g, cap)
    if isinstance(G, grp.LatticeGroup):
        return lattice_depth(g, cap)
    if isinstance(G, grp.FiniteTableGroup):
        return table_depth(g, G.table, cap)
    if isinstance(G, grp.HeisenbergGroup):
        return heisenberg_depth(g, cap)
    if isinstance(G, grp.FreeGroup2):
        return free_depth(g, cap)
    if isinstance(G, grp.ProductGroup):
        return depth_product_rule(g[0], g[1], G.left, G.right, cap)
    raise UsageError(f"no depth method for family {G.family}")


def depth_bound_via_quotient(g, qmap: quotients.QuotientMap) -> DepthResult:
    """Upper bound D_G(g) <= D_Q(phi(g)) from a surjection phi: G -> Q.

    Normal subgroups of Q pull back to normal subgroups of G of the same
    index, so any detection downstairs is a detection upstairs. Nothing is
    claimed when phi(g) is trivial.
    """
    image = qmap(g)
    if image == qmap.target.identity:
        return DepthResult(None, "quotient-bound", None, None, 0 if g == qmap.source.identity else 2)
    down = table_depth(image, qmap.target, cap=qmap.target.order)
    lower = 0 if g == qmap.source.identity else 2
    return DepthResult(None, "quotient-bound", f"via {qmap.kernel}: {down.witness}", down.value, lower)


def batch_depth(G: grp.Group, states, cap: int) -> np.ndarray:
    """Depths of many elements at once, values above ``cap`` reported as ``cap + 1``.

    ``states`` uses the array layout of :mod:`expdepth.walks`.
    """
    if isinstance(G, (grp.IntegerGroup, grp.LatticeGroup)):
        vals = np.asarray(states, dtype=np.int64)
        if vals.ndim == 2:
            vals = np.gcd.reduce(vals, axis=1)
        out = np.full(vals.shape, cap + 1, dtype=np.int64)
        out[vals == 0] = 0
        open_ = np.flatnonzero(vals != 0)
        m = 2
        while open_.size and m <= cap:  # smallest non-divisor of a 64-bit value is < 60
            hit = vals[open_] % m != 0
            out[open_[hit]] = m
            open_ = open_[~hit]
            m += 1
        return out
    if isinstance(G, grp.FiniteTableGroup):
        return np.minimum(table_depth_array(G.table)[np.asarray(states)], cap + 1)
    if isinstance(G, grp.ProductGroup):
        left = batch_depth(G.left, states[0], cap)
        right = batch_depth(G.right, states[1], cap)
        both = np.minimum(left, right)
        return np.where(left == 0, right, np.where(right == 0, left, both))
    if isinstance(G, grp.HeisenbergGroup):
        arr = np.asarray(states, dtype=np.int64)
        return np.array([heisenberg_depth(tuple(int(v) for v in row), cap).capped(cap) for row in arr], dtype=np.int64)
    return np.array([depth(g, G, cap).capped(cap) for g in states], dtype=np.int64)


def residual_finiteness_growth(G: grp.Group, n: int, cap: int = GROWTH_CAP, budget: int = BALL_BUDGET) -> int:
    """F_G^S(n) = max depth over the ball of radius n."""
    return growth_table(G, n, cap, budget)[-1]


def growth_table(G: grp.Group, n_max: int, cap: int = GROWTH_CAP, budget: int = BALL_BUDGET) -> list[int]:
    """[F(0), F(1), ..., F(n_max)], one BFS for all radii."""
    from .density import spheres

    out, best = [], 0
    seen = 0
    for radius, layer in enumerate(spheres(G, n_max, budget)):
        seen += len(layer)
        for g in layer:
            r = depth(g, G, cap)
            if r.value is None:
                raise CapacityError(
                    f"depth of {grp.format_element(g, G)} is not determined within cap {cap} (radius {radius})",
                    partial=best,
                )
            best = max(best, r.value)
        out.append(best)
    return out
