"""Group families with value-semantics elements.

Elements are plain immutable Python values; the group object supplies the
algebra. Representations:

=============  ==============================================
family         element
=============  ==============================================
Z              ``int``
Z^d            ``tuple`` of d ints
FiniteTable    ``int`` index into a :class:`FiniteGroupTable`
Heisenberg     ``(x, y, z)``; law (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')
FreeRank2      reduced ``tuple`` of letters 1=a, -1=a^-1, 2=b, -2=b^-1
Product        ``(g, h)``
=============  ==============================================

Integer payloads are checked against the signed 64-bit range; leaving it
raises :class:`CapacityError` rather than silently growing.

Text forms
----------
Group specs (``parse_group``)::

    group  := factor ("x" factor)*
    factor := "Z" | "Z^" d | "Z/" m | "H" | "H/" m | "F2" | "D" n | "Q8" | "SL3/" m

Element literals (``format_element`` / ``parse_element``)::

    Z:-3        L:1,0,-2       T:5        H:1,0,2
    F:ab^-1a    F:e            P:[Z:1;T:2]

Free words accept ``a``, ``b``, ``A`` (= a^-1), ``B`` and exponents
``^k`` with k a nonzero integer; they are printed letter by letter.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property

from . import tables
from .errors import CapacityError, UsageError
from .tables import FiniteGroupTable

INT64_MAX = 2**63 - 1


def _guard(v: int) -> int:
    if -INT64_MAX <= v <= INT64_MAX:
        return v
    raise CapacityError(f"integer {v} left the signed 64-bit range")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class Group:
    """Base class: subclasses implement the raw algebra on valid elements."""

    family: str = ""
    hirsch: int | None = None
    torsion_free: bool = True

    @property
    def identity(self):
        raise NotImplementedError

    @property
    def generators(self) -> tuple:
        raise NotImplementedError

    def mul(self, g, h):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    def contains(self, g) -> bool:
        raise NotImplementedError

    def random_element(self, rng: random.Random, size: int = 5):
        raise NotImplementedError

    def is_finite(self) -> bool:
        return False

    # literal payloads, without the family prefix
    def _format(self, g) -> str:
        raise NotImplementedError

    def _parse(self, text: str):
        raise NotImplementedError

    tag = ""

    def __str__(self):
        return self.spec

    def check(self, g):
        if not self.contains(g):
            raise UsageError(f"{g!r} is not an element of {self.spec}")
        return g


@dataclass(frozen=True)
class IntegerGroup(Group):
    family = "Z"
    tag = "Z"
    hirsch = 1
    spec = "Z"

    @property
    def identity(self):
        return 0

    @property
    def generators(self):
        return (1, -1)

    def mul(self, g, h):
        return _guard(g + h)

    def inv(self, g):
        return -g

    def contains(self, g):
        return _is_int(g)

    def random_element(self, rng, size=5):
        return rng.randint(-size, size)

    def _format(self, g):
        return str(g)

    def _parse(self, text):
        return _guard(int(text))


@dataclass(frozen=True)
class LatticeGroup(Group):
    """Z^d with generators e_1, -e_1, e_2, -e_2, ..."""

    d: int = 2
    family = "Z^d"
    tag = "L"

    def __post_init__(self):
        if self.d < 1:
            raise UsageError(f"lattice rank must be positive, got {self.d}")

    @property
    def spec(self):
        return f"Z^{self.d}"

    @property
    def hirsch(self):
        return self.d

    @property
    def identity(self):
        return (0,) * self.d

    @cached_property
    def generators(self):
        gens = []
        for i in range(self.d):
            for sign in (1, -1):
                gens.append(tuple(sign if j == i else 0 for j in range(self.d)))
        return tuple(gens)

    def mul(self, g, h):
        return tuple(_guard(a + b) for a, b in zip(g, h))

    def inv(self, g):
        return tuple(-a for a in g)

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == self.d and all(_is_int(a) for a in g)

    def random_element(self, rng, size=5):
        return tuple(rng.randint(-size, size) for _ in range(self.d))

    def _format(self, g):
        return ",".join(map(str, g))

    def _parse(self, text):
        g = tuple(_guard(int(t)) for t in text.split(","))
        if len(g) != self.d:
            raise UsageError(f"expected {self.d} coordinates, got {text!r}")
        return g


@dataclass(frozen=True, eq=False)
class FiniteTableGroup(Group):
    table: FiniteGroupTable
    family = "FiniteTable"
    tag = "T"
    hirsch = 0
    torsion_free = False

    def __eq__(self, other):
        return isinstance(other, FiniteTableGroup) and other.table is self.table

    def __hash__(self):
        return id(self.table)

    @property
    def spec(self):
        return self.table.name

    @property
    def identity(self):
        return self.table.identity

    @property
    def generators(self):
        return self.table.generators

    def mul(self, g, h):
        return self.table.multiply(g, h)

    def inv(self, g):
        return int(self.table.inv[g])

    def contains(self, g):
        return _is_int(g) and 0 <= g < self.table.order

    def is_finite(self):
        return True

    def random_element(self, rng, size=5):
        return rng.randrange(self.table.order)

    def _format(self, g):
        return str(g)

    def _parse(self, text):
        return int(text)


@dataclass(frozen=True)
class HeisenbergGroup(Group):
    """Integer Heisenberg group; a = (1,0,0), b = (0,1,0), [a, b] = (0,0,1)."""

    family = "Heisenberg"
    tag = "H"
    hirsch = 3
    spec = "H"

    @property
    def identity(self):
        return (0, 0, 0)

    @property
    def generators(self):
        return ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))

    def mul(self, g, h):
        x, y, z = g
        u, v, w = h
        return (_guard(x + u), _guard(y + v), _guard(z + w + x * v))

    def inv(self, g):
        x, y, z = g
        return (-x, -y, _guard(-z + x * y))

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == 3 and all(_is_int(a) for a in g)

    def random_element(self, rng, size=5):
        return tuple(rng.randint(-size, size) for _ in range(3))

    def _format(self, g):
        return ",".join(map(str, g))

    def _parse(self, text):
        g = tuple(_guard(int(t)) for t in text.split(","))
        if len(g) != 3:
            raise UsageError(f"Heisenberg literal needs 3 coordinates, got {text!r}")
        return g


def reduce_word(word) -> tuple:
    out = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


_LETTER = {"a": 1, "b": 2, "A": -1, "B": -2}
_WORD_TOKEN = re.compile(r"([abAB])(?:\^(-?\d+))?")


@dataclass(frozen=True)
class FreeGroup2(Group):
    family = "FreeRank2"
    tag = "F"
    spec = "F2"
    hirsch = None

    @property
    def identity(self):
        return ()

    @property
    def generators(self):
        return ((1,), (-1,), (2,), (-2,))

    def mul(self, g, h):
        k = 0
        while k < min(len(g), len(h)) and g[len(g) - 1 - k] == -h[k]:
            k += 1
        return g[: len(g) - k] + h[k:]

    def inv(self, g):
        return tuple(-a for a in reversed(g))

    def contains(self, g):
        return isinstance(g, tuple) and all(a in (1, -1, 2, -2) for a in g) and reduce_word(g) == g

    def random_element(self, rng, size=5):
        return reduce_word(rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(0, 2 * size)))

    def _format(self, g):
        if not g:
            return "e"
        return "".join("ab"[abs(a) - 1] + ("^-1" if a < 0 else "") for a in g)

    def _parse(self, text):
        if text == "e":
            return ()
        pos, word = 0, []
        for m in _WORD_TOKEN.finditer(text):
            if m.start() != pos:
                break
            letter = _LETTER[m.group(1)]
            power = int(m.group(2)) if m.group(2) is not None else 1
            if power == 0:
                raise UsageError(f"zero exponent in free word {text!r}")
            word += [letter if power > 0 else -letter] * abs(power)
            pos = m.end()
        if pos != len(text):
            raise UsageError(f"cannot parse free word {text!r}")
        return reduce_word(word)


@dataclass(frozen=True)
class ProductGroup(Group):
    """Direct product; generators are {(s, e_H)} followed by {(e_G, t)}."""

    left: Group
    right: Group
    family = "Product"
    tag = "P"

    @property
    def spec(self):
        return f"{self.left.spec}x{self.right.spec}"

    @property
    def hirsch(self):
        if self.left.hirsch is None or self.right.hirsch is None:
            return None
        return self.left.hirsch + self.right.hirsch

    @property
    def torsion_free(self):
        return self.left.torsion_free and self.right.torsion_free

    @property
    def identity(self):
        return (self.left.identity, self.right.identity)

    @cached_property
    def generators(self):
        e_l, e_r = self.left.identity, self.right.identity
        return tuple((s, e_r) for s in self.left.generators) + tuple((e_l, t) for t in self.right.generators)

    def mul(self, g, h):
        return (self.left.mul(g[0], h[0]), self.right.mul(g[1], h[1]))

    def inv(self, g):
        return (self.left.inv(g[0]), self.right.inv(g[1]))

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == 2 and self.left.contains(g[0]) and self.right.contains(g[1])

    def is_finite(self):
        return self.left.is_finite() and self.right.is_finite()

    def random_element(self, rng, size=5):
        return (self.left.random_element(rng, size), self.right.random_element(rng, size))

    def _format(self, g):
        return f"[{format_element(g[0], self.left)};{format_element(g[1], self.right)}]"

    def _parse(self, text):
        if not (text.startswith("[") and text.endswith("]")):
            raise UsageError(f"product literal must look like [g;h], got {text!r}")
        inner, depth = text[1:-1], 0
        for i, ch in enumerate(inner):
            depth += ch == "["
            depth -= ch == "]"
            if ch == ";" and depth == 0:
                return (parse_element(inner[:i], self.left), parse_element(inner[i + 1 :], self.right))
        raise UsageError(f"product literal needs a top-level ';', got {text!r}")


Z = IntegerGroup()
HEISENBERG = HeisenbergGroup()
F2 = FreeGroup2()


def _same_group(a: Group, b: Group) -> bool:
    return a == b


def multiply(g, h, G: Group):
    """Checked group product."""
    return G.mul(G.check(g), G.check(h))


def invert(g, G: Group):
    return G.inv(G.check(g))


def power(g, k: int, G: Group):
    result, base = G.identity, (g if k >= 0 else G.inv(g))
    for _ in range(abs(k)):
        result = G.mul(result, base)
    return result


def make_direct_product(G: Group, H: Group) -> ProductGroup:
    return ProductGroup(G, H)


def is_symmetric(G: Group) -> bool:
    """Generating multiset equals its multiset of inverses."""
    gens = G.generators
    return Counter(gens) == Counter(G.inv(s) for s in gens)


def format_element(g, G: Group) -> str:
    return f"{G.tag}:{G._format(G.check(g))}"


def parse_element(text: str, G: Group):
    text = text.strip()
    tag, sep, payload = text.partition(":")
    if not sep:
        raise UsageError(f"element literal needs a family prefix, got {text!r}")
    if tag != G.tag:
        raise UsageError(f"literal {text!r} has family {tag!r}, group {G.spec} expects {G.tag!r}")
    try:
        g = G._parse(payload)
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"cannot parse {text!r}: {exc}") from None
    return G.check(g)


_TABLE_CACHE: dict[str, FiniteGroupTable] = {}


def finite_factor(token: str) -> FiniteGroupTable:
    """Table for a finite factor token (cached so equal specs share one table)."""
    if token in _TABLE_CACHE:
        return _TABLE_CACHE[token]
    m = re.fullmatch(r"Z/(\d+)|H/(\d+)|D(\d+)|Q8|SL3/(\d+)", token)
    if m is None:
        raise UsageError(f"unknown finite group {token!r}")
    if m.group(1):
        t = tables.cyclic(int(m.group(1)))
    elif m.group(2):
        t = tables.heisenberg_mod(int(m.group(2)))
    elif m.group(3):
        t = tables.dihedral(int(m.group(3)))
    elif token == "Q8":
        t = tables.quaternion()
    else:
        t = tables.sl3_mod(int(m.group(4)))
    _TABLE_CACHE[token] = t
    return t


def _parse_factor(token: str) -> Group:
    if token == "Z":
        return Z
    if token == "H":
        return HEISENBERG
    if token == "F2":
        return F2
    m = re.fullmatch(r"Z\^(\d+)", token)
    if m:
        d = int(m.group(1))
        return Z if d == 1 else LatticeGroup(d)
    return FiniteTableGroup(finite_factor(token))


def parse_group(spec: str) -> Group:
    """Parse a group spec such as ``Z``, ``Z^2``, ``Z/4xZ/6`` or ``F2xZ``."""
    tokens = [t.strip() for t in spec.strip().split("x")]
    if not tokens or any(not t for t in tokens):
        raise UsageError(f"empty factor in group spec {spec!r}")
    group = _parse_factor(tokens[0])
    for tok in tokens[1:]:
        group = ProductGroup(group, _parse_factor(tok))
    return group
