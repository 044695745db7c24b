"""Word-metric balls, density ratios and the free-group oscillation example.

For F2 with S = {a, a^-1, b, b^-1} the sphere of radius r >= 1 has 4 * 3^(r-1)
elements, so |B(n)| = 2 * 3^n - 1 and the even-length words make up

    (3^(n+1) - 1) / (4 * 3^n - 2)   for n even,
    (3^n - 1)     / (4 * 3^n - 2)   for n odd,

of the ball: the ratio tends to 3/4 along even n and to 1/4 along odd n,
so the density of the index-2 subgroup of even words has no limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

from . import groups as grp
from .errors import CapacityError, UsageError

BALL_BUDGET = 2_000_000
RADIUS_CAPS = {"FreeRank2": 12}

# predicate(g, word_length) -> bool
Predicate = Callable[[object, int], bool]


@dataclass(frozen=True)
class BallCensus:
    radius: int
    ball: int
    hits: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.hits, self.ball)


def spheres(G: grp.Group, n_max: int, budget: int = BALL_BUDGET) -> Iterator[list]:
    """Yield the spheres S(0), S(1), ..., S(n_max) in BFS order."""
    cap = RADIUS_CAPS.get(G.family)
    if cap is not None and n_max > cap:
        raise CapacityError(f"{G.spec} balls are enumerated up to radius {cap}, asked for {n_max}")
    gens = G.generators
    layer = [G.identity]
    seen = {G.identity}
    total = 1
    yield layer
    for radius in range(1, n_max + 1):
        nxt = []
        for g in layer:
            for s in gens:
                h = G.mul(g, s)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        total += len(nxt)
        if total > budget:
            raise CapacityError(f"ball of radius {radius} in {G.spec} exceeds the budget {budget}", partial=radius - 1)
        layer = nxt
        yield layer


def ball_enumerate(G: grp.Group, n: int, predicate: Predicate | None = None, budget: int = BALL_BUDGET) -> list[BallCensus]:
    """Census of B(0), ..., B(n); hits count elements satisfying ``predicate``."""
    out, ball, hits = [], 0, 0
    for radius, layer in enumerate(spheres(G, n, budget)):
        ball += len(layer)
        if predicate is not None:
            hits += sum(1 for g in layer if predicate(g, radius))
        out.append(BallCensus(radius, ball, hits))
    return out


def density_ratio(G: grp.Group, predicate: Predicate, n: int, budget: int = BALL_BUDGET) -> Fraction:
    return ball_enumerate(G, n, predicate, budget)[-1].ratio


def growth_ratios(G: grp.Group, n_max: int, budget: int = BALL_BUDGET) -> list[Fraction]:
    """|B(n+1)| / |B(n)| for n = 0..n_max-1."""
    sizes = [c.ball for c in ball_enumerate(G, n_max, None, budget)]
    return [Fraction(b, a) for a, b in zip(sizes, sizes[1:])]


def free_group_closed_forms(n: int) -> tuple[int, Fraction]:
    """(|B(n)|, share of even-length words in B(n)) for F2."""
    if n < 0:
        raise UsageError(f"radius must be non-negative, got {n}")
    ball = 2 * 3**n - 1
    even = (3 ** (n + 1) - 1) // 2 if n % 2 == 0 else (3**n - 1) // 2
    return ball, Fraction(even, ball)


# -- named predicates -----------------------------------------------------


def even_length(g, length: int) -> bool:
    return length % 2 == 0


def multiple_of(m: int) -> Predicate:
    """Membership in the kernel of reduction mod m (mZ, or mZ^d coordinatewise)."""

    def pred(g, length):
        coords = g if isinstance(g, tuple) else (g,)
        return all(c % m == 0 for c in coords)

    return pred


def kernel_of(qmap) -> Predicate:
    identity = qmap.target.identity
    return lambda g, length: qmap(g) == identity


def parse_predicate(text: str) -> Predicate:
    """``even`` | ``mult:m`` | ``kernel:Q`` with Q a quotient spec such as ``Z/4`` or ``H/3``."""
    from .quotients import parse_quotient

    if text == "even":
        return even_length
    head, _, arg = text.partition(":")
    if head == "mult" and arg.isdigit() and int(arg) >= 1:
        return multiple_of(int(arg))
    if head == "kernel" and arg:
        return kernel_of(parse_quotient(arg))
    raise UsageError(f"unknown predicate {text!r}; expected even, mult:m or kernel:Q")
