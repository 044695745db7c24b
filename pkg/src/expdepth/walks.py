"""Lazy random walks: simulation, exact quotient distributions, exact Z formulas.

The lazy walk stays put with probability 1/2 and otherwise multiplies on
the right by a uniform element of the generating multiset S. One step is
drawn as a single integer u uniform on [0, 2|S|): u < |S| moves by S[u],
anything else stays, so the laziness is exactly 1/2.

Random streams are counter based: trial t of a run with master seed s uses
``Philox(key=(s, t))`` and consumes one draw per step, so results do not
depend on how trials are split across workers.

On Z with S = {+1, -1} one lazy step is a sum of two fair +-1/2 coins, so
X_n = Bin(2n, 1/2) - n. That gives

    P(X_n = 0)            = C(2n, n) / 4^n
    P(X_n in mZ \\ {0})    = sum_{t != 0} C(2n, n + t m) / 4^n

which is what the exact Z routines evaluate. The cyclic pushforward on Z/m
gives the same numbers at cost n*m and is kept as a cross-check.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import binom

from . import groups as grp
from .depth import batch_depth
from .errors import CapacityError, UsageError
from .quotients import QuotientMap
from .tables import FiniteGroupTable

LAZINESS = 0.5
ITERATION_CAP = 10_000
EXACT_BINOMIAL_LIMIT = 4096  # big-int division gets slow beyond; scipy's pmf is within 1e-14
CHUNK = 2048


@dataclass(frozen=True)
class WalkConfig:
    group: grp.Group
    n: int
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if self.n < 0:
            raise UsageError(f"step count must be non-negative, got {self.n}")
        if self.trials < 1:
            raise UsageError(f"trial count must be positive, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise UsageError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def laziness(self) -> float:
        return LAZINESS


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, trial]))


def step_draws(cfg: WalkConfig, trial: int) -> np.ndarray:
    return trial_rng(cfg.seed, trial).integers(0, 2 * len(cfg.group.generators), size=cfg.n)


def simulate_lazy_walk(cfg: WalkConfig, trial: int = 0, trajectory: bool = False):
    """Terminal state X_n of one trial (and the full path when asked)."""
    G, gens = cfg.group, cfg.group.generators
    x = G.identity
    path = [x] if trajectory else None
    for u in step_draws(cfg, trial):
        if u < len(gens):
            x = G.mul(x, gens[u])
        if trajectory:
            path.append(x)
    return (x, path) if trajectory else x


# -- vectorised walkers ----------------------------------------------------
# State layouts: Z -> int64[t]; Z^d -> int64[t, d]; Heisenberg -> int64[t, 3];
# finite table -> int64[t]; product -> (left, right); free group -> list.


def _init(G: grp.Group, t: int):
    if isinstance(G, (grp.IntegerGroup, grp.FiniteTableGroup)):
        return np.full(t, G.identity, dtype=np.int64)
    if isinstance(G, grp.LatticeGroup):
        return np.zeros((t, G.d), dtype=np.int64)
    if isinstance(G, grp.HeisenbergGroup):
        return np.zeros((t, 3), dtype=np.int64)
    if isinstance(G, grp.ProductGroup):
        return (_init(G.left, t), _init(G.right, t))
    return [G.identity] * t


def _advance(G: grp.Group, state, gen: np.ndarray, moving: np.ndarray):
    """Right-multiply the moving trials by their generators, in place where possible."""
    if isinstance(G, grp.IntegerGroup):
        state += np.where(moving, np.where(gen == 0, 1, -1), 0)
        return state
    if isinstance(G, grp.LatticeGroup):
        delta = np.asarray(G.generators, dtype=np.int64)[gen] * moving[:, None]
        state += delta
        return state
    if isinstance(G, grp.HeisenbergGroup):
        delta = np.asarray(G.generators, dtype=np.int64)[gen] * moving[:, None]
        state[:, 2] += state[:, 0] * delta[:, 1]
        state[:, :2] += delta[:, :2]
        return state
    if isinstance(G, grp.FiniteTableGroup):
        moved = G.table.action[state, gen]
        return np.where(moving, moved, state)
    if isinstance(G, grp.ProductGroup):
        nl = len(G.left.generators)
        on_left = gen < nl
        left = _advance(G.left, state[0], np.where(on_left, gen, 0), moving & on_left)
        right = _advance(G.right, state[1], np.where(on_left, 0, gen - nl), moving & ~on_left)
        return (left, right)
    gens = G.generators
    return [G.mul(x, gens[s]) if mv else x for x, s, mv in zip(state, gen, moving)]


def terminal_states(cfg: WalkConfig, start: int, stop: int):
    """X_n for trials start..stop-1, in the layout of ``_init``."""
    G = cfg.group
    s = len(G.generators)
    draws = np.stack([step_draws(cfg, t) for t in range(start, stop)]) if cfg.n else np.zeros((stop - start, 0), np.int64)
    state = _init(G, stop - start)
    for j in range(cfg.n):
        u = draws[:, j]
        moving = u < s
        state = _advance(G, state, np.where(moving, u, 0), moving)
    return state


def state_elements(G: grp.Group, state) -> list:
    """Convert a vectorised state back to element values."""
    if isinstance(G, (grp.IntegerGroup, grp.FiniteTableGroup)):
        return [int(v) for v in state]
    if isinstance(G, (grp.LatticeGroup, grp.HeisenbergGroup)):
        return [tuple(int(v) for v in row) for row in state]
    if isinstance(G, grp.ProductGroup):
        return list(zip(state_elements(G.left, state[0]), state_elements(G.right, state[1])))
    return list(state)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("EXPDEPTH_THREADS", "1")))
    except ValueError:
        raise UsageError("EXPDEPTH_THREADS must be an integer") from None


@dataclass(frozen=True)
class MonteCarloEstimate:
    n: int
    trials: int
    mean: float
    stderr: float
    cap: int
    cap_hits: int

    @property
    def is_lower_bound(self) -> bool:
        """Cap hits are scored as cap + 1, so the mean then only bounds E[D] from below."""
        return self.cap_hits > 0

    @property
    def cap_hit_rate(self) -> float:
        return self.cap_hits / self.trials


def sample_depths(cfg: WalkConfig, cap: int, threads: int | None = None) -> np.ndarray:
    """Capped depth of X_n for every trial, in trial order."""
    chunks = [(a, min(a + CHUNK, cfg.trials)) for a in range(0, cfg.trials, CHUNK)]

    def work(bounds):
        return batch_depth(cfg.group, terminal_states(cfg, *bounds), cap)

    threads = threads or _threads()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return np.concatenate(parts)


def monte_carlo_expected_depth(cfg: WalkConfig, cap: int, threads: int | None = None) -> MonteCarloEstimate:
    """Sample mean of min(D(X_n), cap + 1) over independent trials."""
    d = sample_depths(cfg, cap, threads)
    mean = float(d.mean())
    stderr = float(d.std(ddof=1) / math.sqrt(len(d))) if len(d) > 1 else 0.0
    return MonteCarloEstimate(cfg.n, cfg.trials, mean, stderr, cap, int((d > cap).sum()))


# -- exact distributions on finite quotients -------------------------------


@dataclass(frozen=True)
class DistributionVector:
    table: FiniteGroupTable
    probs: np.ndarray
    n: int

    @property
    def at_identity(self) -> float:
        """P(X_n in N) for the kernel N of the quotient map."""
        return float(self.probs[self.table.identity])

    def __getitem__(self, i):
        return self.probs[i]


def lazy_step(table: FiniteGroupTable, v: np.ndarray) -> np.ndarray:
    """v -> v L with L = I/2 + P/2 and P(x, xs) = 1/|S| per copy of s."""
    out = 0.5 * v
    w = v * (0.5 / table.action.shape[1])
    for col in table.action.T:
        out[col] += w  # right multiplication by s is a permutation
    return out


def _as_table(target) -> FiniteGroupTable:
    if isinstance(target, QuotientMap):
        return target.target
    if isinstance(target, grp.FiniteTableGroup):
        return target.table
    return target


def distribution_path(target, n_max: int):
    """Yield sigma L^n for n = 0, 1, ..., n_max, sigma the point mass at the identity."""
    table = _as_table(target)
    if table.order > ITERATION_CAP:
        raise CapacityError(f"{table.name} has order {table.order}, above the iteration cap {ITERATION_CAP}")
    v = np.zeros(table.order)
    v[table.identity] = 1.0
    yield DistributionVector(table, v, 0)
    for n in range(1, n_max + 1):
        v = lazy_step(table, v)
        yield DistributionVector(table, v, n)


def exact_quotient_distribution(target, n: int) -> DistributionVector:
    """Distribution of X_n pushed to a finite quotient."""
    if n < 0:
        raise UsageError(f"step count must be non-negative, got {n}")
    for dv in distribution_path(target, n):
        pass
    return dv


# -- exact formulas on Z ---------------------------------------------------


def prob_zero_integer_walk(n: int, exact: bool = False):
    """P(X_n = 0) for the lazy +-1 walk on Z."""
    if n < 0:
        raise UsageError(f"step count must be non-negative, got {n}")
    if exact:
        return Fraction(math.comb(2 * n, n), 4**n)
    if n <= EXACT_BINOMIAL_LIMIT:
        return math.comb(2 * n, n) / 4**n  # int / int rounds correctly
    return float(binom.pmf(n, 2 * n, 0.5))


def prob_multiple_integer_walk(n: int, m: int, exact: bool = False):
    """P(X_n in mZ minus {0}) for the lazy +-1 walk on Z."""
    if m < 2:
        raise UsageError(f"modulus must be at least 2, got {m}")
    if n < 0:
        raise UsageError(f"step count must be non-negative, got {n}")
    t = np.arange(m, n + 1, m)
    if exact:
        return Fraction(2 * sum(math.comb(2 * n, n + int(s)) for s in t), 4**n)
    if len(t) == 0:
        return 0.0
    return float(2 * binom.pmf(n + t, 2 * n, 0.5).sum())


def prob_multiple_by_pushforward(n: int, m: int) -> float:
    """Same quantity via the exact distribution on Z/m (cost n*m)."""
    from .quotients import integer_mod

    return exact_quotient_distribution(integer_mod(m), n).at_identity - prob_zero_integer_walk(n)


def prob_zero_curve(n_max: int) -> np.ndarray:
    """P(X_n = 0) for n = 0..n_max via P_{n+1} = P_n (2n+1)/(2n+2)."""
    ratios = (2 * np.arange(n_max) + 1) / (2 * np.arange(n_max) + 2)
    return np.concatenate([[1.0], np.cumprod(ratios)])


def prob_multiple_curve(m: int, n_max: int) -> np.ndarray:
    """P(X_n in mZ minus {0}) for n = 0..n_max.

    Uses the circulant spectrum of the lazy walk on Z/m:
    P(X_n = 0 mod m) = (1/m) sum_j (1/2 + cos(2 pi j / m) / 2)^n.
    """
    if m < 2:
        raise UsageError(f"modulus must be at least 2, got {m}")
    mu = 0.5 + 0.5 * np.cos(2 * np.pi * np.arange(1, m) / m)
    n = np.arange(n_max + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmu = np.log(mu)
        powers = np.exp(np.outer(n, logmu))
    powers[0] = 1.0
    at_zero = (1.0 + powers.sum(axis=1)) / m
    return np.maximum(at_zero - prob_zero_curve(n_max), 0.0)


def exact_expected_depth_integer(n: int, exact: bool = False):
    """E[D_Z(X_n)] = 2 P(X_n != 0) + sum_{k >= 2} P(X_n in m_k Z minus {0}).

    Terms with m_k > n vanish because |X_n| <= n.
    """
    if n < 0:
        raise UsageError(f"step count must be non-negative, got {n}")
    p0 = prob_zero_integer_walk(n, exact)
    total = 2 * (1 - p0)
    k, m = 2, 2
    while m <= n:
        total += prob_multiple_integer_walk(n, m, exact)
        k += 1
        m = math.lcm(m, k)
    return total
