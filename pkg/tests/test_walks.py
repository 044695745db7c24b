import math
from fractions import Fraction

import numpy as np
import pytest

from expdepth import groups as grp
from expdepth import quotients as q
from expdepth import walks as w
from expdepth.depth import depth
from expdepth.errors import CapacityError, UsageError
from oracles import integer_walk_distribution

H = grp.HEISENBERG
ALL_GROUPS = [grp.Z, grp.LatticeGroup(2), H, grp.F2, grp.parse_group("Z/4xZ/6"), grp.parse_group("ZxZ/3"), grp.parse_group("SL3/2")]


def test_examples():
    assert w.prob_zero_integer_walk(1) == 0.5
    assert w.prob_zero_integer_walk(2, exact=True) == Fraction(3, 8)
    assert w.exact_expected_depth_integer(1, exact=True) == 1
    assert w.exact_expected_depth_integer(2, exact=True) == Fraction(11, 8)


def test_zero_steps_is_identity():
    for G in ALL_GROUPS:
        cfg = w.WalkConfig(G, 0, seed=3, trials=5)
        assert w.simulate_lazy_walk(cfg) == G.identity
        est = w.monte_carlo_expected_depth(cfg, cap=8)
        assert est.mean == 0.0 and est.cap_hits == 0


def test_config_validation():
    with pytest.raises(UsageError):
        w.WalkConfig(grp.Z, -1)
    with pytest.raises(UsageError):
        w.WalkConfig(grp.Z, 5, trials=0)
    with pytest.raises(UsageError):
        w.WalkConfig(grp.Z, 5, seed=-1)


def test_parity_of_integer_walk_by_monte_carlo():
    # P(X_n even) = (1 + 0^n)/2 = 1/2 for n >= 1 since the Z/2 lazy eigenvalue is 0
    cfg = w.WalkConfig(grp.Z, 25, seed=1, trials=40_000)
    x = w.terminal_states(cfg, 0, cfg.trials)
    p = float((x % 2 == 0).mean())
    assert abs(p - 0.5) < 4 * math.sqrt(0.25 / cfg.trials)


@pytest.mark.parametrize("qmap,G", [(q.integer_mod(5), grp.Z), (q.heisenberg_mod(3), H), (q.lattice_mod(2, 3), grp.LatticeGroup(2))], ids=["Z5", "H3", "Z2_3"])
def test_pushforward_matches_simulation(qmap, G):
    n, trials = 7, 100_000
    cfg = w.WalkConfig(G, n, seed=2, trials=trials)
    elems = w.state_elements(G, w.terminal_states(cfg, 0, trials))
    counts = np.bincount([qmap(g) for g in elems], minlength=qmap.target.order) / trials
    exact = w.exact_quotient_distribution(qmap, n).probs
    sd = np.sqrt(exact * (1 - exact) / trials)
    assert (np.abs(counts - exact) <= 5 * sd + 1e-12).all()


def test_support_bound():
    cfg = w.WalkConfig(grp.Z, 40, seed=4, trials=5000)
    x = w.terminal_states(cfg, 0, cfg.trials)
    assert np.abs(x).max() <= 40
    cfg = w.WalkConfig(H, 20, seed=4, trials=2000)
    x = w.terminal_states(cfg, 0, cfg.trials)
    assert np.abs(x[:, :2]).sum(axis=1).max() <= 20


def test_distribution_stays_normalised():
    for qmap in (q.integer_mod(7), q.heisenberg_mod(4)):
        for dv in w.distribution_path(qmap, 10_000):
            pass
        assert abs(dv.probs.sum() - 1) < 1e-9
        assert (dv.probs >= 0).all()
        assert abs(dv.probs - 1 / qmap.target.order).max() < 1e-9


def test_distribution_cap():
    from expdepth import tables

    with pytest.raises(CapacityError):
        w.exact_quotient_distribution(tables.cyclic(w.ITERATION_CAP + 1), 1)


@pytest.mark.parametrize("n", range(0, 13))
def test_expected_depth_formula_matches_path_enumeration(n):
    dist = integer_walk_distribution(n)
    by_paths = sum((p * depth(x, grp.Z, cap=10**6).value for x, p in dist.items()), Fraction(0))
    assert w.exact_expected_depth_integer(n, exact=True) == by_paths


def test_return_probability_matches_path_enumeration():
    for n in range(0, 11):
        dist = integer_walk_distribution(n)
        assert w.prob_zero_integer_walk(n, exact=True) == dist.get(0, 0)
        for m in (2, 3, 5):
            expected = sum((p for x, p in dist.items() if x and x % m == 0), Fraction(0))
            assert w.prob_multiple_integer_walk(n, m, exact=True) == expected


def test_binomial_formula_matches_pushforward():
    for n in (0, 1, 5, 50, 400):
        for m in (2, 3, 6, 12, 60):
            assert abs(w.prob_multiple_integer_walk(n, m) - w.prob_multiple_by_pushforward(n, m)) < 1e-12


def test_float_paths_agree_with_exact():
    for n in (10, 1000, 4096, 4097, 20_000):
        exact = w.prob_zero_integer_walk(n, exact=True)
        assert abs(w.prob_zero_integer_walk(n) / float(exact) - 1) < 1e-12
    curve = w.prob_zero_curve(5000)
    for n in (0, 1, 17, 5000):
        assert abs(curve[n] / w.prob_zero_integer_walk(n) - 1) < 1e-11


def test_multiple_curve_matches_direct():
    for m in (2, 3, 12, 60):
        curve = w.prob_multiple_curve(m, 600)
        for n in (0, 1, 2, 59, 60, 61, 300, 600):
            assert abs(curve[n] - w.prob_multiple_integer_walk(n, m)) < 1e-12


def test_single_trial_matches_batch():
    for G in ALL_GROUPS:
        cfg = w.WalkConfig(G, 30, seed=9, trials=40)
        batch = w.state_elements(G, w.terminal_states(cfg, 0, cfg.trials))
        assert batch == [w.simulate_lazy_walk(cfg, t) for t in range(cfg.trials)]


def test_trajectory_has_lazy_steps():
    cfg = w.WalkConfig(grp.Z, 2000, seed=0)
    x, path = w.simulate_lazy_walk(cfg, trajectory=True)
    steps = np.diff(path)
    assert set(np.unique(steps)) <= {-1, 0, 1}
    assert abs((steps == 0).mean() - 0.5) < 4 * math.sqrt(0.25 / 2000)
    assert path[-1] == x


def test_monte_carlo_is_deterministic_and_thread_independent():
    cfg = w.WalkConfig(H, 200, seed=11, trials=5000)
    a = w.sample_depths(cfg, 8, threads=1)
    b = w.sample_depths(cfg, 8, threads=4)
    c = w.sample_depths(cfg, 8, threads=1)
    assert np.array_equal(a, b) and np.array_equal(a, c)
    other = w.sample_depths(w.WalkConfig(H, 200, seed=12, trials=5000), 8)
    assert not np.array_equal(a, other)


def test_trials_are_prefix_stable():
    small = w.sample_depths(w.WalkConfig(grp.Z, 100, seed=5, trials=1000), 12)
    large = w.sample_depths(w.WalkConfig(grp.Z, 100, seed=5, trials=5000), 12)
    assert np.array_equal(small, large[:1000])


def test_integer_monte_carlo_matches_exact():
    n = 1000
    cfg = w.WalkConfig(grp.Z, n, seed=21, trials=100_000)
    est = w.monte_carlo_expected_depth(cfg, cap=10**6)
    assert est.cap_hits == 0
    assert abs(est.mean - w.exact_expected_depth_integer(n)) < 4 * est.stderr


def test_cap_hits_are_scored_above_cap():
    cfg = w.WalkConfig(H, 300, seed=1, trials=2000)
    d = w.sample_depths(cfg, 2)
    assert d.max() == 3
    est = w.monte_carlo_expected_depth(cfg, cap=2)
    assert est.is_lower_bound and est.cap_hits == int((d == 3).sum())


def test_multiple_probability_scales_like_one_over_m():
    # 1/m - P(X_n = 0) <= P(X_n in mZ minus {0}) <= 1/m + mu_2(Z/m)^n, so the sup over a window is about 1/m
    n_max = 10_000
    p0 = w.prob_zero_integer_walk(n_max)
    for m in (2, 3, 10, 50, 100, 150, 200):
        curve = w.prob_multiple_curve(m, n_max)
        assert curve.max() >= 1 / m - p0 - 1e-15
        mu2 = 0.5 + 0.5 * math.cos(2 * math.pi / m)
        n = np.arange(n_max + 1)
        assert (curve <= 1 / m + mu2**n + 1e-15).all()
