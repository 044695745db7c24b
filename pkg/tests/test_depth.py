import itertools
import json
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expdepth import depth as dp
from expdepth import groups as grp
from expdepth import quotients as q
from expdepth import tables
from expdepth.errors import CapacityError, UsageError
from expdepth.lattices import hnf_depth
from oracles import integer_depth_by_quotients

H = grp.HEISENBERG
Z2 = grp.LatticeGroup(2)


def test_examples():
    assert dp.depth(6, grp.Z).value == 4
    assert dp.depth((2, 3), Z2).value == 2
    Z6 = grp.parse_group("Z/6")
    assert dp.depth(2, Z6).value == 3
    assert dp.depth(3, Z6).value == 2


@pytest.mark.parametrize(
    "G", [grp.Z, Z2, H, grp.F2, grp.parse_group("Z/6"), grp.parse_group("ZxZ/3"), grp.parse_group("SL3/2")], ids=lambda G: G.spec
)
def test_identity_has_depth_zero(G):
    r = dp.depth(G.identity, G)
    assert r.value == 0 and r.exact


def test_only_identity_has_depth_zero():
    rng = random.Random(3)
    for G in (grp.Z, Z2, H, grp.parse_group("Z/4xZ/6"), grp.parse_group("D5")):
        for _ in range(300):
            g = G.random_element(rng, 6)
            if g != G.identity:
                r = dp.depth(g, G, cap=10**6)
                assert r.value is None or r.value >= 2


@given(st.integers(-10**12, 10**12))
def test_integer_depth_matches_quotient_scan(g):
    assert dp.depth(g, grp.Z, cap=10**6).value == integer_depth_by_quotients(g)


def test_lattice_depth_matches_hnf():
    for v in itertools.product(range(-4, 5), repeat=2):
        exact = dp.depth(v, Z2, cap=12).value
        assert exact == hnf_depth(v)
    for v in itertools.product(range(-2, 3), repeat=3):
        assert dp.depth(v, grp.LatticeGroup(3), cap=12).value == hnf_depth(v, 8)


def test_exceeds_cap_reports_bounds():
    r = dp.depth(2 * 3 * 4 * 5 * 7, grp.Z, cap=5)
    assert r.value is None and r.exceeds_cap
    assert r.upper_bound == 9 and r.lower_bound == 6  # 840 = 8*3*5*7
    assert r.to_json()["value"] == "exceeds cap 5"
    with pytest.raises(UsageError):
        dp.depth(1, grp.Z, cap=1)


def test_witness_quotient_detects_element():
    # integer witnesses name Z/m: check m does not divide g and the order equals the value
    for g in range(1, 200):
        r = dp.depth(g, grp.Z)
        m = int(r.witness.split("/")[-1])
        assert m == r.value and g % m


def test_table_witness_is_least_detecting_subgroup():
    table = tables.direct_product(tables.cyclic(4), tables.cyclic(6))
    subs = q.enumerate_normal_subgroups(table)
    for g in range(1, table.order):
        r = dp.table_depth(g, table)
        detecting = sorted((s.index, s.members) for s in subs if g not in s)
        index, members = detecting[0]
        assert r.value == index
        assert f"order {len(members)}" in r.witness


# -- Lambda consistency: D(g) > k  <=>  g in Lambda_k -------------------------


@pytest.mark.parametrize("spec", ["Z/6", "Z/4xZ/6", "D6", "Q8", "H/4", "SL3/2"])
def test_depth_lambda_consistency_on_tables(spec):
    G = grp.parse_group(spec)
    table, _ = dp.as_table(G)
    depths = dp.table_depth_array(table)
    masks = q.lambda_masks(table, 12)
    for k in range(0, 13):
        in_lambda = masks[k].copy()
        in_lambda[table.identity] = False
        assert ((depths > k) == in_lambda).all()


def test_depth_lambda_consistency_on_integer_box():
    for g in range(-2000, 2001):
        d = dp.depth(g, grp.Z, cap=10**6).value
        for k in range(2, 13):
            assert (d > k) == (g != 0 and g % q.lcm_upto(k) == 0)


def test_depth_lambda_consistency_on_lattice_box():
    for v in itertools.product(range(-60, 61, 6), repeat=2):
        d = dp.depth(v, Z2, cap=10**6).value
        for k in range(2, 7):
            m = q.lcm_upto(k)
            assert (d > k) == (any(v) and all(a % m == 0 for a in v))


def test_depth_lambda_consistency_on_heisenberg_box():
    for g in itertools.product(range(-4, 5), repeat=3):
        d = dp.depth(g, H, cap=10**6).value
        for k in range(2, 9):
            assert (d > k) == (g != (0, 0, 0) and q.heisenberg_in_lambda(g, k))


# -- Heisenberg formula against the congruence scan --------------------------


def test_heisenberg_formula_matches_scan_on_box():
    for g in itertools.product(range(-4, 5), repeat=3):
        formula = dp.heisenberg_depth(g, cap=12)
        scan = dp.heisenberg_depth_scan(g, cap=12)
        assert formula.value == scan.value, g
        if formula.value is None:
            assert scan.lower_bound == 13 and formula.upper_bound > 12


def test_heisenberg_formula_matches_scan_on_spread_elements():
    rng = random.Random(5)
    for _ in range(400):
        g = tuple(rng.choice([-24, -12, -6, -4, -2, 0, 2, 3, 4, 6, 8, 12, 60]) * rng.randint(-2, 2) for _ in range(3))
        assert dp.heisenberg_depth(g, cap=16).value == dp.heisenberg_depth_scan(g, cap=16).value, g


def test_heisenberg_central_depths():
    for z, expected in ((1, 8), (2, 27), (6, 64), (12, 125), (-3, 8)):
        assert dp.heisenberg_depth((0, 0, z), cap=10**6).value == expected


def test_heisenberg_scan_is_capped():
    with pytest.raises(CapacityError):
        dp.heisenberg_depth_scan((1, 0, 0), cap=18)


def test_heisenberg_scan_does_not_stop_early():
    # c has depth 8: the scan must look through every j < 8 before answering
    r = dp.heisenberg_depth_scan((0, 0, 1), cap=8)
    assert r.value == 8
    r = dp.heisenberg_depth_scan((0, 0, 1), cap=7)
    assert r.value is None and r.lower_bound == 8


# -- product rule -----------------------------------------------------------


def test_product_rule_examples():
    G = grp.parse_group("ZxZ/3")
    assert dp.depth_product_rule(1, 0, G.left, G.right).value == 2
    ZZ = grp.make_direct_product(grp.Z, grp.Z)
    assert dp.depth((2, 3), ZZ).value == 2
    assert dp.depth((2, 3), ZZ).method == "product-rule"
    assert dp.depth_product_rule(0, 0, grp.Z, grp.Z).value == 0


def test_product_rule_matches_enumeration_exhaustively():
    G = grp.parse_group("Z/4xZ/6")
    for a in range(4):
        for b in range(6):
            assert dp.depth((a, b), G).value == dp.depth_by_enumeration((a, b), G).value


def test_product_rule_matches_hnf_on_pairs():
    rng = random.Random(17)
    ZZ = grp.make_direct_product(grp.Z, grp.Z)
    for _ in range(10_000):
        v = (rng.randint(-400, 400), rng.randint(-400, 400))
        r = dp.depth(v, ZZ, cap=12)
        assert r.value == hnf_depth(v)


def test_product_rule_with_unknown_component():
    G = grp.make_direct_product(grp.F2, grp.Z)
    aabb = grp.parse_element("F:aabb", grp.F2)
    assert dp.depth((aabb, 0), G).value is None
    assert dp.depth((aabb, 1), G).value == 2  # 2 <= lower bound 3 of the free part
    assert dp.depth((aabb, 6), G).value is None  # 4 could be beaten by an unknown free depth
    assert dp.depth((aabb, 6), G).upper_bound == 4


def test_free_group_parity_depths():
    F = grp.F2
    assert dp.depth(grp.parse_element("F:a", F), F).value == 2
    assert dp.depth(grp.parse_element("F:ab", F), F).value == 2  # a-exponent is odd
    r = dp.depth(grp.parse_element("F:aba^-1b^-1", F), F)
    assert r.value is None and r.lower_bound == 3


# -- bounds from quotients ----------------------------------------------------


def test_quotient_bound_is_sound():
    rng = random.Random(9)
    maps = [(q.integer_mod(12), grp.Z), (q.heisenberg_mod(4), H), (q.lattice_mod(2, 6), Z2)]
    for qmap, G in maps:
        for _ in range(500):
            g = G.random_element(rng, 30)
            b = dp.depth_bound_via_quotient(g, qmap)
            if qmap(g) != qmap.target.identity:
                assert b.upper_bound <= qmap.target.order
                assert dp.depth(g, G, cap=10**6).value <= b.upper_bound
            else:
                assert b.upper_bound is None


def test_torsion_quotient_bound():
    # Z x Z/3 -> Z kills the torsion; depth upstairs is at most depth downstairs
    G = grp.parse_group("ZxZ/3")
    for a in range(-30, 31):
        for b in range(3):
            up = dp.depth((a, b), G, cap=10**6).value
            if a:
                assert up <= dp.depth(a, grp.Z, cap=10**6).value


# -- residual finiteness growth ---------------------------------------------


def test_growth_examples():
    assert dp.residual_finiteness_growth(grp.Z, 1) == 2
    assert dp.residual_finiteness_growth(grp.Z, 2) == 3
    assert dp.residual_finiteness_growth(grp.Z, 6) == 4


def test_growth_is_nondecreasing():
    for G, n in ((grp.Z, 200), (Z2, 30), (H, 18)):
        F = dp.growth_table(G, n)
        assert F == sorted(F)


def test_heisenberg_growth_golden(data_dir):
    golden = json.loads((data_dir / "golden" / "heisenberg_growth.json").read_text())
    assert dp.growth_table(H, golden["radius_max"]) == golden["F"]


@pytest.mark.parametrize("G,n_max", [(grp.Z, 200), (H, 24)], ids=["Z", "H"])
def test_growth_dominated_by_log_power(G, n_max):
    """F(n) <= C log(n)^h with C fitted on the first half of the range."""
    F = dp.growth_table(G, n_max)
    h = G.hirsch
    ns = np.arange(2, n_max + 1)
    ratio = np.array([F[n] / math.log(n) ** h for n in ns])
    C = ratio[: len(ns) // 2].max()
    assert (ratio <= 1.5 * C).all()


def test_growth_budget_reports_partial():
    with pytest.raises(CapacityError) as info:
        dp.residual_finiteness_growth(H, 40, budget=1000)
    assert info.value.partial is not None


def test_batch_depth_matches_scalar():
    rng = random.Random(1)
    for G in (grp.Z, Z2, H, grp.parse_group("Z/4xZ/6"), grp.parse_group("ZxH"), grp.F2):
        elems = [G.random_element(rng, 30) for _ in range(300)]
        if isinstance(G, grp.IntegerGroup):
            state = np.array(elems)
        elif isinstance(G, (grp.LatticeGroup, grp.HeisenbergGroup)):
            state = np.array(elems, dtype=np.int64)
        elif isinstance(G, grp.ProductGroup) and G.is_finite():
            state = (np.array([e[0] for e in elems]), np.array([e[1] for e in elems]))
        elif isinstance(G, grp.ProductGroup):
            state = (np.array([e[0] for e in elems]), np.array([e[1] for e in elems], dtype=np.int64))
        else:
            state = elems
        expected = [dp.depth(g, G, cap=9).capped(9) for g in elems]
        assert list(dp.batch_depth(G, state, 9)) == expected
