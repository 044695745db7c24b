import math
from fractions import Fraction

import pytest

from expdepth import expectations as ex
from expdepth import groups as grp
from expdepth import quotients as q
from expdepth import tables
from expdepth.errors import UsageError


def true_integer_tail(K, d=1, k_far=400):
    m, total = math.lcm(*range(1, K + 1)), Fraction(0)
    for k in range(K + 1, k_far + 1):
        m = math.lcm(m, k)
        total += Fraction(1, m**d)
    return total


def test_presumed_limit_examples():
    assert ex.presumed_limit(ex.synthetic_table({1: 1})).exact == 2
    z = ex.presumed_limit(q.lambda_table(grp.Z, 10))
    assert abs(z.value - 2.7877) < 1e-4
    z2 = ex.presumed_limit(q.lambda_table(grp.LatticeGroup(2), 6))
    assert z2.exact == 2 + Fraction(1, 4) + Fraction(1, 36) + Fraction(1, 144) + 2 * Fraction(1, 3600)
    assert z2.exact == Fraction(8227, 3600)


def test_partial_sums_step_by_reciprocal_index():
    for spec, K in (("Z", 12), ("Z^2", 6), ("H", 8)):
        G = grp.parse_group(spec)
        a = ex.presumed_limit(q.lambda_table(G, K - 1)).exact
        b = ex.presumed_limit(q.lambda_table(G, K)).exact
        assert b - a == Fraction(1, q.lambda_table(G, K).index(K))


@pytest.mark.parametrize("K", [2, 5, 7, 10, 12, 20])
def test_tail_bound_dominates_true_tail(K):
    assert ex._tail(1, K) >= float(true_integer_tail(K))
    assert ex._tail(2, K) >= float(true_integer_tail(K, 2))


def test_naive_tail_bound_is_too_small():
    # 2 / m_(K+1) does not bound the tail: at K = 10 the tail is about 8.2e-5
    K = 10
    naive = 2 / q.lcm_upto(K + 1)
    assert float(true_integer_tail(K)) > naive
    assert ex.presumed_limit(q.lambda_table(grp.Z, K)).tail_bound >= float(true_integer_tail(K))


def test_no_tail_for_other_groups():
    est = ex.presumed_limit(q.lambda_table(grp.HEISENBERG, 8))
    assert est.tail_bound is None and est.upper is None and not est.divergent


def test_divergence_examples():
    slow = ex.synthetic_table({k: k for k in range(2, 31)})  # harmonic-like terms
    assert ex.divergence_flag(slow).flag
    assert ex.presumed_limit(slow).divergent
    fast = ex.synthetic_table({k: 2**k for k in range(2, 31)})
    assert not ex.divergence_flag(fast).flag
    assert not ex.divergence_flag(q.lambda_table(grp.Z, 12)).flag
    assert "threshold" in ex.divergence_flag(slow).diagnostics


@pytest.mark.parametrize("table", [tables.cyclic(12), tables.direct_product(tables.cyclic(4), tables.cyclic(6)), tables.dihedral(5), tables.heisenberg_mod(4), tables.quaternion()], ids=lambda t: t.name)
def test_uniform_average_identity(table):
    by_value, by_layers = ex.uniform_average_depth(table)
    assert by_value == by_layers


def test_uniform_average_small_example():
    # Z/6: depths 0, 2, 3, 2, 3, 2
    assert ex.uniform_average_depth(tables.cyclic(6))[0] == Fraction(12, 6)


def test_domination_partial_sums_stabilise():
    sums = ex.domination_partial_sums(12, 2000)
    assert sums == sorted(sums)
    assert sums[-1] - sums[-3] < 0.01 and sums[-1] < 2


def test_defect_bounds():
    for n in (10, 100, 1000):
        sharp = ex.integer_defect_bound(n, 8)
        loose = ex.integer_defect_bound(n, 8, sharp=False)
        assert 0 < sharp <= loose
    assert ex.cyclic_mu2(2) == 0.0 and abs(ex.cyclic_mu2(4) - 0.5) < 1e-15


def test_sharp_defect_bound_is_valid():
    from expdepth.walks import prob_multiple_integer_walk, prob_zero_integer_walk

    for n in (5, 50, 500, 3000):
        for K in (4, 8, 12):
            terms = 2 * (1 - prob_zero_integer_walk(n)) + sum(prob_multiple_integer_walk(n, m) for m in q.lcm_sequence(K))
            partial = ex.presumed_limit(q.lambda_table(grp.Z, K)).value
            assert partial - terms <= ex.integer_defect_bound(n, K) + 1e-12


def test_convergence_report_exact_rows():
    rep = ex.convergence_report(grp.Z, [1, 10, 1000], K=12)
    assert [r.n for r in rep.rows] == [1, 10, 1000]
    assert rep.rows[0].estimate == 1.0
    assert all(r.exact and r.fatou_ok for r in rep.rows)
    assert rep.fatou_violations == []
    gaps = [r.gap for r in rep.rows]
    assert gaps == sorted(gaps, reverse=True)


def test_convergence_report_monte_carlo_rows():
    rep = ex.convergence_report(grp.LatticeGroup(2), [0, 200], K=4, trials=4000, seed=3)
    assert not rep.rows[0].exact and rep.rows[0].estimate == 0
    assert rep.rows[0].fatou_ok  # below n0
    assert rep.trials == 4000 and rep.seed == 3


def test_convergence_report_errors():
    with pytest.raises(UsageError):
        ex.convergence_report(grp.F2, [10], K=4)
    with pytest.raises(UsageError):
        ex.convergence_report(grp.HEISENBERG, [10], K=4, exact=True)
