import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import assert_tlevel_outcome_invariants
from tlevel.distributions import (Empirical, ProductPrior, TruncatedExponential,
                                  Uniform, sample_profiles)
from tlevel.errors import ConfigError
from tlevel.feasibility import Environment, MatroidSpec, max_weight_feasible
from tlevel.mechanisms import (
    TLevelAuction, batch_revenue, level_of, levels_batch,
    myerson_expected_revenue, myerson_payment_batch, myerson_surplus_batch,
    run_auction, run_general, run_matroid, run_myerson, run_single_item,
    truncated_revenue,
)


def test_level_of_examples(example1):
    assert level_of(example1, 0, 3.0) == 0
    assert level_of(example1, 0, 1.9) == -1
    assert level_of(example1, 0, 8.0) == 3
    assert level_of(example1, 0, 4.0) == 1  # boundary bid attains the level


def test_auction_validation():
    env = Environment.single_item(2)
    with pytest.raises(ConfigError, match="nondecreasing"):
        TLevelAuction([[2, 1], [1, 2]], (0, 1), env)
    with pytest.raises(ConfigError, match="permutation"):
        TLevelAuction([[1, 2], [1, 2]], (0, 0), env)
    with pytest.raises(ConfigError, match="phi_vector"):
        TLevelAuction([[1, 2], [1, 2]], (0, 1), env, phi_vector=[0, 1])
    expl = Environment.explicit([[], [0]], 1)
    with pytest.raises(ConfigError, match="phi_vector"):
        TLevelAuction([[1, 2]], (0,), expl)
    with pytest.raises(ConfigError, match="strictly increasing"):
        TLevelAuction([[1, 2]], (0,), expl, phi_vector=[1, 1])


# ---------------------------------------------------------------------------
# single item: the golden payment scenarios
# ---------------------------------------------------------------------------


def test_monop_case(example1):
    out = run_single_item(example1, [3.0, 1.0, 1.0])
    assert out.winners == {0}
    assert out.payments[0] == pytest.approx(2.0)
    assert out.case == "monop"


def test_mult_case(example1):
    out = run_single_item(example1, [8.0, 10.0, 1.0])
    assert out.winners == {0}
    assert out.payments[0] == pytest.approx(8.0)
    assert out.case == "mult"


def test_unique_case_dominant(example1):
    out = run_single_item(example1, [8.0, 5.0, 4.0])
    assert out.winners == {0}
    assert out.payments[0] == pytest.approx(4.0)
    assert out.case == "unique"


def test_unique_case_dominated(example1):
    out = run_single_item(example1, [5.0, 5.0, 6.5])
    assert out.winners == {2}
    assert out.payments[2] == pytest.approx(6.0)
    assert out.case == "unique"


def test_no_sale(example1):
    out = run_single_item(example1, [1.0, 1.0, 1.0])
    assert out.winners == frozenset()
    assert out.revenue == 0.0
    assert out.case is None


def _random_auction(rng, env, t, phi_vector=None, hi=3.0):
    n = env.n
    thr = np.sort(rng.uniform(0, hi, (n, t)), axis=1)
    tie = tuple(rng.permutation(n))
    return TLevelAuction(thr, tie, env, phi_vector=phi_vector)


def test_case_tags_partition_sales():
    rng = np.random.default_rng(4)
    env = Environment.single_item(3)
    seen = set()
    for _ in range(500):
        a = _random_auction(rng, env, 3)
        out = run_single_item(a, rng.uniform(0, 3.5, 3))
        if out.winners:
            assert out.case in ("monop", "mult", "unique")
            seen.add(out.case)
        else:
            assert out.case is None
    assert seen == {"monop", "mult", "unique"}


# ---------------------------------------------------------------------------
# matroid runs
# ---------------------------------------------------------------------------


def test_one_uniform_matroid_equals_single_item(example1):
    env = Environment.from_matroid(MatroidSpec.uniform(1), 3)
    a = TLevelAuction(example1.thresholds, example1.tie_order, env)
    for v in ([3, 1, 1], [8, 10, 1], [8, 5, 4], [5, 5, 6.5], [1, 1, 1]):
        single = run_single_item(example1, v)
        matroid = run_matroid(a, v)
        assert matroid.winners == single.winners
        assert np.allclose(matroid.payments, single.payments)


def test_one_uniform_equivalence_exhaustive_grids():
    grid = [0.5, 1.5, 2.5]
    env1 = Environment.single_item(2)
    envm = Environment.from_matroid(MatroidSpec.uniform(1), 2)
    for t in (1, 2):
        for rows in itertools.product(
                itertools.combinations_with_replacement([1.0, 2.0], t), repeat=2):
            a1 = TLevelAuction(np.array(rows), (1, 0), env1)
            am = TLevelAuction(np.array(rows), (1, 0), envm)
            for v in itertools.product(grid, repeat=2):
                s, m = run_single_item(a1, v), run_matroid(am, v)
                assert s.winners == m.winners and np.allclose(s.payments, m.payments)


def test_matroid_critical_bid_payments():
    env = Environment.from_matroid(MatroidSpec.uniform(2), 3)
    a = TLevelAuction([[1, 2]] * 3, (0, 1, 2), env)
    # both high bidders could drop to the lowest level and still win by tie
    # order against the third, so the critical bids are the lowest thresholds
    out = run_matroid(a, [2.5, 2.5, 1.5])
    assert out.winners == {0, 1}
    assert np.allclose(out.payments, [1.0, 1.0, 0.0])
    out = run_matroid(a, [2.5, 1.5, 1.5])
    assert out.winners == {0, 1}
    assert np.allclose(out.payments, [1.0, 1.0, 0.0])
    # make the third bidder dominant in the tie order: dropping to level 0
    # now loses the tie, so staying at level 1 is critical
    b = TLevelAuction([[1, 2]] * 3, (2, 0, 1), env)
    out = run_matroid(b, [2.5, 2.5, 1.5])
    assert out.winners == {0, 1}
    assert np.allclose(out.payments, [2.0, 2.0, 0.0])


def test_matroid_winner_set_greedy():
    env = Environment.from_matroid(MatroidSpec.partition([[0, 1], [2]], [1, 1]), 3)
    a = TLevelAuction([[1, 2], [1, 2], [1, 2]], (0, 1, 2), env)
    out = run_matroid(a, [1.5, 2.5, 2.5])
    assert out.winners == {1, 2}


# ---------------------------------------------------------------------------
# general single-parameter runs
# ---------------------------------------------------------------------------


def test_general_empty_outcome_rule():
    env = Environment.explicit([[], [0, 1], [2]], 3)
    phi = np.linspace(-3.0, 1.0, 5)
    a = TLevelAuction(np.tile(np.linspace(0.2, 0.8, 5), (3, 1)), (0, 1, 2), env,
                      phi_vector=phi)
    out = run_general(a, [0.9, 0.1, 0.9])  # bidder 1 below her lowest threshold
    assert out.winners == frozenset() and out.revenue == 0.0


def test_general_payment_tie_with_empty_set():
    env = Environment.explicit([[], [0]], 1)
    a = TLevelAuction([[2.0, 5.0]], (0,), env, phi_vector=[0.0, 1.0])
    out = run_general(a, [6.0])
    assert out.winners == {0}
    assert out.payments[0] == pytest.approx(2.0)


def test_general_payment_strict_vs_rival_singleton():
    env = Environment.explicit([[], [0], [1]], 2)
    a = TLevelAuction([[2.0, 5.0], [3.0, 4.0]], (0, 1), env, phi_vector=[0.0, 1.0])
    out = run_general(a, [6.0, 3.5])
    assert out.winners == {0}
    assert out.payments[0] == pytest.approx(5.0)


# ---------------------------------------------------------------------------
# batch paths agree with the scalar rules
# ---------------------------------------------------------------------------


def test_batch_matches_scalar_single_item():
    rng = np.random.default_rng(7)
    env = Environment.single_item(3)
    for _ in range(40):
        a = _random_auction(rng, env, rng.integers(1, 4))
        V = rng.uniform(0, 3.5, (50, 3))
        assert np.allclose(batch_revenue(a, V),
                           [run_single_item(a, v).revenue for v in V])


def test_batch_matches_scalar_matroid():
    rng = np.random.default_rng(8)
    for spec, n in ((MatroidSpec.uniform(2), 3), (MatroidSpec.uniform(1), 2),
                    (MatroidSpec.uniform(3), 4),
                    (MatroidSpec.partition([[0, 1], [2]], [1, 1]), 3)):
        env = Environment.from_matroid(spec, n)
        for _ in range(15):
            a = _random_auction(rng, env, rng.integers(1, 4))
            V = rng.uniform(0, 3.5, (40, n))
            assert np.allclose(batch_revenue(a, V),
                               [run_matroid(a, v).revenue for v in V])


def test_batch_matches_scalar_general():
    rng = np.random.default_rng(9)
    env = Environment.explicit([[], [0, 1], [2], [0, 2]], 3)
    for _ in range(15):
        t = int(rng.integers(2, 6))
        phi = np.cumsum(rng.uniform(0.1, 1.0, t)) - 2.0
        a = _random_auction(rng, env, t, phi_vector=phi, hi=1.0)
        V = rng.uniform(0, 1.2, (60, 3))
        assert np.allclose(batch_revenue(a, V),
                           [run_general(a, v).revenue for v in V])


def test_levels_batch_matches_scalar(example1):
    rng = np.random.default_rng(10)
    V = rng.uniform(0, 11, (30, 3))
    L = levels_batch(example1, V)
    for j in range(30):
        for i in range(3):
            assert L[j, i] == level_of(example1, i, V[j, i])


# ---------------------------------------------------------------------------
# truthfulness fuzz: payments are critical bids
# ---------------------------------------------------------------------------


def _critical_bid_checks(auction, profile, run):
    out = run(auction, profile)
    assert_tlevel_outcome_invariants(auction, profile, out)
    v = np.asarray(profile, dtype=float)
    for i in sorted(out.winners):
        p = out.payments[i]
        bid_at = v.copy()
        bid_at[i] = p
        assert i in run(auction, bid_at).winners
        below = auction.thresholds[i][auction.thresholds[i] < p - 1e-12]
        delta = (p - below[-1]) / 2 if below.size else p / 2
        if p - delta >= 0:
            bid_below = v.copy()
            bid_below[i] = p - delta
            assert i not in run(auction, bid_below).winners
    # losers cannot win without reaching their next threshold
    for i in range(auction.n):
        if i in out.winners:
            continue
        lev = level_of(auction, i, v[i])
        if lev + 1 < auction.t:
            nudged = v.copy()
            nudged[i] = np.nextafter(auction.thresholds[i, lev + 1], -np.inf)
            if nudged[i] >= v[i]:
                assert i not in run(auction, nudged).winners


def test_truthfulness_fuzz_single_item_and_matroid():
    rng = np.random.default_rng(12)
    env_s = Environment.single_item(3)
    env_m = Environment.from_matroid(MatroidSpec.uniform(2), 4)
    for _ in range(500):
        a = _random_auction(rng, env_s, int(rng.integers(1, 4)))
        _critical_bid_checks(a, rng.uniform(0, 3.5, 3), run_single_item)
        b = _random_auction(rng, env_m, int(rng.integers(1, 4)))
        _critical_bid_checks(b, rng.uniform(0, 3.5, 4), run_matroid)


def test_truthfulness_fuzz_general():
    rng = np.random.default_rng(13)
    env = Environment.explicit([[], [0, 1], [2], [1, 2]], 3)
    for _ in range(300):
        t = int(rng.integers(2, 5))
        phi = np.cumsum(rng.uniform(0.05, 0.8, t)) - 1.5
        a = _random_auction(rng, env, t, phi_vector=phi, hi=1.0)
        _critical_bid_checks(a, rng.uniform(0, 1.2, 3), run_general)


@given(st.lists(st.floats(0.0, 3.0), min_size=2, max_size=2),
       st.lists(st.floats(0.0, 4.0), min_size=2, max_size=2))
def test_outcome_invariants_property(row, profile):
    env = Environment.single_item(2)
    a = TLevelAuction(np.sort(np.array([row, row]), axis=1), (1, 0), env)
    out = run_single_item(a, profile)
    assert_tlevel_outcome_invariants(a, profile, out)


# ---------------------------------------------------------------------------
# Myerson oracle
# ---------------------------------------------------------------------------


def test_myerson_single_bidder_reserve():
    prior = ProductPrior([Uniform(0, 1)])
    env = Environment.single_item(1)
    out = run_myerson(prior, env, [0.7])
    assert out.winners == {0}
    assert out.payments[0] == pytest.approx(0.5, abs=1e-6)
    assert run_myerson(prior, env, [0.3]).winners == frozenset()


def test_myerson_two_bidders_vickrey_form():
    prior = ProductPrior([Uniform(0, 1), Uniform(0, 1)])
    env = Environment.single_item(2)
    out = run_myerson(prior, env, [0.8, 0.6])
    assert out.winners == {0}
    assert out.payments[0] == pytest.approx(0.6, abs=1e-6)
    out = run_myerson(prior, env, [0.55, 0.2])
    assert out.payments[0] == pytest.approx(0.5, abs=1e-6)


def test_myerson_no_sale_when_all_negative():
    prior = ProductPrior([Uniform(0, 1), Uniform(0, 1)])
    env = Environment.single_item(2)
    assert run_myerson(prior, env, [0.2, 0.4]).winners == frozenset()


def test_myerson_winner_is_positive_argmax():
    prior = ProductPrior([Uniform(0, 1), Uniform(1, 2), Uniform(0, 2)])
    env = Environment.single_item(3)
    curves = prior.curves()
    for v in itertools.product(np.linspace(0.05, 0.95, 5),
                               np.linspace(1.05, 1.95, 5),
                               np.linspace(0.05, 1.95, 5)):
        phi = np.array([curves[i].phi_scalar(v[i]) for i in range(3)])
        assert run_myerson(prior, env, v).winners == max_weight_feasible(env, phi)


def test_myerson_expected_revenue_examples():
    prior = ProductPrior([Uniform(0, 1)])
    est, hw = myerson_expected_revenue(prior, Environment.single_item(1), 300_000, 5)
    assert est == pytest.approx(0.25, abs=0.005)
    prior = ProductPrior([Uniform(1, 2), Uniform(1, 2)])
    est, hw = myerson_expected_revenue(prior, Environment.single_item(2), 300_000, 5)
    assert est == pytest.approx(4.0 / 3.0, abs=0.01)
    prior = ProductPrior([Empirical([5.0])])
    est, hw = myerson_expected_revenue(prior, Environment.single_item(1), 1000, 5)
    assert est == 5.0 and hw == 0.0


def test_myerson_payment_batch_matches_scalar():
    prior = ProductPrior([Uniform(0, 1), Uniform(1, 2)])
    env = Environment.single_item(2)
    V = sample_profiles(prior, 200, 17)
    batch = myerson_payment_batch(prior, env, V)
    scalar = np.array([run_myerson(prior, env, v).revenue for v in V])
    assert np.allclose(batch, scalar, atol=1e-6)


def test_myerson_surplus_batch_matroid_matches_loop():
    prior = ProductPrior([Uniform(0, 1)] * 4)
    env = Environment.from_matroid(MatroidSpec.uniform(2), 4)
    V = sample_profiles(prior, 300, 3)
    fast = myerson_surplus_batch(prior, env, V)
    curves = prior.curves()
    slow = []
    for v in V:
        phi = np.array([curves[i].phi_scalar(v[i]) for i in range(4)])
        win = max_weight_feasible(env, phi)
        slow.append(phi[list(win)].sum() if win else 0.0)
    assert np.allclose(fast, slow)


def test_truncated_revenue():
    out = run_auction(
        TLevelAuction([[7.0]], (0,), Environment.single_item(1)), [9.0])
    assert out.revenue == 7.0
    assert truncated_revenue(out, 5.0) == 5.0
    assert truncated_revenue(out, 8.0) == 7.0
    zero = run_auction(
        TLevelAuction([[7.0]], (0,), Environment.single_item(1)), [1.0])
    assert truncated_revenue(zero, 5.0) == 0.0
