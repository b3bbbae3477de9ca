import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tlevel.distributions import (
    DistributionError, Empirical, PiecewiseLinearCdf, ProductPrior,
    TruncatedExponential, Uniform, check_mhr, dist_from_spec, inverse_virtual,
    iron, prior_from_spec, sample_profile, sample_profiles, virtual_value,
)
from tlevel.errors import ConfigError

MIXTURE = [(0.0, 0.0), (1.0, 0.5), (2.0, 0.5), (3.0, 1.0)]


def continuous_kinds():
    return [
        Uniform(0, 1),
        Uniform(1, 2),
        TruncatedExponential(1.0, 10.0),
        TruncatedExponential(0.5, 8.0),
        PiecewiseLinearCdf([(0, 0), (1, 0.25), (2, 1.0)]),
    ]


# ---------------------------------------------------------------------------
# cdf / pdf / quantile contracts
# ---------------------------------------------------------------------------


def test_cdf_endpoints():
    for d in continuous_kinds() + [PiecewiseLinearCdf(MIXTURE), Empirical([1, 2, 5])]:
        assert d.cdf(d.support_lo - 1e-12) <= 1e-9 or d.support_lo == 0
        assert float(d.cdf(d.support_hi)) == pytest.approx(1.0, abs=1e-9)
    assert float(Uniform(1, 2).cdf(1.0)) == 0.0


def test_quantile_cdf_roundtrip_interior():
    for d in continuous_kinds():
        v = np.linspace(d.support_lo, d.support_hi, 102)[1:-1]
        back = d.quantile(d.cdf(v))
        assert np.max(np.abs(back - v)) < 1e-6


def test_mixture_roundtrip_outside_gap():
    d = PiecewiseLinearCdf(MIXTURE)
    for v in np.concatenate([np.linspace(0.01, 0.99, 50), np.linspace(2.01, 2.99, 50)]):
        assert float(d.quantile(d.cdf(v))) == pytest.approx(v, abs=1e-9)
    # the flat stretch maps to its left edge under the lower quantile
    assert float(d.quantile(0.5)) == pytest.approx(1.0)
    assert float(d.price_at_sale_prob(0.5)) == pytest.approx(2.0)


def test_pdf_nonnegative():
    for d in continuous_kinds() + [PiecewiseLinearCdf(MIXTURE)]:
        v = np.linspace(d.support_lo, d.support_hi, 200)
        assert np.all(d.pdf(v) >= 0)


def test_empirical_step_cdf_and_quantile():
    d = Empirical([1.0, 2.0, 4.0, 4.0])
    assert float(d.cdf(0.5)) == 0.0
    assert float(d.cdf(2.0)) == 0.5
    assert float(d.cdf(4.0)) == 1.0
    assert float(d.quantile(0.5)) == 2.0
    assert float(d.quantile(0.51)) == 4.0
    with pytest.raises(DistributionError):
        d.pdf(1.0)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_quantile_monotone(p1, p2):
    lo, hi = sorted([p1, p2])
    for d in (Uniform(0, 3), TruncatedExponential(2.0, 5.0),
              PiecewiseLinearCdf(MIXTURE), Empirical([1, 2, 7])):
        assert float(d.quantile(lo)) <= float(d.quantile(hi)) + 1e-12


# ---------------------------------------------------------------------------
# virtual values
# ---------------------------------------------------------------------------


def test_virtual_value_examples():
    assert virtual_value(Uniform(0, 1), 0.75) == pytest.approx(0.5)
    assert virtual_value(Uniform(0, 1), 1.0) == pytest.approx(1.0)
    assert virtual_value(TruncatedExponential(1.0), 3.0) == pytest.approx(2.0)


def test_virtual_value_zero_density():
    with pytest.raises(DistributionError, match="undefined virtual value"):
        virtual_value(PiecewiseLinearCdf(MIXTURE), 1.5)
    with pytest.raises(DistributionError):
        virtual_value(Uniform(0, 1), 2.0)  # outside support


def test_virtual_value_at_most_value():
    rng = np.random.default_rng(0)
    for d in continuous_kinds():
        hi = d.support_hi
        v = d.support_lo + rng.random(100) * (hi - d.support_lo)
        for x in v:
            assert virtual_value(d, float(x)) <= float(x) + 1e-12


def test_curve_phi_at_most_value():
    rng = np.random.default_rng(1)
    for d in continuous_kinds() + [PiecewiseLinearCdf(MIXTURE), Empirical([1, 2, 5])]:
        c = iron(d, 512)
        v = d.support_lo + rng.random(100) * (d.support_hi - d.support_lo)
        assert np.all(c.phi(v) <= v + 1e-4)


# ---------------------------------------------------------------------------
# ironing
# ---------------------------------------------------------------------------


def test_iron_regular_is_noop_up_to_grid():
    d = Uniform(0, 1)
    c = iron(d, 1024)
    values = d.price_at_sale_prob(c.quantile_grid)
    raw = d.raw_phi(values)
    assert np.max(np.abs(c.ironed_phi - raw)) <= 2.0 / 1024


def test_iron_requires_grid():
    with pytest.raises(ConfigError):
        iron(Uniform(0, 1), 8)


def test_iron_degenerate_point_mass():
    c = iron(Empirical([1.0, 1.0, 1.0, 1.0]))
    assert c.degenerate
    assert c.phi(np.array([1.0]))[0] == pytest.approx(1.0)
    assert c.inverse(0.5) == 1.0
    assert c.inverse(1.5) == 1.0  # above the constant: clamps to support top


def test_iron_mixture_flat_bridge():
    c = iron(PiecewiseLinearCdf(MIXTURE), 4096)
    inside = c.phi(np.linspace(0.05, 0.95, 50))
    # the ironed curve bridges the support gap with one flat segment at -2,
    # the chord slope from (q=1/2, R=1) to (q=1, R=0)
    assert np.max(inside) - np.min(inside) < 1e-4
    assert np.mean(inside) == pytest.approx(-2.0, abs=1e-2)
    upper = c.phi(np.array([2.1, 2.9]))
    assert upper[0] == pytest.approx(2 * 2.1 - 3, abs=1e-2)
    assert upper[1] == pytest.approx(2 * 2.9 - 3, abs=1e-2)


def _brute_majorant_values(q, r):
    # least concave majorant via max over all chords; O(G^3) reference
    out = np.copy(r)
    for k in range(q.size):
        best = r[k]
        for i in range(k + 1):
            for j in range(k, q.size):
                if q[j] == q[i]:
                    continue
                lam = (q[k] - q[i]) / (q[j] - q[i])
                best = max(best, r[i] + lam * (r[j] - r[i]))
        out[k] = best
    return out


@pytest.mark.parametrize("dist", [
    PiecewiseLinearCdf(MIXTURE),
    Empirical([1.0, 2.0, 6.0]),
    Uniform(0, 1),
])
def test_majorant_matches_bruteforce(dist):
    c = iron(dist, 48)
    brute = _brute_majorant_values(c.quantile_grid, c.grid_revenue)
    hull = np.interp(c.quantile_grid, c.hull_q, c.hull_r)
    assert np.allclose(hull, brute, atol=1e-9)


def test_majorant_dominates_with_contact():
    for dist in (PiecewiseLinearCdf(MIXTURE), Empirical([1.0, 3.0, 9.0])):
        c = iron(dist, 256)
        hull = np.interp(c.quantile_grid, c.hull_q, c.hull_r)
        assert np.all(hull >= c.grid_revenue - 1e-12)
        for hq, hr in zip(c.hull_q, c.hull_r):
            k = int(round(hq * c.grid_size))
            assert c.grid_revenue[k] == pytest.approx(hr, abs=1e-12)


def test_ironed_phi_strictly_increasing_in_value():
    for dist in (PiecewiseLinearCdf(MIXTURE), Empirical([1.0, 2.0, 6.0])):
        c = iron(dist, 256)
        # grid is ascending in sale probability, so descending in value
        assert np.all(np.diff(c.ironed_phi) < 0)


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------


def test_inverse_virtual_examples():
    d = Uniform(0, 1)
    c = iron(d)
    assert inverse_virtual(c, d, 0.0) == pytest.approx(0.5, abs=1e-9)
    d12 = Uniform(1, 2)
    assert iron(d12).inverse(0.0) == pytest.approx(1.0, abs=1e-9)
    assert c.inverse(1e9) == d.support_hi
    assert c.inverse(-1e9) == d.support_lo


def test_inverse_recovers_values():
    for d in (Uniform(0, 1), Uniform(1, 2), TruncatedExponential(1.0, 10.0)):
        c = iron(d, 512)
        v = np.linspace(d.support_lo, d.support_hi, 33)[1:-1]
        targets = c.phi(v)
        back = c.inverse_batch(targets)
        assert np.max(np.abs(back - v)) < 1e-6


def test_inverse_on_ironed_flat_segment():
    c = iron(PiecewiseLinearCdf(MIXTURE), 2048)
    # targets inside the flat bridge resolve within or above the gap: the
    # strictness ramp makes the answer unambiguous and phi(v) >= target holds
    for target in (-1.9, -0.5, 0.5):
        v = c.inverse(target)
        assert c.phi(np.array([v]))[0] >= target - 1e-9


# ---------------------------------------------------------------------------
# hazard rates
# ---------------------------------------------------------------------------


def test_check_mhr_examples():
    assert check_mhr(Uniform(0, 1), 512)
    assert check_mhr(TruncatedExponential(1.0, 10.0), 512)
    assert check_mhr(TruncatedExponential(1.0), 512)
    assert not check_mhr(PiecewiseLinearCdf(MIXTURE), 512)


# ---------------------------------------------------------------------------
# priors and sampling
# ---------------------------------------------------------------------------


def test_prior_validation():
    with pytest.raises(ConfigError):
        ProductPrior([Uniform(0, 2)], h_bound=1.0)
    with pytest.raises(ConfigError):
        ProductPrior([TruncatedExponential(1.0)], h_bound=5.0)
    p = ProductPrior([Uniform(0, 1), Uniform(1, 2)], h_bound=2.0)
    assert p.n == 2 and p.bounded


def test_sample_point_mass():
    p = ProductPrior([Empirical([5.0]), Empirical([5.0])])
    assert np.array_equal(sample_profile(p, 3), [5.0, 5.0])


def test_sample_determinism():
    p = ProductPrior([Uniform(0, 1)])
    a = sample_profile(p, 42)
    b = sample_profile(p, 42)
    assert np.array_equal(a, b)
    big1 = sample_profiles(p, 40_000, 7)
    big2 = sample_profiles(p, 40_000, 7)
    assert np.array_equal(big1, big2)


def test_sample_mean_clt():
    p = ProductPrior([Uniform(0, 1)])
    draws = sample_profiles(p, 1_000_000, 11)
    assert abs(draws.mean() - 0.5) < 0.003


def test_sample_within_support():
    p = ProductPrior([Uniform(1, 2), TruncatedExponential(1.0, 4.0),
                      PiecewiseLinearCdf(MIXTURE)])
    draws = sample_profiles(p, 5000, 5)
    for i, d in enumerate(p.bidders):
        assert draws[:, i].min() >= d.support_lo - 1e-12
        assert draws[:, i].max() <= d.support_hi + 1e-12


def test_seed_validation():
    p = ProductPrior([Uniform(0, 1)])
    with pytest.raises(ConfigError):
        sample_profiles(p, 10, -1)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_dist_from_spec_kinds(tmp_path):
    assert isinstance(dist_from_spec({"kind": "uniform", "lo": 1, "hi": 2}), Uniform)
    d = dist_from_spec({"kind": "truncated-exponential", "rate": 1, "hi": 10})
    assert isinstance(d, TruncatedExponential) and d.hi == 10
    d = dist_from_spec({"kind": "truncated_exponential", "rate": 1})
    assert math.isinf(d.support_hi)
    d = dist_from_spec({"kind": "piecewise-linear-cdf", "breakpoints": MIXTURE})
    assert isinstance(d, PiecewiseLinearCdf)
    csv_path = tmp_path / "vals.csv"
    csv_path.write_text("value\n1.5\n2.5\n0.5\n")
    d = dist_from_spec({"kind": "empirical", "csv": str(csv_path)})
    assert np.array_equal(d.values, [0.5, 1.5, 2.5])
    with pytest.raises(ConfigError, match="kind"):
        dist_from_spec({"kind": "gaussian"})
    with pytest.raises(ConfigError, match="prior.bidders\\[0\\]"):
        prior_from_spec({"bidders": [{"kind": "uniform", "lo": 2, "hi": 1}]})


def test_prior_from_spec_infers_h_bound():
    p = prior_from_spec({"bidders": [{"kind": "uniform", "lo": 1, "hi": 2},
                                     {"kind": "uniform", "lo": 0, "hi": 1.5}]})
    assert p.h_bound == 2.0
    p = prior_from_spec({"bidders": [{"kind": "truncated-exponential", "rate": 1}]})
    assert p.h_bound is None


def test_spec_round_trip():
    for d in continuous_kinds() + [PiecewiseLinearCdf(MIXTURE), Empirical([1, 2])]:
        d2 = dist_from_spec(d.spec())
        assert d2.spec() == d.spec()
