import numpy as np
import pytest
from hypothesis import settings

from tlevel import Environment, TLevelAuction

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def example1():
    """The 4-level, 3-bidder auction exercising all three payment cases."""
    return TLevelAuction(
        [[2.0, 4.0, 6.0, 8.0], [1.5, 5.0, 9.0, 10.0], [1.7, 3.9, 6.0, 7.0]],
        (0, 1, 2),
        Environment.single_item(3),
    )


def assert_tlevel_outcome_invariants(auction, profile, outcome):
    """Losers pay 0; payments never exceed bids and equal own thresholds."""
    v = np.asarray(profile, dtype=float)
    assert outcome.revenue == pytest.approx(float(outcome.payments.sum()))
    for i in range(auction.n):
        if i in outcome.winners:
            p = outcome.payments[i]
            assert p <= v[i] + 1e-9
            assert p == 0.0 or np.any(np.isclose(auction.thresholds[i], p, atol=1e-12))
        else:
            assert outcome.payments[i] == 0.0
    for i, tau in outcome.payment_levels.items():
        assert i in outcome.winners
        assert outcome.payments[i] == pytest.approx(auction.thresholds[i, tau])
