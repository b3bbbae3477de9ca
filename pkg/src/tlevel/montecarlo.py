"""Deterministic chunked Monte Carlo estimation with confidence half-widths.

Estimators split the sample stream into fixed-size chunks whose RNG streams
are derived from (seed, chunk index) and reduce per-chunk sums in chunk
order, so results are bit-identical for any worker count.  Worker count is
taken from the ``TLEVEL_WORKERS`` environment variable (default 1).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .distributions import SAMPLE_CHUNK, ProductPrior, profile_chunk
from .errors import ConfigError
from .mechanisms import TLevelAuction, batch_revenue

#: two-sided 99% normal quantile
Z99 = 2.5758293035489004
#: coverage used by the Hoeffding fallback
CI_ALPHA = 0.01


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("TLEVEL_WORKERS", "1")))
    except ValueError:
        return 1


def _chunk_plan(m: int):
    start = 0
    index = 0
    while start < m:
        rows = min(SAMPLE_CHUNK, m - start)
        yield index, rows
        start += rows
        index += 1


def mc_stats(fn, prior: ProductPrior, mc_samples: int, seed: int):
    """(mean, variance, count) of fn(profiles) over the seeded sample stream.

    ``fn`` maps an (m, n) profile block to a length-m vector and must be pure.
    """
    if mc_samples < 1:
        raise ConfigError("mc_samples must be positive")

    def one(chunk):
        index, rows = chunk
        vals = np.asarray(fn(profile_chunk(prior, seed, index, rows)), dtype=float)
        return float(vals.sum()), float((vals * vals).sum()), rows

    plan = list(_chunk_plan(mc_samples))
    workers = _workers()
    if workers > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, plan))
    else:
        parts = [one(c) for c in plan]
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    count = sum(p[2] for p in parts)
    mean = total / count
    var = max(0.0, total_sq / count - mean * mean)
    if count > 1:
        var *= count / (count - 1)
    return mean, var, count


def mc_mean(fn, prior: ProductPrior, mc_samples: int, seed: int):
    """(estimate, 99% normal-approximation half-width)."""
    mean, var, count = mc_stats(fn, prior, mc_samples, seed)
    return mean, Z99 * math.sqrt(var / count)


def evaluate(auction: TLevelAuction, prior: ProductPrior, env=None,
             mc_samples: int = 100_000, seed: int = 0, ci: str = "normal",
             range_bound: float | None = None):
    """Monte Carlo expected revenue of a t-level auction under the prior.

    Revenue is capped at the auction's truncation level when one is set.
    ``ci="hoeffding"`` swaps the normal half-width for the distribution-free
    Hoeffding bound, which needs an explicit revenue ``range_bound``.
    """
    if env is not None and env is not auction.env and env.spec() != auction.env.spec():
        raise ConfigError("env disagrees with the auction's environment")
    if prior.n != auction.n:
        raise ConfigError(f"prior has {prior.n} bidders, auction has {auction.n}")
    if mc_samples < 100:
        raise ConfigError("mc_samples must be at least 100")
    eta = auction.truncation

    def fn(V):
        r = batch_revenue(auction, V)
        return np.minimum(r, eta) if eta is not None else r

    mean, var, count = mc_stats(fn, prior, mc_samples, seed)
    if ci == "hoeffding":
        if range_bound is None or range_bound <= 0:
            raise ConfigError("hoeffding half-width needs a positive range_bound")
        hw = range_bound * math.sqrt(math.log(2.0 / CI_ALPHA) / (2.0 * count))
    elif ci == "normal":
        hw = Z99 * math.sqrt(var / count)
    else:
        raise ConfigError(f"unknown ci kind {ci!r}")
    return mean, hw


__all__ = ["Z99", "CI_ALPHA", "mc_stats", "mc_mean", "evaluate"]
