"""Empirical revenue maximization over t-level auctions.

Candidate thresholds default to each bidder's observed sample values (plus an
optional uniform grid).  For one bidder and a single level this restriction
is lossless: raising a reserve to the least sample value at or above it never
lowers empirical revenue.  For richer classes it is a standard heuristic and
is documented as such.  Exhaustive search enumerates every nondecreasing
threshold row per bidder, guarded at 1e7 combinations; coordinate ascent
re-optimizes one (bidder, level) entry at a time from random restarts.

Ties between equally good auctions break toward the lexicographically
smallest threshold matrix, so results are reproducible and independent of
worker count.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import ProductPrior
from .errors import ConfigError, GuardError
from .feasibility import Environment
from .mechanisms import TLevelAuction, batch_revenue, iter_single_item_revenues

EXHAUSTIVE_GUARD = 10_000_000


@dataclass(frozen=True)
class SampleSet:
    """m x n matrix of valuation profiles plus a provenance note."""

    profiles: np.ndarray
    source: str = "synthetic"

    def __post_init__(self):
        arr = np.asarray(self.profiles, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ConfigError("samples must form a nonempty m x n matrix")
        if not np.all(np.isfinite(arr)):
            raise ConfigError("samples must be finite")
        if np.any(arr < 0):
            raise ConfigError("samples must be nonnegative")
        object.__setattr__(self, "profiles", arr)

    @property
    def m(self) -> int:
        return self.profiles.shape[0]

    @property
    def n(self) -> int:
        return self.profiles.shape[1]


@dataclass(frozen=True)
class LearnerConfig:
    t: int = 1
    candidate_policy: str = "sample-values"  # or "sample-values-plus-grid"
    grid_step: float | None = None
    strategy: str = "exhaustive"             # or "coordinate-ascent"
    restarts: int = 8
    max_rounds: int = 50
    truncation: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.t < 1:
            raise ConfigError("t must be at least 1")
        if self.candidate_policy not in ("sample-values", "sample-values-plus-grid"):
            raise ConfigError(f"unknown candidate_policy {self.candidate_policy!r}")
        if self.candidate_policy == "sample-values-plus-grid" and not (
                self.grid_step and self.grid_step > 0):
            raise ConfigError("sample-values-plus-grid needs a positive grid_step")
        if self.strategy not in ("exhaustive", "coordinate-ascent"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.truncation is not None and not self.truncation > 0:
            raise ConfigError("truncation must be positive")


def empirical_revenue(auction: TLevelAuction, samples: SampleSet) -> float:
    """Mean (truncated, when the auction carries a cap) revenue on the samples."""
    if samples.n != auction.n:
        raise ConfigError(f"samples have n={samples.n}, auction has n={auction.n}")
    r = batch_revenue(auction, samples.profiles)
    if auction.truncation is not None:
        r = np.minimum(r, auction.truncation)
    return float(r.mean())


def candidate_thresholds(samples: SampleSet, config: LearnerConfig) -> list[np.ndarray]:
    """Per-bidder sorted candidate values."""
    out = []
    for i in range(samples.n):
        vals = np.unique(samples.profiles[:, i])
        if config.candidate_policy == "sample-values-plus-grid":
            lo, hi = vals.min(), vals.max()
            grid = np.arange(lo, hi + config.grid_step / 2, config.grid_step)
            vals = np.unique(np.concatenate([vals, grid]))
        out.append(vals)
    return out


def _combo_count(candidates, t: int) -> int:
    total = 1
    for c in candidates:
        total *= math.comb(len(c) + t - 1, t)
        if total > EXHAUSTIVE_GUARD:
            return total
    return total


def _tuples_per_bidder(candidates, t: int) -> list[np.ndarray]:
    return [np.array(list(itertools.combinations_with_replacement(c, t)))
            for c in candidates]


def _truncate(r, eta):
    return np.minimum(r, eta) if eta is not None else r


def _exhaustive_posted_price(samples, candidates, eta):
    """Closed form for one bidder, one level: revenue(c) = c * P(v >= c)."""
    v = np.sort(samples.profiles[:, 0])
    c = candidates[0]
    count = v.size - np.searchsorted(v, c, side="left")
    per_sale = _truncate(c, eta)
    values = per_sale * count / v.size
    best = int(np.argmax(values))  # first max: lowest candidate wins ties
    return np.array([[c[best]]]), float(values[best])


def _exhaustive_single_item(samples, candidates, t, eta, tie_order):
    tuples = _tuples_per_bidder(candidates, t)
    best_val = -np.inf
    best_idx = None
    sizes = [arr.shape[0] for arr in tuples]
    for start, rev in iter_single_item_revenues(samples.profiles, tuples, tie_order):
        means = _truncate(rev, eta).mean(axis=1)
        j = int(np.argmax(means))
        if means[j] > best_val + 1e-15:
            best_val = float(means[j])
            best_idx = start + j
    idx = np.unravel_index(best_idx, sizes)
    rows = np.array([tuples[i][idx[i]] for i in range(samples.n)])
    return rows, best_val


def _exhaustive_generic(samples, env, candidates, t, eta, tie_order, phi_vector):
    best_val = -np.inf
    best_rows = None
    for combo in itertools.product(*[itertools.combinations_with_replacement(c, t)
                                     for c in candidates]):
        rows = np.array(combo)
        auction = TLevelAuction(rows, tie_order, env, phi_vector=phi_vector)
        val = float(_truncate(batch_revenue(auction, samples.profiles), eta).mean())
        if val > best_val + 1e-15:
            best_val = val
            best_rows = rows
    return best_rows, best_val


#: largest per-bidder row enumeration attempted inside one ascent step
BLOCK_CAP = 20_000


def _best_row_for_bidder(samples, env, rows, i, tuples_i, eta, tie_order,
                         phi_vector, current):
    """Best replacement for bidder i's whole threshold row, others fixed."""
    if env.kind == "single-item":
        arrays = [tuples_i if j == i else rows[j:j + 1] for j in range(rows.shape[0])]
        best_val, best_tuple = current, None
        for start, rev in iter_single_item_revenues(samples.profiles, arrays,
                                                    tie_order):
            means = _truncate(rev, eta).mean(axis=1)
            j = int(np.argmax(means))
            if means[j] > best_val + 1e-15:
                best_val = float(means[j])
                best_tuple = tuples_i[start + j]
        return best_tuple, best_val
    best_val, best_tuple = current, None
    for tup in tuples_i:
        trial = rows.copy()
        trial[i] = tup
        auction = TLevelAuction(trial, tie_order, env, phi_vector=phi_vector)
        val = float(_truncate(batch_revenue(auction, samples.profiles), eta).mean())
        if val > best_val + 1e-15:
            best_val, best_tuple = val, tup
    return best_tuple, best_val


def _ascent(samples, env, candidates, config, tie_order, phi_vector):
    """Seeded local search: re-optimize one bidder's whole row at a time.

    Row-level moves escape the joint-threshold ridges that defeat
    single-entry updates; when a bidder's row enumeration would exceed
    BLOCK_CAP the step falls back to moving one entry at a time.
    """
    eta = config.truncation
    n, t = samples.n, config.t

    def value(rows):
        auction = TLevelAuction(rows, tie_order, env, phi_vector=phi_vector)
        return float(_truncate(batch_revenue(auction, samples.profiles), eta).mean())

    tuples = [np.array(list(itertools.combinations_with_replacement(c, t)))
              if math.comb(len(c) + t - 1, t) <= BLOCK_CAP else None
              for c in candidates]
    best_val = -np.inf
    best_rows = None
    for restart in range(config.restarts):
        rng = np.random.default_rng(
            np.random.SeedSequence(config.seed, spawn_key=(restart,)))
        rows = np.sort(np.stack([rng.choice(candidates[i], size=t)
                                 for i in range(n)]), axis=1)
        current = value(rows)
        for _ in range(config.max_rounds):
            improved = False
            for i in range(n):
                if tuples[i] is not None:
                    tup, val = _best_row_for_bidder(
                        samples, env, rows, i, tuples[i], eta, tie_order,
                        phi_vector, current)
                    if tup is not None:
                        rows = rows.copy()
                        rows[i] = tup
                        current = val
                        improved = True
                    continue
                for tau in range(t):
                    for c in candidates[i]:
                        if c == rows[i, tau]:
                            continue
                        trial = rows.copy()
                        trial[i, tau] = c
                        trial[i] = np.sort(trial[i])
                        val = value(trial)
                        if val > current + 1e-15:
                            rows, current = trial, val
                            improved = True
            if not improved:
                break
        if current > best_val + 1e-15 or (
                best_rows is not None and abs(current - best_val) <= 1e-15
                and tuple(rows.ravel()) < tuple(best_rows.ravel())):
            best_val, best_rows = current, rows
    return best_rows, best_val


def erm(samples: SampleSet, env: Environment, config: LearnerConfig,
        phi_vector=None):
    """Empirical revenue maximizer over the candidate t-level class.

    Returns (auction, empirical value).  Exhaustive search is exact over the
    candidate grid; coordinate ascent is a seeded local search kept for
    instances the guard rejects.
    """
    if samples.n != env.n:
        raise ConfigError(f"samples have n={samples.n}, env has n={env.n}")
    if env.kind == "explicit" and phi_vector is None:
        raise ConfigError("learning over explicit environments needs a phi_vector")
    candidates = candidate_thresholds(samples, config)
    tie_order = tuple(range(samples.n))
    if config.strategy == "exhaustive":
        total = _combo_count(candidates, config.t)
        if total > EXHAUSTIVE_GUARD:
            raise GuardError(
                f"exhaustive search over {total} candidate auctions exceeds "
                f"{EXHAUSTIVE_GUARD}; reduce t, thin the candidates, or use "
                f"coordinate-ascent")
        if env.kind == "single-item" and samples.n == 1 and config.t == 1:
            rows, val = _exhaustive_posted_price(samples, candidates, config.truncation)
        elif env.kind == "single-item":
            rows, val = _exhaustive_single_item(
                samples, candidates, config.t, config.truncation, tie_order)
        else:
            rows, val = _exhaustive_generic(
                samples, env, candidates, config.t, config.truncation,
                tie_order, phi_vector)
    else:
        rows, val = _ascent(samples, env, candidates, config, tie_order, phi_vector)
    auction = TLevelAuction(rows, tie_order, env, phi_vector=phi_vector,
                            truncation=config.truncation)
    return auction, val


def generalization_gap(auction: TLevelAuction, samples: SampleSet,
                       prior: ProductPrior, mc_samples: int, seed: int) -> float:
    """|empirical revenue - Monte Carlo expected revenue under the prior|."""
    from .montecarlo import evaluate

    emp = empirical_revenue(auction, samples)
    est, _ = evaluate(auction, prior, mc_samples=mc_samples, seed=seed)
    return abs(emp - est)


def sample_size_bound(h: float, epsilon: float, delta: float,
                      pseudo_dim: float, constant: float = 1.0) -> int:
    """Uniform-convergence sample count:

    ceil(constant * (h/eps)^2 * (pseudo_dim * ln(h/eps) + ln(1/delta))).
    """
    if min(h, epsilon, delta, constant) <= 0 or pseudo_dim < 0:
        raise ConfigError("all sample-size-bound inputs must be positive")
    ratio = h / epsilon
    return int(math.ceil(constant * ratio * ratio
                         * (pseudo_dim * math.log(ratio) + math.log(1.0 / delta))))


__all__ = [
    "SampleSet", "LearnerConfig", "empirical_revenue", "candidate_thresholds",
    "erm", "generalization_gap", "sample_size_bound", "EXHAUSTIVE_GUARD",
]
