"""Constructive threshold builders for t-level auctions.

The bounded construction places, for each bidder, level 0 at her monopoly
reserve (ironed phi crossing zero), an arithmetic band of levels at virtual
values alpha*gamma*eps' apart up to alpha, and a geometric band at virtual
values growing by (1 + eps/2) up to the bound H.  That yields

    t = 1 + ceil(1 / (gamma * eps')) + ceil(log_{1+eps/2}(H / alpha))

levels per bidder, with eps' = eps/2 unless overridden.  Matroid thresholds
reuse the same matrix.  Monotone-hazard-rate priors with unbounded support
first estimate an anchor beta_hat from sampled max bids, then run the
bounded construction with alpha = beta_hat/2, gamma = 1 - 1/sqrt(e) - eps',
H = 2*beta_hat*ln(1/eps'), and truncate counted revenue at that same H.
General single-parameter environments use a shared grid of level values
growing from -H*n in steps of eps/n and invert each bidder's ironed curve at
every grid point.

All logarithms in the anchored construction are natural; the choice only
rescales constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import ProductPrior, check_mhr
from .errors import ConfigError
from .feasibility import Environment
from .mechanisms import TLevelAuction


@dataclass(frozen=True)
class LevelConstructionParams:
    """Inputs for the bounded threshold construction.

    ``epsilon_prime`` defaults to epsilon/2; it is exposed for experiments.
    """

    epsilon: float
    alpha: float = 1.0
    gamma: float = 1.0
    h_bound: float | None = None
    epsilon_prime: float | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must be in (0,1), got {self.epsilon}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0,1], got {self.gamma}")
        if self.epsilon_prime is not None and not 0.0 < self.epsilon_prime < 1.0:
            raise ConfigError("epsilon_prime must be in (0,1)")

    @property
    def eps_prime(self) -> float:
        return self.epsilon / 2.0 if self.epsilon_prime is None else self.epsilon_prime


@dataclass(frozen=True)
class MhrAnchor:
    """Empirical anchor for unbounded monotone-hazard-rate priors.

    ``beta_hat`` is twice the empirical tail point whose exceedance mass is
    at least 1 - 1/sqrt(e) - eps'; ``eta`` = 2 * beta_hat * ln(1/eps') is
    both the bound proxy and the revenue truncation level.
    """

    beta_hat: float
    eta: float
    epsilon_prime: float
    empirical_tail: float


def virtual_targets(params: LevelConstructionParams) -> np.ndarray:
    """Virtual-value targets of the bounded construction, lowest first."""
    if params.h_bound is None:
        raise ConfigError("bounded construction needs h_bound")
    h, a, g = params.h_bound, params.alpha, params.gamma
    if a > h:
        raise ConfigError(f"alpha={a} exceeds the bound {h}")
    ep = params.eps_prime
    arith = int(math.ceil(1.0 / (g * ep)))
    ratio = 1.0 + params.epsilon / 2.0
    geo = int(math.ceil(math.log(h / a) / math.log(ratio))) if h > a else 0
    targets = [0.0]
    targets.extend(tau * a * g * ep for tau in range(1, arith + 1))
    targets.extend(a * ratio ** j for j in range(1, geo + 1))
    return np.asarray(targets)


def _threshold_rows(prior: ProductPrior, targets: np.ndarray) -> np.ndarray:
    rows = np.empty((prior.n, targets.size))
    for i, curve in enumerate(prior.curves()):
        row = curve.inverse_batch(targets)
        d = prior.bidders[i]
        row = np.clip(row, d.support_lo, None)
        if math.isfinite(d.support_hi):
            row = np.minimum(row, d.support_hi)
        rows[i] = np.maximum.accumulate(row)
    return rows


def build_bounded(prior: ProductPrior, params: LevelConstructionParams) -> TLevelAuction:
    """Single-item t-level auction approximating the optimal auction.

    Requires a bounded prior; rows are clamped into each bidder's support and
    forced nondecreasing.
    """
    if not prior.bounded:
        raise ConfigError("build_bounded needs a bounded prior (h_bound present)")
    p = params if params.h_bound is not None else LevelConstructionParams(
        params.epsilon, params.alpha, params.gamma, prior.h_bound, params.epsilon_prime)
    rows = _threshold_rows(prior, virtual_targets(p))
    return TLevelAuction(rows, tuple(range(prior.n)), Environment.single_item(prior.n))


def build_matroid_levels(prior: ProductPrior, env: Environment,
                         params: LevelConstructionParams) -> TLevelAuction:
    """Same threshold matrix as the bounded build, bound to a matroid."""
    if env.kind != "matroid":
        raise ConfigError("build_matroid_levels needs a matroid environment")
    if env.n != prior.n:
        raise ConfigError("environment and prior disagree on n")
    base = build_bounded(prior, params)
    return TLevelAuction(base.thresholds, base.tie_order, env)


def estimate_anchor(max_bid_samples, epsilon_prime: float,
                    delta: float = 0.1) -> MhrAnchor:
    """Anchor beta_hat from sampled max bids.

    beta_hat is twice the largest g with empirical P(max >= g) at least
    1 - 1/sqrt(e) - eps', i.e. twice the matching order statistic.  Warns
    when the sample is smaller than (1/eps')^2 * ln(1/delta), the size at
    which the tail estimate is trustworthy to eps'.
    """
    samples = np.asarray(max_bid_samples, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise ConfigError("max_bid_samples must be a nonempty vector")
    if not 0.0 < epsilon_prime < 1.0:
        raise ConfigError("epsilon_prime must be in (0,1)")
    if not 0.0 < delta < 1.0:
        raise ConfigError("delta must be in (0,1)")
    g = 1.0 - 1.0 / math.sqrt(math.e) - epsilon_prime
    if g <= 0.0:
        raise ConfigError(
            f"epsilon_prime={epsilon_prime} leaves no tail mass requirement")
    m = samples.size
    need = math.ceil((1.0 / epsilon_prime) ** 2 * math.log(1.0 / delta))
    if m < need:
        warnings.warn(
            f"anchor estimated from {m} samples; {need} recommended for "
            f"epsilon_prime={epsilon_prime}, delta={delta}", stacklevel=2)
    if np.all(samples == samples[0]):
        warnings.warn("degenerate anchor: all max-bid samples equal", stacklevel=2)
    k = min(m, max(1, math.ceil(g * m)))
    point = float(np.partition(samples, m - k)[m - k])  # k-th largest
    beta_hat = 2.0 * point
    tail = float(np.mean(samples >= beta_hat / 2.0))
    eta = 2.0 * beta_hat * math.log(1.0 / epsilon_prime)
    return MhrAnchor(beta_hat=beta_hat, eta=eta, epsilon_prime=epsilon_prime,
                     empirical_tail=tail)


def solve_epsilon_prime(epsilon: float) -> float:
    """Root of x * ln(1/x) = epsilon on (0, 1/e), by bisection."""
    cap = 1.0 / math.e
    if not 0.0 < epsilon < cap:
        raise ConfigError(
            f"epsilon must be in (0, 1/e) for the anchored construction, got {epsilon}")
    lo, hi = 1e-12, cap
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.log(1.0 / mid) < epsilon:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def build_mhr(prior: ProductPrior, anchor: MhrAnchor, epsilon: float) -> TLevelAuction:
    """Truncated single-item auction for monotone-hazard-rate priors.

    Solves eps' from epsilon = eps' * ln(1/eps'), then runs the bounded
    construction with alpha = beta_hat/2, gamma = 1 - 1/sqrt(e) - eps' and
    the proxy bound 2*beta_hat*ln(1/eps'); counted revenue is truncated at
    the anchor's eta.
    """
    bad = [i for i, d in enumerate(prior.bidders) if not check_mhr(d, max(512, 16))]
    if bad:
        raise ConfigError(f"bidders {bad} fail the monotone hazard rate check")
    eps_prime = solve_epsilon_prime(epsilon)
    gamma = 1.0 - 1.0 / math.sqrt(math.e) - eps_prime
    if gamma <= 0:
        raise ConfigError("epsilon too large: tail mass requirement vanished")
    if anchor.beta_hat <= 0:
        raise ConfigError("anchor beta_hat must be positive")
    h_proxy = 2.0 * anchor.beta_hat * math.log(1.0 / eps_prime)
    params = LevelConstructionParams(
        epsilon=eps_prime, alpha=anchor.beta_hat / 2.0, gamma=gamma,
        h_bound=h_proxy)
    rows = _threshold_rows(prior, virtual_targets(params))
    return TLevelAuction(rows, tuple(range(prior.n)),
                         Environment.single_item(prior.n),
                         truncation=anchor.eta)


def build_phi_grid(prior: ProductPrior, env: Environment, epsilon: float) -> TLevelAuction:
    """General single-parameter t-level auction with a shared level grid.

    Level values run from -H*n to at least H in steps of epsilon/n; each
    bidder's threshold for a level is the value where her ironed virtual
    value first reaches that level's value.
    """
    if env.kind != "explicit":
        raise ConfigError("build_phi_grid needs an explicit environment")
    if env.n != prior.n:
        raise ConfigError("environment and prior disagree on n")
    if not prior.bounded:
        raise ConfigError("build_phi_grid needs a bounded prior")
    if not 0.0 < epsilon < math.inf:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    h, n = prior.h_bound, prior.n
    steps = int(math.ceil((h * n * n + h * n) / epsilon))
    phi = -h * n + (epsilon / n) * np.arange(steps + 1)
    rows = _threshold_rows(prior, phi)
    return TLevelAuction(rows, tuple(range(n)), env, phi_vector=phi)


__all__ = [
    "LevelConstructionParams", "MhrAnchor", "virtual_targets",
    "build_bounded", "build_matroid_levels", "estimate_anchor",
    "solve_epsilon_prime", "build_mhr", "build_phi_grid",
]
