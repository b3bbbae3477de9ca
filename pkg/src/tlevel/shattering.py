"""Brute-force pseudo-dimension lab for single-item t-level auctions.

An instance fixes m sample profiles and m positive revenue targets.  Every
auction labels each sample 1 when its revenue meets the target and 0
otherwise; the instance is shatterable when the auctions realize all 2^m
labelings.  Enumerating every auction is impossible, but merging the sorted
sample values with the sorted thresholds partitions threshold space into
finitely many cells within which winners and payment parameters are
constant.  Within one cell a winner's payment is a threshold swept across
the cell, so her labels flip exactly where that threshold crosses a target.
A finite candidate universe per bidder therefore suffices once it holds a
representative on each side of every sample value and every target: the
instance refines the sample-value universe (values, midpoints, one point
beyond each end) with the target values before enumerating.

Everything here uses a fixed tie order (bidder index), as the dimension
bounds require.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GuardError
from .learner import EXHAUSTIVE_GUARD
from .mechanisms import iter_single_item_revenues

MAX_SHATTER_M = 22
DEFAULT_PADDING = 1.0


def build_threshold_universe(samples, padding: float = DEFAULT_PADDING) -> list[np.ndarray]:
    """Per-bidder candidates covering every cell of the merge partition.

    For each bidder: her distinct sample values, the midpoints between
    consecutive distinct values, one point below the minimum and one above
    the maximum.  Any positive padding lands in the same outer cells.
    """
    if padding <= 0:
        raise ConfigError("padding must be positive")
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2:
        raise ConfigError("samples must form an m x n matrix")
    out = []
    for i in range(arr.shape[1]):
        col = np.unique(arr[:, i])
        if col.size == 0:
            out.append(np.array([padding]))
            continue
        mids = (col[:-1] + col[1:]) / 2.0
        cands = np.unique(np.concatenate(
            [[max(col[0] - padding, 0.0)], col, mids, [col[-1] + padding]]))
        out.append(cands)
    return out


def refine_universe(universe, extra_points) -> list[np.ndarray]:
    """Refine per-bidder candidates with extra cut points and their midpoints.

    Used to fold the revenue targets into the universe: a payment sweeping a
    cell flips a sample's label where it crosses a target, so candidates must
    bracket every target as well as every sample value.
    """
    extra = np.unique(np.asarray(extra_points, dtype=float))
    out = []
    for cands in universe:
        merged = np.unique(np.concatenate([cands, extra]))
        mids = (merged[:-1] + merged[1:]) / 2.0
        out.append(np.unique(np.concatenate([merged, mids])))
    return out


@dataclass(frozen=True)
class ShatterInstance:
    samples: np.ndarray
    targets: np.ndarray
    t: int
    threshold_universe: list = None
    padding: float = DEFAULT_PADDING

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        r = np.asarray(self.targets, dtype=float)
        if s.ndim != 2 or s.shape[0] < 1:
            raise ConfigError("samples must form a nonempty m x n matrix")
        if r.shape != (s.shape[0],):
            raise ConfigError("need one target per sample")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise ConfigError("targets must be positive and finite")
        if s.shape[0] > MAX_SHATTER_M:
            raise GuardError(f"m={s.shape[0]} exceeds the 2^m guard ({MAX_SHATTER_M})")
        if self.t < 1:
            raise ConfigError("t must be at least 1")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "targets", r)
        if self.threshold_universe is None:
            base = build_threshold_universe(s, self.padding)
            object.__setattr__(self, "threshold_universe", refine_universe(base, r))
        else:
            object.__setattr__(self, "threshold_universe",
                               [np.asarray(u, dtype=float) for u in self.threshold_universe])

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]


def revenue_labeling(auction, inst: ShatterInstance) -> np.ndarray:
    """Bit j is 1 iff the auction's revenue on sample j reaches target j."""
    from .mechanisms import batch_revenue

    if auction.n != inst.n:
        raise ConfigError("auction arity does not match the instance")
    return batch_revenue(auction, inst.samples) >= inst.targets


def _enumeration_size(inst: ShatterInstance) -> int:
    total = 1
    for u in inst.threshold_universe:
        total *= math.comb(len(u) + inst.t - 1, inst.t)
    return total


def _iter_labelings(inst: ShatterInstance):
    tuples = [np.array(list(itertools.combinations_with_replacement(u, inst.t)))
              for u in inst.threshold_universe]
    weights = 1 << np.arange(inst.m)
    for start, rev in iter_single_item_revenues(
            inst.samples, tuples, tuple(range(inst.n))):
        bits = rev >= inst.targets[None, :]
        codes = bits @ weights
        yield start, codes.astype(np.int64), tuples


def _guard(inst):
    total = _enumeration_size(inst)
    if total > EXHAUSTIVE_GUARD:
        raise GuardError(
            f"{total} candidate auctions exceed the {EXHAUSTIVE_GUARD} guard; "
            f"use a smaller instance")


def count_labelings(inst: ShatterInstance) -> int:
    """Number of distinct labelings realized by the candidate auctions."""
    _guard(inst)
    seen = set()
    for _, codes, _ in _iter_labelings(inst):
        seen.update(codes.tolist())
    return len(seen)


def labeling_ceiling(inst: ShatterInstance) -> float:
    """(nm + nt)^(3nt), the coarse cap on distinct labelings."""
    base = inst.n * inst.m + inst.n * inst.t
    return float(base) ** (3 * inst.n * inst.t)


def is_shatterable(inst: ShatterInstance, witnesses: bool = False):
    """True iff the candidate auctions realize all 2^m labelings.

    With ``witnesses=True`` also returns {labeling code: threshold matrix}
    for each labeling found first.
    """
    _guard(inst)
    want = 1 << inst.m
    found: dict[int, np.ndarray] = {}
    sizes = None
    for start, codes, tuples in _iter_labelings(inst):
        if sizes is None:
            sizes = [arr.shape[0] for arr in tuples]
        for j, code in enumerate(codes.tolist()):
            if code not in found:
                idx = np.unravel_index(start + j, sizes)
                found[code] = np.array([tuples[i][idx[i]] for i in range(inst.n)])
                if len(found) == want and not witnesses:
                    return True
        if len(found) == want and not witnesses:
            return True
    ok = len(found) == want
    if witnesses:
        return ok, found
    return ok


def pseudo_dim_lower_bound(n: int, t: int, domain, max_m: int,
                           target_grid, trials: int, seed: int) -> dict:
    """Largest m <= max_m with a shatterable instance found by search.

    Tries random instances (samples from ``domain``, targets from
    ``target_grid``) plus targeted all-equal-target and half-own-max
    constructions; shatterability depends on the targets, so both matter.
    Returns {"m": best, "witness": instance or None, "tried": counts}.
    """
    domain = np.asarray(domain, dtype=float)
    target_grid = np.asarray(target_grid, dtype=float)
    if domain.size == 0 or target_grid.size == 0:
        raise ConfigError("domain and target_grid must be nonempty")
    if np.any(target_grid <= 0):
        raise ConfigError("targets must be positive")
    if max_m > MAX_SHATTER_M:
        raise GuardError(f"max_m exceeds the guard ({MAX_SHATTER_M})")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    best_m = 0
    best_witness = None
    tried = 0
    for m in range(1, max_m + 1):
        instances = []
        for _ in range(trials):
            s = rng.choice(domain, size=(m, n))
            r = rng.choice(target_grid, size=m)
            instances.append((s, r))
        base = rng.choice(domain, size=(m, n))
        for tgt in np.unique(target_grid):
            instances.append((base, np.full(m, tgt)))
        instances.append((base, np.maximum(base.max(axis=1) / 2.0, target_grid.min())))
        hit = None
        for s, r in instances:
            tried += 1
            inst = ShatterInstance(samples=s, targets=np.asarray(r, dtype=float), t=t)
            if is_shatterable(inst):
                hit = inst
                break
        if hit is not None:
            best_m = m
            best_witness = hit
    return {"m": best_m, "witness": best_witness, "tried": tried}


__all__ = [
    "ShatterInstance", "build_threshold_universe", "refine_universe",
    "revenue_labeling", "count_labelings", "labeling_ceiling",
    "is_shatterable", "pseudo_dim_lower_bound", "MAX_SHATTER_M",
]
