"""Valuation distributions, virtual values, and ironing.

Bidder valuations are modeled by one-dimensional distributions exposing
cdf/pdf/quantile plus the virtual-value transform phi(v) = v - (1 - F(v)) / f(v).
Distributions whose phi is not monotone are handled by ironing: sample the
revenue curve R(q) = q * price(q) on a uniform grid of sale probabilities q,
take its least concave majorant, and use the majorant's slope as a monotone
surrogate for phi.  A rank-scaled perturbation (``strictness_epsilon``) makes
the surrogate strictly increasing so that inverting it on a flat (ironed)
segment is unambiguous.

All distributions are immutable after construction and safe to share across
threads.  Samplers are stateless: they derive their streams from an explicit
integer seed, never from hidden global RNG state.
"""

from __future__ import annotations

import csv
import math
import warnings

import numpy as np

from .errors import ConfigError

#: rows per sampling chunk; fixed so that draws are reproducible and
#: independent of how many chunks run concurrently
SAMPLE_CHUNK = 1 << 14

DEFAULT_GRID_SIZE = 4096
DEFAULT_STRICTNESS = 1e-9


class DistributionError(ValueError):
    """Undefined density point, degenerate support, or out-of-support query."""


class ValuationDistribution:
    """Base class: cdf/pdf/quantile plus sale-probability helpers."""

    kind = "abstract"
    #: True when the closed-form virtual value exists and is nondecreasing,
    #: so ironing is a no-op and phi can be evaluated analytically.
    analytic_regular = False

    support_lo: float
    support_hi: float  # may be math.inf (monotone-hazard-rate flows only)

    def cdf(self, v):
        raise NotImplementedError

    def sf(self, v):
        """Survival function 1 - F(v); overridden where the tail cancels."""
        return 1.0 - np.asarray(self.cdf(v), dtype=float)

    def pdf(self, v):
        raise NotImplementedError

    def quantile(self, p):
        """Lower quantile inf{v : F(v) >= p}; inverse-transform sampling uses this."""
        raise NotImplementedError

    def price_at_sale_prob(self, q):
        """Highest posted price whose sale probability is at least q.

        Coincides with quantile(1 - q) for strictly increasing cdfs; for cdfs
        with flat stretches (support gaps, point masses) it takes the upper
        branch so the revenue curve records the best price per sale
        probability.
        """
        return self.quantile(1.0 - np.asarray(q, dtype=float))

    def raw_phi(self, v):
        """Closed-form virtual value; only meaningful where the density exists."""
        raise DistributionError(f"{self.kind} has no closed-form virtual value")

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.support_hi)

    def spec(self) -> dict:
        raise NotImplementedError


class Uniform(ValuationDistribution):
    kind = "uniform"
    analytic_regular = True

    def __init__(self, lo: float, hi: float):
        if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 <= lo < hi):
            raise ConfigError(f"uniform needs 0 <= lo < hi, got lo={lo}, hi={hi}")
        self.lo = float(lo)
        self.hi = float(hi)
        self.support_lo = self.lo
        self.support_hi = self.hi

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.clip((v - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def sf(self, v):
        v = np.asarray(v, dtype=float)
        return np.clip((self.hi - v) / (self.hi - self.lo), 0.0, 1.0)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        inside = (v >= self.lo) & (v <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    def quantile(self, p):
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        return self.lo + p * (self.hi - self.lo)

    def raw_phi(self, v):
        # v - (hi - v) / 1 after cancelling the constant density
        return 2.0 * np.asarray(v, dtype=float) - self.hi

    def spec(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


class TruncatedExponential(ValuationDistribution):
    """Exponential(rate) on [0, hi]; hi may be inf for the untruncated law."""

    kind = "truncated-exponential"
    analytic_regular = True

    def __init__(self, rate: float, hi: float = math.inf):
        if not (rate > 0 and math.isfinite(rate)):
            raise ConfigError(f"truncated-exponential needs rate > 0, got {rate}")
        if not hi > 0:
            raise ConfigError(f"truncated-exponential needs hi > 0, got {hi}")
        self.rate = float(rate)
        self.hi = float(hi)
        self.support_lo = 0.0
        self.support_hi = self.hi
        # mass kept by the truncation
        self._z = 1.0 if math.isinf(hi) else -math.expm1(-rate * hi)

    def cdf(self, v):
        v = np.clip(np.asarray(v, dtype=float), 0.0, None)
        with np.errstate(over="ignore"):
            raw = -np.expm1(-self.rate * v) / self._z
        return np.clip(raw, 0.0, 1.0)

    def sf(self, v):
        v = np.clip(np.asarray(v, dtype=float), 0.0, None)
        tail = 0.0 if math.isinf(self.hi) else math.exp(-self.rate * self.hi)
        return np.clip((np.exp(-self.rate * v) - tail) / self._z, 0.0, 1.0)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        inside = (v >= 0.0) & (v <= self.hi)
        return np.where(inside, self.rate * np.exp(-self.rate * v) / self._z, 0.0)

    def quantile(self, p):
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            out = -np.log1p(-p * self._z) / self.rate
        if math.isfinite(self.hi):
            out = np.minimum(out, self.hi)
        return out

    def raw_phi(self, v):
        v = np.asarray(v, dtype=float)
        if math.isinf(self.hi):
            return v - 1.0 / self.rate
        # v - (1 - exp(-rate*(hi - v))) / rate, increasing in v
        return v + np.expm1(-self.rate * (self.hi - v)) / self.rate

    def spec(self):
        return {"kind": "truncated-exponential", "rate": self.rate, "hi": self.hi}


class PiecewiseLinearCdf(ValuationDistribution):
    """Distribution given by cdf breakpoints [(v, F(v)), ...].

    Supports flat stretches (zero density), e.g. mixtures of uniforms with a
    gap between their supports.
    """

    kind = "piecewise-linear-cdf"

    def __init__(self, breakpoints):
        pts = [(float(v), float(f)) for v, f in breakpoints]
        if len(pts) < 2:
            raise ConfigError("piecewise-linear-cdf needs at least 2 breakpoints")
        v = np.array([p[0] for p in pts])
        f = np.array([p[1] for p in pts])
        if np.any(np.diff(v) <= 0):
            raise ConfigError("breakpoint values must be strictly increasing")
        if np.any(np.diff(f) < -1e-12):
            raise ConfigError("breakpoint cdf values must be nondecreasing")
        if v[0] < 0:
            raise ConfigError("support must be nonnegative")
        if abs(f[0]) > 1e-9 or abs(f[-1] - 1.0) > 1e-9:
            raise ConfigError("cdf must run from 0 to 1 across the breakpoints")
        f[0], f[-1] = 0.0, 1.0
        self._v = v
        self._f = np.clip(f, 0.0, 1.0)
        self._slopes = np.diff(self._f) / np.diff(self._v)
        self.support_lo = float(v[0])
        self.support_hi = float(v[-1])

    def cdf(self, v):
        return np.interp(np.asarray(v, dtype=float), self._v, self._f)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        idx = np.clip(np.searchsorted(self._v, v, side="right") - 1, 0, len(self._slopes) - 1)
        out = self._slopes[idx]
        inside = (v >= self.support_lo) & (v <= self.support_hi)
        return np.where(inside, out, 0.0)

    def quantile(self, p):
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        k = np.clip(np.searchsorted(self._f, p, side="left"), 1, len(self._f) - 1)
        f_lo, f_hi = self._f[k - 1], self._f[k]
        v_lo, v_hi = self._v[k - 1], self._v[k]
        rise = f_hi - f_lo
        frac = np.where(rise > 0, (p - f_lo) / np.where(rise > 0, rise, 1.0), 1.0)
        out = v_lo + np.clip(frac, 0.0, 1.0) * (v_hi - v_lo)
        return np.where(p <= self._f[0], self._v[0], out)

    def price_at_sale_prob(self, q):
        # upper quantile: sup{v : F(v) <= 1 - q}, so a flat stretch at the
        # target level resolves to its right edge (the better price)
        p = 1.0 - np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
        j = np.clip(np.searchsorted(self._f, p, side="right") - 1, 0, len(self._f) - 2)
        f_lo, f_hi = self._f[j], self._f[j + 1]
        v_lo, v_hi = self._v[j], self._v[j + 1]
        rise = f_hi - f_lo
        frac = np.where(rise > 0, (p - f_lo) / np.where(rise > 0, rise, 1.0), 0.0)
        out = v_lo + np.clip(frac, 0.0, 1.0) * (v_hi - v_lo)
        return np.where(p >= 1.0, self._v[-1], out)

    def raw_phi(self, v):
        v = np.asarray(v, dtype=float)
        f = self.pdf(v)
        if np.any(f <= 0):
            raise DistributionError("undefined virtual value (zero density)")
        return v - (1.0 - self.cdf(v)) / f

    def spec(self):
        return {
            "kind": "piecewise-linear-cdf",
            "breakpoints": [[float(a), float(b)] for a, b in zip(self._v, self._f)],
        }


class Empirical(ValuationDistribution):
    """Step cdf over a finite sample of values; no density."""

    kind = "empirical"

    def __init__(self, values):
        vals = np.sort(np.asarray(list(values), dtype=float))
        if vals.size == 0:
            raise ConfigError("empirical distribution needs at least one value")
        if not np.all(np.isfinite(vals)) or vals[0] < 0:
            raise ConfigError("empirical values must be finite and nonnegative")
        self.values = vals
        self.values.flags.writeable = False
        self.support_lo = float(vals[0])
        self.support_hi = float(vals[-1])

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return np.searchsorted(self.values, v, side="right") / self.values.size

    def pdf(self, v):
        raise DistributionError("empirical distribution has no density")

    def quantile(self, p):
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        k = self.values.size
        idx = np.clip(np.ceil(p * k).astype(int) - 1, 0, k - 1)
        return self.values[idx]

    def price_at_sale_prob(self, q):
        q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
        k = self.values.size
        idx = np.clip(np.floor(k * (1.0 - q)).astype(int), 0, k - 1)
        return self.values[idx]

    def spec(self):
        return {"kind": "empirical", "values": [float(x) for x in self.values]}


# ---------------------------------------------------------------------------
# virtual values and ironing
# ---------------------------------------------------------------------------


def virtual_value(dist: ValuationDistribution, v: float) -> float:
    """Raw virtual value v - (1 - F(v)) / f(v) at a single point.

    Raises DistributionError outside the support or at zero-density points.
    """
    if not (dist.support_lo <= v <= dist.support_hi):
        raise DistributionError(f"value {v} outside support [{dist.support_lo}, {dist.support_hi}]")
    f = float(np.asarray(dist.pdf(v)))
    if not (f > 0.0) or not math.isfinite(f):
        raise DistributionError("undefined virtual value (zero density)")
    return float(v - (1.0 - float(np.asarray(dist.cdf(v)))) / f)


class VirtualValueCurve:
    """Ironed virtual-value curve of one distribution.

    Stores the revenue curve sampled on a uniform sale-probability grid, its
    least concave majorant (as hull vertices plus segment slopes), and the
    grid-level ironed values including the strictness perturbation.  For
    distributions with a closed-form nondecreasing phi, evaluation short
    circuits to the exact formula; the grid arrays are still populated so the
    majorant invariants can be checked.
    """

    def __init__(self, dist, quantile_grid, grid_revenue, hull_q, hull_r,
                 strictness_epsilon, degenerate=False, constant=0.0):
        self.dist = dist
        self.quantile_grid = np.asarray(quantile_grid, dtype=float)
        self.grid_revenue = np.asarray(grid_revenue, dtype=float)
        self.hull_q = np.asarray(hull_q, dtype=float)
        self.hull_r = np.asarray(hull_r, dtype=float)
        self.strictness_epsilon = float(strictness_epsilon)
        self.degenerate = bool(degenerate)
        self.constant = float(constant)
        if self.degenerate:
            self.hull_slopes = np.array([constant])
            self.ironed_phi = np.full_like(self.quantile_grid, constant)
        else:
            dq = np.diff(self.hull_q)
            self.hull_slopes = np.diff(self.hull_r) / dq
            g = self.quantile_grid.size - 1
            seg = np.clip(np.searchsorted(self.hull_q, self.quantile_grid, side="right") - 1,
                          0, self.hull_slopes.size - 1)
            ramp = self.strictness_epsilon * (g - np.arange(g + 1))
            self.ironed_phi = self.hull_slopes[seg] + ramp
        for arr in (self.quantile_grid, self.grid_revenue, self.hull_q,
                    self.hull_r, self.hull_slopes, self.ironed_phi):
            arr.flags.writeable = False

    @property
    def grid_size(self) -> int:
        return self.quantile_grid.size - 1

    def phi(self, v):
        """Ironed virtual value at value(s) v, vectorized."""
        v = np.asarray(v, dtype=float)
        if self.degenerate:
            return np.full(v.shape, self.constant)
        if self.dist.analytic_regular:
            return self.dist.raw_phi(v)
        q = np.asarray(self.dist.sf(v), dtype=float)
        seg = np.clip(np.searchsorted(self.hull_q, q, side="right") - 1,
                      0, self.hull_slopes.size - 1)
        ramp = self.strictness_epsilon * self.grid_size * (1.0 - q)
        return self.hull_slopes[seg] + ramp

    def phi_scalar(self, v: float) -> float:
        return float(self.phi(np.asarray([v]))[0])

    def inverse(self, target: float) -> float:
        """Least v with ironed phi(v) >= target (clamped to the support)."""
        return float(self.inverse_batch(np.asarray([target], dtype=float))[0])

    def inverse_batch(self, targets):
        targets = np.asarray(targets, dtype=float)
        d = self.dist
        lo = d.support_lo
        if self.degenerate:
            return np.where(self.constant >= targets, lo, d.support_hi)
        if isinstance(d, Uniform):
            return np.clip((targets + d.hi) / 2.0, d.lo, d.hi)
        if isinstance(d, TruncatedExponential) and math.isinf(d.hi):
            return np.maximum(targets + 1.0 / d.rate, 0.0)
        hi = d.support_hi
        if math.isinf(hi):
            hi = max(1.0, lo + 1.0)
            top = np.max(targets[np.isfinite(targets)], initial=0.0)
            for _ in range(200):
                if self.phi_scalar(hi) >= top:
                    break
                hi *= 2.0
        lo_arr = np.full_like(targets, lo)
        hi_arr = np.full_like(targets, hi)
        at_lo = self.phi(lo_arr) >= targets
        at_hi = self.phi(hi_arr) < targets
        work = ~(at_lo | at_hi)
        a = lo_arr.copy()
        b = hi_arr.copy()
        for _ in range(80):
            mid = 0.5 * (a + b)
            ge = self.phi(mid) >= targets
            b = np.where(work & ge, mid, b)
            a = np.where(work & ~ge, mid, a)
        out = np.where(at_lo, lo, np.where(at_hi, hi, b))
        return out


def _upper_hull(x, y):
    """Least concave majorant vertices of points sorted by x (monotone chain)."""
    hx, hy = [], []
    for xi, yi in zip(x, y):
        while len(hx) >= 2:
            x1, y1 = hx[-2], hy[-2]
            x2, y2 = hx[-1], hy[-1]
            # drop the middle point when it is on or below the chord
            if (y2 - y1) * (xi - x1) <= (yi - y1) * (x2 - x1):
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(xi)
        hy.append(yi)
    return np.array(hx), np.array(hy)


def iron(dist: ValuationDistribution, grid_size: int = DEFAULT_GRID_SIZE,
         strictness_epsilon: float = DEFAULT_STRICTNESS) -> VirtualValueCurve:
    """Build the ironed virtual-value curve on a uniform sale-probability grid.

    A zero-width support yields a degenerate constant curve (flagged) rather
    than an error, so point-mass fixtures stay usable downstream.
    """
    if grid_size < 16:
        raise ConfigError(f"grid_size must be >= 16, got {grid_size}")
    if strictness_epsilon <= 0:
        raise ConfigError("strictness_epsilon must be positive")
    width = dist.support_hi - dist.support_lo
    q = np.linspace(0.0, 1.0, grid_size + 1)
    if width <= 0:
        c = dist.support_lo
        return VirtualValueCurve(dist, q, c * q, [0.0, 1.0], [0.0, c],
                                 strictness_epsilon, degenerate=True, constant=c)
    prices = np.asarray(dist.price_at_sale_prob(q), dtype=float)
    with np.errstate(invalid="ignore"):
        revenue = q * prices
    revenue[~np.isfinite(revenue)] = 0.0
    revenue[0] = 0.0  # q = 0 sells nothing even on unbounded supports
    hull_q, hull_r = _upper_hull(q, revenue)
    return VirtualValueCurve(dist, q, revenue, hull_q, hull_r, strictness_epsilon)


def inverse_virtual(curve: VirtualValueCurve, dist: ValuationDistribution,
                    target: float) -> float:
    """Least v with ironed phi(v) >= target; clamps to support ends."""
    if curve.dist is not dist and curve.dist.spec() != dist.spec():
        raise ConfigError("curve was built from a different distribution")
    return curve.inverse(target)


def check_mhr(dist: ValuationDistribution, grid_size: int = DEFAULT_GRID_SIZE) -> bool:
    """True iff the hazard rate f/(1-F) is nondecreasing on a value grid."""
    if grid_size < 16:
        raise ConfigError(f"grid_size must be >= 16, got {grid_size}")
    lo = dist.support_lo
    hi = dist.support_hi
    if math.isinf(hi):
        hi = float(np.asarray(dist.quantile(1.0 - 1e-9)))
    if hi <= lo:
        return True
    v = np.linspace(lo, hi, grid_size)
    f = np.asarray(dist.pdf(v), dtype=float)
    s = np.asarray(dist.sf(v), dtype=float)
    mask = s > 1e-12
    hazard = f[mask] / s[mask]
    if hazard.size < 2:
        return True
    diffs = np.diff(hazard)
    floor = -1e-9 * np.maximum(1.0, np.abs(hazard[:-1]))
    return bool(np.all(diffs >= floor))


# ---------------------------------------------------------------------------
# product priors and sampling
# ---------------------------------------------------------------------------


class ProductPrior:
    """Independent (not necessarily identical) bidder distributions.

    ``h_bound`` is the common support upper bound; it must dominate every
    bidder's support and must be omitted when any support is unbounded.
    """

    def __init__(self, bidders, h_bound: float | None = None,
                 grid_size: int = DEFAULT_GRID_SIZE,
                 strictness_epsilon: float = DEFAULT_STRICTNESS):
        bidders = tuple(bidders)
        if not bidders:
            raise ConfigError("prior needs at least one bidder")
        if h_bound is not None:
            for i, d in enumerate(bidders):
                if not math.isfinite(d.support_hi):
                    raise ConfigError(f"bidder {i} is unbounded; omit h_bound")
                if d.support_hi > h_bound + 1e-12:
                    raise ConfigError(
                        f"bidder {i} support top {d.support_hi} exceeds h_bound {h_bound}")
        self.bidders = bidders
        self.h_bound = None if h_bound is None else float(h_bound)
        self.grid_size = int(grid_size)
        self.strictness_epsilon = float(strictness_epsilon)
        self._curves = None

    @property
    def n(self) -> int:
        return len(self.bidders)

    @property
    def bounded(self) -> bool:
        return self.h_bound is not None

    def curves(self) -> list[VirtualValueCurve]:
        # built once; harmless if two threads race, both build the same value
        if self._curves is None:
            self._curves = [iron(d, self.grid_size, self.strictness_epsilon)
                            for d in self.bidders]
        return self._curves

    def spec(self) -> dict:
        out = {"bidders": [d.spec() for d in self.bidders]}
        if self.h_bound is not None:
            out["h_bound"] = self.h_bound
        if self.grid_size != DEFAULT_GRID_SIZE:
            out["grid_size"] = self.grid_size
        return out


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk_index,)))


def profile_chunk(prior: ProductPrior, seed: int, chunk_index: int, rows: int) -> np.ndarray:
    """Profiles for one fixed-size chunk of the stream addressed by seed."""
    u = _chunk_rng(seed, chunk_index).random((rows, prior.n))
    out = np.empty_like(u)
    for i, d in enumerate(prior.bidders):
        out[:, i] = d.quantile(u[:, i])
    return out


def sample_profiles(prior: ProductPrior, m: int, seed: int) -> np.ndarray:
    """m independent valuation profiles, inverse-transform sampled.

    The stream is split into fixed-size chunks with per-chunk derived seeds,
    so the result is bit-identical regardless of worker count or whether the
    caller consumed the stream in one go.
    """
    if m < 0:
        raise ConfigError("sample count must be nonnegative")
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    out = np.empty((m, prior.n))
    start = 0
    chunk = 0
    while start < m:
        rows = min(SAMPLE_CHUNK, m - start)
        out[start:start + rows] = profile_chunk(prior, seed, chunk, rows)
        start += rows
        chunk += 1
    return out


def sample_profile(prior: ProductPrior, seed: int) -> np.ndarray:
    """One profile; repeated calls with the same seed return the same vector."""
    return sample_profiles(prior, 1, seed)[0]


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def load_value_column(path) -> list[float]:
    """One-column CSV of values; a single non-numeric header row is skipped."""
    values = []
    with open(path, newline="") as fh:
        for row_num, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if row_num == 1:
                    continue
                raise ConfigError(f"{path}: row {row_num}: not a number: {row[0]!r}")
    if not values:
        raise ConfigError(f"{path}: no values")
    return values


def dist_from_spec(obj: dict, path: str = "distribution") -> ValuationDistribution:
    """Build a distribution from a JSON-style dict, e.g. {"kind":"uniform","lo":1,"hi":2}."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got {type(obj).__name__}")
    kind = str(obj.get("kind", "")).replace("_", "-")
    try:
        if kind == "uniform":
            return Uniform(obj["lo"], obj["hi"])
        if kind == "truncated-exponential":
            hi = obj.get("hi", math.inf)
            if hi in (None, "inf"):
                hi = math.inf
            return TruncatedExponential(obj["rate"], hi)
        if kind == "piecewise-linear-cdf":
            return PiecewiseLinearCdf(obj["breakpoints"])
        if kind == "empirical":
            if "csv" in obj:
                return Empirical(load_value_column(obj["csv"]))
            return Empirical(obj["values"])
    except KeyError as e:
        raise ConfigError(f"{path}: missing field {e.args[0]!r} for kind {kind!r}")
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}")
    raise ConfigError(f"{path}.kind: unknown distribution kind {obj.get('kind')!r}")


def prior_from_spec(obj: dict, path: str = "prior") -> ProductPrior:
    """Build a ProductPrior from a JSON-style dict.

    When ``h_bound`` is omitted and every bidder is bounded, the tightest
    common bound (max support top) is filled in; unbounded bidders leave it
    absent.
    """
    if isinstance(obj, list):
        obj = {"bidders": obj}
    if not isinstance(obj, dict) or "bidders" not in obj:
        raise ConfigError(f"{path}: expected an object with a 'bidders' list")
    bidders = [dist_from_spec(b, f"{path}.bidders[{i}]")
               for i, b in enumerate(obj["bidders"])]
    h_bound = obj.get("h_bound")
    if h_bound is None and all(math.isfinite(b.support_hi) for b in bidders):
        h_bound = max(b.support_hi for b in bidders)
    kwargs = {}
    if "grid_size" in obj:
        kwargs["grid_size"] = int(obj["grid_size"])
    if "strictness_epsilon" in obj:
        kwargs["strictness_epsilon"] = float(obj["strictness_epsilon"])
    return ProductPrior(bidders, h_bound=h_bound, **kwargs)


__all__ = [
    "DistributionError", "ValuationDistribution", "Uniform",
    "TruncatedExponential", "PiecewiseLinearCdf", "Empirical",
    "VirtualValueCurve", "virtual_value", "iron", "inverse_virtual",
    "check_mhr", "ProductPrior", "sample_profile", "sample_profiles",
    "profile_chunk", "dist_from_spec", "prior_from_spec", "load_value_column",
    "SAMPLE_CHUNK", "DEFAULT_GRID_SIZE",
]
