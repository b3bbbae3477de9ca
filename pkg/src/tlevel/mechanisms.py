"""Executable auctions: t-level mechanisms and the Myerson oracle.

A t-level auction gives each bidder a nondecreasing row of thresholds.  A bid
at or above threshold tau (and below threshold tau+1) puts the bidder at
level tau; bids below the lowest threshold sit at level -1.  Levels, the
fixed tie order, and the environment determine winners; payments are the
critical bids that make truthful bidding dominant, and always equal one of
the winner's own thresholds (losers pay zero).

Single-item payments follow the three-case rule.  With tau_bar the highest
level occupied by at least two bidders and I the other bidders at level >=
tau_bar:

* Monop  (tau_bar == -1): the lone contender pays her lowest threshold.
* Mult   (winner's level == tau_bar): she pays her threshold at tau_bar.
* Unique (winner's level > tau_bar): she pays her tau_bar threshold if she
  precedes all of I in the tie order, else her threshold at tau_bar + 1.

Matroid auctions allocate greedily by (level, tie order) and charge each
winner the smallest own threshold that would still win on a re-run.  General
single-parameter auctions score every listed feasible set by a shared
strictly increasing level-value vector and charge the minimal threshold that
keeps the chosen set preferred to the best alternative excluding the payer.

Scalar ``run_*`` functions return full Outcomes; ``batch_revenue`` evaluates
many profiles at once on vectorized fast paths and is cross-checked against
the scalar rules in the test suite.
"""

from __future__ import annotations

import numpy as np

from .distributions import ProductPrior
from .errors import ConfigError
from .feasibility import Environment, greedy_by_order, max_weight_feasible


class Outcome:
    """Winners, payments, and revenue for one valuation profile.

    ``payment_levels`` maps each paying winner to the index of the own
    threshold her payment equals, which is what the shattering lab needs to
    tag payment parameters.  ``case`` is set for single-item sales only.
    """

    __slots__ = ("winners", "payments", "revenue", "case", "payment_levels")

    def __init__(self, winners, payments, case=None, payment_levels=None):
        self.winners = frozenset(winners)
        self.payments = np.asarray(payments, dtype=float)
        self.revenue = float(self.payments.sum())
        self.case = case
        self.payment_levels = dict(payment_levels or {})

    def __repr__(self):
        return (f"Outcome(winners={sorted(self.winners)}, "
                f"payments={self.payments.tolist()}, revenue={self.revenue})")


class TLevelAuction:
    """Threshold matrix + tie order + environment (+ level values, truncation).

    ``phi_vector`` is the shared strictly increasing vector of level values
    used by explicit environments to score feasible sets; it is required
    there and disallowed elsewhere.  ``truncation`` caps counted revenue.
    """

    def __init__(self, thresholds, tie_order, env: Environment,
                 phi_vector=None, truncation: float | None = None):
        thr = np.array(thresholds, dtype=float)
        if thr.ndim != 2:
            raise ConfigError("thresholds must be an n x t matrix")
        n, t = thr.shape
        if t < 1:
            raise ConfigError("need at least one threshold level")
        if env.n != n:
            raise ConfigError(f"environment has n={env.n} but thresholds have {n} rows")
        if np.any(thr < -1e-12):
            raise ConfigError("thresholds must be nonnegative")
        if np.any(np.diff(thr, axis=1) < -1e-9):
            raise ConfigError("threshold rows must be nondecreasing")
        thr = np.maximum.accumulate(np.maximum(thr, 0.0), axis=1)
        tie = tuple(int(i) for i in tie_order)
        if sorted(tie) != list(range(n)):
            raise ConfigError("tie_order must be a permutation of the bidders")
        if env.kind == "explicit":
            if phi_vector is None:
                raise ConfigError("explicit environments need a phi_vector")
            phi = np.asarray(phi_vector, dtype=float)
            if phi.shape != (t,):
                raise ConfigError(f"phi_vector must have length t={t}")
            if np.any(np.diff(phi) <= 0):
                raise ConfigError("phi_vector must be strictly increasing")
        else:
            if phi_vector is not None:
                raise ConfigError("phi_vector only applies to explicit environments")
            phi = None
        if truncation is not None and not truncation > 0:
            raise ConfigError("truncation level must be positive")
        self.thresholds = thr
        self.tie_order = tie
        self.env = env
        self.phi_vector = phi
        self.truncation = None if truncation is None else float(truncation)
        rank = np.empty(n, dtype=int)
        rank[list(tie)] = np.arange(n)
        self.rank = rank  # rank[i] = position of bidder i in the tie order (0 wins ties)
        self.thresholds.flags.writeable = False
        self.rank.flags.writeable = False
        if phi is not None:
            self.phi_vector.flags.writeable = False

    @property
    def n(self) -> int:
        return self.thresholds.shape[0]

    @property
    def t(self) -> int:
        return self.thresholds.shape[1]


def level_of(auction: TLevelAuction, i: int, v: float) -> int:
    """Index of the largest threshold of bidder i at or below v, or -1."""
    return int(np.searchsorted(auction.thresholds[i], v, side="right")) - 1


def levels_batch(auction: TLevelAuction, profiles: np.ndarray) -> np.ndarray:
    profiles = np.asarray(profiles, dtype=float)
    m, n = profiles.shape
    out = np.empty((m, n), dtype=np.int64)
    for i in range(n):
        out[:, i] = np.searchsorted(auction.thresholds[i], profiles[:, i], side="right") - 1
    return out


def _check_profile(auction, profile):
    v = np.asarray(profile, dtype=float)
    if v.shape != (auction.n,):
        raise ConfigError(f"profile must have length {auction.n}")
    return v


# ---------------------------------------------------------------------------
# single item
# ---------------------------------------------------------------------------


def run_single_item(auction: TLevelAuction, profile) -> Outcome:
    if auction.env.kind != "single-item":
        raise ConfigError("run_single_item needs a single-item environment")
    v = _check_profile(auction, profile)
    n = auction.n
    levels = [level_of(auction, i, v[i]) for i in range(n)]
    payments = np.zeros(n)
    if max(levels) < 0:
        return Outcome(frozenset(), payments)
    rank = auction.rank
    w = max(range(n), key=lambda i: (levels[i], -rank[i]))
    tau_bar = sorted(levels)[-2] if n >= 2 else -1
    if tau_bar == -1:
        case, tau_pay = "monop", 0
    elif levels[w] == tau_bar:
        case, tau_pay = "mult", tau_bar
    else:
        others = [i for i in range(n) if i != w and levels[i] >= tau_bar]
        dominant = all(rank[w] < rank[i] for i in others)
        case, tau_pay = "unique", (tau_bar if dominant else tau_bar + 1)
    payments[w] = auction.thresholds[w, tau_pay]
    return Outcome({w}, payments, case=case, payment_levels={w: tau_pay})


def _single_item_payments(levels, thr, rank):
    """Vectorized three-case payments.

    ``levels``: (..., n) integer levels; ``thr``: (..., n, t) per-row
    threshold matrices; ``rank``: (n,) tie-order positions.  Returns
    (winner, sale, payment) with shapes (...,).
    """
    lead = levels.shape[:-1]
    n = levels.shape[-1]
    L = levels.reshape(-1, n)
    T = thr.reshape(-1, n, thr.shape[-1])
    m = L.shape[0]
    rows = np.arange(m)
    score = L * n + (n - 1 - rank)[None, :]
    win = np.argmax(score, axis=1)
    Lw = L[rows, win]
    sale = Lw >= 0
    if n >= 2:
        tau_bar = np.partition(L, n - 2, axis=1)[:, n - 2]
    else:
        tau_bar = np.full(m, -1, dtype=L.dtype)
    tau_pay = np.zeros(m, dtype=np.int64)
    mult = tau_bar >= 0
    tau_pay[mult & (Lw == tau_bar)] = tau_bar[mult & (Lw == tau_bar)]
    uniq = mult & (Lw > tau_bar)
    if np.any(uniq):
        contested = L >= tau_bar[:, None]
        contested[rows, win] = False
        rank_mat = np.where(contested, rank[None, :], n)
        min_rank = rank_mat.min(axis=1)
        dominant = rank[win] < min_rank
        tau_pay[uniq] = np.where(dominant[uniq], tau_bar[uniq], tau_bar[uniq] + 1)
    pay = np.where(sale, T[rows, win, tau_pay], 0.0)
    return (win.reshape(lead), sale.reshape(lead), pay.reshape(lead))


def _batch_single_item_revenue(auction, profiles):
    L = levels_batch(auction, profiles)
    thr = np.broadcast_to(auction.thresholds, (L.shape[0],) + auction.thresholds.shape)
    _, _, pay = _single_item_payments(L, thr, auction.rank)
    return pay


# ---------------------------------------------------------------------------
# matroids
# ---------------------------------------------------------------------------


def _matroid_winners(auction, levels):
    eligible = {i for i in range(auction.n) if levels[i] >= 0}
    order = sorted(range(auction.n), key=lambda i: (-levels[i], auction.rank[i]))
    return greedy_by_order(auction.env, eligible, order)


def run_matroid(auction: TLevelAuction, profile) -> Outcome:
    if auction.env.kind != "matroid":
        raise ConfigError("run_matroid needs a matroid environment")
    v = _check_profile(auction, profile)
    n = auction.n
    levels = [level_of(auction, i, v[i]) for i in range(n)]
    winners = _matroid_winners(auction, levels)
    payments = np.zeros(n)
    payment_levels = {}
    for i in winners:
        # critical bid: smallest own threshold at which a re-run still selects i
        for tau in range(auction.t):
            trial = levels.copy()
            trial[i] = level_of(auction, i, auction.thresholds[i, tau])
            if i in _matroid_winners(auction, trial):
                payments[i] = auction.thresholds[i, tau]
                payment_levels[i] = tau
                break
        else:  # pragma: no cover - the winner's own bid always qualifies
            raise AssertionError("no critical threshold found for a winner")
    return Outcome(winners, payments, payment_levels=payment_levels)


def _batch_uniform_matroid_revenue(auction, profiles, k):
    m, n = profiles.shape
    if k == 0:
        return np.zeros(m)
    L = levels_batch(auction, profiles)
    rank = auction.rank
    # unique per-row scores; >= n iff eligible (level >= 0)
    score = (L + 1) * n + (n - 1 - rank)[None, :]
    order = np.argsort(-score, axis=1)
    sorted_score = np.take_along_axis(score, order, axis=1)
    winners = np.zeros((m, n), dtype=bool)
    rows = np.arange(m)
    top = order[:, :k]
    winners[rows[:, None], top] = sorted_score[:, :k] >= n
    # payment of winner i depends on the k-th strongest other bidder; since a
    # winner is in the top k, that is the (k+1)-th overall score
    if k < n:
        kth = sorted_score[:, k]
    else:
        kth = np.full(m, -1)
    Lc = kth // n - 1
    rc = (n - 1) - (kth % n)
    revenue = np.zeros(m)
    thr = auction.thresholds
    for i in range(n):
        rows_i = winners[:, i]
        if not np.any(rows_i):
            continue
        beaten = kth[rows_i] < n
        tau = np.where(beaten, 0, np.where(rank[i] < rc[rows_i], Lc[rows_i], Lc[rows_i] + 1))
        revenue[rows_i] += thr[i, np.clip(tau, 0, auction.t - 1)]
    return revenue


def _batch_matroid_revenue(auction, profiles):
    spec = auction.env.matroid
    if spec.kind == "uniform":
        return _batch_uniform_matroid_revenue(auction, profiles, spec.k)
    return np.array([run_matroid(auction, row).revenue for row in profiles])


# ---------------------------------------------------------------------------
# general single-parameter environments
# ---------------------------------------------------------------------------


def _set_preference_order(env):
    """Fixed bid-independent tie order over listed sets.

    Sets are preferred by descending lexicographic order of their sorted
    member lists, so the empty set loses all ties.  This matches the worked
    payment semantics: a winning set keeps a tie against the empty set but
    loses one against a later-indexed singleton.
    """
    return sorted(env.sets, key=lambda s: tuple(sorted(s)), reverse=True)


def run_general(auction: TLevelAuction, profile) -> Outcome:
    if auction.env.kind != "explicit":
        raise ConfigError("run_general needs an explicit environment")
    if auction.phi_vector is None:
        raise ConfigError("general t-level auctions need a phi_vector")
    v = _check_profile(auction, profile)
    n = auction.n
    levels = [level_of(auction, i, v[i]) for i in range(n)]
    payments = np.zeros(n)
    if min(levels) < 0:
        # any bidder below her lowest threshold forces the empty outcome
        return Outcome(frozenset(), payments)
    phi = auction.phi_vector
    ordered = _set_preference_order(auction.env)
    pref = {s: j for j, s in enumerate(ordered)}

    def score(s):
        return float(sum(phi[levels[i]] for i in s))

    best = max(ordered, key=lambda s: (score(s), -pref[s]))
    payment_levels = {}
    for i in best:
        alt = max((s for s in ordered if i not in s),
                  key=lambda s: (score(s), -pref[s]))
        need = score(alt) - (score(best) - phi[levels[i]])
        side = "left" if pref[best] < pref[alt] else "right"
        tau = int(np.searchsorted(phi, need, side=side))
        if tau > levels[i]:  # pragma: no cover - the current bid always qualifies
            raise AssertionError("payment search exceeded the winner's level")
        payments[i] = auction.thresholds[i, tau]
        payment_levels[i] = tau
    return Outcome(best, payments, payment_levels=payment_levels)


def _batch_general_revenue(auction, profiles):
    m, n = profiles.shape
    L = levels_batch(auction, profiles)
    valid = np.all(L >= 0, axis=1)
    revenue = np.zeros(m)
    if not np.any(valid):
        return revenue
    phi = auction.phi_vector
    ordered = _set_preference_order(auction.env)
    member = np.zeros((len(ordered), n))
    for j, s in enumerate(ordered):
        member[j, list(s)] = 1.0
    Lv = L[valid]
    phi_l = phi[Lv]                       # (mv, n)
    scores = phi_l @ member.T             # (mv, S), columns in preference order
    best_col = np.argmax(scores, axis=1)  # first max = most preferred
    best_score = scores[np.arange(scores.shape[0]), best_col]
    pay_total = np.zeros(Lv.shape[0])
    for i in range(n):
        contains = member[:, i] > 0
        in_best = contains[best_col]
        if not np.any(in_best):
            continue
        excl = scores[in_best][:, ~contains]
        alt_pos = np.argmax(excl, axis=1)
        alt_score = excl[np.arange(excl.shape[0]), alt_pos]
        # map back to global preference indices to resolve exact ties
        excl_cols = np.nonzero(~contains)[0]
        alt_col = excl_cols[alt_pos]
        need = alt_score - (best_score[in_best] - phi_l[in_best, i])
        preferred = best_col[in_best] < alt_col
        tau = np.where(preferred,
                       np.searchsorted(phi, need, side="left"),
                       np.searchsorted(phi, need, side="right"))
        pay = auction.thresholds[i, np.clip(tau, 0, auction.t - 1)]
        buf = np.zeros(Lv.shape[0])
        buf[in_best] = pay
        pay_total += buf
    revenue[valid] = pay_total
    return revenue


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_RUNNERS = {
    "single-item": run_single_item,
    "matroid": run_matroid,
    "explicit": run_general,
}


def run_auction(auction: TLevelAuction, profile) -> Outcome:
    """Run the t-level auction appropriate for its environment."""
    return _RUNNERS[auction.env.kind](auction, profile)


def batch_revenue(auction: TLevelAuction, profiles) -> np.ndarray:
    """Revenue of the auction on each profile row (untruncated)."""
    profiles = np.asarray(profiles, dtype=float)
    if profiles.ndim != 2 or profiles.shape[1] != auction.n:
        raise ConfigError(f"profiles must be an m x {auction.n} matrix")
    if auction.env.kind == "single-item":
        return _batch_single_item_revenue(auction, profiles)
    if auction.env.kind == "matroid":
        return _batch_matroid_revenue(auction, profiles)
    return _batch_general_revenue(auction, profiles)


def truncated_revenue(outcome: Outcome, eta: float) -> float:
    """Counted revenue of an eta-truncated auction: min(revenue, eta)."""
    if not eta > 0:
        raise ConfigError("truncation level must be positive")
    return min(outcome.revenue, eta)


# ---------------------------------------------------------------------------
# enumeration helper shared by the learner and the shattering lab
# ---------------------------------------------------------------------------


def iter_single_item_revenues(profiles, tuple_arrays, tie_order,
                              chunk_auctions: int = 2048):
    """Yield (start, revenue_matrix) over the product of per-bidder rows.

    ``tuple_arrays[i]`` is a (P_i, t) array of nondecreasing threshold rows
    for bidder i.  Auction index a enumerates the Cartesian product in
    row-major order (bidder 0 slowest), and the yielded matrix holds the
    single-item revenue of auction block rows on every profile.
    """
    V = np.asarray(profiles, dtype=float)
    m, n = V.shape
    sizes = [arr.shape[0] for arr in tuple_arrays]
    total = int(np.prod(sizes))
    t = tuple_arrays[0].shape[1]
    rank = np.empty(n, dtype=int)
    rank[list(tie_order)] = np.arange(n)
    for start in range(0, total, chunk_auctions):
        count = min(chunk_auctions, total - start)
        idx = np.unravel_index(np.arange(start, start + count), sizes)
        thr = np.empty((count, n, t))
        for i in range(n):
            thr[:, i, :] = tuple_arrays[i][idx[i]]
        # levels[a, j, i] = level of bidder i on profile j under auction a
        levels = (V[None, :, :, None] >= thr[:, None, :, :]).sum(axis=3) - 1
        thr_rep = np.broadcast_to(thr[:, None, :, :], (count, m, n, t))
        _, _, pay = _single_item_payments(levels, thr_rep, rank)
        yield start, pay


# ---------------------------------------------------------------------------
# Myerson oracle
# ---------------------------------------------------------------------------


def ironed_phi_matrix(prior: ProductPrior, profiles, curves=None) -> np.ndarray:
    curves = prior.curves() if curves is None else curves
    profiles = np.asarray(profiles, dtype=float)
    out = np.empty_like(profiles)
    for i, c in enumerate(curves):
        out[:, i] = c.phi(profiles[:, i])
    return out


def myerson_surplus_batch(prior: ProductPrior, env: Environment, profiles,
                          curves=None) -> np.ndarray:
    """Ironed virtual surplus of the Myerson winner set, per profile row.

    By the revenue-equivalence accounting this equals the Myerson auction's
    revenue in expectation, which is how expected revenue is estimated.
    """
    phi = ironed_phi_matrix(prior, profiles, curves)
    if env.kind == "single-item":
        return np.maximum(phi.max(axis=1), 0.0)
    if env.kind == "matroid" and env.matroid.kind == "uniform":
        k = env.matroid.k
        if k == 0:
            return np.zeros(phi.shape[0])
        pos = np.maximum(phi, 0.0)
        if k >= env.n:
            return pos.sum(axis=1)
        return np.sort(pos, axis=1)[:, env.n - k:].sum(axis=1)
    if env.kind == "matroid" and env.matroid.kind == "partition":
        pos = np.maximum(phi, 0.0)
        total = np.zeros(phi.shape[0])
        for block, cap in zip(env.matroid.blocks, env.matroid.capacities):
            sub = pos[:, list(block)]
            if cap >= len(block):
                total += sub.sum(axis=1)
            elif cap > 0:
                total += np.sort(sub, axis=1)[:, len(block) - cap:].sum(axis=1)
        return total
    if env.kind == "explicit":
        member = np.zeros((len(env.sets), env.n))
        for j, s in enumerate(env.sets):
            member[j, list(s)] = 1.0
        return (phi @ member.T).max(axis=1)
    # general matroids: per-row greedy
    out = np.empty(phi.shape[0])
    for j in range(phi.shape[0]):
        win = max_weight_feasible(env, phi[j])
        out[j] = phi[j, list(win)].sum() if win else 0.0
    return out


def run_myerson(prior: ProductPrior, env: Environment, profile,
                curves=None) -> Outcome:
    """Myerson outcome, with critical-value payments found by bisection."""
    curves = prior.curves() if curves is None else curves
    v = np.asarray(profile, dtype=float)
    if v.shape != (env.n,):
        raise ConfigError(f"profile must have length {env.n}")
    phi = np.array([curves[i].phi_scalar(v[i]) for i in range(env.n)])
    winners = max_weight_feasible(env, phi)
    payments = np.zeros(env.n)
    for i in winners:
        lo = prior.bidders[i].support_lo
        hi = v[i]

        def wins(x):
            trial = phi.copy()
            trial[i] = curves[i].phi_scalar(x)
            return i in max_weight_feasible(env, trial)

        if wins(lo):
            payments[i] = lo
            continue
        a, b = lo, hi
        while b - a > 1e-9 * max(1.0, abs(b)):
            mid = 0.5 * (a + b)
            if wins(mid):
                b = mid
            else:
                a = mid
        payments[i] = b
    return Outcome(winners, payments)


def myerson_payment_batch(prior: ProductPrior, env: Environment, profiles,
                          curves=None) -> np.ndarray:
    """Vectorized Myerson payment revenue for single-item environments.

    The winner is the positive-phi argmax and pays the smallest value whose
    ironed phi matches the stronger of zero and the runner-up phi.
    """
    if env.kind != "single-item":
        raise ConfigError("myerson_payment_batch supports single-item only")
    curves = prior.curves() if curves is None else curves
    phi = ironed_phi_matrix(prior, profiles, curves)
    m, n = phi.shape
    win = np.argmax(phi, axis=1)
    top = phi[np.arange(m), win]
    sale = top > 0
    if n >= 2:
        second = np.partition(phi, n - 2, axis=1)[:, n - 2]
    else:
        second = np.full(m, -np.inf)
    need = np.maximum(second, 0.0)
    pay = np.zeros(m)
    for i in range(n):
        rows = sale & (win == i)
        if np.any(rows):
            pay[rows] = curves[i].inverse_batch(need[rows])
    return pay


def myerson_expected_revenue(prior: ProductPrior, env: Environment,
                             mc_samples: int, seed: int):
    """(estimate, half_width) via Monte Carlo over the virtual surplus."""
    from .montecarlo import mc_mean  # local import to avoid a cycle

    if mc_samples < 100:
        raise ConfigError("mc_samples must be at least 100")
    curves = prior.curves()
    return mc_mean(lambda V: myerson_surplus_batch(prior, env, V, curves),
                   prior, mc_samples, seed)


__all__ = [
    "Outcome", "TLevelAuction", "level_of", "levels_batch",
    "run_single_item", "run_matroid", "run_general", "run_auction",
    "run_myerson", "batch_revenue", "truncated_revenue",
    "iter_single_item_revenues", "ironed_phi_matrix",
    "myerson_surplus_batch", "myerson_payment_batch",
    "myerson_expected_revenue",
]
