"""Feasibility environments: single item, matroids, explicit set systems.

Bidders are 0-indexed internally.  File formats use 1-indexed bidder ids; the
harness converts at the boundary.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import ConfigError, GuardError

EXPLICIT_MAX_N = 16


class FeasibilityError(ValueError):
    """Operation undefined for this environment kind."""


class MatroidSpec:
    """Concrete matroid families: uniform(k), partition, graphic."""

    def __init__(self, kind, k=None, blocks=None, capacities=None, edges=None):
        self.kind = kind
        self.k = k
        self.blocks = blocks
        self.capacities = capacities
        self.edges = edges

    @classmethod
    def uniform(cls, k: int) -> "MatroidSpec":
        if k < 0:
            raise ConfigError(f"uniform matroid needs k >= 0, got {k}")
        return cls("uniform", k=int(k))

    @classmethod
    def partition(cls, blocks, capacities) -> "MatroidSpec":
        blocks = [tuple(sorted(int(i) for i in b)) for b in blocks]
        capacities = [int(c) for c in capacities]
        if len(blocks) != len(capacities):
            raise ConfigError("partition matroid needs one capacity per block")
        if any(c < 0 for c in capacities):
            raise ConfigError("partition capacities must be >= 0")
        seen = set()
        for b in blocks:
            if seen & set(b):
                raise ConfigError("partition blocks must be disjoint")
            seen |= set(b)
        return cls("partition", blocks=blocks, capacities=capacities)

    @classmethod
    def graphic(cls, edges) -> "MatroidSpec":
        edges = [(int(u), int(v)) for u, v in edges]
        for u, v in edges:
            if u < 0 or v < 0:
                raise ConfigError("graphic matroid vertices must be nonnegative ints")
        return cls("graphic", edges=edges)

    def validate_for(self, n: int) -> None:
        if self.kind == "uniform" and self.k > n:
            raise ConfigError(f"uniform matroid k={self.k} exceeds n={n}")
        if self.kind == "partition":
            members = {i for b in self.blocks for i in b}
            if members != set(range(n)):
                raise ConfigError("partition blocks must cover bidders 0..n-1 exactly")
        if self.kind == "graphic" and len(self.edges) != n:
            raise ConfigError("graphic matroid needs one edge per bidder")

    def is_independent(self, subset, n: int) -> bool:
        s = frozenset(subset)
        if self.kind == "uniform":
            return len(s) <= self.k
        if self.kind == "partition":
            return all(len(s & set(b)) <= c for b, c in zip(self.blocks, self.capacities))
        if self.kind == "graphic":
            return self._is_forest(s)
        raise ConfigError(f"unknown matroid kind {self.kind!r}")

    def _is_forest(self, subset) -> bool:
        parent = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        for i in subset:
            u, v = self.edges[i]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def spec(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform_matroid", "k": self.k}
        if self.kind == "partition":
            return {"kind": "partition_matroid",
                    "blocks": [list(b) for b in self.blocks],
                    "capacities": list(self.capacities)}
        return {"kind": "graphic_matroid", "edges": [list(e) for e in self.edges]}


class Environment:
    """Which bidder subsets may win simultaneously."""

    def __init__(self, kind: str, n: int, matroid: MatroidSpec | None = None,
                 sets=None):
        if n < 1:
            raise ConfigError(f"environment needs n >= 1, got {n}")
        self.kind = kind
        self.n = int(n)
        self.matroid = matroid
        self.sets = sets

    @classmethod
    def single_item(cls, n: int) -> "Environment":
        return cls("single-item", n)

    @classmethod
    def from_matroid(cls, spec: MatroidSpec, n: int) -> "Environment":
        spec.validate_for(n)
        return cls("matroid", n, matroid=spec)

    @classmethod
    def explicit(cls, sets, n: int) -> "Environment":
        if n > EXPLICIT_MAX_N:
            raise ConfigError(f"explicit environments capped at n={EXPLICIT_MAX_N}")
        norm = []
        for s in sets:
            fs = frozenset(int(i) for i in s)
            if any(i < 0 or i >= n for i in fs):
                raise ConfigError(f"explicit set {sorted(fs)} references bidders outside 0..{n-1}")
            norm.append(fs)
        if frozenset() not in norm:
            raise ConfigError("explicit environments must list the empty set")
        # deduplicate, keep a canonical sorted order for reproducibility
        uniq = sorted(set(norm), key=lambda s: tuple(sorted(s)))
        return cls("explicit", n, sets=tuple(uniq))

    def spec(self) -> dict:
        if self.kind == "single-item":
            return {"kind": "single_item", "n": self.n}
        if self.kind == "matroid":
            out = self.matroid.spec()
            out["n"] = self.n
            return out
        return {"kind": "explicit", "n": self.n,
                "sets": [sorted(i + 1 for i in s) for s in self.sets]}


def is_feasible(env: Environment, subset) -> bool:
    """Membership (explicit) or independence (matroid / single item) test."""
    s = frozenset(subset)
    if any(i < 0 or i >= env.n for i in s):
        raise ConfigError(f"subset {sorted(s)} outside bidders 0..{env.n - 1}")
    if env.kind == "single-item":
        return len(s) <= 1
    if env.kind == "matroid":
        return env.matroid.is_independent(s, env.n)
    return s in env.sets


def greedy_by_order(env: Environment, eligible, order) -> frozenset:
    """Scan bidders in the given order, adding eligible ones while independent."""
    if env.kind == "explicit":
        raise FeasibilityError("greedy undefined for non-matroid environments")
    eligible = frozenset(eligible)
    chosen: set[int] = set()
    for i in order:
        if i not in eligible:
            continue
        if is_feasible(env, chosen | {i}):
            chosen.add(i)
    return frozenset(chosen)


def max_weight_feasible(env: Environment, weights) -> frozenset:
    """A feasible set of maximum total weight.

    Single item: the positive argmax bidder, or nobody.  Matroids: greedy over
    positive weights in decreasing order.  Explicit systems: exhaustive scan
    of the listed sets.  Ties break toward the lexicographically smallest
    sorted member list, so the outcome never depends on the weights beyond
    their values.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (env.n,):
        raise ConfigError(f"weights must have length {env.n}")
    if env.kind == "single-item":
        best = int(np.argmax(w))
        return frozenset([best]) if w[best] > 0 else frozenset()
    if env.kind == "matroid":
        order = sorted((i for i in range(env.n) if w[i] > 0),
                       key=lambda i: (-w[i], i))
        return greedy_by_order(env, set(order), order)
    best_set = None
    best_total = -np.inf
    for s in sorted(env.sets, key=lambda s: tuple(sorted(s))):
        total = float(w[list(s)].sum()) if s else 0.0
        if total > best_total + 1e-15:
            best_total = total
            best_set = s
    return best_set


def exhaustive_max_weight(is_independent, n: int, weights) -> frozenset:
    """Brute-force maximizer over all independent subsets (test oracle)."""
    if n > 20:
        raise GuardError("exhaustive search capped at n=20")
    w = np.asarray(weights, dtype=float)
    best, best_total = frozenset(), 0.0
    for r in range(n + 1):
        for combo in itertools.combinations(range(n), r):
            s = frozenset(combo)
            if not is_independent(s):
                continue
            total = float(w[list(s)].sum()) if s else 0.0
            if total > best_total + 1e-15:
                best, best_total = s, total
    return best


def spot_check_matroid_axioms(is_independent, n: int, max_size: int = 4) -> bool:
    """Downward closure plus the exchange axiom on all subsets up to max_size."""
    if not is_independent(frozenset()):
        return False
    subsets = []
    for r in range(min(n, max_size) + 1):
        subsets.extend(frozenset(c) for c in itertools.combinations(range(n), r))
    indep = {s for s in subsets if is_independent(s)}
    for s in indep:
        for i in s:
            if s - {i} not in indep:
                return False
    for a in indep:
        for b in indep:
            if len(a) < len(b):
                if not any(a | {x} in indep for x in b - a):
                    return False
    return True


def verify_exchange_property(oracle, n: int, trials: int, seed: int,
                             weights=None) -> bool:
    """Check the sorted-weight dominance of the greedy optimum.

    For random weight vectors, compares the exhaustive max-weight independent
    set against random same-size feasible sets: the optimum's i-th largest
    weight must dominate the challenger's i-th largest.  ``oracle`` may be a
    MatroidSpec, a matroid Environment, or a bare independence predicate
    (which allows corrupted fixtures as negative controls).
    """
    if n > 12:
        raise GuardError("verify_exchange_property capped at n=12")
    if isinstance(oracle, MatroidSpec):
        spec = oracle
        is_independent = lambda s: spec.is_independent(s, n)
    elif isinstance(oracle, Environment):
        env = oracle
        is_independent = lambda s: is_feasible(env, s)
    else:
        is_independent = oracle
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    for trial in range(trials):
        if trial == 0 and weights is not None:
            w = np.asarray(weights, dtype=float)
        else:
            w = rng.random(n)
        opt = exhaustive_max_weight(is_independent, n, w)
        same_size = [frozenset(c) for c in itertools.combinations(range(n), len(opt))
                     if is_independent(frozenset(c))]
        if not same_size:
            return False
        b = same_size[rng.integers(len(same_size))]
        opt_sorted = np.sort(w[list(opt)])[::-1] if opt else np.array([])
        b_sorted = np.sort(w[list(b)])[::-1] if b else np.array([])
        if np.any(opt_sorted < b_sorted - 1e-12):
            return False
    return True


def env_from_spec(obj: dict, path: str = "env") -> Environment:
    """Build an Environment from a JSON-style dict (1-indexed bidders in files)."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = str(obj.get("kind", "")).replace("-", "_")
    try:
        if kind == "single_item":
            return Environment.single_item(int(obj["n"]))
        if kind == "uniform_matroid":
            return Environment.from_matroid(MatroidSpec.uniform(obj["k"]), int(obj["n"]))
        if kind == "partition_matroid":
            blocks = [[int(i) - 1 for i in b] for b in obj["blocks"]]
            return Environment.from_matroid(
                MatroidSpec.partition(blocks, obj["capacities"]), int(obj["n"]))
        if kind == "graphic_matroid":
            edges = obj["edges"]
            return Environment.from_matroid(MatroidSpec.graphic(edges), int(obj["n"]))
        if kind == "explicit":
            sets = [[int(i) - 1 for i in s] for s in obj["sets"]]
            n = int(obj.get("n") or (max((max(s) for s in sets if s), default=-1) + 1))
            return Environment.explicit(sets, n)
    except KeyError as e:
        raise ConfigError(f"{path}: missing field {e.args[0]!r} for kind {kind!r}")
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}")
    raise ConfigError(f"{path}.kind: unknown environment kind {obj.get('kind')!r}")


__all__ = [
    "FeasibilityError", "MatroidSpec", "Environment", "is_feasible",
    "greedy_by_order", "max_weight_feasible", "exhaustive_max_weight",
    "spot_check_matroid_axioms", "verify_exchange_property", "env_from_spec",
    "EXPLICIT_MAX_N",
]
