"""Experiment harness: configs, file IO, and reproducible reports.

File conventions: JSON for priors, environments, auctions, configs, and
reports; CSV for bulk samples and result tables.  Bidders are 1-indexed in
files (environment sets, tie orders) and 0-indexed in memory.  Sample CSVs
carry a ``bidder_0,...,bidder_{n-1}`` header with one profile per row.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .distributions import ProductPrior, prior_from_spec, sample_profiles
from .errors import ConfigError
from .feasibility import Environment, env_from_spec
from .learner import LearnerConfig, SampleSet, erm
from .levels import (LevelConstructionParams, build_bounded, build_matroid_levels,
                     build_mhr, build_phi_grid, estimate_anchor, solve_epsilon_prime)
from .mechanisms import TLevelAuction, myerson_expected_revenue, run_auction
from .montecarlo import evaluate

__all__ = [
    "ingest_samples", "write_samples_csv", "auction_to_spec", "auction_from_spec",
    "load_json", "dump_json", "ExperimentConfig", "ExperimentReport",
    "run_experiment", "build_from_params", "write_outcome_csv", "evaluate",
]


# ---------------------------------------------------------------------------
# samples and auctions on disk
# ---------------------------------------------------------------------------


def ingest_samples(path, expected_n: int | None = None) -> SampleSet:
    """Load a profile CSV, rejecting ragged, negative, or non-finite rows."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: no samples")
        header = [h.strip() for h in header]
        n = len(header)
        if header != [f"bidder_{i}" for i in range(n)]:
            raise ConfigError(
                f"{path}: header must be bidder_0..bidder_{n-1}, got {header}")
        if expected_n is not None and n != expected_n:
            raise ConfigError(f"{path}: expected {expected_n} columns, found {n}")
        rows = []
        for num, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != n:
                raise ConfigError(f"{path}: row {num}: expected {n} values, got {len(row)}")
            try:
                vals = [float(x) for x in row]
            except ValueError:
                raise ConfigError(f"{path}: row {num}: non-numeric value")
            if any(not math.isfinite(x) for x in vals):
                raise ConfigError(f"{path}: row {num}: non-finite value")
            if any(x < 0 for x in vals):
                raise ConfigError(f"{path}: row {num}: negative value")
            rows.append(vals)
    if not rows:
        raise ConfigError(f"{path}: no samples")
    return SampleSet(np.asarray(rows, dtype=float), source=f"csv:{path}")


def write_samples_csv(path, profiles) -> None:
    profiles = np.asarray(profiles, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"bidder_{i}" for i in range(profiles.shape[1])])
        writer.writerows(profiles.tolist())


def write_outcome_csv(path, auction: TLevelAuction, profiles) -> None:
    """One row per profile: values, winner bitmask (bit i = bidder i), payments, revenue."""
    profiles = np.asarray(profiles, dtype=float)
    n = auction.n
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"bidder_{i}" for i in range(n)] + ["winner_mask"]
                        + [f"payment_{i}" for i in range(n)] + ["revenue"])
        for row in profiles:
            out = run_auction(auction, row)
            mask = sum(1 << i for i in out.winners)
            writer.writerow(list(row) + [mask] + out.payments.tolist() + [out.revenue])


def auction_to_spec(auction: TLevelAuction) -> dict:
    obj = {
        "thresholds": auction.thresholds.tolist(),
        "tie_order": [i + 1 for i in auction.tie_order],
        "env": auction.env.spec(),
    }
    if auction.phi_vector is not None:
        obj["phi_vector"] = auction.phi_vector.tolist()
    if auction.truncation is not None:
        obj["truncation"] = auction.truncation
    return obj


def auction_from_spec(obj: dict, path: str = "auction") -> TLevelAuction:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    try:
        env = env_from_spec(obj["env"], f"{path}.env")
        tie = [int(i) - 1 for i in obj["tie_order"]]
        return TLevelAuction(obj["thresholds"], tie, env,
                             phi_vector=obj.get("phi_vector"),
                             truncation=obj.get("truncation"))
    except KeyError as e:
        raise ConfigError(f"{path}: missing field {e.args[0]!r}")
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from e


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    except OSError as e:
        raise ConfigError(f"{path}: {e}") from e


def dump_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# experiment configs and reports
# ---------------------------------------------------------------------------

_MODES = ("build-bounded", "build-matroid", "build-phi-grid", "build-mhr", "learn")


@dataclass
class ExperimentConfig:
    prior: ProductPrior
    env: Environment
    candidate: dict
    mc_samples: int
    seed: int
    out_json: str | None = None
    out_csv: str | None = None
    echo: dict = field(default_factory=dict)

    @classmethod
    def from_obj(cls, obj: dict, base: str = "config") -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError(f"{base}: expected an object")
        for key in ("prior", "env", "candidate", "mc_samples", "seed"):
            if key not in obj:
                raise ConfigError(f"{base}.{key}: missing")
        prior = prior_from_spec(obj["prior"], f"{base}.prior")
        env = env_from_spec(obj["env"], f"{base}.env")
        if env.n != prior.n:
            raise ConfigError(f"{base}.env.n: {env.n} bidders but the prior has {prior.n}")
        cand = obj["candidate"]
        if not isinstance(cand, dict) or "mode" not in cand:
            raise ConfigError(f"{base}.candidate.mode: missing")
        if cand["mode"] not in _MODES:
            raise ConfigError(f"{base}.candidate.mode: unknown mode {cand['mode']!r}")
        mc = obj["mc_samples"]
        if not isinstance(mc, int) or mc < 100:
            raise ConfigError(f"{base}.mc_samples: must be an integer >= 100")
        seed = obj["seed"]
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"{base}.seed: must be a nonnegative integer")
        return cls(prior=prior, env=env, candidate=dict(cand), mc_samples=mc,
                   seed=seed, out_json=obj.get("out_json"),
                   out_csv=obj.get("out_csv"), echo=obj)


@dataclass
class ExperimentReport:
    mode: str
    myerson_estimate: float
    myerson_half_width: float
    candidate_estimate: float
    candidate_half_width: float
    ratio: float | None
    additive_gap: float
    t: int
    m: int | None
    runtime_sec: float
    config: dict
    inputs_sha256: str

    def to_obj(self) -> dict:
        return {
            "mode": self.mode,
            "myerson": {"estimate": self.myerson_estimate,
                        "half_width": self.myerson_half_width},
            "candidate": {"estimate": self.candidate_estimate,
                          "half_width": self.candidate_half_width},
            "ratio": self.ratio,
            "additive_gap": self.additive_gap,
            "t": self.t,
            "m": self.m,
            "runtime_sec": self.runtime_sec,
            "config": self.config,
            "inputs_sha256": self.inputs_sha256,
        }

    def csv_row(self):
        return [self.inputs_sha256[:12], self.mode, self.t,
                "" if self.m is None else self.m,
                self.myerson_estimate, self.myerson_half_width,
                self.candidate_estimate, self.candidate_half_width,
                "" if self.ratio is None else self.ratio,
                self.additive_gap, round(self.runtime_sec, 3)]


CSV_HEADER = ["hash", "mode", "t", "m", "myerson", "myerson_hw",
              "candidate", "candidate_hw", "ratio", "gap", "runtime_sec"]


def content_hash(config_obj: dict, referenced_files=()) -> str:
    """Hash of the canonical config plus the bytes of every referenced file."""
    h = hashlib.sha256()
    h.update(json.dumps(config_obj, sort_keys=True).encode())
    for path in referenced_files:
        h.update(b"\x00file\x00")
        h.update(str(path).encode())
        with open(path, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def _params_from_candidate(cand: dict, prior: ProductPrior) -> LevelConstructionParams:
    h_bound = cand.get("h_bound")
    if h_bound is None:
        h_bound = prior.h_bound
    return LevelConstructionParams(
        epsilon=float(cand["epsilon"]),
        alpha=float(cand.get("alpha", 1.0)),
        gamma=float(cand.get("gamma", 1.0)),
        h_bound=None if h_bound is None else float(h_bound),
        epsilon_prime=cand.get("epsilon_prime"))


def build_from_params(cand: dict, prior: ProductPrior, env: Environment,
                      seed: int = 0):
    """Build the candidate auction named by a candidate config block.

    Returns (auction, m_used) where m_used is the training sample count for
    learned candidates and the anchor sample count for anchored builds.
    """
    mode = cand["mode"]
    try:
        if mode == "build-bounded":
            return build_bounded(prior, _params_from_candidate(cand, prior)), None
        if mode == "build-matroid":
            return build_matroid_levels(prior, env,
                                        _params_from_candidate(cand, prior)), None
        if mode == "build-phi-grid":
            return build_phi_grid(prior, env, float(cand["epsilon"])), None
        if mode == "build-mhr":
            eps = float(cand["epsilon"])
            m_anchor = int(cand.get("anchor_samples", 100_000))
            eps_prime = solve_epsilon_prime(eps)
            bids = sample_profiles(prior, m_anchor, seed)
            anchor = estimate_anchor(bids.max(axis=1), eps_prime,
                                     delta=float(cand.get("delta", 0.1)))
            return build_mhr(prior, anchor, eps), m_anchor
        if mode == "learn":
            m = cand.get("m")
            if "samples_csv" in cand:
                samples = ingest_samples(cand["samples_csv"], prior.n)
            elif m:
                samples = SampleSet(sample_profiles(prior, int(m), seed),
                                    source=f"synthetic:seed={seed}")
            else:
                raise ConfigError("candidate.learn: needs 'm' or 'samples_csv'")
            config = LearnerConfig(
                t=int(cand.get("t", 1)),
                strategy=cand.get("strategy", "exhaustive"),
                candidate_policy=cand.get("candidate_policy", "sample-values"),
                grid_step=cand.get("grid_step"),
                restarts=int(cand.get("restarts", 8)),
                max_rounds=int(cand.get("max_rounds", 50)),
                truncation=cand.get("truncation"),
                seed=seed)
            phi = cand.get("phi_vector")
            auction, _ = erm(samples, env, config, phi_vector=phi)
            return auction, samples.m
    except KeyError as e:
        raise ConfigError(f"candidate.{e.args[0]}: missing for mode {mode!r}")
    raise ConfigError(f"candidate.mode: unknown mode {mode!r}")


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Build or learn the candidate, score it against the Myerson oracle.

    The candidate and the oracle are estimated on the same seeded sample
    stream (common random numbers), which tightens ratio comparisons.
    """
    start = time.perf_counter()
    auction, m_used = build_from_params(cfg.candidate, cfg.prior, cfg.env, cfg.seed)
    cand_est, cand_hw = evaluate(auction, cfg.prior, mc_samples=cfg.mc_samples,
                                 seed=cfg.seed)
    my_est, my_hw = myerson_expected_revenue(cfg.prior, cfg.env, cfg.mc_samples,
                                             cfg.seed)
    ratio = cand_est / my_est if my_est - my_hw > 0 else None
    files = []
    if cfg.candidate.get("samples_csv"):
        files.append(cfg.candidate["samples_csv"])
    report = ExperimentReport(
        mode=cfg.candidate["mode"],
        myerson_estimate=my_est, myerson_half_width=my_hw,
        candidate_estimate=cand_est, candidate_half_width=cand_hw,
        ratio=ratio, additive_gap=my_est - cand_est,
        t=auction.t, m=m_used,
        runtime_sec=time.perf_counter() - start,
        config=cfg.echo, inputs_sha256=content_hash(cfg.echo, files))
    if cfg.out_json:
        dump_json(cfg.out_json, report.to_obj())
    if cfg.out_csv:
        fresh = not os.path.exists(cfg.out_csv)
        with open(cfg.out_csv, "a", newline="") as fh:
            writer = csv.writer(fh)
            if fresh:
                writer.writerow(CSV_HEADER)
            writer.writerow(report.csv_row())
    return report


def assert_report(report: ExperimentReport) -> None:
    """Raise AssertionError when the report misses its mode's guarantee.

    Multiplicative modes must reach (1 - eps) of the oracle minus combined
    half-widths; the grid mode must come within an additive eps plus slack.
    """
    cand = report.config.get("candidate", {})
    eps = float(cand.get("epsilon", 0.0))
    slack = report.myerson_half_width + report.candidate_half_width
    if report.mode in ("build-bounded", "build-matroid", "build-mhr"):
        floor = (1.0 - eps) * report.myerson_estimate - slack
        if report.candidate_estimate < floor:
            raise AssertionError(
                f"candidate {report.candidate_estimate:.6f} below "
                f"(1-{eps})*myerson - slack = {floor:.6f}")
    elif report.mode == "build-phi-grid":
        floor = report.myerson_estimate - eps - slack
        if report.candidate_estimate < floor:
            raise AssertionError(
                f"candidate {report.candidate_estimate:.6f} below "
                f"myerson - {eps} - slack = {floor:.6f}")
    else:
        raise ConfigError(f"--assert is undefined for mode {report.mode!r}")
