"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 guard violation, 4 an
asserted acceptance check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import harness, shattering
from .distributions import prior_from_spec, sample_profiles
from .errors import ConfigError, GuardError
from .feasibility import env_from_spec
from .learner import LearnerConfig, erm, sample_size_bound
from .montecarlo import evaluate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_ASSERT = 4


def _cmd_simulate(args) -> int:
    prior = prior_from_spec(harness.load_json(args.prior))
    profiles = sample_profiles(prior, args.m, args.seed)
    harness.write_samples_csv(args.out, profiles)
    print(f"wrote {args.m} profiles to {args.out}")
    if args.auction:
        auction = harness.auction_from_spec(harness.load_json(args.auction))
        if not args.outcomes:
            raise ConfigError("--auction needs --outcomes to receive the rows")
        harness.write_outcome_csv(args.outcomes, auction, profiles)
        print(f"wrote outcomes to {args.outcomes}")
    return EXIT_OK


def _cmd_build_levels(args) -> int:
    prior = prior_from_spec(harness.load_json(args.prior))
    params = harness.load_json(args.params)
    if not isinstance(params, dict) or "construction" not in params:
        raise ConfigError("params.construction: missing")
    mode = {"bounded": "build-bounded", "matroid": "build-matroid",
            "phi-grid": "build-phi-grid", "mhr": "build-mhr"}.get(params["construction"])
    if mode is None:
        raise ConfigError(f"params.construction: unknown kind {params['construction']!r}")
    if mode in ("build-matroid", "build-phi-grid"):
        if not args.env:
            raise ConfigError(f"{params['construction']} construction needs --env")
        env = env_from_spec(harness.load_json(args.env))
    else:
        from .feasibility import Environment
        env = Environment.single_item(prior.n)
    cand = dict(params)
    cand["mode"] = mode
    auction, _ = harness.build_from_params(cand, prior, env,
                                           seed=int(params.get("seed", 0)))
    harness.dump_json(args.out, harness.auction_to_spec(auction))
    print(f"wrote a {auction.t}-level auction for {auction.n} bidders to {args.out}")
    if args.report:
        print(f"{'bidder':>6}  thresholds")
        for i in range(auction.n):
            row = ", ".join(f"{x:.6g}" for x in auction.thresholds[i])
            print(f"{i + 1:>6}  [{row}]")
        if auction.truncation is not None:
            print(f"revenue truncated at {auction.truncation:.6g}")
    return EXIT_OK


def _cmd_learn(args) -> int:
    env = env_from_spec(harness.load_json(args.env))
    samples = harness.ingest_samples(args.samples, env.n)
    strategy = {"exhaustive": "exhaustive", "ascent": "coordinate-ascent"}[args.strategy]
    config = LearnerConfig(
        t=args.t, strategy=strategy, seed=args.seed,
        candidate_policy=("sample-values-plus-grid" if args.grid_step
                          else "sample-values"),
        grid_step=args.grid_step, truncation=args.truncation,
        restarts=args.restarts, max_rounds=args.max_rounds)
    phi = None
    if env.kind == "explicit":
        if not args.phi:
            raise ConfigError("explicit environments need --phi with a level-value JSON list")
        phi = harness.load_json(args.phi)
    auction, value = erm(samples, env, config, phi_vector=phi)
    harness.dump_json(args.out, harness.auction_to_spec(auction))
    print(json.dumps({"empirical_revenue": value, "t": auction.t,
                      "m": samples.m, "out": args.out}))
    return EXIT_OK


def _cmd_eval(args) -> int:
    auction = harness.auction_from_spec(harness.load_json(args.auction))
    prior = prior_from_spec(harness.load_json(args.prior))
    est, hw = evaluate(auction, prior, mc_samples=args.mc, seed=args.seed,
                       ci="hoeffding" if args.hoeffding else "normal",
                       range_bound=args.range_bound)
    print(json.dumps({"estimate": est, "half_width": hw, "mc_samples": args.mc,
                      "seed": args.seed}))
    if args.outcomes:
        profiles = sample_profiles(prior, args.outcome_rows, args.seed)
        harness.write_outcome_csv(args.outcomes, auction, profiles)
    return EXIT_OK


def _cmd_shatter(args) -> int:
    obj = harness.load_json(args.instance)
    if not isinstance(obj, dict) or "samples" not in obj or "targets" not in obj:
        raise ConfigError("instance: needs 'samples' and 'targets'")
    inst = shattering.ShatterInstance(
        samples=np.asarray(obj["samples"], dtype=float),
        targets=np.asarray(obj["targets"], dtype=float),
        t=int(obj.get("t", 1)),
        threshold_universe=obj.get("threshold_universe"),
        padding=float(obj.get("padding", shattering.DEFAULT_PADDING)))
    count = shattering.count_labelings(inst)
    ok, witnesses = shattering.is_shatterable(inst, witnesses=True)
    result = {
        "m": inst.m, "n": inst.n, "t": inst.t,
        "distinct_labelings": count,
        "required": 1 << inst.m,
        "shatterable": ok,
        "ceiling": shattering.labeling_ceiling(inst),
        "witnesses": {format(code, f"0{inst.m}b")[::-1]: thr.tolist()
                      for code, thr in sorted(witnesses.items())[: args.max_witnesses]},
    }
    if args.out:
        harness.dump_json(args.out, result)
    print(json.dumps({k: result[k] for k in
                      ("m", "n", "t", "distinct_labelings", "required", "shatterable")}))
    return EXIT_OK


def _cmd_report(args) -> int:
    cfg = harness.ExperimentConfig.from_obj(harness.load_json(args.config))
    if args.out_json:
        cfg.out_json = args.out_json
    if args.out_csv:
        cfg.out_csv = args.out_csv
    report = harness.run_experiment(cfg)
    print(json.dumps(report.to_obj(), indent=2, sort_keys=True))
    if args.assert_guarantee:
        try:
            harness.assert_report(report)
        except AssertionError as e:
            print(f"acceptance check failed: {e}", file=sys.stderr)
            return EXIT_ASSERT
        print("acceptance check passed")
    return EXIT_OK


def _cmd_plan(args) -> int:
    if args.pseudo_dim is not None:
        d = args.pseudo_dim
    elif args.n is not None and args.t is not None:
        nt = args.n * args.t
        d = max(1.0, math.ceil(nt * math.log(max(nt, 2))))
    else:
        raise ConfigError("plan needs --pseudo-dim or both --n and --t")
    m = sample_size_bound(args.h, args.epsilon, args.delta, d, args.constant)
    print(json.dumps({"m": m, "pseudo_dim": d, "h": args.h,
                      "epsilon": args.epsilon, "delta": args.delta}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tlevel",
                                description="t-level auction experiments")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="draw valuation profiles from a prior")
    s.add_argument("--prior", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--auction", help="also run this auction on the draws")
    s.add_argument("--outcomes", help="outcome CSV path for --auction")
    s.set_defaults(fn=_cmd_simulate)

    s = sub.add_parser("build-levels", help="construct thresholds from a prior")
    s.add_argument("--prior", required=True)
    s.add_argument("--params", required=True)
    s.add_argument("--env", help="environment JSON (matroid / phi-grid builds)")
    s.add_argument("--out", required=True)
    s.add_argument("--report", action="store_true",
                   help="print a per-bidder threshold table")
    s.set_defaults(fn=_cmd_build_levels)

    s = sub.add_parser("learn", help="empirical revenue maximization from samples")
    s.add_argument("--samples", required=True)
    s.add_argument("--env", required=True)
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--strategy", choices=("exhaustive", "ascent"), default="exhaustive")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--grid-step", type=float, dest="grid_step")
    s.add_argument("--truncation", type=float)
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--max-rounds", type=int, default=50, dest="max_rounds")
    s.add_argument("--phi", help="level-value JSON (explicit environments)")
    s.set_defaults(fn=_cmd_learn)

    s = sub.add_parser("eval", help="Monte Carlo revenue of an auction")
    s.add_argument("--auction", required=True)
    s.add_argument("--prior", required=True)
    s.add_argument("--mc", type=int, default=100_000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--hoeffding", action="store_true")
    s.add_argument("--range-bound", type=float, dest="range_bound")
    s.add_argument("--outcomes", help="also dump per-profile outcome rows")
    s.add_argument("--outcome-rows", type=int, default=100, dest="outcome_rows")
    s.set_defaults(fn=_cmd_eval)

    s = sub.add_parser("shatter", help="labeling counts and shatterability")
    s.add_argument("--instance", required=True)
    s.add_argument("--out")
    s.add_argument("--max-witnesses", type=int, default=64, dest="max_witnesses")
    s.set_defaults(fn=_cmd_shatter)

    s = sub.add_parser("report", help="full experiment run against the oracle")
    s.add_argument("--config", required=True)
    s.add_argument("--out-json", dest="out_json")
    s.add_argument("--out-csv", dest="out_csv")
    s.add_argument("--assert", action="store_true", dest="assert_guarantee",
                   help="exit 4 unless the mode's guarantee holds")
    s.set_defaults(fn=_cmd_report)

    s = sub.add_parser("plan", help="sample-size bound for a target accuracy")
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--pseudo-dim", type=float, dest="pseudo_dim")
    s.add_argument("--n", type=int)
    s.add_argument("--t", type=int)
    s.add_argument("--constant", type=float, default=1.0)
    s.set_defaults(fn=_cmd_plan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except GuardError as e:
        print(f"guard violation: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
