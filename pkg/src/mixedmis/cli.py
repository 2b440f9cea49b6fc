"""Command-line interface: run, bound, levels, oracle, experiment."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .engine import run_protocol, verify_mis
from .experiments import ExperimentConfig, run_experiment
from .graph import Graph, StrengthProfile, load_graph, parse_graph_spec
from .oracle import exact_round
from .strength import ConditionParams
from .theory import compute_levels, round_bound


def _load_graph_arg(spec: str, seed: int):
    """Graph from a generator spec string or an edge-list file path."""
    if os.path.exists(spec):
        return load_graph(spec), None
    return parse_graph_spec(spec, seed=seed)


def _resolve_profile(graph, builtin, profile_path):
    if profile_path:
        profile = StrengthProfile.load(profile_path)
        if profile.n != graph.n:
            raise SystemExit(
                f"profile covers {profile.n} agents but graph has {graph.n}"
            )
        return profile
    if builtin is not None:
        return builtin
    raise SystemExit("this graph has no built-in profile; pass --profile <file>")


def _params(args) -> ConditionParams:
    return ConditionParams(args.eps_l, args.eps_u)


def cmd_run(args) -> int:
    graph, builtin = _load_graph_arg(args.graph, args.seed)
    profile = _resolve_profile(graph, builtin, args.profile)
    result = run_protocol(
        graph,
        profile,
        args.seed,
        max_rounds=args.max_rounds,
        params=_params(args),
        winner=args.winner,
    )
    payload = result.as_dict()
    if result.terminated:
        verdict = verify_mis(graph, result.mis)
        payload["mis_valid"] = verdict.passed
    text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if result.terminated else 2


def cmd_bound(args) -> int:
    report = round_bound(args.n, args.d, _params(args))
    sys.stdout.write(json.dumps(report.as_dict(), sort_keys=True, indent=1) + "\n")
    return 0


def cmd_levels(args) -> int:
    graph, builtin = _load_graph_arg(args.graph, args.seed)
    profile = _resolve_profile(graph, builtin, args.profile)
    report = compute_levels(graph, profile, np.ones(graph.n, bool), _params(args))
    payload = {
        "log_base": 2,
        "l_max": report.l_max,
        "x_max": str(report.x_max),
        "threshold": str(report.threshold),
        "agents_at_max": list(report.agents_at_max),
        "levels": {str(k): v for k, v in sorted(report.levels.items())},
    }
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    return 0


def cmd_oracle(args) -> int:
    graph, builtin = _load_graph_arg(args.graph, args.seed)
    profile = _resolve_profile(graph, builtin, args.profile)
    dist = exact_round(graph, profile, depth_cap=args.depth)
    payload = {
        "agents": list(dist.agents),
        "depth_cap": dist.depth_cap,
        "residual_error": dist.residual_error,
        "join_probability": {str(a): float(dist.join[a]) for a in dist.agents},
        "elimination_probability": {
            str(a): float(dist.eliminated[a]) for a in dist.agents
        },
        "any_join_probability": float(dist.any_join),
        "termination_probability": float(dist.termination),
    }
    text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_experiment(args) -> int:
    config = ExperimentConfig.load(args.config)
    overrides = {}
    if args.seeds:
        overrides["seeds"] = args.seeds
    if args.threads and args.threads != 1:
        overrides["options"] = dict(config.options, threads=args.threads)
    if overrides:
        config = ExperimentConfig(
            experiment=config.experiment,
            master_seed=config.master_seed,
            seeds=overrides.get("seeds", config.seeds),
            params=config.params,
            options=overrides.get("options", config.options),
        )
    report = run_experiment(config, args.out_dir)
    sys.stdout.write(
        f"{config.experiment}: {'PASS' if report['passed'] else 'FAIL'} "
        f"(outputs in {args.out_dir})\n"
    )
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixed-mis",
        description=(
            "Simulate and analyze randomized MIS selection among agents with "
            "heterogeneous strength distributions (all logs base 2)."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_profile=True):
        p.add_argument("--graph", required=True, help="generator spec like 'gnp(256,0.03)' or an edge-list file")
        if with_profile:
            p.add_argument("--profile", help="JSON profile file (one distribution per agent)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--eps-l", default="1/4", help="lower decay constant (default 1/4)")
        p.add_argument("--eps-u", default="1/2", help="upper decay constant (default 1/2)")

    p = sub.add_parser("run", help="run the protocol once and emit the trajectory")
    add_common(p)
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--winner", choices=("min", "max"), default="min",
                   help="'max' flips the comparison; fair-bits profiles only")
    p.add_argument("--out", help="write the run JSON here instead of stdout")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bound", help="closed-form round bound for (n, d)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps-l", default="1/4")
    p.add_argument("--eps-u", default="1/2")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("levels", help="per-agent levels on the full active set")
    add_common(p)
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("oracle", help="exact single-round probabilities (<= 8 agents)")
    add_common(p)
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seeds", type=int, help="override the config's seed count")
    p.add_argument("--threads", type=int, default=1,
                   help="seed-parallel execution; results are identical at "
                        "any thread count")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
