"""Experiment harness: convergence sweeps, clique-chain slowdown, floors, cross-checks.

Every experiment is driven by a JSON config, enumerates its seeds
deterministically from a master seed, and emits byte-reproducible CSV/JSON:
re-running the same config produces identical files.  Logs are base 2
everywhere; every report header records that convention.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import rng
from .engine import ProtocolState, run_protocol, run_round, simulate_single_rounds, verify_mis
from .graph import (
    Graph,
    StrengthProfile,
    clique_chain,
    clique_chain_biases,
    complete,
    default_num_cliques,
    gnp,
    parse_graph_spec,
    star,
)
from .oracle import exact_round
from .strength import BiasedBits, BitSchedule, ConditionParams, FairBits, check_conditions
from .theory import check_elimination_floor, level_ceiling, round_bound

SCHEMA_VERSION = "v1"
STATISTICAL_MIN_SEEDS = 30

#: one-sided 99% normal quantile, used for mean upper confidence bounds
Z99 = 2.3263478740408408

EXPERIMENT_KINDS = (
    "convergence_sweep",
    "cliquechain_slowdown",
    "elimination_floor",
    "oracle_crosscheck",
)


class ExperimentError(RuntimeError):
    """An experiment hit a state it must not silently absorb (e.g. a truncated run)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description.

    ``options`` carries the per-kind fields (grid cells, instance lists,
    trial counts); see the builders in this module and the shipped configs.
    """

    experiment: str
    master_seed: int
    seeds: int
    params: ConditionParams
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind: {self.experiment!r}")
        if self.experiment in ("convergence_sweep", "cliquechain_slowdown"):
            if self.seeds < STATISTICAL_MIN_SEEDS:
                raise ValueError(
                    f"statistical experiments need >= {STATISTICAL_MIN_SEEDS} seeds"
                )
        for key in ("graph_file", "profile_file"):
            path = self.options.get(key)
            if path and not os.path.exists(path):
                raise ValueError(f"referenced file does not exist: {path}")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        params = obj.get("params", {})
        return cls(
            experiment=obj["experiment"],
            master_seed=int(obj.get("master_seed", 0)),
            seeds=int(obj.get("seeds", 200)),
            params=ConditionParams(
                params.get("eps_lower", "1/4"), params.get("eps_upper", "1/2")
            ),
            options={
                k: v
                for k, v in obj.items()
                if k not in ("experiment", "master_seed", "seeds", "params")
            },
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def seed_list(master_seed: int, count: int, stream: int = 0) -> list[int]:
    """Deterministic per-run seeds derived from the master seed."""
    return [
        rng.word_at(master_seed, stream, 0, k) & 0x7FFFFFFFFFFFFFFF
        for k in range(count)
    ]


def _pmap(fn, items, threads: int):
    """Order-preserving map, optionally across a thread pool.

    Runs are pure functions of their seed, so results are identical at any
    thread count; aggregation order is fixed by the input order.
    """
    if threads <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, name: str, header: list[str], rows: list[tuple]) -> None:
    """Versioned CSV: schema comment line, header, then sorted-order rows."""
    lines = [f"# schema=mixed-mis/{name}/{SCHEMA_VERSION} log_base=2"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def mean_upper_ci(values, z: float = Z99) -> float:
    """One-sided normal upper confidence bound for the mean."""
    arr = np.asarray(values, dtype=np.float64)
    if len(arr) < 2:
        return float(arr.mean()) if len(arr) else float("nan")
    return float(arr.mean() + z * arr.std(ddof=1) / math.sqrt(len(arr)))


# --- cell construction --------------------------------------------------------

def biased_profile(n: int, master_seed: int, lo=Fraction(1, 4), hi=Fraction(1, 2)) -> StrengthProfile:
    """Per-agent biases drawn uniformly from [lo, hi] on a 2^20 grid, deterministically."""
    words = rng.position_words(rng.stream_keys(master_seed, 7001, 0), np.arange(n, dtype=np.uint64))
    grid = 1 << 20
    ticks = (words.astype(np.uint64) & np.uint64(grid - 1)).astype(np.int64)
    span = hi - lo
    return StrengthProfile(
        [BiasedBits(lo + span * Fraction(int(t), grid)) for t in ticks]
    )


def build_cell(cell: dict, master_seed: int):
    """(graph, profile, label) for one sweep cell."""
    family = cell["family"]
    if family == "gnp_biased":
        n = int(cell["n"])
        avg_deg = float(cell.get("avg_degree", 8))
        g = gnp(n, avg_deg / n, seed=master_seed ^ 0x5EED)
        return g, biased_profile(n, master_seed), f"gnp_biased(n={n})"
    if family == "gnp_fair":
        n = int(cell["n"])
        avg_deg = float(cell.get("avg_degree", 8))
        g = gnp(n, avg_deg / n, seed=master_seed ^ 0x5EED)
        return g, StrengthProfile.uniform(n, FairBits()), f"gnp_fair(n={n})"
    if family == "clique_chain":
        cs = int(cell["clique_size"])
        nc = cell.get("num_cliques")
        g, prof = clique_chain(cs, int(nc) if nc else None)
        return g, prof, f"clique_chain(cs={cs},nc={nc or default_num_cliques(cs)})"
    if family == "complete":
        n = int(cell["n"])
        return complete(n), biased_profile(n, master_seed), f"complete(n={n})"
    raise ValueError(f"unknown cell family: {family!r}")


# --- convergence sweep ----------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    label: str
    family: str
    n: int
    d: int
    num_edges: int
    seeds: int
    mean_rounds: float
    p95_rounds: float
    std_rounds: float
    mean_rounds_ci99: float
    bound_expected_rounds: float
    level_ceiling: float
    l_max_observed: int
    mean_frac_total: float
    mean_frac_active: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    slope: float
    intercept: float
    r_squared: float
    seed_lists: dict

    def bound_ok(self) -> bool:
        return all(r.mean_rounds_ci99 <= r.bound_expected_rounds for r in self.rows)

    def ceiling_ok(self) -> bool:
        return all(r.l_max_observed <= r.level_ceiling for r in self.rows)


def _run_cell(graph, profile, seeds, params, label, threads=1):
    def one(s):
        res = run_protocol(graph, profile, s, params=params)
        if not res.terminated:
            raise ExperimentError(f"run truncated in cell {label} at seed {s}")
        lmax = max(r.l_max for r in res.rounds)
        total_e = graph.num_edges
        if total_e:
            per_total = [
                (r.active_edges_before - r.active_edges_after) / total_e
                for r in res.rounds
            ]
            per_active = [
                (r.active_edges_before - r.active_edges_after) / r.active_edges_before
                for r in res.rounds
                if r.active_edges_before
            ]
            ft = float(np.mean(per_total))
            fa = float(np.mean(per_active)) if per_active else 1.0
        else:
            ft, fa = 0.0, 1.0
        return res.total_rounds, lmax, ft, fa

    out = _pmap(one, seeds, threads)
    rounds = [o[0] for o in out]
    lmax_seen = max(o[1] for o in out)
    frac_total = [o[2] for o in out]
    frac_active = [o[3] for o in out]
    return rounds, lmax_seen, frac_total, frac_active


def convergence_sweep(config: ExperimentConfig) -> SweepResult:
    """Mean/p95 rounds per (n, d) cell against the closed-form bound, plus a
    regression of mean rounds on log2(n) * log2(d)."""
    cells = config.options.get("cells")
    if not cells:
        raise ValueError("convergence_sweep needs a 'cells' list")
    threads = int(config.options.get("threads", 1))
    rows = []
    seed_lists = {}
    for idx, cell in enumerate(sorted(cells, key=lambda c: json.dumps(c, sort_keys=True))):
        graph, profile, label = build_cell(cell, config.master_seed)
        seeds = seed_list(config.master_seed, config.seeds, stream=idx + 1)
        seed_lists[label] = seeds
        rounds, lmax_seen, ft, fa = _run_cell(
            graph, profile, seeds, config.params, label, threads=threads
        )
        d = max(graph.max_degree, 1)
        bound = round_bound(max(graph.n, 2), d, config.params)
        rows.append(
            SweepRow(
                label=label,
                family=cell["family"],
                n=graph.n,
                d=d,
                num_edges=graph.num_edges,
                seeds=len(seeds),
                mean_rounds=float(np.mean(rounds)),
                p95_rounds=float(np.quantile(rounds, 0.95)),
                std_rounds=float(np.std(rounds, ddof=1)),
                mean_rounds_ci99=mean_upper_ci(rounds),
                bound_expected_rounds=bound.expected_rounds,
                level_ceiling=bound.level_ceiling,
                l_max_observed=lmax_seen,
                mean_frac_total=float(np.mean(ft)),
                mean_frac_active=float(np.mean(fa)),
            )
        )
    xs = np.array([math.log2(r.n) * math.log2(max(r.d, 2)) for r in rows])
    ys = np.array([r.mean_rounds for r in rows])
    if len(rows) >= 2 and np.ptp(xs) > 0:
        slope, intercept = np.polyfit(xs, ys, 1)
        pred = slope * xs + intercept
        ss_res = float(((ys - pred) ** 2).sum())
        ss_tot = float(((ys - ys.mean()) ** 2).sum())
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    else:
        slope, intercept, r2 = float("nan"), float("nan"), float("nan")
    return SweepResult(
        rows=tuple(rows),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r2),
        seed_lists=seed_lists,
    )


def sweep_csv_rows(result: SweepResult):
    header = [
        "label", "family", "n", "d", "num_edges", "seeds",
        "mean_rounds", "p95_rounds", "std_rounds", "mean_rounds_ci99",
        "bound_expected_rounds", "level_ceiling", "l_max_observed",
        "mean_frac_total", "mean_frac_active",
    ]
    rows = [
        (
            r.label, r.family, r.n, r.d, r.num_edges, r.seeds,
            r.mean_rounds, r.p95_rounds, r.std_rounds, r.mean_rounds_ci99,
            r.bound_expected_rounds, r.level_ceiling, r.l_max_observed,
            r.mean_frac_total, r.mean_frac_active,
        )
        for r in sorted(result.rows, key=lambda r: r.label)
    ]
    return header, rows


# --- clique-chain slowdown ------------------------------------------------------

@dataclass(frozen=True)
class ChainCellStats:
    clique_size: int
    num_cliques: int
    seeds: int
    mean_rounds: float
    expected_pattern_rounds: float
    mean_frac_total: float
    mean_frac_active: float
    mean_round1_frac_total: float
    containment_pattern_fraction: float
    front_pair_fraction: float
    strict_first_round_fraction: float
    max_nonterminal_frac_ok_fraction: float
    l_max_observed: int
    level_ceiling: float
    mean_clique_death_round: tuple


@dataclass(frozen=True)
class SlowdownReport:
    chain_cells: tuple
    control: dict
    seed_lists: dict
    #: acceptance evaluations are recorded verbatim so report.json carries them
    checks: dict


def _chain_run_detail(graph, profile, spec_cs, spec_nc, seed, params):
    """One chain run with per-round clique bookkeeping."""
    state = ProtocolState.initial(graph.n)
    total_e = graph.num_edges
    frac_total, frac_active, lmaxes = [], [], []
    dead_by_round = []
    mis_cliques_by_round = []
    while state.active_mask().any():
        prev = state
        state, st = run_round(graph, profile, prev, seed, params=params)
        elim = st.active_edges_before - st.active_edges_after
        frac_total.append(elim / total_e)
        frac_active.append(elim / st.active_edges_before if st.active_edges_before else 1.0)
        lmaxes.append(st.l_max)
        act = state.active_mask()
        dead_by_round.append(
            frozenset(
                j for j in range(spec_nc)
                if not act[j * spec_cs:(j + 1) * spec_cs].any()
            )
        )
        new_mis = (state.status == 1) & (prev.status == 0)
        mis_cliques_by_round.append(
            frozenset(int(c) for c in np.unique(np.flatnonzero(new_mis) // spec_cs))
        )
    death_round = []
    for j in range(spec_nc):
        death_round.append(next(r + 1 for r, dead in enumerate(dead_by_round) if j in dead))
    return {
        "rounds": len(frac_total),
        "frac_total": frac_total,
        "frac_active": frac_active,
        "l_max": max(lmaxes) if lmaxes else 0,
        "dead_by_round": dead_by_round,
        "mis_cliques_by_round": mis_cliques_by_round,
        "death_round": death_round,
    }


def _containment_pattern(detail, num_cliques: int) -> bool:
    """Cliques 1..2r all inactive by the end of round r, for the designed phase."""
    dead = detail["dead_by_round"]
    for r in range(num_cliques // 2):
        snapshot = dead[r] if r < len(dead) else dead[-1]
        if not set(range(2 * (r + 1))) <= snapshot:
            return False
    return True


def cliquechain_slowdown(config: ExperimentConfig) -> SlowdownReport:
    """Per-round elimination fractions and deactivation patterns of the chain,
    against a fair-bits G(n, p) control with matched size and edge count."""
    cs = int(config.options.get("clique_size", 256))
    nc_list = config.options.get("num_cliques", [4])
    if isinstance(nc_list, int):
        nc_list = [nc_list]
    custom = config.options.get("custom_biases")
    threads = int(config.options.get("threads", 1))
    cells = []
    seed_lists = {}
    params = config.params
    for idx, nc in enumerate(sorted(int(x) for x in nc_list)):
        graph, profile = clique_chain(cs, nc, biases=custom)
        seeds = seed_list(config.master_seed, config.seeds, stream=100 + idx)
        label = f"clique_chain(cs={cs},nc={nc})"
        seed_lists[label] = seeds
        details = _pmap(
            lambda s: _chain_run_detail(graph, profile, cs, nc, s, params),
            seeds,
            threads,
        )
        n_seeds = len(details)
        bound_cap = 2 / (nc - 1) + 0.1 if nc > 1 else 1.1
        max_ok = sum(
            1 for d in details
            if not d["frac_total"][:-1] or max(d["frac_total"][:-1]) <= bound_cap
        )
        cells.append(
            ChainCellStats(
                clique_size=cs,
                num_cliques=nc,
                seeds=n_seeds,
                mean_rounds=float(np.mean([d["rounds"] for d in details])),
                expected_pattern_rounds=(math.sqrt(math.log2(cs)) + 1) / 2,
                mean_frac_total=float(np.mean([np.mean(d["frac_total"]) for d in details])),
                mean_frac_active=float(np.mean([np.mean(d["frac_active"]) for d in details])),
                mean_round1_frac_total=float(np.mean([d["frac_total"][0] for d in details])),
                containment_pattern_fraction=float(
                    np.mean([_containment_pattern(d, nc) for d in details])
                ),
                front_pair_fraction=float(
                    np.mean([{0, 1} <= d["dead_by_round"][0] for d in details])
                ),
                strict_first_round_fraction=float(
                    np.mean(
                        [
                            0 in d["mis_cliques_by_round"][0]
                            and 1 not in d["mis_cliques_by_round"][0]
                            for d in details
                        ]
                    )
                ),
                max_nonterminal_frac_ok_fraction=max_ok / n_seeds,
                l_max_observed=max(d["l_max"] for d in details),
                level_ceiling=level_ceiling(graph.max_degree, params),
                mean_clique_death_round=tuple(
                    float(np.mean([d["death_round"][j] for d in details]))
                    for j in range(nc)
                ),
            )
        )
    # fair-bits control matched to the first configured chain cell
    control: dict = {}
    if config.options.get("control", True):
        ncs = sorted(int(x) for x in nc_list)
        ref_nc = 4 if 4 in ncs else ncs[0]
        ref_graph, _ = clique_chain(cs, ref_nc, biases=custom)
        n = ref_graph.n
        p = ref_graph.num_edges / (n * (n - 1) / 2)
        cgraph = gnp(n, p, seed=config.master_seed ^ 0xC0117801)
        cprofile = StrengthProfile.uniform(n, FairBits())
        seeds = seed_list(config.master_seed, config.seeds, stream=999)
        seed_lists[f"control_gnp(n={n})"] = seeds
        fts, fas, rounds, lmax_seen = [], [], [], 0
        for s in seeds:
            res = run_protocol(cgraph, cprofile, s, params=params)
            if not res.terminated:
                raise ExperimentError(f"control run truncated at seed {s}")
            rounds.append(res.total_rounds)
            lmax_seen = max(lmax_seen, max(r.l_max for r in res.rounds))
            te = cgraph.num_edges
            fts.append(float(np.mean([
                (r.active_edges_before - r.active_edges_after) / te for r in res.rounds
            ])))
            fas.append(float(np.mean([
                (r.active_edges_before - r.active_edges_after) / r.active_edges_before
                for r in res.rounds if r.active_edges_before
            ])))
        control = {
            "n": n,
            "p": p,
            "num_edges": cgraph.num_edges,
            "matched_num_cliques": ref_nc,
            "mean_rounds": float(np.mean(rounds)),
            "mean_frac_total": float(np.mean(fts)),
            "mean_frac_active": float(np.mean(fas)),
            "l_max_observed": lmax_seen,
            "level_ceiling": level_ceiling(cgraph.max_degree, params),
        }

    checks = _slowdown_checks(cells, control)
    return SlowdownReport(
        chain_cells=tuple(cells),
        control=control,
        seed_lists=seed_lists,
        checks=checks,
    )


def _slowdown_checks(cells, control) -> dict:
    """Acceptance evaluations over the slowdown cells (primary metric: mean
    per-round fraction of total edges, the quantity the slowdown claim is
    stated in).  Desk-scale caveat: collapse of several clique pairs in one
    round is common at these sizes, which lifts per-round fractions; the
    pattern check is therefore the containment form."""
    by_nc = {c.num_cliques: c for c in cells}
    checks: dict = {}
    ref = by_nc.get(4) or cells[0]
    checks["front_pair_pattern_fraction"] = ref.containment_pattern_fraction
    checks["front_pair_pattern_ok"] = ref.containment_pattern_fraction >= 0.90
    if control:
        checks["chain_mean_frac_total"] = ref.mean_frac_total
        checks["control_mean_frac_total"] = control["mean_frac_total"]
        checks["chain_at_most_half_control"] = (
            ref.mean_frac_total <= 0.5 * control["mean_frac_total"]
        )
        checks["chain_strictly_smaller_total"] = (
            ref.mean_frac_total < control["mean_frac_total"]
        )
        checks["chain_strictly_smaller_active"] = (
            ref.mean_frac_active < control["mean_frac_active"]
        )
    if len(cells) >= 2:
        ordered = sorted(cells, key=lambda c: c.num_cliques)
        fractions = [c.mean_frac_total for c in ordered]
        checks["frac_total_by_num_cliques"] = fractions
        checks["monotone_decreasing_frac"] = all(
            a > b for a, b in zip(fractions, fractions[1:])
        )
    return checks


def slowdown_csv_rows(report: SlowdownReport):
    header = [
        "clique_size", "num_cliques", "seeds", "mean_rounds", "expected_pattern_rounds",
        "mean_frac_total", "mean_frac_active", "mean_round1_frac_total",
        "containment_pattern_fraction", "front_pair_fraction",
        "strict_first_round_fraction", "max_nonterminal_frac_ok_fraction",
        "l_max_observed", "level_ceiling", "mean_clique_death_rounds",
    ]
    rows = []
    for c in sorted(report.chain_cells, key=lambda c: (c.clique_size, c.num_cliques)):
        rows.append(
            (
                c.clique_size, c.num_cliques, c.seeds, c.mean_rounds,
                c.expected_pattern_rounds, c.mean_frac_total, c.mean_frac_active,
                c.mean_round1_frac_total, c.containment_pattern_fraction,
                c.front_pair_fraction, c.strict_first_round_fraction,
                c.max_nonterminal_frac_ok_fraction, c.l_max_observed,
                c.level_ceiling,
                "|".join(repr(x) for x in c.mean_clique_death_round),
            )
        )
    if report.control:
        ctl = report.control
        rows.append(
            (
                ctl["n"], 0, "-", ctl["mean_rounds"], "-",
                ctl["mean_frac_total"], ctl["mean_frac_active"], "-",
                "-", "-", "-", "-", ctl["l_max_observed"], ctl["level_ceiling"],
                "control",
            )
        )
    return header, rows


# --- elimination floor ----------------------------------------------------------

def elimination_floor_experiment(config: ExperimentConfig) -> dict:
    """check_elimination_floor over a list of instances; every top-level agent's
    99% lower confidence bound must clear eps_lower/8."""
    instances = config.options.get("instances")
    if not instances:
        raise ValueError("elimination_floor needs an 'instances' list")
    trials = int(config.options.get("trials", 10_000))
    results = []
    for idx, inst in enumerate(instances):
        graph, profile, label = _instance(inst, config.master_seed)
        report = check_elimination_floor(
            graph,
            profile,
            np.ones(graph.n, dtype=bool),
            config.params,
            trials=trials,
            seed=seed_list(config.master_seed, 1, stream=500 + idx)[0],
        )
        results.append(
            {
                "label": label,
                "l_max": report.l_max,
                "floor": report.floor,
                "agents_checked": len(report.rows),
                "min_lower_bound": min((r.lower_bound for r in report.rows), default=1.0),
                "passed": report.passed,
            }
        )
    return {
        "trials": trials,
        "instances": results,
        "passed": all(r["passed"] for r in results),
    }


# --- oracle cross-check -----------------------------------------------------------

def oracle_crosscheck(config: ExperimentConfig) -> dict:
    """Engine Monte Carlo frequencies vs exact oracle probabilities, 3-sigma gate."""
    instances = config.options.get("instances")
    if not instances:
        raise ValueError("oracle_crosscheck needs an 'instances' list")
    trials = int(config.options.get("trials", 100_000))
    results = []
    for idx, inst in enumerate(instances):
        graph, profile, label = _instance(inst, config.master_seed)
        dist = exact_round(graph, profile)
        joins, elims = simulate_single_rounds(
            graph,
            profile,
            np.ones(graph.n, dtype=bool),
            seed=seed_list(config.master_seed, 1, stream=600 + idx)[0],
            trials=trials,
        )
        worst = 0.0
        ok = True
        for agent in range(graph.n):
            for exact_p, count in (
                (dist.join[agent], joins[agent]),
                (dist.eliminated[agent], elims[agent]),
            ):
                p = float(exact_p)
                sigma = math.sqrt(max(p * (1 - p), 1e-12) / trials)
                dev = abs(count / trials - p) / sigma if sigma else 0.0
                worst = max(worst, dev)
                if abs(count / trials - p) > 3 * sigma + float(dist.residual):
                    ok = False
        results.append(
            {
                "label": label,
                "residual_error": dist.residual_error,
                "worst_sigma_deviation": worst,
                "passed": ok and dist.residual_error <= 1e-9,
            }
        )
    return {
        "trials": trials,
        "instances": results,
        "passed": all(r["passed"] for r in results),
    }


def _instance(inst: dict, master_seed: int):
    """(graph, profile, label) from an instance description."""
    graph, builtin = parse_graph_spec(inst["graph"], seed=inst.get("seed", master_seed))
    prof_spec = inst.get("profile")
    if prof_spec is None:
        if builtin is None:
            raise ValueError(f"instance {inst} needs a profile")
        profile = builtin
    elif isinstance(prof_spec, str):
        if prof_spec == "fair":
            profile = StrengthProfile.uniform(graph.n, FairBits())
        elif prof_spec.startswith("biased:"):
            profile = StrengthProfile.uniform(
                graph.n, BiasedBits(Fraction(prof_spec.split(":", 1)[1]))
            )
        elif prof_spec == "random_biased":
            profile = biased_profile(graph.n, master_seed ^ inst.get("seed", 0))
        else:
            raise ValueError(f"unknown profile shorthand: {prof_spec!r}")
    else:
        profile = StrengthProfile.from_spec(prof_spec)
    label = inst.get("label") or (
        f"{inst['graph']}/{prof_spec if isinstance(prof_spec, str) else 'custom'}"
        if prof_spec
        else f"{inst['graph']}/builtin"
    )
    return graph, profile, label


# --- dispatcher -----------------------------------------------------------------

def run_experiment(config: ExperimentConfig, out_dir) -> dict:
    """Run one experiment, write its outputs under ``out_dir``, return the report."""
    os.makedirs(out_dir, exist_ok=True)
    report: dict = {
        "schema": f"mixed-mis/report/{SCHEMA_VERSION}",
        "log_base": 2,
        "experiment": config.experiment,
        "master_seed": config.master_seed,
        "seeds": config.seeds,
        "params": {
            "eps_lower": str(config.params.eps_lower),
            "eps_upper": str(config.params.eps_upper),
        },
    }
    passed = True
    if config.experiment == "convergence_sweep":
        result = convergence_sweep(config)
        header, rows = sweep_csv_rows(result)
        write_csv(os.path.join(out_dir, "sweep.csv"), "sweep", header, rows)
        report["cells"] = [r.label for r in result.rows]
        report["regression"] = {
            "slope": result.slope,
            "intercept": result.intercept,
            "r_squared": result.r_squared,
        }
        report["bound_ok"] = result.bound_ok()
        report["ceiling_ok"] = result.ceiling_ok()
        report["seed_lists"] = {k: v for k, v in sorted(result.seed_lists.items())}
        passed = result.bound_ok() and result.ceiling_ok()
    elif config.experiment == "cliquechain_slowdown":
        result = cliquechain_slowdown(config)
        header, rows = slowdown_csv_rows(result)
        write_csv(os.path.join(out_dir, "slowdown.csv"), "slowdown", header, rows)
        report["control"] = result.control
        report["checks"] = result.checks
        report["seed_lists"] = {k: v for k, v in sorted(result.seed_lists.items())}
        ceiling_ok = all(
            c.l_max_observed <= c.level_ceiling for c in result.chain_cells
        )
        if result.control:
            ceiling_ok = ceiling_ok and (
                result.control["l_max_observed"] <= result.control["level_ceiling"]
            )
        report["ceiling_ok"] = ceiling_ok
        passed = result.checks.get("front_pair_pattern_ok", True) and ceiling_ok
    elif config.experiment == "elimination_floor":
        result = elimination_floor_experiment(config)
        report["floor"] = result
        passed = result["passed"]
    elif config.experiment == "oracle_crosscheck":
        result = oracle_crosscheck(config)
        report["crosscheck"] = result
        passed = result["passed"]
    report["passed"] = passed
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return report
