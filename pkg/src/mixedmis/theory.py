"""Analytical quantities for the mixed-strength protocol and checks against runs.

Logs are base 2 throughout, matching the dyadic structure of the strength
model; every report records that convention.

The central object is the per-agent *level*: the largest integer l such that
the total CDF of the agent's active closed neighborhood at 1/2^l is still at
least eps_lower/2.  Levels are recomputed from the surviving active set each
round, and their maximum controls both the round bound and the per-round
elimination floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import Graph, StrengthProfile, _as_mask
from .strength import ConditionParams

LOG_BASE = 2


class LevelSearchError(RuntimeError):
    """Internal error: a level search ran past twice the theoretical ceiling.

    Reaching this depth means some distribution violates the decay conditions
    the search relies on (the ceiling would otherwise hold).
    """


def neighborhood_total_cdf(
    graph: Graph,
    profile: StrengthProfile,
    active,
    agent: int,
    level: int,
) -> Fraction:
    """Exact sum of dyadic CDFs over the agent's active closed neighborhood.

    The neighborhood includes the agent itself; inactive neighbors do not
    contribute.
    """
    mask = _as_mask(graph.n, active)
    if not mask[agent]:
        raise ValueError(f"agent {agent} is not active")
    total = profile[agent].cdf_dyadic(level)
    for j in graph.neighbors(agent):
        if mask[j]:
            total += profile[int(j)].cdf_dyadic(level)
    return total


def level_ceiling(d: int, params: ConditionParams) -> float:
    """log2(2d / eps_lower) / log2(1 / eps_upper); the nominal l_max ceiling."""
    if d < 1:
        raise ValueError("need d >= 1")
    num = math.log2(2 * d / float(params.eps_lower))
    den = math.log2(1 / float(params.eps_upper))
    return num / den


def level_ceiling_inclusive(d: int, params: ConditionParams) -> float:
    """Ceiling counting closed neighborhoods (d + 1 members including self).

    Always valid: eps_lower/2 <= t_i <= (d+1) * eps_upper^l forces
    l <= log2(2(d+1)/eps_lower) / log2(1/eps_upper).  The nominal ceiling with
    d alone can be pinched on exact dyadic boundaries (a clique of 2^k agents
    at bias eps_upper), so internal guards use this form.
    """
    num = math.log2(2 * (d + 1) / float(params.eps_lower))
    den = math.log2(1 / float(params.eps_upper))
    return num / den


def _search_guard(max_degree: int, params: ConditionParams) -> int:
    return max(8, int(math.ceil(2 * level_ceiling_inclusive(max(max_degree, 1), params))))


@dataclass(frozen=True)
class LevelReport:
    """Per-agent levels over a given active set."""

    levels: dict
    l_max: int
    x_max: Fraction
    threshold: Fraction
    agents_at_max: tuple

    def level(self, agent: int) -> int:
        return self.levels[agent]


def compute_levels(
    graph: Graph,
    profile: StrengthProfile,
    active,
    params: ConditionParams,
) -> LevelReport:
    """Exact per-agent levels: max{l : total neighborhood CDF at 1/2^l >= eps_lower/2}.

    Uses exact rational arithmetic; intended for analysis-scale instances.
    Simulation uses the float fast path (active_level_max), which agrees
    wherever sums stay within float precision.
    """
    mask = _as_mask(graph.n, active)
    agents = np.flatnonzero(mask)
    thr = params.level_threshold
    guard = _search_guard(graph.max_degree, params)
    levels = {}
    for i in agents:
        i = int(i)
        level = 0
        while True:
            if neighborhood_total_cdf(graph, profile, mask, i, level + 1) < thr:
                break
            level += 1
            if level > guard:
                raise LevelSearchError(
                    f"level search for agent {i} passed {guard}; "
                    "a distribution violates the decay conditions"
                )
        levels[i] = level
    if levels:
        l_max = max(levels.values())
        at_max = tuple(sorted(i for i, l in levels.items() if l == l_max))
    else:
        l_max = 0
        at_max = ()
    return LevelReport(
        levels=levels,
        l_max=l_max,
        x_max=Fraction(1, 2**l_max),
        threshold=thr,
        agents_at_max=at_max,
    )


_MAX_GROUPED = 16


def active_level_max(
    graph: Graph,
    profile: StrengthProfile,
    active_mask: np.ndarray,
    params: ConditionParams,
) -> int:
    """l_max over the active set (float fast path).

    Profiles with few distinct distributions take one adjacency matvec per
    distinct value (active closed-neighborhood counts per group), after which
    every level is a dense vector sum; other profiles fall back to one matvec
    per level.
    """
    if not active_mask.any():
        return 0
    thr = float(params.level_threshold)
    guard = _search_guard(graph.max_degree, params)
    adj = graph.adjacency_csr()
    gid, reps = profile.value_groups()
    grouped = len(reps) <= _MAX_GROUPED
    if grouped:
        counts = []
        for g in range(len(reps)):
            ind = (active_mask & (gid == g)).astype(np.float64)
            counts.append(ind + adj.dot(ind))
        active_idx = np.flatnonzero(active_mask)
        counts = np.stack([c[active_idx] for c in counts])

    def total_at(level: int) -> np.ndarray:
        if grouped:
            vals = np.array([float(d.cdf_dyadic(level)) for d in reps])
            return vals @ counts
        c = profile.cdf_float(level) * active_mask
        return (c + adj.dot(c))[active_mask]

    undecided = np.ones(int(active_mask.sum()), dtype=bool)
    l_max = 0
    level = 0
    while True:
        t = total_at(level + 1)
        undecided = undecided & (t >= thr)
        if not undecided.any():
            return l_max
        level += 1
        l_max = level
        if level > guard:
            raise LevelSearchError(
                f"level search passed {guard}; "
                "a distribution violates the decay conditions"
            )


@dataclass(frozen=True)
class BoundReport:
    """Closed-form quantities for a graph scale (n, d) and decay constants.

    expected_rounds: 8 log2(n) log2(2d/eps_lower) / (eps_lower log2(1/eps_upper)),
    the mean-round upper bound.  level_ceiling is the nominal l_max ceiling.
    asymptotic_form evaluates log2(n) log2(d) / (eps_lower (1 - eps_upper))
    with no hidden constant; elimination_floor is eps_lower/8.
    """

    n: int
    d: int
    params: ConditionParams
    expected_rounds: float
    level_ceiling: float
    asymptotic_form: float
    elimination_floor: Fraction
    log_base: int = field(default=LOG_BASE)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "eps_lower": str(self.params.eps_lower),
            "eps_upper": str(self.params.eps_upper),
            "expected_rounds": self.expected_rounds,
            "level_ceiling": self.level_ceiling,
            "asymptotic_form": self.asymptotic_form,
            "elimination_floor": float(self.elimination_floor),
            "log_base": self.log_base,
        }


def round_bound(n: int, d: int, params: ConditionParams) -> BoundReport:
    """Evaluate the round bound and its companion quantities (logs base 2)."""
    if n < 2:
        raise ValueError("need n >= 2")
    if d < 1:
        raise ValueError("need d >= 1")
    el = float(params.eps_lower)
    eu = float(params.eps_upper)
    expected = 8 * math.log2(n) * math.log2(2 * d / el) / (el * math.log2(1 / eu))
    asymptotic = math.log2(n) * math.log2(d) / (el * (1 - eu))
    return BoundReport(
        n=n,
        d=d,
        params=params,
        expected_rounds=expected,
        level_ceiling=level_ceiling(d, params),
        asymptotic_form=asymptotic,
        elimination_floor=params.eps_lower / 8,
    )


def wilson_lower_bound(successes: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided Wilson score lower bound for a binomial proportion."""
    if trials <= 0:
        raise ValueError("need trials >= 1")
    from scipy.stats import norm

    z = float(norm.ppf(confidence))
    phat = successes / trials
    denom = 1 + z * z / trials
    center = phat + z * z / (2 * trials)
    spread = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return max(0.0, (center - spread) / denom)


@dataclass(frozen=True)
class EliminationFloorRow:
    agent: int
    level: int
    trials: int
    eliminations: int
    frequency: float
    lower_bound: float


@dataclass(frozen=True)
class EliminationFloorReport:
    """Empirical per-round elimination frequencies for the top-level agents.

    Every agent at the maximum level is run through independent single rounds;
    its Wilson 99% lower confidence bound is compared against the
    eps_lower/8 floor.  Agents whose lower bound falls below the floor are
    flagged.
    """

    rows: tuple
    floor: float
    l_max: int
    trials: int
    confidence: float
    checked_depth_note: str = "levels computed on the given active set"

    @property
    def flagged(self):
        return tuple(r for r in self.rows if r.lower_bound < self.floor)

    @property
    def passed(self) -> bool:
        return not self.flagged


def check_elimination_floor(
    graph: Graph,
    profile: StrengthProfile,
    active,
    params: ConditionParams,
    trials: int,
    seed: int,
    confidence: float = 0.99,
) -> EliminationFloorReport:
    """Monte Carlo check that top-level agents are eliminated often enough."""
    if trials < 1000:
        raise ValueError("need trials >= 1000 for a meaningful confidence bound")
    from .engine import simulate_single_rounds

    mask = _as_mask(graph.n, active)
    floor = float(params.eps_lower / 8)
    if not mask.any():
        return EliminationFloorReport(
            rows=(), floor=floor, l_max=0, trials=trials, confidence=confidence
        )
    report = compute_levels(graph, profile, mask, params)
    _, elim_counts = simulate_single_rounds(graph, profile, mask, seed, trials)
    rows = []
    for agent in report.agents_at_max:
        kills = int(elim_counts[agent])
        rows.append(
            EliminationFloorRow(
                agent=agent,
                level=report.levels[agent],
                trials=trials,
                eliminations=kills,
                frequency=kills / trials,
                lower_bound=wilson_lower_bound(kills, trials, confidence),
            )
        )
    return EliminationFloorReport(
        rows=tuple(rows),
        floor=floor,
        l_max=report.l_max,
        trials=trials,
        confidence=confidence,
    )
