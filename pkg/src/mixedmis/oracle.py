"""Exact single-round event probabilities on tiny instances.

Enumerates joint bit outcomes position by position.  Agents whose prefixes
agree so far form tie groups; a pair's order is fixed the first time their
bits differ (the agent drawing 0 is smaller).  Only comparisons along edges
of the active subgraph matter, so tie groups split into induced connected
components that resolve independently; the still-tied probability mass
shrinks geometrically with depth, and whatever mass survives the depth cap is
reported as ``residual_error``.

All arithmetic is exact rational; reported event probabilities are exact
lower bounds within ``residual_error`` of the true values.  Two component
shapes get closed recursions instead of joint enumeration: two-agent
components (plain pairwise bit race) and star components whose leaves share
one distribution (exchangeable race against the center).  Both agree with
the general enumeration exactly; the test suite cross-validates them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb

from .graph import Graph, StrengthProfile
from .strength import UnsupportedSamplingError

MAX_ACTIVE_AGENTS = 8
DEFAULT_DEPTH_CAP = 64

_ZERO = Fraction(0)
_ONE = Fraction(1)


class TooManyActiveAgentsError(ValueError):
    """The oracle enumerates joint outcomes and is capped at 8 active agents."""


@dataclass(frozen=True)
class ComponentStats:
    """Resolved-mass marginals for one connected component of tied agents."""

    join: dict
    eliminated: dict
    all_leave: Fraction
    residual: Fraction


@dataclass(frozen=True)
class ExactRoundDistribution:
    """Exact per-agent probabilities for one protocol round.

    ``join`` is the probability of entering the MIS this round; ``eliminated``
    the probability of leaving the active set (joining, or having a neighbor
    join).  ``termination`` is the probability that no active agent survives
    the round.  All values are Fractions accumulated over resolved outcomes,
    so each reported probability is exact within ``[p, p + residual]``.
    """

    agents: tuple
    join: dict
    eliminated: dict
    any_join: Fraction
    termination: Fraction
    residual: Fraction
    depth_cap: int

    @property
    def residual_error(self) -> float:
        return float(self.residual)

    def join_probability(self, agent: int) -> float:
        return float(self.join[agent])

    def elimination_probability(self, agent: int) -> float:
        return float(self.eliminated[agent])


def exact_round(
    graph: Graph,
    profile: StrengthProfile,
    active=None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> ExactRoundDistribution:
    """Exact distribution of a single round on <= 8 active agents."""
    if depth_cap < 1:
        raise ValueError("depth_cap must be >= 1")
    agents = sorted(int(a) for a in (range(graph.n) if active is None else set(active)))
    if len(agents) > MAX_ACTIVE_AGENTS:
        raise TooManyActiveAgentsError(
            f"oracle supports at most {MAX_ACTIVE_AGENTS} active agents, "
            f"got {len(agents)}"
        )
    active_set = set(agents)
    for i in agents:
        if not profile[i].bit_generable:
            raise UnsupportedSamplingError(
                f"agent {i} uses an analysis-only distribution"
            )
    adj = {
        i: frozenset(int(j) for j in graph.neighbors(i) if int(j) in active_set)
        for i in agents
    }
    solver = _ComponentSolver(profile, adj, depth_cap)

    isolated = [i for i in agents if not adj[i]]
    components = _induced_components(adj, [i for i in agents if adj[i]])

    join = {i: _ZERO for i in agents}
    elim = {i: _ZERO for i in agents}
    termination = _ONE
    residual_keep = _ONE  # probability that every component fully resolved
    for comp in components:
        stats = solver.solve(comp)
        join.update(stats.join)
        elim.update(stats.eliminated)
        termination *= stats.all_leave
        residual_keep *= _ONE - stats.residual
    residual = _ONE - residual_keep

    for i in isolated:
        join[i] = _ONE
        elim[i] = _ONE

    if agents:
        # every fully resolved component has a winner (its minimum), so the
        # no-join mass is bounded by the residual
        any_join = _ONE if isolated or not components else _ONE - residual
    else:
        any_join = _ZERO
    return ExactRoundDistribution(
        agents=tuple(agents),
        join=join,
        eliminated=elim,
        any_join=any_join,
        termination=termination,
        residual=residual,
        depth_cap=depth_cap,
    )


def _induced_components(adj, members):
    """Connected components of the active subgraph induced on ``members``."""
    members = set(members)
    comps = []
    while members:
        start = members.pop()
        comp = {start}
        frontier = [start]
        while frontier:
            a = frontier.pop()
            for b in adj[a] & members:
                members.discard(b)
                comp.add(b)
                frontier.append(b)
        comps.append(frozenset(comp))
    return comps


class _ComponentSolver:
    """Per-component resolution; exact Fractions throughout."""

    def __init__(self, profile, adj, depth_cap):
        self.adj = adj
        self.depth_cap = depth_cap
        self.zero = {i: profile[i].zero_probability for i in adj}
        self.dist = {i: profile[i] for i in adj}
        self._memo: dict = {}

    def solve(self, comp: frozenset) -> ComponentStats:
        members = sorted(comp)
        if len(members) == 2:
            return self._pair_stats(*members)
        center = self._star_center(comp)
        if center is not None:
            return self._star_stats(comp, center)
        return self._enumerate_stats(comp)

    # --- shape detection ------------------------------------------------

    def _star_center(self, comp):
        """Center agent if the component is a star with identically
        distributed leaves, else None."""
        members = sorted(comp)
        inner = {i: self.adj[i] & comp for i in members}
        centers = [i for i in members if len(inner[i]) == len(members) - 1]
        if len(centers) != 1:
            return None
        center = centers[0]
        leaves = [i for i in members if i != center]
        if any(len(inner[i]) != 1 for i in leaves):
            return None
        if len({self.dist[i] for i in leaves}) != 1:
            return None
        return center

    # --- 2-agent components ----------------------------------------------

    def _pair_below(self, a, b):
        """P(value(a) < value(b)) over resolved mass, and the tie residual."""
        za, zb = self.zero[a], self.zero[b]
        below = _ZERO
        tie_mass = _ONE
        for pos in range(self.depth_cap):
            qa, qb = za(pos), zb(pos)
            below += tie_mass * qa * (1 - qb)
            tie_mass *= qa * qb + (1 - qa) * (1 - qb)
        return below, tie_mass

    def _pair_stats(self, a, b):
        below_a, tie = self._pair_below(a, b)
        below_b, _ = self._pair_below(b, a)
        return ComponentStats(
            join={a: below_a, b: below_b},
            eliminated={a: below_a + below_b, b: below_a + below_b},
            all_leave=below_a + below_b,
            residual=tie,
        )

    # --- star components with exchangeable leaves --------------------------

    def _star_stats(self, comp, center):
        leaves = sorted(comp - {center})
        k = len(leaves)
        zc = self.zero[center]
        zl = self.zero[leaves[0]]
        cap = self.depth_cap

        @lru_cache(maxsize=None)
        def center_wins(pos, tied):
            """P(center ends below all currently tied leaves)."""
            if tied == 0:
                return _ONE
            if pos >= cap:
                return _ZERO
            qc, ql = zc(pos), zl(pos)
            total = _ZERO
            # center draws 0: leaves drawing 1 resolve above it
            for j in range(tied + 1):
                w = comb(tied, j) * ql**j * (1 - ql) ** (tied - j)
                total += qc * w * center_wins(pos + 1, j)
            # center draws 1: any 0-leaf would undercut it
            total += (1 - qc) * (1 - ql) ** tied * center_wins(pos + 1, tied)
            return total

        @lru_cache(maxsize=None)
        def center_unresolved(pos, tied):
            """Mass where center-vs-all is still undecided at the cap."""
            if tied == 0:
                return _ZERO
            if pos >= cap:
                return _ONE
            qc, ql = zc(pos), zl(pos)
            total = _ZERO
            for j in range(1, tied + 1):
                w = comb(tied, j) * ql**j * (1 - ql) ** (tied - j)
                total += qc * w * center_unresolved(pos + 1, j)
            total += (1 - qc) * (1 - ql) ** tied * center_unresolved(pos + 1, tied)
            return total

        @lru_cache(maxsize=None)
        def any_unresolved(pos, tied):
            """Mass where some center-leaf pair is still tied at the cap."""
            if tied == 0:
                return _ZERO
            if pos >= cap:
                return _ONE
            qc, ql = zc(pos), zl(pos)
            total = _ZERO
            for j in range(tied + 1):
                w = comb(tied, j) * ql**j * (1 - ql) ** (tied - j)
                total += qc * w * any_unresolved(pos + 1, j)
                total += (1 - qc) * w * any_unresolved(pos + 1, tied - j)
            return total

        @lru_cache(maxsize=None)
        def all_below(pos, tied):
            """P(every currently tied leaf ends below the center)."""
            if tied == 0:
                return _ONE
            if pos >= cap:
                return _ZERO
            qc, ql = zc(pos), zl(pos)
            # center 0: a 1-leaf would land above, so all must stay tied
            total = qc * ql**tied * all_below(pos + 1, tied)
            for j in range(tied + 1):
                w = comb(tied, j) * ql**j * (1 - ql) ** (tied - j)
                total += (1 - qc) * w * all_below(pos + 1, tied - j)
            return total

        below, _ = self._pair_below(leaves[0], center)
        wins = center_wins(0, k)
        # nobody survives iff the center wins, or every leaf undercuts it
        # (leaves above a beaten center keep competing next round)
        stats = ComponentStats(
            join={center: wins, **{l: below for l in leaves}},
            eliminated={
                center: _ONE - center_unresolved(0, k),
                **{l: below + wins for l in leaves},
            },
            all_leave=wins + all_below(0, k),
            residual=any_unresolved(0, k),
        )
        center_wins.cache_clear()
        center_unresolved.cache_clear()
        any_unresolved.cache_clear()
        all_below.cache_clear()
        return stats

    # --- general components: joint prefix enumeration ----------------------

    def _resolve(self, component: frozenset, pos: int):
        """Distribution over direction sets for edges inside ``component``.

        Returns (outcomes, residual): outcomes maps a frozenset of ordered
        pairs (a, b), meaning value(a) < value(b), to its probability and
        covers every edge inside the component; unresolved mass at the depth
        cap goes to residual.
        """
        if pos >= self.depth_cap:
            return {}, _ONE
        key = (component, pos)
        if key in self._memo:
            return self._memo[key]
        members = sorted(component)
        outcomes: dict = {}
        residual = _ZERO
        for bits in product((0, 1), repeat=len(members)):
            prob = _ONE
            for a, b in zip(members, bits):
                z = self.zero[a](pos)
                prob *= z if b == 0 else 1 - z
            if prob == 0:
                continue
            zeros = frozenset(a for a, b in zip(members, bits) if b == 0)
            ones = component - zeros
            fixed = frozenset(
                (a, b) for a in zeros for b in ones if b in self.adj[a]
            )
            combo = {fixed: prob}
            resolved_factor = _ONE
            for sub in _induced_components(self.adj, zeros) + _induced_components(
                self.adj, ones
            ):
                if len(sub) < 2:
                    continue
                sub_out, sub_res = self._resolve(sub, pos + 1)
                resolved_factor *= _ONE - sub_res
                combo = {
                    key0 | sub_key: p0 * sp
                    for key0, p0 in combo.items()
                    for sub_key, sp in sub_out.items()
                }
            for dirs, p in combo.items():
                outcomes[dirs] = outcomes.get(dirs, _ZERO) + p
            residual += prob * (_ONE - resolved_factor)
        self._memo[key] = (outcomes, residual)
        return self._memo[key]

    def _enumerate_stats(self, comp: frozenset) -> ComponentStats:
        outcomes, residual = self._resolve(comp, 0)
        members = sorted(comp)
        join = {i: _ZERO for i in members}
        elim = {i: _ZERO for i in members}
        all_leave = _ZERO
        for dirs, p in outcomes.items():
            winners = {
                i
                for i in members
                if all((i, j) in dirs for j in self.adj[i] & comp)
            }
            left = {i for i in members if i in winners or (self.adj[i] & winners)}
            for i in winners:
                join[i] += p
            for i in left:
                elim[i] += p
            if len(left) == len(members):
                all_leave += p
        return ComponentStats(
            join=join, eliminated=elim, all_leave=all_leave, residual=residual
        )
