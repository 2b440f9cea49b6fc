"""Synchronous execution of the randomized MIS protocol.

Winner rule: an active agent joins the MIS the moment its value is strictly
smaller than every active neighbor's value (min wins; strength is mass near
zero).  Values are compared lexicographically on lazily generated bit
streams, 32 positions at a time, extending only the still-tied pairs, so the
comparison is exact and ties are impossible almost surely.  A bit budget
guards the measure-zero nonterminating comparison.

Every bit is a pure function of (seed, agent, round, position), so a run is
reproducible and agents within a round can be evaluated in any order with
identical results.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .graph import Graph, StrengthProfile, active_edge_count
from .strength import ConditionParams, DEFAULT_PARAMS, FairBits
from .theory import active_level_max, round_bound

ACTIVE = 0
IN_MIS = 1
DEACTIVATED = 2

DEFAULT_BIT_BUDGET = 4096
_CHUNK = 32


class BitBudgetExceededError(RuntimeError):
    """A value comparison stayed tied past the bit budget (measure-zero event)."""


@dataclass
class ProtocolState:
    """Per-agent status plus the round counter; statuses only move away from ACTIVE."""

    status: np.ndarray
    round: int = 0

    @classmethod
    def initial(cls, n: int) -> "ProtocolState":
        return cls(status=np.zeros(n, dtype=np.int8), round=0)

    def active_mask(self) -> np.ndarray:
        return self.status == ACTIVE

    def copy(self) -> "ProtocolState":
        return ProtocolState(status=self.status.copy(), round=self.round)


@dataclass(frozen=True)
class RoundStats:
    round: int
    mis_added: int
    deactivated: int
    active_edges_before: int
    active_edges_after: int
    l_max: int

    def as_dict(self) -> dict:
        return {
            "round": self.round,
            "mis_added": self.mis_added,
            "deactivated": self.deactivated,
            "active_edges_before": self.active_edges_before,
            "active_edges_after": self.active_edges_after,
            "l_max": self.l_max,
        }


@dataclass
class RunResult:
    """Full trajectory of one protocol run."""

    rounds: list
    mis: list
    total_rounds: int
    seed: int
    terminated: bool
    n: int
    winner: str = "min"

    def as_dict(self) -> dict:
        return {
            "schema": "mixed-mis/run/v1",
            "n": self.n,
            "seed": self.seed,
            "winner": self.winner,
            "terminated": self.terminated,
            "total_rounds": self.total_rounds,
            "mis": list(map(int, self.mis)),
            "rounds": [r.as_dict() for r in self.rounds],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=1) + "\n"


def _packed_chunk(thresholds, seed, agents, round_index, chunk):
    """32 bits of each agent's value packed into a uint64 (smaller int = smaller value)."""
    keys = rng.stream_keys(seed, agents, round_index)
    positions = np.arange(chunk * _CHUNK, (chunk + 1) * _CHUNK, dtype=np.uint64)
    words = rng.position_words(keys, positions)
    zero = thresholds.zero_bits(words, agents, chunk * _CHUNK)
    packed = np.zeros(len(agents), dtype=np.uint64)
    one = np.uint64(1)
    for j in range(_CHUNK):
        packed = (packed << one) | (~zero[:, j]).astype(np.uint64)
    return packed


def _edge_orders(thresholds, seed, round_index, eu, ev, agents, n, bit_budget, flip):
    """Per-edge comparison outcome: +1 where value[u] < value[v], -1 otherwise.

    ``agents`` is the set of ids appearing in eu/ev; the first 32-bit chunk is
    generated for all of them, later chunks only for the still-tied few.
    """
    order = np.zeros(len(eu), dtype=np.int8)
    pending = np.arange(len(eu))
    packed = np.zeros(n, dtype=np.uint64)
    for chunk in range(max(1, bit_budget // _CHUNK)):
        if chunk == 0:
            need = agents
        else:
            need = np.unique(np.concatenate([eu[pending], ev[pending]]))
        packed[need] = _packed_chunk(thresholds, seed, need, round_index, chunk)
        pu = packed[eu[pending]]
        pv = packed[ev[pending]]
        lt, gt = (pu > pv, pu < pv) if flip else (pu < pv, pu > pv)
        order[pending[lt]] = 1
        order[pending[gt]] = -1
        pending = pending[~(lt | gt)]
        if not len(pending):
            return order
    raise BitBudgetExceededError(
        f"{len(pending)} comparisons still tied after {bit_budget} bits"
    )


def _check_winner(winner: str, profile: StrengthProfile) -> bool:
    if winner == "min":
        return False
    if winner == "max":
        # the flipped rule is only meaningful where the model is symmetric
        if not all(isinstance(d, FairBits) for d in profile):
            raise ValueError("winner='max' is supported for all-fair-bits profiles only")
        return True
    raise ValueError(f"winner must be 'min' or 'max', got {winner!r}")


def run_round(
    graph: Graph,
    profile: StrengthProfile,
    state: ProtocolState,
    seed: int,
    *,
    params: ConditionParams = DEFAULT_PARAMS,
    bit_budget: int = DEFAULT_BIT_BUDGET,
    winner: str = "min",
) -> tuple[ProtocolState, RoundStats]:
    """One synchronous round; returns the successor state and its statistics."""
    flip = _check_winner(winner, profile)
    if profile.n != graph.n:
        raise ValueError("profile does not cover the graph")
    active = state.active_mask()
    l_max = active_level_max(graph, profile, active, params)
    e = graph.edges
    emask = active[e[:, 0]] & active[e[:, 1]] if len(e) else np.zeros(0, bool)
    eu = e[emask, 0].astype(np.int64)
    ev = e[emask, 1].astype(np.int64)
    edges_before = len(eu)

    beaten = np.zeros(graph.n, dtype=bool)
    if edges_before:
        order = _edge_orders(
            profile.bit_thresholds(),
            seed,
            state.round,
            eu,
            ev,
            np.flatnonzero(active),
            graph.n,
            bit_budget,
            flip,
        )
        beaten[ev[order == 1]] = True
        beaten[eu[order == -1]] = True
    wins = active & ~beaten

    nbr_of_winner = graph.adjacency_csr().dot(wins.astype(np.int8)) > 0
    deact = active & ~wins & nbr_of_winner

    status = state.status.copy()
    status[wins] = IN_MIS
    status[deact] = DEACTIVATED
    new_state = ProtocolState(status=status, round=state.round + 1)
    still = new_state.active_mask()
    edges_after = int((still[eu] & still[ev]).sum()) if edges_before else 0
    stats = RoundStats(
        round=state.round + 1,
        mis_added=int(wins.sum()),
        deactivated=int(deact.sum()),
        active_edges_before=edges_before,
        active_edges_after=edges_after,
        l_max=l_max,
    )
    return new_state, stats


def default_max_rounds(graph: Graph, params: ConditionParams = DEFAULT_PARAMS) -> int:
    """64x the theoretical mean-round bound: non-termination shows up loudly."""
    n = max(graph.n, 2)
    d = max(graph.max_degree, 1)
    return max(64, int(64 * round_bound(n, d, params).expected_rounds))


def run_protocol(
    graph: Graph,
    profile: StrengthProfile,
    seed: int,
    max_rounds: int | None = None,
    *,
    params: ConditionParams = DEFAULT_PARAMS,
    bit_budget: int = DEFAULT_BIT_BUDGET,
    winner: str = "min",
) -> RunResult:
    """Iterate rounds until no agent is active (or the round cap is reached).

    A capped run is returned with ``terminated=False`` rather than raising;
    callers inspect the flag.
    """
    if max_rounds is None:
        max_rounds = default_max_rounds(graph, params)
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    state = ProtocolState.initial(graph.n)
    rounds: list[RoundStats] = []
    while state.active_mask().any() and state.round < max_rounds:
        state, stats = run_round(
            graph,
            profile,
            state,
            seed,
            params=params,
            bit_budget=bit_budget,
            winner=winner,
        )
        rounds.append(stats)
    return RunResult(
        rounds=rounds,
        mis=[int(i) for i in np.flatnonzero(state.status == IN_MIS)],
        total_rounds=state.round,
        seed=seed,
        terminated=not state.active_mask().any(),
        n=graph.n,
        winner=winner,
    )


@dataclass(frozen=True)
class MISVerdict:
    """All violations found when auditing a claimed maximal independent set."""

    independence_violations: tuple
    maximality_violations: tuple

    @property
    def passed(self) -> bool:
        return not self.independence_violations and not self.maximality_violations


def verify_mis(graph: Graph, mis) -> MISVerdict:
    """List every independence violation (edge inside the set) and maximality
    violation (agent with neither itself nor a neighbor in the set)."""
    mask = np.zeros(graph.n, dtype=bool)
    ids = np.asarray(sorted(set(int(i) for i in mis)), dtype=np.int64)
    if ids.size:
        if ids.min() < 0 or ids.max() >= graph.n:
            raise ValueError("MIS member out of range")
        mask[ids] = True
    e = graph.edges
    if len(e):
        inside = mask[e[:, 0]] & mask[e[:, 1]]
        independence = tuple((int(u), int(v)) for u, v in e[inside])
        covered = mask | (graph.adjacency_csr().dot(mask.astype(np.int8)) > 0)
    else:
        independence = ()
        covered = mask.copy()
    maximality = tuple(int(i) for i in np.flatnonzero(~covered))
    return MISVerdict(
        independence_violations=independence,
        maximality_violations=maximality,
    )


def simulate_single_rounds(
    graph: Graph,
    profile: StrengthProfile,
    active,
    seed: int,
    trials: int,
    *,
    winner: str = "min",
    bit_budget: int = DEFAULT_BIT_BUDGET,
    block: int = 16384,
):
    """Monte Carlo over independent first rounds from the same active set.

    Trial t reuses the protocol's bit function with round index t, so results
    are reproducible and order-independent.  Returns per-agent arrays
    (join_counts, elimination_counts) of length graph.n.
    """
    from .graph import _as_mask

    flip = _check_winner(winner, profile)
    mask = _as_mask(graph.n, active)
    agents = np.flatnonzero(mask).astype(np.int64)
    m = len(agents)
    col = {int(a): k for k, a in enumerate(agents)}
    e = graph.edges
    emask = mask[e[:, 0]] & mask[e[:, 1]] if len(e) else np.zeros(0, bool)
    ecols = np.array(
        [(col[int(u)], col[int(v)]) for u, v in e[emask]], dtype=np.int64
    ).reshape(-1, 2)
    nbr_cols = [
        np.array([col[int(j)] for j in graph.neighbors(int(a)) if mask[j]], dtype=np.int64)
        for a in agents
    ]
    thresholds = profile.bit_thresholds()
    join_counts = np.zeros(graph.n, dtype=np.int64)
    elim_counts = np.zeros(graph.n, dtype=np.int64)

    for start in range(0, trials, block):
        rounds_block = np.arange(start, min(start + block, trials), dtype=np.int64)
        t = len(rounds_block)
        packed = _packed_block(thresholds, seed, agents, rounds_block, 0)
        order = np.zeros((t, len(ecols)), dtype=np.int8)
        if len(ecols):
            pending_rows = np.arange(t)
            chunk = 0
            while True:
                pu = packed[:, ecols[:, 0]]
                pv = packed[:, ecols[:, 1]]
                lt, gt = (pu > pv, pu < pv) if flip else (pu < pv, pu > pv)
                sub = order[pending_rows]
                sub[lt & (sub == 0)] = 1
                sub[gt & (sub == 0)] = -1
                order[pending_rows] = sub
                tied = (order[pending_rows] == 0).any(axis=1)
                pending_rows = pending_rows[tied]
                if not len(pending_rows):
                    break
                chunk += 1
                if chunk * _CHUNK >= bit_budget:
                    raise BitBudgetExceededError(
                        f"{len(pending_rows)} trials still tied after {bit_budget} bits"
                    )
                packed = _packed_block(
                    thresholds, seed, agents, rounds_block[pending_rows], chunk
                )
        # order +1 means u smaller: v loses that edge; -1 means u loses
        wins = np.ones((t, m), dtype=bool)
        for k in range(len(ecols)):
            cu, cv = ecols[k]
            wins[:, cv] &= order[:, k] != 1
            wins[:, cu] &= order[:, k] != -1
        for k, a in enumerate(agents):
            joins = wins[:, k]
            join_counts[a] += int(joins.sum())
            if len(nbr_cols[k]):
                elim = joins | wins[:, nbr_cols[k]].any(axis=1)
            else:
                elim = joins
            elim_counts[a] += int(elim.sum())
    return join_counts, elim_counts


def _packed_block(thresholds, seed, agents, rounds_block, chunk):
    """Packed 32-bit prefixes for a block of trials: shape (len(rounds), len(agents))."""
    keys = rng.stream_keys_grid(seed, agents, rounds_block)
    packed = np.zeros(keys.shape, dtype=np.uint64)
    one = np.uint64(1)
    for j in range(_CHUNK):
        position = chunk * _CHUNK + j
        words = rng.position_word(keys, position)
        le, always_one = thresholds.le_at(agents, position)
        zero = (words <= le) & ~always_one
        packed = (packed << one) | (~zero).astype(np.uint64)
    return packed
