"""Undirected simple graphs, deterministic generators, and strength profiles.

Generation is deterministic: the same (kind, seed) always yields the same
graph bytes, because edge coin flips come from the counter-based mixer rather
than a sequential RNG.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rng
from .strength import (
    BiasedBits,
    FairBits,
    StrengthDistribution,
    as_fraction,
    distribution_from_spec,
    distribution_to_spec,
    le_threshold,
)


class InvalidCliqueChainError(ValueError):
    """Raised when a clique-chain bias schedule leaves the allowed range."""


class Graph:
    """Immutable undirected simple graph on agents 0..n-1.

    Neighbor lists are sorted; ``max_degree`` is the true maximum list length.
    Mutating a Graph after construction is unsupported.
    """

    def __init__(self, n: int, edges):
        if n < 1:
            raise ValueError("graph needs at least one agent")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            if (e[:, 0] == e[:, 1]).any():
                raise ValueError("self-loops are not allowed")
            e = np.sort(e, axis=1)
            e = e[np.lexsort((e[:, 1], e[:, 0]))]
            if len(e) > 1 and (np.diff(e, axis=0) == 0).all(axis=1).any():
                raise ValueError("duplicate edges are not allowed")
        self.n = int(n)
        self.edges = e.astype(np.int32)
        both = np.concatenate([self.edges, self.edges[:, ::-1]]) if e.size else np.empty((0, 2), np.int32)
        order = np.lexsort((both[:, 1], both[:, 0]))
        self._indices = np.ascontiguousarray(both[order, 1])
        degrees = np.bincount(both[:, 0], minlength=self.n)
        self._indptr = np.concatenate([[0], np.cumsum(degrees)]).astype(np.int64)
        self.max_degree = int(degrees.max()) if self.n else 0
        self._csr = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr).astype(np.int64)

    def neighbors(self, agent: int) -> np.ndarray:
        """Sorted neighbor ids of ``agent`` (not including the agent itself)."""
        return self._indices[self._indptr[agent]:self._indptr[agent + 1]]

    def adjacency_csr(self):
        """scipy CSR adjacency with int8 ones; built once and cached."""
        if self._csr is None:
            from scipy.sparse import csr_matrix

            data = np.ones(len(self._indices), dtype=np.int8)
            self._csr = csr_matrix(
                (data, self._indices, self._indptr), shape=(self.n, self.n)
            )
        return self._csr

    def to_edge_list_text(self) -> str:
        lines = [f"n {self.n}"]
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list_text(cls, text: str) -> "Graph":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n "):
            raise ValueError("edge-list text must start with a 'n <count>' header")
        n = int(lines[0].split()[1])
        edges = [tuple(map(int, ln.split())) for ln in lines[1:]]
        return cls(n, edges)

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges.shape == other.edges.shape
            and bool((self.edges == other.edges).all())
        )

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges}, max_degree={self.max_degree})"


def active_edge_count(graph: Graph, active) -> int:
    """Number of edges whose two endpoints are both in ``active``."""
    mask = _as_mask(graph.n, active)
    if not graph.num_edges:
        return 0
    e = graph.edges
    return int((mask[e[:, 0]] & mask[e[:, 1]]).sum())


def _as_mask(n: int, active) -> np.ndarray:
    if isinstance(active, np.ndarray) and active.dtype == bool:
        if len(active) != n:
            raise ValueError("active mask length mismatch")
        return active
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter(active, dtype=np.int64) if not isinstance(active, np.ndarray) else active
    if idx.size:
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError("active agent id out of range")
        mask[idx] = True
    return mask


class StrengthProfile:
    """Total assignment of one strength distribution to every agent."""

    def __init__(self, distributions):
        dists = list(distributions)
        if not dists:
            raise ValueError("profile needs at least one agent")
        for d in dists:
            if not isinstance(d, StrengthDistribution):
                raise TypeError(f"not a strength distribution: {d!r}")
        self._dists = dists
        self._cdf_cache: dict[int, np.ndarray] = {}
        self._thresholds = None
        self._groups = None

    @classmethod
    def uniform(cls, n: int, dist: StrengthDistribution) -> "StrengthProfile":
        return cls([dist] * n)

    @property
    def n(self) -> int:
        return len(self._dists)

    def __getitem__(self, agent: int) -> StrengthDistribution:
        return self._dists[agent]

    def __iter__(self):
        return iter(self._dists)

    @property
    def all_bit_generable(self) -> bool:
        return all(d.bit_generable for d in self._dists)

    def cdf_float(self, level: int) -> np.ndarray:
        """Per-agent dyadic CDF at 1/2^level as float64 (cached per level)."""
        if level not in self._cdf_cache:
            gid, reps = self.value_groups()
            per_group = np.array(
                [float(d.cdf_dyadic(level)) for d in reps], dtype=np.float64
            )
            self._cdf_cache[level] = per_group[gid]
        return self._cdf_cache[level]

    def value_groups(self):
        """Group agents sharing one distribution: (group_id per agent, representatives).

        Profiles built from a few distinct distributions (uniform profiles,
        clique chains) compress to a handful of groups, which the level
        computation exploits.
        """
        if self._groups is None:
            reps: list[StrengthDistribution] = []
            index: dict = {}
            gid = np.empty(self.n, dtype=np.int32)
            for i, d in enumerate(self._dists):
                key = index.get(d)
                if key is None:
                    key = index[d] = len(reps)
                    reps.append(d)
                gid[i] = key
            self._groups = (gid, tuple(reps))
        return self._groups

    def bit_thresholds(self) -> "BitThresholds":
        if self._thresholds is None:
            self._thresholds = BitThresholds(self._dists)
        return self._thresholds

    def to_spec(self) -> list[dict]:
        return [distribution_to_spec(d) for d in self._dists]

    @classmethod
    def from_spec(cls, obj) -> "StrengthProfile":
        """Profile from config JSON: a per-agent list, or {"default":..., "n":...}."""
        if isinstance(obj, dict) and "default" in obj:
            return cls.uniform(int(obj["n"]), distribution_from_spec(obj["default"]))
        if isinstance(obj, dict) and "agents" in obj:
            obj = obj["agents"]
        return cls([distribution_from_spec(d) for d in obj])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_spec(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "StrengthProfile":
        with open(path) as fh:
            return cls.from_spec(json.load(fh))


class BitThresholds:
    """Per-agent bit thresholds compiled for the vectorized engine.

    Bit k of agent i is 0 iff its uniform word is <= threshold(i, k) and the
    always-one flag is clear; this matches the scalar lazy-stream path exactly,
    including the degenerate q = 0 and q = 1 biases.
    """

    def __init__(self, dists):
        if any(not d.bit_generable for d in dists):
            raise ValueError("profile contains analysis-only distributions")
        n = len(dists)
        self.le = np.zeros(n, dtype=np.uint64)
        self.always_one = np.zeros(n, dtype=bool)
        self._schedules: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for i, d in enumerate(dists):
            t, one = le_threshold(d.zero_probability(0))
            self.le[i] = t
            self.always_one[i] = one
            biases = getattr(d, "biases", None)
            if biases is not None and len(set(biases)) > 1:
                pairs = [le_threshold(b) for b in biases]
                self._schedules[i] = (
                    np.array([p[0] for p in pairs], dtype=np.uint64),
                    np.array([p[1] for p in pairs], dtype=bool),
                )

    def le_at(self, agents: np.ndarray, position: int):
        """(threshold, always_one) arrays for one bit position of ``agents``."""
        le = self.le[agents]
        one = self.always_one[agents]
        if self._schedules:
            rows = [k for k, a in enumerate(agents) if int(a) in self._schedules]
            if rows:
                le = le.copy()
                one = one.copy()
                for k in rows:
                    ts, ones = self._schedules[int(agents[k])]
                    p = min(position, len(ts) - 1)
                    le[k] = ts[p]
                    one[k] = ones[p]
        return le, one

    def zero_bits(self, words: np.ndarray, agents: np.ndarray, first_position: int) -> np.ndarray:
        """Boolean matrix of zero-bits for ``words`` of shape (len(agents), P)."""
        le = self.le[agents][:, None]
        one = self.always_one[agents][:, None]
        if self._schedules:
            rows = [k for k, a in enumerate(agents) if int(a) in self._schedules]
            if rows:
                le = np.broadcast_to(le, words.shape).copy()
                one = np.broadcast_to(one, words.shape).copy()
                npos = words.shape[1]
                for k in rows:
                    ts, ones = self._schedules[int(agents[k])]
                    pos = np.minimum(
                        np.arange(first_position, first_position + npos), len(ts) - 1
                    )
                    le[k] = ts[pos]
                    one[k] = ones[pos]
        return (words <= le) & ~one


# --- generators ---------------------------------------------------------------

def complete(n: int) -> Graph:
    """Complete graph (a clique) on n agents."""
    if n < 1:
        raise ValueError("need n >= 1")
    iu = np.triu_indices(n, k=1)
    return Graph(n, np.column_stack(iu))


def star(d: int) -> Graph:
    """Agent 0 joined to d leaves (n = d + 1 agents)."""
    if d < 0:
        raise ValueError("need d >= 0")
    return Graph(d + 1, [(0, i) for i in range(1, d + 1)])


def path(n: int) -> Graph:
    """Path 0-1-...-(n-1)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    """Cycle on n agents (n >= 3)."""
    if n < 3:
        raise ValueError("need n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p) with deterministic counter-based edge flips."""
    if n < 1:
        raise ValueError("need n >= 1")
    if not (0.0 <= p <= 1.0):
        raise ValueError("need p in [0, 1]")
    t, always_absent = le_threshold(as_fraction(float(p)))
    if always_absent:
        return Graph(n, [])
    thresh = np.uint64(t)
    chunks = []
    for i in range(n - 1):
        cols = np.arange(i + 1, n, dtype=np.uint64)
        words = rng.position_words(rng.stream_keys(seed, i, 0), cols)
        hit = words <= thresh
        if hit.any():
            js = cols[hit].astype(np.int64)
            chunks.append(np.column_stack([np.full(len(js), i, dtype=np.int64), js]))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), np.int64)
    return Graph(n, edges)


@dataclass(frozen=True)
class CliqueChainSpec:
    """A line of equal-size cliques joined by complete bipartite links.

    ``num_cliques`` defaults to round(sqrt(log2(clique_size))) + 1.  The bias
    schedule starts at 1/2 in the first clique and decreases linearly to
    exactly 1/4 in the last, so agents weaken front to back.
    """

    clique_size: int
    num_cliques: int | None = None

    def __post_init__(self):
        if self.clique_size < 1:
            raise ValueError("clique_size must be >= 1")
        if self.num_cliques is None:
            object.__setattr__(self, "num_cliques", default_num_cliques(self.clique_size))
        if self.num_cliques < 1:
            raise ValueError("num_cliques must be >= 1")

    @property
    def total_agents(self) -> int:
        return self.clique_size * self.num_cliques

    def bias_schedule(self) -> list[Fraction]:
        return clique_chain_biases(self.num_cliques)

    def clique_of(self, agent: int) -> int:
        return agent // self.clique_size

    def clique_members(self, j: int) -> range:
        return range(j * self.clique_size, (j + 1) * self.clique_size)


def default_num_cliques(clique_size: int) -> int:
    """round(sqrt(log2 clique_size)) + 1, with half-up rounding."""
    import math

    if clique_size < 2:
        return 2
    return int(math.sqrt(math.log2(clique_size)) + 0.5) + 1


def clique_chain_biases(num_cliques: int, custom=None) -> list[Fraction]:
    """Bias for clique j (1-based): 1/2 - (j-1) / (4 * (num_cliques - 1)).

    The denominator uses the clique count so the last clique sits at exactly
    1/4 regardless of scale.  Custom schedules (one bias per clique) are
    validated against the same [1/4, 1/2] range.
    """
    if custom is not None:
        biases = [as_fraction(b) for b in custom]
        if len(biases) != num_cliques:
            raise InvalidCliqueChainError(
                f"need {num_cliques} biases, got {len(biases)}"
            )
    elif num_cliques == 1:
        biases = [Fraction(1, 2)]
    else:
        step = Fraction(1, 4 * (num_cliques - 1))
        biases = [Fraction(1, 2) - (j - 1) * step for j in range(1, num_cliques + 1)]
    for b in biases:
        if not (Fraction(1, 4) <= b <= Fraction(1, 2)):
            raise InvalidCliqueChainError(
                f"clique bias {b} outside the allowed range [1/4, 1/2]"
            )
    return biases


def clique_chain(
    clique_size: int,
    num_cliques: int | None = None,
    biases=None,
) -> tuple[Graph, StrengthProfile]:
    """The slowdown construction: cliques in a line, biases decreasing front to back."""
    spec = CliqueChainSpec(clique_size, num_cliques)
    schedule = clique_chain_biases(spec.num_cliques, custom=biases)
    cs, nc = spec.clique_size, spec.num_cliques
    edges = []
    for j in range(nc):
        base = j * cs
        iu = np.triu_indices(cs, k=1)
        edges.append(np.column_stack(iu) + base)
        if j + 1 < nc:
            left = np.repeat(np.arange(base, base + cs), cs)
            right = np.tile(np.arange(base + cs, base + 2 * cs), cs)
            edges.append(np.column_stack([left, right]))
    graph = Graph(spec.total_agents, np.concatenate(edges))
    dists = []
    for j in range(nc):
        dists.extend([BiasedBits(schedule[j])] * cs)
    return graph, StrengthProfile(dists)


_SPEC_RE = re.compile(r"^(\w+)\(([^)]*)\)$")


def parse_graph_spec(spec: str, seed: int = 0):
    """Parse 'complete(8)', 'star(4)', 'gnp(64,0.1)', or 'clique_chain(256,4)'.

    Returns (Graph, StrengthProfile or None); only clique chains carry a
    built-in profile.
    """
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise ValueError(f"cannot parse graph spec: {spec!r}")
    kind, args = m.group(1), [a.strip() for a in m.group(2).split(",") if a.strip()]
    if kind == "complete":
        return complete(int(args[0])), None
    if kind == "star":
        return star(int(args[0])), None
    if kind == "path":
        return path(int(args[0])), None
    if kind == "cycle":
        return cycle(int(args[0])), None
    if kind == "gnp":
        return gnp(int(args[0]), float(Fraction(args[1])), seed), None
    if kind == "clique_chain":
        nc = int(args[1]) if len(args) > 1 else None
        return clique_chain(int(args[0]), nc)
    raise ValueError(f"unknown graph kind: {kind!r}")


def generate(spec: str, seed: int = 0):
    """Graph-and-profile generation from a spec string; see parse_graph_spec."""
    return parse_graph_spec(spec, seed)


def load_graph(path) -> Graph:
    with open(path) as fh:
        return Graph.from_edge_list_text(fh.read())


def save_graph(graph: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(graph.to_edge_list_text())
