"""Counter-based random words: every word is a pure function of (seed, agent, round, position).

The generator is a keyed SplitMix64-style mixer applied to a combined counter.
There is no sequential state, so any bit of any agent's value in any round can
be generated independently, in any order, on any thread, with identical
results.  Distinct agents (and distinct rounds / positions) can never collide:
each lane is folded in through an odd multiplier followed by a full mix, and
the finalizer is a bijection on 64-bit words.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_LANE_AGENT = np.uint64(0xD6E8FEB86659FD93)
_LANE_ROUND = np.uint64(0xCA5A826395121157)
_LANE_POS = np.uint64(0x2545F4914F6CDD1D)


def mix64(x):
    """SplitMix64 finalizer, elementwise on uint64 scalars or arrays."""
    with np.errstate(over="ignore"):
        x = x ^ (x >> np.uint64(30))
        x = x * _MIX1
        x = x ^ (x >> np.uint64(27))
        x = x * _MIX2
        return x ^ (x >> np.uint64(31))


def stream_keys(seed: int, agents, round_index: int):
    """64-bit stream key for each agent's value in one round.

    ``agents`` may be a scalar or an integer array; the result matches its
    shape.  Stream keys of distinct agents in the same round are guaranteed
    distinct, so no two agents ever share a bit stream.
    """
    a = np.asarray(agents, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = mix64(np.uint64(seed & _MASK) + _GOLDEN)
        h = mix64(h ^ (a * _LANE_AGENT))
        return mix64(h ^ (np.uint64(round_index & _MASK) * _LANE_ROUND))


def position_words(keys, positions):
    """Uniform uint64 word per (key, position) pair.

    Broadcasts ``keys[..., None]`` against a flat ``positions`` array, so the
    result has shape ``keys.shape + (len(positions),)``.
    """
    k = np.asarray(keys, dtype=np.uint64)
    p = np.asarray(positions, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(k[..., None] ^ (p * _LANE_POS))


def stream_keys_grid(seed: int, agents, rounds):
    """Stream keys for every (round, agent) pair: shape (len(rounds), len(agents))."""
    a = np.asarray(agents, dtype=np.uint64)
    r = np.asarray(rounds, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = mix64(np.uint64(seed & _MASK) + _GOLDEN)
        h = mix64(h ^ (a * _LANE_AGENT))
        return mix64(h[None, :] ^ (r[:, None] * _LANE_ROUND))


def position_word(keys, position: int):
    """Uniform uint64 word at one position for an array of keys."""
    k = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(k ^ (np.uint64(position & _MASK) * _LANE_POS))


def word_at(seed: int, agent: int, round_index: int, position: int) -> int:
    """Scalar path: the uniform word behind bit ``position`` of one value."""
    key = stream_keys(seed, agent, round_index)
    with np.errstate(over="ignore"):
        return int(mix64(key ^ (np.uint64(position & _MASK) * _LANE_POS)))
