"""Shared instance lists: tiny cross-check instances and elimination-floor instances.

These are plain config dicts so the test suite and the shipped experiment
configs describe the same instances.
"""

import pytest


def crosscheck_instances():
    """12 tiny instances (<= 6 agents) with mixed biases."""
    fair = {"kind": "fair_bits"}
    q = lambda v: {"kind": "biased_bits", "q": v}
    sched = {"kind": "bit_schedule", "biases": ["1/2", "1/3", "1/4"]}
    return [
        {"label": "edge_fair", "graph": "path(2)", "profile": [fair, fair]},
        {"label": "edge_mixed", "graph": "path(2)", "profile": [q("1/4"), fair]},
        {"label": "path3_mixed", "graph": "path(3)", "profile": [fair, q("1/3"), fair]},
        {"label": "path5_fair", "graph": "path(5)", "profile": [fair] * 5},
        {"label": "triangle_fair", "graph": "complete(3)", "profile": [fair] * 3},
        {
            "label": "triangle_mixed",
            "graph": "complete(3)",
            "profile": [q("1/2"), q("1/3"), q("1/4")],
        },
        {"label": "star3_weakleaves", "graph": "star(3)", "profile": [fair] + [q("1/4")] * 3},
        {"label": "star4_weakcenter", "graph": "star(4)", "profile": [q("1/4")] + [fair] * 4},
        {"label": "complete4_weak", "graph": "complete(4)", "profile": [q("1/4")] * 4},
        {
            "label": "cycle4_alternating",
            "graph": "cycle(4)",
            "profile": [q("1/2"), q("1/4"), q("1/2"), q("1/4")],
        },
        {
            "label": "gnp6_mixed",
            "graph": "gnp(6,0.5)",
            "seed": 20,
            "profile": [fair, q("1/4"), q("1/3"), sched, fair, q("2/5")],
        },
        {"label": "path4_scheduled", "graph": "path(4)", "profile": [sched, fair, sched, q("1/4")]},
    ]


def floor_instances():
    """20 instances for the per-round elimination-floor check (n <= 64).

    All biases lie in [1/4, 1/2] so the default decay constants apply.
    """
    fair = {"kind": "fair_bits"}
    q = lambda v: {"kind": "biased_bits", "q": v}
    half_sched = {"kind": "bit_schedule", "biases": ["1/2", "3/8", "1/4"]}
    paths = [
        {"label": f"path{n}_fair", "graph": f"path({n})", "profile": "fair"}
        for n in (3, 5, 8, 16, 32)
    ]
    stars = [
        {"label": "star4_fair", "graph": "star(4)", "profile": "fair"},
        {"label": "star7_weak", "graph": "star(7)", "profile": "biased:1/4"},
        {"label": "star9_mixed", "graph": "star(9)", "profile": [fair] + [q("1/4"), q("3/8"), q("1/2")] * 3},
        {"label": "star15_fair", "graph": "star(15)", "profile": "fair"},
    ]
    chains = [
        {"label": "chain4x2", "graph": "clique_chain(4,2)"},
        {"label": "chain4x3", "graph": "clique_chain(4,3)"},
        {"label": "chain8x3", "graph": "clique_chain(8,3)"},
        {"label": "chain16x3", "graph": "clique_chain(16,3)"},
        {"label": "chain16x4", "graph": "clique_chain(16,4)"},
    ]
    gnps = [
        {"label": "gnp16", "graph": "gnp(16,0.25)", "seed": 3, "profile": "random_biased"},
        {"label": "gnp24", "graph": "gnp(24,0.2)", "seed": 4, "profile": "fair"},
        {"label": "gnp32", "graph": "gnp(32,0.15)", "seed": 5, "profile": "random_biased"},
        {"label": "gnp48", "graph": "gnp(48,0.1)", "seed": 6, "profile": "biased:3/8"},
        {"label": "gnp64", "graph": "gnp(64,0.125)", "seed": 7, "profile": "random_biased"},
        {"label": "gnp64_sched", "graph": "gnp(64,0.0625)", "seed": 8, "profile": [half_sched] * 64},
    ]
    return paths + stars + chains + gnps


@pytest.fixture(scope="session")
def tiny_instances():
    return crosscheck_instances()


@pytest.fixture(scope="session")
def elimination_instances():
    return floor_instances()
