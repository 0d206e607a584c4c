"""Built-in graphs and scenario presets.

G25_STANDIN is NOT the 25-node network of the published experiments,
whose adjacency was never printed. It is a documented substitute with the
same size and the same "central hub" role for node x1: a 24-node ring
x2..x25, a hub x1 wired to every fourth ring node, and two long-range
chords. Every quantity that depends on the adjacency (lambda_a, epsilon0,
the observed blow-up time) is a property of this stand-in only.
"""

from __future__ import annotations

from .graph import Graph

G25_RING = [f"x{i}" for i in range(2, 26)]
G25_HUB_LINKS = ["x2", "x6", "x10", "x14", "x18", "x22"]
G25_CHORDS = [("x3", "x15"), ("x9", "x21")]


def g25_standin() -> Graph:
    nodes = ["x1", *G25_RING]
    edges = [(G25_RING[i], G25_RING[(i + 1) % 24], 1.0) for i in range(24)]
    edges += [("x1", y, 1.0) for y in G25_HUB_LINKS]
    edges += [(x, y, 1.0) for x, y in G25_CHORDS]
    return Graph.from_edges(nodes, [1.0] * 25, edges)


GRAPH_PRESETS = {"g25-standin": g25_standin}


def hub_spike(g: Graph, hub: float, rest: float) -> list[float]:
    """``hub`` at the first node in file order, ``rest`` everywhere else."""
    return [hub] + [rest] * (g.n - 1)


# Problem-file dictionaries for the two network experiments. Topology-free
# numbers (p, a pattern, u0 pattern) follow the published setup.
G25_DECAY = {
    "graph": {"preset": "g25-standin"},
    "p": 2.0,
    "a": {"hub-spike": {"hub": 0.0, "rest": 2.0}},
    "u0": {"preset": "hub-spike", "hub": 0.03, "rest": 0.001},
    "ubar": 0.0,
    "integrator": {"t_horizon": 20.0, "conv_tol": 1e-9, "sample_interval": 0.05},
}

G25_BLOWUP = {
    "graph": {"preset": "g25-standin"},
    "p": 3.0,
    "a": {"hub-spike": {"hub": 0.0, "rest": 2.0}},
    "u0": {"preset": "hub-spike", "hub": 0.5, "rest": 1.5},
    "ubar": 0.0,
    "integrator": {"t_horizon": 2.0, "u_max": 1e8},
}

SINGLE_NODE = {"nodes": [{"id": "x1", "mu": 1.0}], "edges": []}

# (name, problem dict, equilibrium candidate or None)
SINGLE_NODE_SUITE = [
    ("logistic-decay", {"graph": SINGLE_NODE, "p": 2.0, "a": {"const": 1.0}, "u0": {"const": 0.5},
                        "integrator": {"t_horizon": 40.0}}, None),
    ("quadratic-blowup", {"graph": SINGLE_NODE, "p": 2.0, "a": {"const": 0.0}, "u0": {"const": 1.0},
                          "integrator": {"t_horizon": 5.0, "u_max": 1e8}}, None),
    ("cubic-blowup", {"graph": SINGLE_NODE, "p": 3.0, "a": {"const": 1.0}, "u0": {"const": 2.0},
                      "integrator": {"t_horizon": 5.0, "u_max": 1e6}}, {"const": 1.0}),
]

SCENARIOS = {"g25-decay": G25_DECAY, "g25-blowup": G25_BLOWUP}
PRESET_NAMES = ("g25-decay", "g25-blowup", "single-node-suite")
