"""Finite weighted graphs, the mu-Laplacian and discrete integrals.

Node fields are plain float64 arrays laid out in the graph's node order
(the order nodes appear in the graph file).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np


class GraphError(ValueError):
    """Base class for graph file and graph construction diagnostics."""


class MalformedGraph(GraphError):
    pass


class NonPositiveMeasure(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class UnknownNode(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


class DomainMismatch(ValueError):
    """A node field does not live on the graph it was paired with."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Connected graph with positive node measures and symmetric edge weights.

    Use :meth:`from_edges` (or :func:`parse_graph`) to build one; the
    constructor expects already-validated arrays.
    """

    nodes: tuple[str, ...]
    mu: np.ndarray
    edges: tuple[tuple[int, int, float], ...]
    weights: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(
        cls,
        nodes: Iterable[str],
        mu: Iterable[float] | Mapping[str, float],
        edges: Iterable[tuple[str, str, float]],
    ) -> "Graph":
        nodes = tuple(str(x) for x in nodes)
        if not nodes:
            raise MalformedGraph("graph has no nodes")
        index: dict[str, int] = {}
        for i, x in enumerate(nodes):
            if x in index:
                raise MalformedGraph(f"duplicate node id {x!r}")
            index[x] = i
        if isinstance(mu, Mapping):
            try:
                mu = [mu[x] for x in nodes]
            except KeyError as exc:
                raise MalformedGraph(f"missing measure for node {exc.args[0]!r}") from None
        mu_arr = np.array([float(m) for m in mu], dtype=float)
        if mu_arr.shape != (len(nodes),):
            raise MalformedGraph("measure list length does not match node list")
        for x, m in zip(nodes, mu_arr):
            if not np.isfinite(m) or m <= 0:
                raise NonPositiveMeasure(f"non-positive measure mu({x}) = {m!r}")

        n = len(nodes)
        W = np.zeros((n, n))
        seen: set[frozenset[int]] = set()
        edge_list = []
        for a, b, w in edges:
            if a not in index:
                raise UnknownNode(f"edge endpoint {a!r} is not a declared node")
            if b not in index:
                raise UnknownNode(f"edge endpoint {b!r} is not a declared node")
            w = float(w)
            if not np.isfinite(w) or w <= 0:
                raise NonPositiveWeight(f"non-positive weight w({a},{b}) = {w!r}")
            i, j = index[a], index[b]
            if i == j:
                raise SelfLoop(f"self-loop at node {a!r}")
            key = frozenset((i, j))
            if key in seen:
                raise DuplicateEdge(f"duplicate edge {a!r}-{b!r}")
            seen.add(key)
            W[i, j] = W[j, i] = w
            edge_list.append((i, j, w))

        g = cls(nodes=nodes, mu=mu_arr, edges=tuple(edge_list), weights=W)
        unreached = g._unreached_from_first()
        if unreached:
            shown = ", ".join(nodes[i] for i in unreached[:5])
            more = "" if len(unreached) <= 5 else f" (+{len(unreached) - 5} more)"
            raise DisconnectedGraph(
                f"disconnected graph: {len(unreached)} node(s) unreachable from "
                f"{nodes[0]!r}: {shown}{more}"
            )
        g.mu.setflags(write=False)
        g.weights.setflags(write=False)
        return g

    def _unreached_from_first(self) -> list[int]:
        n = len(self.nodes)
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in np.flatnonzero(self.weights[i]):
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        return [int(i) for i in np.flatnonzero(~seen)]

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def degree(self) -> np.ndarray:
        """Weighted degree sum_y w_xy."""
        return self.weights.sum(axis=1)

    @property
    def mu_min(self) -> float:
        return float(self.mu.min())

    @property
    def volume(self) -> float:
        """Total measure |V| = sum_x mu(x)."""
        return float(self.mu.sum())

    def index(self, node: str) -> int:
        return self.nodes.index(node)

    def stiffness(self) -> np.ndarray:
        """Combinatorial weighted Laplacian K = diag(deg) - W (symmetric)."""
        return np.diag(self.degree) - self.weights

    def field(self, values: Any) -> np.ndarray:
        """Coerce a constant, a node->value mapping or a sequence to a node field."""
        if isinstance(values, Mapping):
            missing = [x for x in self.nodes if x not in values]
            extra = [x for x in values if x not in self.nodes]
            if missing or extra:
                raise DomainMismatch(
                    f"field keys do not match graph nodes (missing={missing[:5]}, extra={extra[:5]})"
                )
            return np.array([float(values[x]) for x in self.nodes])
        if np.isscalar(values):
            return np.full(self.n, float(values))
        return check_field(self, values)

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": x, "mu": float(m)} for x, m in zip(self.nodes, self.mu)],
            "edges": [{"a": self.nodes[i], "b": self.nodes[j], "w": w} for i, j, w in self.edges],
        }

    def permuted(self, order: list[int]) -> "Graph":
        """Same graph with nodes listed in ``order`` (indices into the current order)."""
        nodes = [self.nodes[i] for i in order]
        mu = [self.mu[i] for i in order]
        edges = [(self.nodes[i], self.nodes[j], w) for i, j, w in self.edges]
        return Graph.from_edges(nodes, mu, edges)


def check_field(g: Graph, u: Any) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if arr.shape != (g.n,):
        raise DomainMismatch(f"field has shape {arr.shape}, graph has {g.n} nodes")
    return arr


def parse_graph(text: str) -> Graph:
    """Parse and validate the JSON graph format.

    ``{"nodes": [{"id": "x1", "mu": 1.0}, ...], "edges": [{"a": "x1", "b": "x2", "w": 1.0}, ...]}``
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGraph(f"malformed graph JSON: {exc}") from None
    return graph_from_dict(data)


def graph_from_dict(data: Any) -> Graph:
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        raise MalformedGraph("graph must be an object with 'nodes' and 'edges'")
    if not isinstance(data["nodes"], list) or not isinstance(data["edges"], list):
        raise MalformedGraph("'nodes' and 'edges' must be lists")
    nodes, mu, edges = [], [], []
    try:
        for entry in data["nodes"]:
            nodes.append(str(entry["id"]))
            mu.append(_number(entry.get("mu", 1.0), "mu"))
        for entry in data["edges"]:
            edges.append((str(entry["a"]), str(entry["b"]), _number(entry.get("w", 1.0), "w")))
    except (KeyError, TypeError, AttributeError) as exc:
        raise MalformedGraph(f"malformed graph entry: {exc!r}") from None
    return Graph.from_edges(nodes, mu, edges)


def _number(v: Any, name: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedGraph(f"{name} must be a number, got {v!r}")
    return float(v)


def laplacian(g: Graph, u: Any) -> np.ndarray:
    """mu-Laplacian: (1/mu(x)) sum_{y~x} w_xy (u(y) - u(x))."""
    u = check_field(g, u)
    return (g.weights @ u - g.degree * u) / g.mu


def integral(g: Graph, f: Any) -> float:
    f = check_field(g, f)
    return float(np.dot(g.mu, f))


def dirichlet_energy(g: Graph, u: Any) -> float:
    """Integral of |grad u|^2, i.e. sum over undirected edges of w_xy (u(y) - u(x))^2.

    This is half the double sum over ordered neighbour pairs, which makes
    the Green identity  int u (-Lap u) dmu = dirichlet_energy  exact.
    """
    u = check_field(g, u)
    return float(sum(w * (u[j] - u[i]) ** 2 for i, j, w in g.edges))


def lp_norm(g: Graph, f: Any, q: float) -> float:
    if q < 1:
        raise ValueError(f"lp_norm requires q >= 1, got {q}")
    f = check_field(g, f)
    return float(np.dot(g.mu, np.abs(f) ** q) ** (1.0 / q))


def path_graph(n: int, mu: Iterable[float] | None = None, w: float = 1.0) -> Graph:
    """Path x1 - x2 - ... - xn; handy for tests and presets."""
    nodes = [f"x{i + 1}" for i in range(n)]
    mu = list(mu) if mu is not None else [1.0] * n
    edges = [(nodes[i], nodes[i + 1], w) for i in range(n - 1)]
    return Graph.from_edges(nodes, mu, edges)


def single_node(mu: float = 1.0) -> Graph:
    return Graph.from_edges(["x1"], [mu], [])
