from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, check_field


class ProblemError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """du/dt = Lap u - a (u - ubar) + |u|^{p-1} u on ``graph`` with u(0) = u0."""

    graph: Graph
    a: np.ndarray
    p: float
    u0: np.ndarray
    ubar: float = 0.0
    equilibrium: np.ndarray | None = field(default=None)

    def __post_init__(self):
        g = self.graph
        object.__setattr__(self, "a", check_field(g, self.a).copy())
        object.__setattr__(self, "u0", check_field(g, self.u0).copy())
        if self.equilibrium is not None:
            object.__setattr__(self, "equilibrium", check_field(g, self.equilibrium).copy())
        p = float(self.p)
        if not np.isfinite(p) or p <= 1:
            raise ProblemError(f"exponent p must exceed 1, got {self.p!r}")
        object.__setattr__(self, "p", p)
        if np.any(self.a < 0):
            bad = [g.nodes[i] for i in np.flatnonzero(self.a < 0)[:5]]
            raise ProblemError(f"potential a must be nonnegative (negative at {bad})")
        if not np.all(np.isfinite(self.u0)):
            raise ProblemError("initial data must be finite")
        object.__setattr__(self, "ubar", float(self.ubar))

    def require_nonzero_potential(self):
        if not np.any(self.a > 0):
            raise ProblemError("this analysis requires a potential a that is not identically 0")

    def with_u0(self, u0) -> "ProblemSpec":
        return ProblemSpec(self.graph, self.a, self.p, u0, self.ubar, self.equilibrium)
