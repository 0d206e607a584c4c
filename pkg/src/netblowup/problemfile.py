"""Problem file (JSON) loading.

    {"graph": "g.json" | {"preset": "g25-standin"} | {inline graph},
     "p": 3.0,
     "a": {"const": 2.0} | {"map": {...}} | {"hub-spike": {"hub": 0, "rest": 2}},
     "u0": {"const": 1.5} | {"map": {...}} | {"preset": "hub-spike", "hub": .5, "rest": 1.5},
     "ubar": 0.0,
     "equilibrium": optional, same forms as "a",
     "integrator": {"rtol": ..., "atol": ..., "t_horizon": ..., ...}}

Relative graph paths resolve against the problem file's directory.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any

from .dynamics import IntegratorOptions
from .graph import DomainMismatch, Graph, graph_from_dict, parse_graph
from .presets import GRAPH_PRESETS, hub_spike
from .problem import ProblemError, ProblemSpec

_OPTION_NAMES = {f.name for f in dataclasses.fields(IntegratorOptions)}


@dataclasses.dataclass
class LoadedProblem:
    spec: ProblemSpec
    options: IntegratorOptions
    equilibrium: Any = None


def load_graph(ref: Any, base: Path | None = None) -> Graph:
    if isinstance(ref, str):
        path = Path(ref)
        if base is not None and not path.is_absolute():
            path = base / path
        return parse_graph(path.read_text())
    if isinstance(ref, dict) and set(ref) == {"preset"}:
        try:
            return GRAPH_PRESETS[ref["preset"]]()
        except KeyError:
            raise ProblemError(f"unknown graph preset {ref['preset']!r}") from None
    return graph_from_dict(ref)


def node_values(g: Graph, spec: Any, what: str):
    """Resolve a constant / per-node map / hub-spike description to a node field."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return g.field(float(spec))
    if not isinstance(spec, dict):
        raise ProblemError(f"{what}: expected an object, got {spec!r}")
    try:
        if "const" in spec:
            return g.field(float(spec["const"]))
        if "map" in spec:
            return g.field({str(k): float(v) for k, v in spec["map"].items()})
        if spec.get("preset") == "hub-spike":
            return g.field(hub_spike(g, float(spec["hub"]), float(spec["rest"])))
        if "hub-spike" in spec:
            inner = spec["hub-spike"]
            return g.field(hub_spike(g, float(inner["hub"]), float(inner["rest"])))
    except DomainMismatch as exc:
        raise ProblemError(f"{what}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemError(f"{what}: malformed value description ({exc!r})") from None
    raise ProblemError(f"{what}: unrecognised value description {spec!r}")


def problem_from_dict(data: Any, base: Path | None = None, overrides: dict | None = None) -> LoadedProblem:
    if not isinstance(data, dict):
        raise ProblemError("problem file must be a JSON object")
    for key in ("graph", "p", "a", "u0"):
        if key not in data:
            raise ProblemError(f"problem file is missing {key!r}")
    g = load_graph(data["graph"], base)
    a = node_values(g, data["a"], "a")
    u0 = node_values(g, data["u0"], "u0")
    eq = node_values(g, data["equilibrium"], "equilibrium") if data.get("equilibrium") is not None else None

    opts = dict(data.get("integrator") or {})
    unknown = set(opts) - _OPTION_NAMES
    if unknown:
        raise ProblemError(f"unknown integrator option(s): {sorted(unknown)}")
    ubar = data.get("ubar", 0.0)
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "ubar":
            ubar = v
        else:
            opts[k] = v
    try:
        options = IntegratorOptions(**opts)
        p = data["p"]
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise ProblemError(f"p must be a number, got {p!r}")
        spec = ProblemSpec(g, a, p, u0, ubar=float(ubar))
    except TypeError as exc:
        raise ProblemError(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, ProblemError):
            raise
        raise ProblemError(str(exc)) from None
    return LoadedProblem(spec, options, eq)


def load_problem(path: str | Path, overrides: dict | None = None) -> LoadedProblem:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"malformed problem JSON: {exc}") from None
    return problem_from_dict(data, path.parent, overrides)
