"""Closed-form blow-up criteria, time bounds, the blow-up rate fit and the full analysis report."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import Status, Trajectory
from .graph import laplacian
from .problem import ProblemSpec
from .spectral import EigenPair, epsilon0, principal_eigenpair, small_data_threshold
from .wellfn import classify, energy_J


@dataclass(frozen=True)
class BoundResult:
    applicable: bool
    threshold: float | None
    witness: float | None
    t_bound: float | None
    note: str = ""


def _not_applicable(note, threshold=None, witness=None) -> BoundResult:
    return BoundResult(False, threshold, witness, None, note)


def _nonneg_gate(ps: ProblemSpec) -> str | None:
    if ps.ubar != 0.0:
        return "criterion assumes ubar = 0"
    if np.any(ps.u0 < 0):
        return "criterion requires u0 >= 0"
    return None


def criterion_mass(ps: ProblemSpec) -> BoundResult:
    """int u0 > (max a)^{1/(p-1)} |V| forces blow-up before the log bound."""
    if (why := _nonneg_gate(ps)) is not None:
        return _not_applicable(why)
    g, p = ps.graph, ps.p
    vol = g.volume
    a0 = float(np.max(ps.a))
    z0 = float(np.dot(g.mu, ps.u0))
    if a0 == 0.0:
        if z0 <= 0:
            return _not_applicable("max a = 0 and int u0 = 0", 0.0, z0)
        limit = z0 ** (1 - p) * vol ** (p - 1) / (p - 1)
        return _not_applicable(f"max a = 0: bound degenerates; limiting form gives T <= {limit!r}", 0.0, z0)
    c1 = a0 ** (1.0 / (p - 1)) * vol
    if not z0 > c1:
        return _not_applicable("int u0 dmu does not exceed c1", c1, z0)
    t = math.log(1.0 / (1.0 - vol ** (p - 1) * a0 * z0 ** (1 - p))) / ((p - 1) * a0)
    return BoundResult(True, c1, z0, t)


def criterion_eigen(ps: ProblemSpec, pair: EigenPair) -> BoundResult:
    """int phi u0 > lambda_a^{1/(p-1)} int phi forces blow-up."""
    if (why := _nonneg_gate(ps)) is not None:
        return _not_applicable(why)
    g, p, lam = ps.graph, ps.p, pair.lambda_a
    if lam <= 0:
        return _not_applicable("first eigenvalue is not positive (a == 0)")
    mass_phi = float(np.dot(g.mu, pair.phi))
    y0 = float(np.dot(g.mu, pair.phi * ps.u0))
    c2 = lam ** (1.0 / (p - 1)) * mass_phi
    if not y0 > c2:
        return _not_applicable("int phi u0 dmu does not exceed c2", c2, y0)
    t = math.log(1.0 / (1.0 - lam * mass_phi ** (p - 1) * y0 ** (1 - p))) / ((p - 1) * lam)
    return BoundResult(True, c2, y0, t)


def energy_c3(p: float, vol: float, l2: float) -> float:
    return (p - 1) / (2 * (p + 1)) * vol ** ((1 - p) / 2) * l2 ** (1 + p)


def energy_bound_negative(p: float, vol: float, l2: float) -> float:
    """Blow-up time bound when J(u0) < 0."""
    return (p + 1) / (p - 1) ** 2 * vol ** ((p - 1) / 2) * l2 ** (1 - p)


def energy_bound_statement(p: float, vol: float, l2: float, J: float) -> float:
    """Blow-up time bound for 0 <= J(u0) < c3, written as a single closed expression."""
    k = 2.0 / (p + 1)
    first = (p + 1) * ((4 * (p + 1) * vol ** ((p - 1) / 2) * J) ** k - (p - 1) ** k * l2**2) / (
        (p - 1) ** k * (2 * (p - 1) * vol ** ((1 - p) / 2) * l2 ** (1 + p) - 4 * (p + 1) * J)
    )
    second = 2 * (p + 1) * l2 ** (1 - p) / ((p - 1) ** 2 * vol ** ((1 - p) / 2))
    return max(first, second)


def energy_bound_proof(p: float, vol: float, l2: float, J: float) -> float:
    """Same bound assembled from the L2-mass ODE constants w0, d0, d1, alpha, eta0."""
    w0 = l2**2
    d0 = 4 * J
    d1 = (2 * p - 2) / (p + 1) * vol ** ((1 - p) / 2)
    alpha = (p + 1) / 2
    eta0 = d1 * w0**alpha - d0
    first = ((2 * d0 / d1) ** (1 / alpha) - w0) / eta0
    second = 2 * w0 ** (1 - alpha) / ((alpha - 1) * d1)
    return max(first, second)


def energy_gate_proof(p: float, vol: float, l2: float, J: float) -> tuple[float, float]:
    """(d1 w0^alpha, d0): the second branch applies when d0 >= 0 and the first exceeds it."""
    d1 = (2 * p - 2) / (p + 1) * vol ** ((1 - p) / 2)
    return d1 * (l2**2) ** ((p + 1) / 2), 4 * J


def criterion_energy(ps: ProblemSpec) -> BoundResult:
    if (why := _nonneg_gate(ps)) is not None:
        return _not_applicable(why)
    g, p = ps.graph, ps.p
    vol = g.volume
    l2 = math.sqrt(float(np.dot(g.mu, ps.u0**2)))
    J = energy_J(ps, ps.u0)
    c3 = energy_c3(p, vol, l2)
    if J < 0:
        return BoundResult(True, 0.0, J, energy_bound_negative(p, vol, l2), "J(u0) < 0")
    if J < c3:
        return BoundResult(True, c3, J, energy_bound_statement(p, vol, l2, J), "0 <= J(u0) < c3")
    return _not_applicable("J(u0) >= c3", c3, J)


def criterion_equilibrium(ps: ProblemSpec, v, res_tol: float = 1e-10) -> BoundResult:
    """u0 >= v, u0 != v above a positive equilibrium v certifies finite-time blow-up (no time bound)."""
    if (why := _nonneg_gate(ps)) is not None:
        return _not_applicable(why)
    g = ps.graph
    v = g.field(v)
    if not np.all(v > 0):
        return _not_applicable("positivity: equilibrium candidate must be strictly positive")
    residual = float(np.max(np.abs(laplacian(g, v) - ps.a * v + v**ps.p)))
    if residual > res_tol * max(1.0, float(np.max(v ** ps.p))):
        return _not_applicable(f"residual: candidate is not an equilibrium (residual {residual:.3e})")
    gap = ps.u0 - v
    if np.any(gap < 0):
        return _not_applicable("u0 must dominate the equilibrium pointwise", 0.0, float(np.min(gap)))
    excess = float(np.dot(g.mu, gap))
    if not excess > 0:
        return _not_applicable("u0 coincides with the equilibrium", 0.0, excess)
    return BoundResult(True, 0.0, excess, None, "finite-time blow-up certified; no closed-form time")


# -- blow-up rate -------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    t_hat: float
    slope: float
    rate_samples: list[tuple[float, float]]
    limit_estimate: float


def fit_blowup_rate(traj: Trajectory, p: float, window: int = 20, floor_fraction: float = 0.01) -> RateFit:
    """Extrapolate the blow-up time from (max_x u)^{1-p}, which is asymptotically affine in t.

    Uses the last ``window`` samples with max u >= floor_fraction * u_max,
    falling back to the last ``window`` samples overall when too few
    samples clear that floor.
    """
    if traj.status != Status.BLOW_UP:
        raise ValueError(f"blow-up rate fit needs a BlowUp trajectory, got {traj.status.value}")
    peak = np.max(traj.states, axis=1)
    idx = np.flatnonzero(peak >= floor_fraction * traj.u_max)
    if idx.size < window:
        idx = np.flatnonzero(peak > 0)
    if idx.size < window:
        raise ValueError(f"too few samples for the rate fit ({idx.size} < {window})")
    idx = idx[-window:]
    t = traj.times[idx]
    phi = peak[idx]
    if np.any(np.diff(phi) <= 0):
        raise ValueError("max u is not monotone over the fit window")
    if np.any(np.diff(t) <= 0) or not np.all(np.isfinite(phi)):
        raise ValueError("fit window is degenerate (repeated times or non-finite peaks)")
    y = phi ** (1 - p)
    tc = t - t[-1]
    slope, intercept = np.polyfit(tc, y, 1)
    if not slope < 0:
        raise ValueError("transformed peak is not decreasing; no blow-up extrapolation")
    t_hat = float(t[-1] - intercept / slope)
    t_hat = max(t_hat, traj.t_detect)
    samples = [(float(ti), float((t_hat - ti) * fi ** (p - 1))) for ti, fi in zip(t, phi) if ti < t_hat]
    limit = float(np.median([s for _, s in samples]))
    return RateFit(t_hat=t_hat, slope=float(-slope), rate_samples=samples, limit_estimate=limit)


def rate_envelope(ps: ProblemSpec, t_hat: float, t) -> tuple[float, np.ndarray]:
    """Two-sided bounds on (T - t) (max u)^{p-1}: (1/(p-1), A s / (1 - exp(-(p-1) A s))) with s = T - t."""
    g, p = ps.graph, ps.p
    A = float(np.max(g.degree / g.mu + ps.a))
    s = t_hat - np.asarray(t, dtype=float)
    if A == 0:
        upper = np.full_like(s, 1.0 / (p - 1))
    else:
        upper = A * s / -np.expm1(-(p - 1) * A * s)
    return 1.0 / (p - 1), upper


# -- aggregated analysis -------------------------------------------------------


@dataclass
class AnalysisReport:
    nodes: list[str]
    p: float
    eigen: dict
    thresholds: dict
    well: dict | None
    criteria: dict[str, BoundResult]
    best_bound: float | None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["criteria"] = {k: asdict(v) for k, v in self.criteria.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        d = dict(d)
        d["criteria"] = {k: BoundResult(**v) for k, v in d["criteria"].items()}
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


CRITERIA = ("mass", "eigen", "energy", "equilibrium")


def analyze(
    ps: ProblemSpec,
    equilibrium=None,
    sigma: float | None = None,
    tol: float = 1e-10,
    res_tol: float = 1e-10,
) -> AnalysisReport:
    """Spectral thresholds, well classification and every blow-up criterion for one instance."""
    g = ps.graph
    notes: list[str] = []
    a_nonzero = bool(np.any(ps.a > 0))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pair = principal_eigenpair(g, ps.a, tol=tol)
    eigen = {
        "lambda_a": pair.lambda_a,
        "phi": {x: float(v) for x, v in zip(g.nodes, pair.phi)},
        "residual": pair.residual,
    }

    l2 = math.sqrt(float(np.dot(g.mu, ps.u0**2)))
    sup = float(np.max(np.abs(ps.u0)))
    thresholds: dict = {"l2_norm_u0": l2, "sup_norm_u0": sup, "mu_min": g.mu_min, "volume": g.volume}
    if a_nonzero:
        sigma = 0.5 * pair.lambda_a if sigma is None else sigma
        delta, C = small_data_threshold(pair, ps.p, sigma)
        eps0 = epsilon0(pair.lambda_a, ps.p, g.mu_min, g.volume)
        thresholds.update(
            epsilon0=eps0, sigma=sigma, delta=delta, C=C,
            l2_decay_applies=l2 < eps0, sup_decay_applies=sup < delta,
        )
    else:
        thresholds.update(epsilon0=None, sigma=None, delta=None, C=None,
                          l2_decay_applies=False, sup_decay_applies=False)
        notes.append("a == 0: first eigenvalue is 0; decay thresholds and well depth are undefined")

    well = None
    if ps.ubar != 0.0:
        notes.append("ubar != 0: energy, well and blow-up theory assume ubar = 0 and are skipped")
    elif a_nonzero:
        w = classify(ps, tol=tol)
        well = {"J0": w.J0, "N0": w.N0, "Lambda": w.Lambda, "r": w.depth_r,
                "norm_1a": w.norm_1a, "classification": w.classification.value}

    criteria = {
        "mass": criterion_mass(ps),
        "eigen": criterion_eigen(ps, pair),
        "energy": criterion_energy(ps),
        "equilibrium": (
            criterion_equilibrium(ps, equilibrium, res_tol)
            if equilibrium is not None
            else _not_applicable("no equilibrium candidate supplied")
        ),
    }
    bounds = [c.t_bound for c in criteria.values() if c.applicable and c.t_bound is not None]
    return AnalysisReport(
        nodes=list(g.nodes),
        p=ps.p,
        eigen=eigen,
        thresholds=thresholds,
        well=well,
        criteria=criteria,
        best_bound=min(bounds) if bounds else None,
        notes=notes,
    )
