"""Energy and Nehari functionals, the embedding constant Lambda and the well depth."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .graph import check_field, dirichlet_energy
from .problem import ProblemSpec
from .spectral import ConvergenceError

DEFAULT_SEED = 20240611


class Classification(str, enum.Enum):
    IN_WELL = "InWell"
    EXTERIOR = "Exterior"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class WellReport:
    J0: float
    N0: float
    Lambda: float
    depth_r: float
    norm_1a: float
    classification: Classification


def _energy_parts(ps: ProblemSpec, u) -> tuple[float, float]:
    """(||u||_{1,a}^2, int |u|^{p+1} dmu)."""
    g = ps.graph
    u = check_field(g, u)
    quad = dirichlet_energy(g, u) + float(np.dot(g.mu, ps.a * u * u))
    power = float(np.dot(g.mu, np.abs(u) ** (ps.p + 1)))
    return quad, power


def energy_J(ps: ProblemSpec, u) -> float:
    quad, power = _energy_parts(ps, u)
    return 0.5 * quad - power / (ps.p + 1)


def nehari_N(ps: ProblemSpec, u) -> float:
    quad, power = _energy_parts(ps, u)
    return quad - power


def norm_1a(ps: ProblemSpec, u) -> float:
    return math.sqrt(_energy_parts(ps, u)[0])


def nehari_scale(ps: ProblemSpec, u) -> float:
    """The s > 0 with N(s u) = 0."""
    quad, power = _energy_parts(ps, u)
    if power == 0.0:
        raise ValueError("Nehari scaling undefined for u == 0")
    return (quad / power) ** (1.0 / (ps.p - 1))


def _quadratic_form(ps: ProblemSpec) -> np.ndarray:
    g = ps.graph
    return g.stiffness() + np.diag(g.mu * ps.a)


def lambda_minimizer(
    ps: ProblemSpec,
    tol: float = 1e-10,
    seeds: int = 16,
    max_iter: int = 20000,
    rng_seed: int = DEFAULT_SEED,
) -> tuple[float, np.ndarray]:
    """Minimise ||u||_{1,a}^2 / ||u||_{p+1}^2 and return (Lambda, minimiser).

    Gradient descent on the log-quotient with Barzilai-Borwein steps and
    Armijo backtracking, iterates renormalised onto the unit L^{p+1}
    sphere. The minimiser may be taken nonnegative, so every restart
    starts in the positive cone. Best value over restarts wins.
    """
    ps.require_nonzero_potential()
    g = ps.graph
    A = _quadratic_form(ps)
    mu = g.mu
    q = ps.p + 1

    def normalize(u):
        return u / np.dot(mu, np.abs(u) ** q) ** (1.0 / q)

    def value_grad(u):
        Au = A @ u
        quad = float(np.dot(u, Au))
        pw = float(np.dot(mu, np.abs(u) ** q))
        f = math.log(quad) - (2.0 / q) * math.log(pw)
        grad = 2.0 * Au / quad - 2.0 * mu * np.abs(u) ** (q - 2) * u / pw
        return f, grad

    rng = np.random.default_rng(rng_seed)
    starts = [np.ones(g.n)] + [rng.uniform(0.05, 1.0, g.n) for _ in range(max(seeds, 1) - 1)]

    best_f, best_u, converged_any = math.inf, None, False
    for u in starts:
        u = normalize(u)
        f, grad = value_grad(u)
        step = 1.0 / max(np.linalg.norm(grad), 1e-12) * 0.1
        calm = 0
        for _ in range(max_iter):
            gnorm2 = float(np.dot(grad, grad))
            if gnorm2 == 0.0:
                calm = 3
                break
            while True:
                trial = normalize(u - step * grad)
                f_new, grad_new = value_grad(trial)
                if f_new <= f - 1e-4 * step * gnorm2 or step < 1e-16:
                    break
                step *= 0.5
            s = trial - u
            y = grad_new - grad
            sy = float(np.dot(s, y))
            change = abs(math.expm1(f_new - f))
            u, f, grad = trial, f_new, grad_new
            step = float(np.dot(s, s)) / sy if sy > 0 else step * 2.0
            small_grad = float(np.dot(grad, grad)) < 100.0 * tol
            calm = calm + 1 if change < tol and small_grad else 0
            if calm >= 3:
                break
        if calm >= 3:
            converged_any = True
        if f < best_f:
            best_f, best_u = f, u
    if not converged_any:
        raise ConvergenceError("Lambda minimiser did not converge in any restart")
    u = np.abs(best_u) if np.all(best_u <= 0) else best_u
    return math.exp(best_f), u


def lambda_constant(ps: ProblemSpec, tol: float = 1e-10, seeds: int = 16) -> float:
    return lambda_minimizer(ps, tol=tol, seeds=seeds)[0]


def depth_from_lambda(Lambda: float, p: float) -> float:
    return (p - 1) / (2 * (p + 1)) * Lambda ** ((p + 1) / (p - 1))


def well_depth(ps: ProblemSpec, tol: float = 1e-10) -> float:
    return depth_from_lambda(lambda_constant(ps, tol=tol), ps.p)


def depth_shift(r: float, p: float, eps: float) -> float:
    """Lower bound r - eps/(p+1) for inf{J(u) : N(u) = -eps}."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return r - eps / (p + 1)


def classify_values(J0: float, N0: float, r: float, is_zero: bool) -> Classification:
    if is_zero or (J0 < r and N0 > 0):
        return Classification.IN_WELL
    if J0 < r and N0 < 0:
        return Classification.EXTERIOR
    return Classification.INDETERMINATE


def classify(ps: ProblemSpec, tol: float = 1e-10, Lambda: float | None = None) -> WellReport:
    ps.require_nonzero_potential()
    if Lambda is None:
        Lambda = lambda_constant(ps, tol=tol)
    r = depth_from_lambda(Lambda, ps.p)
    J0 = energy_J(ps, ps.u0)
    N0 = nehari_N(ps, ps.u0)
    cls = classify_values(J0, N0, r, not np.any(ps.u0))
    return WellReport(J0=J0, N0=N0, Lambda=Lambda, depth_r=r, norm_1a=norm_1a(ps, ps.u0), classification=cls)
