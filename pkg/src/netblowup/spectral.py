"""Principal eigenpair of -Lap + a and the small-data decay thresholds."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph, check_field, dirichlet_energy


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget."""


@dataclass(frozen=True)
class EigenPair:
    lambda_a: float
    phi: np.ndarray
    residual: float = 0.0


def operator_matrix(g: Graph, a) -> np.ndarray:
    """Dense matrix of -Lap + a acting on node fields (not symmetric unless mu is constant)."""
    a = check_field(g, a)
    return g.stiffness() / g.mu[:, None] + np.diag(a)


def symmetrized(g: Graph, a) -> np.ndarray:
    """D^{-1/2} (K + diag(mu a)) D^{-1/2}, similar to -Lap + a."""
    a = check_field(g, a)
    s = 1.0 / np.sqrt(g.mu)
    M = (g.stiffness() + np.diag(g.mu * a)) * s[:, None] * s[None, :]
    return 0.5 * (M + M.T)


def jacobi_eigh(A: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100):
    """Cyclic Jacobi rotations for a real symmetric matrix.

    Returns ``(w, V)`` with ascending eigenvalues and orthonormal
    eigenvectors in the columns of ``V``. Works on a private copy.
    """
    A = np.array(A, dtype=float, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("jacobi_eigh needs a square matrix")
    V = np.eye(n)
    offmask = ~np.eye(n, dtype=bool)
    scale = max(np.abs(A).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(A[offmask] ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                Ap = A[:, p].copy()
                Aq = A[:, q]
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :]
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp = V[:, p].copy()
                Vq = V[:, q]
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    else:
        off = math.sqrt(float(np.sum(A[offmask] ** 2)))
        if off > tol * scale * 1e3:
            raise ConvergenceError(f"Jacobi sweeps did not converge (off-diagonal norm {off:.3e})")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def rayleigh_quotient(g: Graph, a, u) -> float:
    a = check_field(g, a)
    u = check_field(g, u)
    denom = float(np.dot(g.mu, u * u))
    if denom == 0.0:
        raise ValueError("Rayleigh quotient undefined for u == 0")
    return (dirichlet_energy(g, u) + float(np.dot(g.mu, a * u * u))) / denom


def principal_eigenpair(g: Graph, a, tol: float = 1e-10) -> EigenPair:
    """First eigenvalue and positive, mu-normalised eigenfunction of -Lap + a."""
    a = check_field(g, a)
    if np.any(a < 0):
        raise ValueError("potential a must be nonnegative")
    if not np.any(a > 0):
        warnings.warn("a == 0: the first eigenvalue is 0 and not positive", stacklevel=2)
    if g.n > 512:
        raise ValueError("dense Jacobi eigensolver is limited to 512 nodes")

    w, V = jacobi_eigh(symmetrized(g, a))
    lam = float(w[0])
    phi = V[:, 0] / np.sqrt(g.mu)
    if phi[0] < 0:
        phi = -phi
    phi = phi / math.sqrt(float(np.dot(g.mu, phi * phi)))

    if not np.all(phi > 0):
        raise ConvergenceError("principal eigenfunction is not strictly positive")
    residual = float(np.max(np.abs(operator_matrix(g, a) @ phi - lam * phi)))
    if residual > tol * max(1.0, lam):
        raise ConvergenceError(f"eigen-residual {residual:.3e} exceeds tolerance")
    return EigenPair(lambda_a=lam, phi=phi, residual=residual)


def small_data_threshold(pair: EigenPair, p: float, sigma: float) -> tuple[float, float]:
    """Constructive (delta, C): ||u0||_inf < delta gives ||u(t)||_inf <= C ||u0||_inf e^{-sigma t}."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    if not 0 < sigma < pair.lambda_a:
        raise ValueError(f"sigma must lie in (0, lambda_a={pair.lambda_a}), got {sigma}")
    lo, hi = float(np.min(pair.phi)), float(np.max(pair.phi))
    delta = (pair.lambda_a - sigma) ** (1.0 / (p - 1)) * lo / (2.0 * hi)
    return delta, 2.0 * hi / lo


def l2_threshold_epsilon0(g: Graph, lambda_a: float, p: float) -> float:
    """L2 smallness threshold (lambda_a^2 mu_min^{p+1} / (4|V|))^{1/(p-1)}, |V| = total measure."""
    return epsilon0(lambda_a, p, g.mu_min, g.volume)


def epsilon0(lambda_a: float, p: float, mu_min: float, volume: float) -> float:
    if lambda_a <= 0 or p <= 1:
        raise ValueError("epsilon0 needs lambda_a > 0 and p > 1")
    return (lambda_a**2 * mu_min ** (p + 1) / (4.0 * volume)) ** (1.0 / (p - 1))
