"""Adaptive Dormand-Prince 5(4) integration of the graph reaction-diffusion flow."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import check_field, laplacian
from .problem import ProblemSpec
from .spectral import ConvergenceError, EigenPair, epsilon0
from .wellfn import energy_J, nehari_N


class Status(str, enum.Enum):
    REACHED_HORIZON = "ReachedHorizon"
    CONVERGED = "Converged"
    BLOW_UP = "BlowUp"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass
class IntegratorOptions:
    rtol: float = 1e-9
    atol: float = 1e-12
    t_horizon: float = 10.0
    u_max: float = 1e8
    h_min: float | None = None  # None -> 1e-14 * t_horizon
    conv_tol: float = 1e-9
    record_every: int = 1
    sample_interval: float | None = None  # also land exactly on multiples of this
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.h_min is None:
            self.h_min = 1e-14 * self.t_horizon
        for name in ("rtol", "atol", "t_horizon", "u_max", "h_min", "conv_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"integrator option {name} must be positive, got {v!r}")
        if self.rtol < 1e-13:
            raise ValueError("rtol must be at least 1e-13")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be a positive integer")
        if self.sample_interval is not None and not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")


@dataclass
class Trajectory:
    nodes: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray  # shape (samples, nodes)
    status: Status
    t_detect: float
    last_step: float  # size of the final step attempt; bounds the blow-up bracket
    traces: dict[str, np.ndarray] = field(default_factory=dict)
    n_accepted: int = 0
    n_rejected: int = 0
    u_max: float = 1e8
    tail: float = 0.0  # rate-envelope estimate of T_max - t_detect at a BlowUp exit
    rtol: float = 0.0

    @property
    def bracket(self) -> tuple[float, float]:
        """Interval that contains T_max when status is BlowUp.

        The upper end adds the larger of the last step and the rate-envelope
        tail, plus rtol * t_detect for timing error accumulated along the run.
        """
        width = max(self.last_step, self.tail) + self.rtol * self.t_detect
        return (self.t_detect, self.t_detect + width)

    @property
    def max_abs(self) -> np.ndarray:
        return np.max(np.abs(self.states), axis=1)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def rhs(ps: ProblemSpec, u) -> np.ndarray:
    """Lap u - a (u - ubar) + |u|^{p-1} u."""
    u = check_field(ps.graph, u)
    return laplacian(ps.graph, u) - ps.a * (u - ps.ubar) + np.abs(u) ** (ps.p - 1) * u


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_LOW


def dopri_step(f, y: np.ndarray, k1: np.ndarray, h: float):
    """One DP5(4) step. Returns (y5, error estimate, f(y5))."""
    K = np.empty((7, y.size))
    K[0] = k1
    for i in range(1, 7):
        K[i] = f(y + h * (np.asarray(_A[i]) @ K[:i]))
    y5 = y + h * (_B[:6] @ K[:6])
    err = h * (_E @ K)
    return y5, err, K[6]


def _make_field_fn(ps: ProblemSpec):
    g = ps.graph
    L = (g.weights - np.diag(g.degree)) / g.mu[:, None]
    a, ubar, pm1 = ps.a, ps.ubar, ps.p - 1

    def f(y):
        return L @ y - a * (y - ubar) + np.abs(y) ** pm1 * y

    return f


def _initial_step(f, y, f0, rtol, atol, order=5):
    scale = atol + rtol * np.abs(y)
    d0 = np.max(np.abs(y) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y + h0 * f0
    with np.errstate(over="ignore", invalid="ignore"):
        d2 = np.max(np.abs(f(y1) - f0) / scale) / h0
    if not np.isfinite(d2):
        return h0 * 1e-3
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / order)
    return min(100 * h0, h1)


def integrate(ps: ProblemSpec, opts: IntegratorOptions | None = None) -> Trajectory:
    """Integrate from u0 until the horizon, convergence, or blow-up.

    Converged means ||u||_inf < conv_tol when ubar == 0, and a stalled
    vector field ||F(u)||_inf < conv_tol otherwise. BlowUp is declared
    when max|u| reaches u_max, or when the step controller is driven
    below h_min while the solution's growth time scale max|u| / max|F(u)|
    has itself collapsed to within 1e4 h_min (the solution is outrunning
    floating-point time resolution). Any other underflow is StepUnderflow.
    """
    opts = opts or IntegratorOptions()
    f = _make_field_fn(ps)
    rtol, atol = opts.rtol, opts.atol
    t_end = float(opts.t_horizon)
    y = ps.u0.astype(float).copy()

    times, states = [0.0], [y.copy()]
    n_acc = n_rej = 0

    def converged(y, fy):
        if ps.ubar == 0.0:
            return float(np.max(np.abs(y))) < opts.conv_tol
        return float(np.max(np.abs(fy))) < opts.conv_tol

    def finish(status, t, last_step):
        if times[-1] != t:
            times.append(t)
            states.append(y.copy())
        traj = _build_trajectory(ps, times, states, status, t, last_step, n_acc, n_rej, opts)
        if status is Status.BLOW_UP:
            traj.tail = _remaining_time(ps, float(np.max(np.abs(y))))
        traj.rtol = rtol
        return traj

    def underflow_status():
        peak = float(np.max(np.abs(y)))
        with np.errstate(over="ignore", invalid="ignore"):
            speed = float(np.max(np.abs(k1)))
        growth_scale = peak / speed if speed > 0 else math.inf
        if peak > float(np.max(np.abs(ps.u0))) and growth_scale < 1e4 * opts.h_min:
            return Status.BLOW_UP
        return Status.STEP_UNDERFLOW

    k1 = f(y)
    if converged(y, k1):
        return finish(Status.CONVERGED, 0.0, 0.0)

    h = _initial_step(f, y, k1, rtol, atol)
    t = 0.0
    err_old = 1e-4
    next_sample = opts.sample_interval
    rejected_last = False
    # PI controller constants (Hairer-Wanner DOPRI5 defaults)
    beta, expo1, safe, fac_min, fac_max = 0.04, 0.17, 0.9, 0.2, 10.0

    while True:
        if n_acc + n_rej >= opts.max_steps:
            raise ConvergenceError(f"integrator exceeded {opts.max_steps} steps at t={t}")
        h = min(h, t_end - t)
        landing = None
        if next_sample is not None and t + h >= next_sample * (1 - 1e-14):
            landing = next_sample
            h = next_sample - t
        if t + h >= t_end * (1 - 1e-14):
            landing = t_end
            h = t_end - t

        with np.errstate(over="ignore", invalid="ignore"):
            y_new, err_vec, k_new = dopri_step(f, y, k1, h)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
        if not math.isfinite(err) or not np.all(np.isfinite(y_new)):
            err = math.inf

        if err <= 1.0:
            t = landing if landing is not None else t + h
            y, k1 = y_new, k_new
            n_acc += 1
            if landing is not None and landing == next_sample:
                next_sample = next_sample + opts.sample_interval
            peak = float(np.max(np.abs(y)))
            if n_acc % opts.record_every == 0 or landing is not None:
                times.append(t)
                states.append(y.copy())
            if peak >= opts.u_max:
                return finish(Status.BLOW_UP, t, h)
            if converged(y, k1):
                return finish(Status.CONVERGED, t, h)
            if t >= t_end:
                return finish(Status.REACHED_HORIZON, t, h)
            fac = max(1.0 / fac_max, min(1.0 / fac_min, err**expo1 / err_old**beta / safe)) if err > 0 else 1.0 / fac_max
            h_next = h / fac
            if rejected_last:
                h_next = min(h_next, h)
            err_old = max(err, 1e-4)
            rejected_last = False
            if h_next < opts.h_min and landing is None:
                # accepted, but the controller now wants steps below the floor
                return finish(underflow_status(), t, h)
            h = h_next
        else:
            n_rej += 1
            rejected_last = True
            shrink = 0.2 if not math.isfinite(err) else max(fac_min, safe * err ** (-expo1))
            h_try = h * shrink
            if h_try < opts.h_min:
                return finish(underflow_status(), t, h)
            h = h_try


def _remaining_time(ps: ProblemSpec, peak: float) -> float:
    """Upper estimate of T_max - t once max|u| = peak, from (T-t) peak^{p-1} <= A s / (1 - e^{-(p-1) A s}).

    A = max_x (deg(x)/mu(x) + a(x)). Returns 0 when the envelope gives no finite bound.
    """
    g, pm1 = ps.graph, ps.p - 1
    A = float(np.max(g.degree / g.mu + ps.a))
    x = peak ** (-pm1)
    if A == 0.0:
        return x / pm1
    if A * x >= 1.0:
        return 0.0
    return -math.log1p(-A * x) / (pm1 * A)


def _build_trajectory(ps, times, states, status, t_detect, last_step, n_acc, n_rej, opts) -> Trajectory:
    T = np.array(times)
    S = np.array(states)
    traces = {
        "max_abs_u": np.max(np.abs(S), axis=1),
        "l2_norm": np.sqrt(np.abs(S) ** 2 @ ps.graph.mu),
    }
    if ps.ubar == 0.0:
        with np.errstate(over="ignore", invalid="ignore"):
            traces["J"] = np.array([energy_J(ps, s) for s in S])
            traces["N"] = np.array([nehari_N(ps, s) for s in S])
    return Trajectory(
        nodes=ps.graph.nodes,
        times=T,
        states=S,
        status=status,
        t_detect=float(t_detect),
        last_step=float(last_step),
        traces=traces,
        n_accepted=n_acc,
        n_rejected=n_rej,
        u_max=opts.u_max,
    )


def energy_trace(ps: ProblemSpec, traj: Trajectory) -> list[tuple[float, float, float, float]]:
    """(t, J, N, -int F(u)^2 dmu) per sample; the last entry is the exact dJ/dt along the flow."""
    if ps.ubar != 0.0:
        raise ValueError("energy trace is defined only for ubar = 0")
    if tuple(traj.nodes) != tuple(ps.graph.nodes):
        raise ValueError("trajectory was not produced on this problem's graph")
    mu = ps.graph.mu
    out = []
    for t, u in zip(traj.times, traj.states):
        F = rhs(ps, u)
        out.append((float(t), energy_J(ps, u), nehari_N(ps, u), -float(np.dot(mu, F * F))))
    return out


@dataclass(frozen=True)
class DecayCheck:
    applicable: bool
    reason: str
    epsilon0: float | None = None
    max_ratio: float | None = None
    passed: bool | None = None


def decay_envelope_check(ps: ProblemSpec, traj: Trajectory, pair: EigenPair, tol_env: float = 1e-6) -> DecayCheck:
    """Compare ||u(t)||_inf with mu_min^{-1/2} ||u0||_2 exp(-lambda_a t / 2)."""
    g = ps.graph
    if ps.ubar != 0.0:
        return DecayCheck(False, "requires ubar = 0")
    if not np.any(ps.a > 0):
        return DecayCheck(False, "requires a not identically 0")
    eps0 = epsilon0(pair.lambda_a, ps.p, g.mu_min, g.volume)
    l2 = math.sqrt(float(np.dot(g.mu, ps.u0**2)))
    if not l2 < eps0:
        return DecayCheck(False, f"||u0||_2 = {l2:.6g} is not below epsilon0 = {eps0:.6g}", epsilon0=eps0)
    if l2 == 0.0:
        return DecayCheck(True, "u0 == 0", epsilon0=eps0, max_ratio=0.0, passed=True)
    env = envelope(g.mu_min, l2, pair.lambda_a, traj.times)
    ratio = float(np.max(traj.max_abs / env))
    return DecayCheck(True, "ok", epsilon0=eps0, max_ratio=ratio, passed=ratio <= 1 + tol_env)


def envelope(mu_min: float, l2_u0: float, lambda_a: float, t) -> np.ndarray:
    return l2_u0 / math.sqrt(mu_min) * np.exp(-0.5 * lambda_a * np.asarray(t, dtype=float))


# -- trajectory CSV ---------------------------------------------------------

TRACE_COLUMNS = ("max_abs_u", "l2_norm", "J", "N")


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *(f"u_{x}" for x in traj.nodes), *TRACE_COLUMNS])
    for k, t in enumerate(traj.times):
        row = [repr(float(t)), *(repr(float(v)) for v in traj.states[k])]
        for name in TRACE_COLUMNS:
            col = traj.traces.get(name)
            row.append("" if col is None else repr(float(col[k])))
        w.writerow(row)
    return buf.getvalue()


def read_trajectory_csv(text: str) -> tuple[list[str], dict[str, np.ndarray]]:
    """Parse a trajectory CSV into (header, column -> array). Empty cells become NaN."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not rows[0]:
        raise ValueError("empty trajectory CSV")
    header = rows[0]
    body = [r for r in rows[1:] if r]
    if not body:
        raise ValueError("trajectory CSV has a header but no samples")
    cols: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        cols[name] = np.array([float(r[j]) if r[j] != "" else math.nan for r in body])
    return header, cols
