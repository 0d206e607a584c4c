"""Preset runs behind ``netblowup reproduce``.

Checks are split into three kinds:

* ``published``    topology-independent numbers that must match the published values;
* ``stand-in``     numbers that depend on the G25 stand-in adjacency, compared with its own analysis;
* ``closed-form``  single-node cases with exact solutions.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import presets
from .blowup import AnalysisReport, analyze, fit_blowup_rate
from .dynamics import Status, Trajectory, decay_envelope_check, envelope, integrate, trajectory_csv
from .problemfile import LoadedProblem, problem_from_dict
from .spectral import EigenPair, epsilon0
from .svgplot import line_chart

PUBLISHED_LAMBDA_A = 1.9116
PUBLISHED_L2_U0 = 0.0304
PUBLISHED_EPSILON0 = 0.0365
PUBLISHED_C1 = 35.3553
PUBLISHED_MASS = 36.5
PUBLISHED_T_BOUND = 0.6962
PUBLISHED_OBSERVED_BLOWUP = 0.0045


@dataclass
class Check:
    name: str
    kind: str
    value: float | bool | str | None
    expected: float | bool | str | None = None
    tol: float | None = None
    passed: bool = True
    note: str = ""


def _close(name, kind, value, expected, tol, note="") -> Check:
    return Check(name, kind, value, expected, tol, abs(value - expected) <= tol, note)


def run_report(traj: Trajectory) -> dict:
    return {
        "status": traj.status.value,
        "t_detect": traj.t_detect,
        "bracket": list(traj.bracket),
        "final_max_abs_u": float(traj.traces["max_abs_u"][-1]),
        "final_l2_norm": float(traj.traces["l2_norm"][-1]),
        "n_samples": int(traj.times.size),
        "n_accepted": traj.n_accepted,
        "n_rejected": traj.n_rejected,
    }


def _write(out_dir: Path, name: str, text: str):
    (out_dir / name).write_text(text)


def _simulate_and_analyze(lp: LoadedProblem, out_dir: Path, stem: str):
    traj = integrate(lp.spec, lp.options)
    report = analyze(lp.spec, equilibrium=lp.equilibrium)
    _write(out_dir, f"{stem}_trajectory.csv", trajectory_csv(traj))
    _write(out_dir, f"{stem}_run.json", json.dumps(run_report(traj), indent=2) + "\n")
    _write(out_dir, f"{stem}_analysis.json", report.to_json())
    return traj, report


def _node_series(traj: Trajectory, names) -> dict:
    return {f"u_{x}": traj.states[:, traj.nodes.index(x)] for x in names}


def reproduce_g25_decay(out_dir: Path) -> list[Check]:
    lp = problem_from_dict(presets.G25_DECAY)
    ps = lp.spec
    traj, report = _simulate_and_analyze(lp, out_dir, "g25-decay")
    g = ps.graph
    l2 = report.thresholds["l2_norm_u0"]
    eps_published = epsilon0(PUBLISHED_LAMBDA_A, ps.p, g.mu_min, g.volume)
    lam = report.eigen["lambda_a"]
    pair = EigenPair(lam, np.array([report.eigen["phi"][x] for x in g.nodes]))
    env = decay_envelope_check(ps, traj, pair)

    series = _node_series(traj, ["x1", "x2", "x20", "x21"])
    series["envelope"] = envelope(g.mu_min, l2, lam, traj.times)
    _write(out_dir, "g25-decay.svg", line_chart(traj.times, series, title="G25 stand-in: decay (p = 2)"))

    return [
        _close("||u0||_L2", "published", l2, PUBLISHED_L2_U0, 1e-4),
        _close("epsilon0 at lambda_a = 1.9116", "published", eps_published, PUBLISHED_EPSILON0, 1e-3),
        Check("||u0||_L2 < epsilon0 (published lambda_a)", "published", l2 < eps_published, True, None, l2 < eps_published),
        Check("lambda_a", "stand-in", lam, None, None, report.eigen["residual"] < 1e-10,
              "first eigenvalue of the stand-in; the published 1.9116 belongs to the unpublished G25"),
        Check("epsilon0", "stand-in", report.thresholds["epsilon0"], None, None, True),
        Check("||u0||_L2 < epsilon0 (stand-in)", "stand-in", report.thresholds["l2_decay_applies"], True, None,
              bool(report.thresholds["l2_decay_applies"])),
        Check("status", "stand-in", traj.status.value, Status.CONVERGED.value, None, traj.status == Status.CONVERGED),
        Check("max ||u||_inf / envelope", "stand-in", env.max_ratio, 1.0, 1e-6, bool(env.passed)),
    ]


def reproduce_g25_blowup(out_dir: Path) -> list[Check]:
    lp = problem_from_dict(presets.G25_BLOWUP)
    ps = lp.spec
    traj, report = _simulate_and_analyze(lp, out_dir, "g25-blowup")
    mass = report.criteria["mass"]
    series = _node_series(traj, ["x1", "x9"])
    _write(out_dir, "g25-blowup.svg", line_chart(traj.times, series, logy=True, title="G25 stand-in: blow-up (p = 3)"))

    # sup-norm comparison: u <= w with w' = w^p, w(0) = max u0, so T_max >= 1 / ((p-1) max(u0)^(p-1))
    t_lower = 1.0 / ((ps.p - 1) * float(np.max(ps.u0)) ** (ps.p - 1))
    bracket_hi = traj.bracket[1]
    checks = [
        Check("int u0 dmu", "published", mass.witness, PUBLISHED_MASS, 0.0, mass.witness == PUBLISHED_MASS),
        _close("c1", "published", mass.threshold, PUBLISHED_C1, 1e-3),
        _close("mass-criterion t_bound", "published", mass.t_bound, PUBLISHED_T_BOUND, 1e-3),
        Check("status", "stand-in", traj.status.value, Status.BLOW_UP.value, None, traj.status == Status.BLOW_UP),
        Check("t_detect <= t_bound", "stand-in", traj.t_detect, mass.t_bound, None, traj.t_detect <= mass.t_bound),
        Check("T_max lower bound <= blow-up bracket", "stand-in", bracket_hi, t_lower, None, t_lower <= bracket_hi,
              "comparison with w' = w^p from max u0"),
        Check("t_detect / published observation", "stand-in", traj.t_detect / PUBLISHED_OBSERVED_BLOWUP, None, None, True,
              "topology factor K; the published 0.0045 lies below the comparison lower bound for this data"),
    ]
    if report.best_bound is not None:
        checks.append(Check("best_bound", "stand-in", report.best_bound, None, None, traj.t_detect <= report.best_bound))
    return checks


def reproduce_single_node_suite(out_dir: Path) -> list[Check]:
    checks: list[Check] = []
    for name, problem, eq in presets.SINGLE_NODE_SUITE:
        lp = problem_from_dict({**problem, "equilibrium": eq})
        traj, report = _simulate_and_analyze(lp, out_dir, name)
        blows = traj.status == Status.BLOW_UP
        _write(out_dir, f"{name}.svg", line_chart(traj.times, {"u_x1": traj.states[:, 0]}, logy=blows, title=name))
        if name == "logistic-decay":
            sel = traj.times <= 5.0
            err = float(np.max(np.abs(traj.states[sel, 0] - 1.0 / (1.0 + np.exp(traj.times[sel])))))
            checks.append(Check("logistic: max error on [0,5]", "closed-form", err, 0.0, 1e-6, err < 1e-6))
            checks.append(Check("logistic: status", "closed-form", traj.status.value, "Converged", None,
                                traj.status == Status.CONVERGED))
        elif name == "quadratic-blowup":
            checks.append(Check("u'=u^2: t_detect in (0.99, 1.0)", "closed-form", traj.t_detect, 1.0, None,
                                0.99 < traj.t_detect < 1.0))
            fit = fit_blowup_rate(traj, 2.0)
            checks.append(_close("u'=u^2: t_hat", "closed-form", fit.t_hat, 1.0, 0.005))
            checks.append(_close("u'=u^2: rate limit", "closed-form", fit.limit_estimate, 1.0, 0.05))
        else:
            exact = 0.5 * math.log(4.0 / 3.0)
            fit = fit_blowup_rate(traj, 3.0)
            checks.append(_close("u'=u^3-u: t_hat", "closed-form", fit.t_hat, exact, 0.01 * exact))
            checks.append(_close("u'=u^3-u: rate limit", "closed-form", fit.limit_estimate, 0.5, 0.025))
            checks.append(_close("u'=u^3-u: best_bound", "closed-form", report.best_bound, exact, 1e-9))
            applicable = all(c.applicable for c in report.criteria.values())
            checks.append(Check("u'=u^3-u: all criteria applicable", "closed-form", applicable, True, None, applicable))
            checks.append(Check("u'=u^3-u: classification", "closed-form", report.well["classification"],
                                "Exterior", None, report.well["classification"] == "Exterior"))
    return checks


RUNNERS = {
    "g25-decay": reproduce_g25_decay,
    "g25-blowup": reproduce_g25_blowup,
    "single-node-suite": reproduce_single_node_suite,
}


def reproduce(preset: str, out_dir: Path) -> dict:
    if preset not in RUNNERS:
        raise KeyError(preset)
    out_dir.mkdir(parents=True, exist_ok=True)
    checks = RUNNERS[preset](out_dir)
    summary = {
        "preset": preset,
        "topology_note": (
            "G25 runs use a documented stand-in adjacency; stand-in rows are compared with "
            "the stand-in's own analysis, not with published figures"
            if preset.startswith("g25") else ""
        ),
        "all_passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def load_report(path: Path) -> AnalysisReport:
    return AnalysisReport.from_json(Path(path).read_text())
