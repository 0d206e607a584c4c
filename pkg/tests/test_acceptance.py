"""Acceptance suite: ten end-to-end criteria at their stated tolerances.

Each test records its criterion number and a one-line detail; conftest.py
prints a PASS/FAIL line per criterion at the end of the pytest run. The
module also runs standalone with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import functools
import math
import time

import numpy as np
import pytest

from netblowup.blowup import analyze, energy_bound_proof, energy_bound_statement, energy_c3, fit_blowup_rate
from netblowup.dynamics import IntegratorOptions, Status, integrate
from netblowup.graph import lp_norm, single_node
from netblowup.presets import G25_BLOWUP, G25_DECAY, SINGLE_NODE_SUITE
from netblowup.problem import ProblemSpec
from netblowup.problemfile import problem_from_dict
from netblowup.spectral import epsilon0, principal_eigenpair, symmetrized
from netblowup.wellfn import Classification, classify, lambda_minimizer, nehari_scale, well_depth

from _support import SUITE_SEED, grid_well_depth, random_graph, random_potential


@pytest.fixture
def crit(record_property):
    def mark(number: int, title: str):
        record_property("criterion", number)
        record_property("title", title)
        return lambda detail: record_property("detail", detail)
    return mark


# -- shared suites -----------------------------------------------------------


def _suite_problem(rng, n_max=6):
    n = int(rng.integers(1, n_max + 1))
    g = random_graph(rng, n)
    return g, random_potential(rng, n), float(rng.uniform(1.5, 3.5)), rng.uniform(0.05, 1.0, n)


@functools.lru_cache(maxsize=None)
def well_suite():
    """50 InWell and 50 Exterior instances with their trajectories and analyses."""
    rng = np.random.default_rng(SUITE_SEED)
    t0 = time.perf_counter()
    inwell, exterior = [], []
    while len(inwell) < 50 or len(exterior) < 50:
        g, a, p, d = _suite_problem(rng)
        base = ProblemSpec(g, a, p, d)
        Lam, _ = lambda_minimizer(base)
        star = nehari_scale(base, d)
        want_in = len(inwell) < 50 and (len(exterior) >= 50 or rng.random() < 0.5)
        factor = rng.uniform(0.1, 0.99) if want_in else rng.uniform(1.05, 3.0)
        ps = base.with_u0(factor * star * d)
        w = classify(ps, Lambda=Lam)
        if w.classification is Classification.IN_WELL and len(inwell) < 50:
            traj = integrate(ps, IntegratorOptions(t_horizon=4000.0))
            inwell.append((ps, w, traj))
        elif w.classification is Classification.EXTERIOR and len(exterior) < 50:
            traj = integrate(ps, IntegratorOptions(t_horizon=200.0, u_max=1e8))
            exterior.append((ps, w, traj))
    return inwell, exterior, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def positivity_suite():
    rng = np.random.default_rng(SUITE_SEED + 1)
    out = []
    for _ in range(100):
        g, a, p, _ = _suite_problem(rng)
        u0 = rng.uniform(0.0, 2.5, g.n) * (rng.random(g.n) < 0.7)
        ps = ProblemSpec(g, a, p, u0)
        out.append((ps, integrate(ps, IntegratorOptions(t_horizon=3.0, u_max=1e8))))
    return out


def closed_form_runs():
    runs = {}
    for name, problem, eq in SINGLE_NODE_SUITE:
        lp = problem_from_dict({**problem, "equilibrium": eq})
        runs[name] = (lp, integrate(lp.spec, lp.options))
    return runs


# -- criteria ----------------------------------------------------------------


def test_criterion_01_mass_bound_network_numbers(crit):
    note = crit(1, "mass criterion: c1, int u0 dmu, t_bound on the 25-node blow-up data")
    t0 = time.perf_counter()
    rep = analyze(problem_from_dict(G25_BLOWUP).spec)
    elapsed = time.perf_counter() - t0
    m = rep.criteria["mass"]
    note(f"c1={m.threshold:.6f} mass={m.witness} t_bound={m.t_bound:.6f} in {elapsed:.3f}s")
    assert m.applicable
    assert abs(m.threshold - 35.3553) <= 1e-3
    assert m.witness == 36.5
    assert abs(m.t_bound - 0.6962) <= 1e-3
    assert elapsed < 1.0


def test_criterion_02_decay_threshold_network_numbers(crit):
    note = crit(2, "L2 norm of decay data and epsilon0 at the published lambda_a")
    ps = problem_from_dict(G25_DECAY).spec
    g = ps.graph
    l2 = lp_norm(g, ps.u0, 2)
    eps = epsilon0(1.9116, ps.p, g.mu_min, g.volume)
    note(f"||u0||_2={l2:.6f} epsilon0={eps:.6f}")
    assert abs(l2 - 0.0304) <= 1e-4
    assert abs(eps - 0.0365) <= 1e-3


def test_criterion_03_eigen_oracle(crit):
    note = crit(3, "principal eigenpair vs dense symmetric eigensolve on 50 random graphs")
    rng = np.random.default_rng(SUITE_SEED + 3)
    t0 = time.perf_counter()
    worst_lam = worst_phi = 0.0
    min_phi = math.inf
    for _ in range(50):
        g = random_graph(rng, int(rng.integers(1, 11)))
        a = random_potential(rng, g.n)
        pair = principal_eigenpair(g, a)
        w, V = np.linalg.eigh(symmetrized(g, a))
        phi = V[:, 0] / np.sqrt(g.mu)
        phi = phi * np.sign(phi[0]) / math.sqrt(float(np.dot(g.mu, phi * phi)))
        worst_lam = max(worst_lam, abs(pair.lambda_a - w[0]))
        worst_phi = max(worst_phi, float(np.max(np.abs(pair.phi - phi))))
        min_phi = min(min_phi, float(np.min(pair.phi)))
    elapsed = time.perf_counter() - t0
    note(f"max |dlambda|={worst_lam:.2e} max |dphi|={worst_phi:.2e} min phi={min_phi:.3f} in {elapsed:.2f}s")
    assert worst_lam <= 1e-8 and worst_phi <= 1e-8
    assert min_phi > 0
    assert elapsed < 10.0


def test_criterion_04_closed_form_dynamics(crit):
    note = crit(4, "closed-form single-node dynamics")
    t0 = time.perf_counter()
    runs = closed_form_runs()
    _, logistic = runs["logistic-decay"]
    sel = logistic.times <= 5.0
    err = float(np.max(np.abs(logistic.states[sel, 0] - 1 / (1 + np.exp(logistic.times[sel])))))
    _, quad = runs["quadratic-blowup"]
    _, cubic = runs["cubic-blowup"]
    t_hat = fit_blowup_rate(cubic, 3.0).t_hat
    exact = 0.5 * math.log(4 / 3)
    elapsed = time.perf_counter() - t0
    note(f"logistic err={err:.2e}; u'=u^2 t_detect={quad.t_detect:.9f}; "
         f"u'=u^3-u t_hat={t_hat:.8f} (exact {exact:.8f}); {elapsed:.2f}s")
    assert err < 1e-6
    assert quad.status is Status.BLOW_UP and 0.99 < quad.t_detect < 1.0
    assert abs(t_hat - exact) <= 0.01 * exact
    assert elapsed < 5.0


def test_criterion_05_blowup_rate(crit):
    note = crit(5, "blow-up rate: median (t_hat - t) (max u)^(p-1) vs 1/(p-1)")
    runs = closed_form_runs()
    out = []
    ok = True
    for name, p in (("quadratic-blowup", 2.0), ("cubic-blowup", 3.0)):
        fit = fit_blowup_rate(runs[name][1], p)
        target = 1 / (p - 1)
        ok &= abs(fit.limit_estimate - target) <= 0.05 * target
        out.append(f"{name} {fit.limit_estimate:.6f} (target {target})")
    note("; ".join(out))
    assert ok


def test_criterion_06_potential_well(crit):
    note = crit(6, "Lambda and well depth: single node and grid oracle on 10 graphs with n <= 3")
    one = ProblemSpec(single_node(), [1.0], 3.0, [0.0])
    Lam, _ = lambda_minimizer(one)
    r = well_depth(one)
    rng = np.random.default_rng(SUITE_SEED + 6)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 4))
        g = random_graph(rng, n)
        a = random_potential(rng, n)
        p = float(rng.uniform(1.5, 4.0))
        depth = well_depth(ProblemSpec(g, a, p, np.zeros(n)))
        worst = max(worst, abs(depth - grid_well_depth(g, a, p)))
    note(f"Lambda={Lam!r} r={r!r} max |r - grid|={worst:.2e}")
    assert abs(Lam - 1.0) <= 1e-8
    assert abs(r - 0.25) <= 1e-6
    assert worst <= 1e-4


def test_criterion_07_well_behaviour_suite(crit):
    note = crit(7, "50 InWell reach Converged (J non-increasing, N > 0); 50 Exterior reach BlowUp")
    inwell, exterior, elapsed = well_suite()
    bad_in = 0
    for ps, w, traj in inwell:
        J, N = traj.traces["J"], traj.traces["N"]
        band = 10 * (1e-12 + 1e-9 * np.abs(J[1:]))
        zero = ~np.any(traj.states, axis=1)
        good = (traj.status is Status.CONVERGED and np.all(np.diff(J) <= band)
                and np.all((N > 0) | zero) and np.all(J < w.depth_r))
        bad_in += not good
    bad_ext = sum(traj.status is not Status.BLOW_UP for _, _, traj in exterior)
    note(f"InWell failures {bad_in}/50, Exterior failures {bad_ext}/50, suite built in {elapsed:.1f}s")
    assert len(inwell) == 50 and len(exterior) == 50
    assert bad_in == 0 and bad_ext == 0
    assert elapsed < 60.0


def test_criterion_08_comparison_and_positivity(crit):
    note = crit(8, "comparison on 100 ordered pairs; positivity on 100 nonnegative runs")
    rng = np.random.default_rng(SUITE_SEED + 8)
    opts = IntegratorOptions(t_horizon=2.0, u_max=1e6, sample_interval=0.02, record_every=10**9)
    violations = shared_total = 0
    for _ in range(100):
        g, a, p, _ = _suite_problem(rng)
        u0 = rng.normal(0.0, 1.0, g.n)
        v0 = u0 - np.abs(rng.normal(0.0, 0.5, g.n)) * (rng.random(g.n) < 0.8)
        ps = ProblemSpec(g, a, p, u0)
        tu, tv = integrate(ps, opts), integrate(ps.with_u0(v0), opts)
        shared, iu, iv = np.intersect1d(tu.times, tv.times, return_indices=True)
        shared_total += shared.size
        u, v = tu.states[iu], tv.states[iv]
        tol = 1e-6 * (1 + np.max(np.abs(u), axis=1))
        violations += int(np.any(v > u + tol[:, None]))
    worst = 0.0
    for ps, traj in positivity_suite():
        scale = 1 + np.max(np.abs(traj.states), axis=1)
        worst = min(worst, float(np.min(traj.states.min(axis=1) / scale)))
    note(f"ordering violations {violations}/100 over {shared_total} shared samples; "
         f"worst normalized minimum {worst:.2e}")
    assert violations == 0
    assert worst >= -1e-8


def test_criterion_09_bound_soundness(crit):
    note = crit(9, "t_detect <= best_bound + bracket width wherever a criterion applies and blow-up occurs")
    cases = []
    inwell, exterior, _ = well_suite()
    cases += [(ps, traj, None) for ps, _, traj in inwell + exterior]
    cases += [(ps, traj, None) for ps, traj in positivity_suite()]
    for lp, traj in closed_form_runs().values():
        cases.append((lp.spec, traj, lp.equilibrium))
    lp = problem_from_dict(G25_BLOWUP)
    cases.append((lp.spec, integrate(lp.spec, lp.options), None))

    checked = violations = 0
    for ps, traj, eq in cases:
        if traj.status is not Status.BLOW_UP:
            continue
        rep = analyze(ps, equilibrium=eq)
        if rep.best_bound is None:
            continue
        checked += 1
        lo, hi = traj.bracket
        violations += traj.t_detect > rep.best_bound + (hi - lo)
    note(f"{checked} blow-up runs with an applicable bound, {violations} violations")
    assert checked > 0
    assert violations == 0


def test_criterion_10_energy_bound_forms(crit):
    note = crit(10, "energy bound, statement form vs proof form, 100 random tuples")
    rng = np.random.default_rng(SUITE_SEED + 10)
    worst = 0.0
    for _ in range(100):
        p, vol, l2 = rng.uniform(1.1, 6.0), rng.uniform(1.0, 100.0), rng.uniform(0.01, 20.0)
        J = rng.uniform(0.0, 1.0) * energy_c3(p, vol, l2)
        a, b = energy_bound_statement(p, vol, l2, J), energy_bound_proof(p, vol, l2, J)
        worst = max(worst, abs(a - b) / abs(b))
    note(f"max relative difference {worst:.2e}")
    assert worst <= 1e-10


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
