import math

import numpy as np
import pytest

from netblowup.dynamics import (
    IntegratorOptions,
    Status,
    decay_envelope_check,
    dopri_step,
    energy_trace,
    integrate,
    read_trajectory_csv,
    rhs,
    trajectory_csv,
)
from netblowup.graph import path_graph, single_node
from netblowup.problem import ProblemSpec
from netblowup.spectral import principal_eigenpair
from netblowup.wellfn import Classification, classify

from _support import SUITE_SEED, random_graph, random_potential


def one(a, p, u0, ubar=0.0):
    return ProblemSpec(single_node(), [a], p, [u0], ubar=ubar)


def test_rhs_examples():
    assert rhs(one(0.0, 2.0, 1.0), [1.0])[0] == 1.0
    assert rhs(one(1.0, 2.0, 1.0), [1.0])[0] == 0.0
    ps = ProblemSpec(path_graph(2), [0.0, 0.0], 2.0, [0.0, 1.0])
    np.testing.assert_array_equal(rhs(ps, [0.0, 1.0]), [1.0, 0.0])


def test_rhs_with_offset():
    ps = one(2.0, 3.0, 0.0, ubar=0.5)
    assert rhs(ps, [1.0])[0] == pytest.approx(-2.0 * 0.5 + 1.0)


def test_logistic_decay_closed_form():
    tr = integrate(one(1.0, 2.0, 0.5), IntegratorOptions(t_horizon=40.0))
    sel = tr.times <= 5.0
    exact = 1.0 / (1.0 + np.exp(tr.times[sel]))
    assert np.max(np.abs(tr.states[sel, 0] - exact)) < 1e-6
    assert tr.status is Status.CONVERGED
    assert tr.traces["max_abs_u"][-1] < 1e-9
    assert tr.times[0] == 0.0 and np.all(np.diff(tr.times) > 0)


def test_logistic_horizon_five_is_not_converged():
    tr = integrate(one(1.0, 2.0, 0.5), IntegratorOptions(t_horizon=5.0))
    assert tr.status is Status.REACHED_HORIZON and tr.t_detect == 5.0


def test_quadratic_blowup():
    tr = integrate(one(0.0, 2.0, 1.0), IntegratorOptions(t_horizon=5.0, u_max=1e8))
    assert tr.status is Status.BLOW_UP
    assert 0.99 < tr.t_detect < 1.0
    assert tr.traces["max_abs_u"][-1] >= 1e8
    lo, hi = tr.bracket
    assert lo <= 1.0 <= hi + 1e-9


def test_zero_data_converges_at_zero():
    tr = integrate(ProblemSpec(path_graph(3), [1.0, 0.0, 1.0], 2.0, [0.0, 0.0, 0.0]))
    assert tr.status is Status.CONVERGED and tr.t_detect == 0.0
    assert tr.times.tolist() == [0.0]


def test_underflow_classified_as_blowup_when_growth_outruns_resolution():
    # u' = u^3 from u0 = 1 blows up at t = 1/2; a huge u_max forces the step-size exit
    tr = integrate(one(0.0, 3.0, 1.0), IntegratorOptions(t_horizon=1.0, u_max=1e300, h_min=1e-12))
    assert tr.status is Status.BLOW_UP
    assert tr.t_detect == pytest.approx(0.5, abs=1e-6)


def test_options_validation():
    with pytest.raises(ValueError):
        IntegratorOptions(rtol=1e-14)
    with pytest.raises(ValueError):
        IntegratorOptions(t_horizon=-1.0)
    with pytest.raises(ValueError):
        IntegratorOptions(record_every=0)
    assert IntegratorOptions(t_horizon=3.0).h_min == pytest.approx(3e-14)


def test_record_every_thins_samples():
    ps = one(1.0, 2.0, 0.5)
    full = integrate(ps, IntegratorOptions(t_horizon=5.0))
    thin = integrate(ps, IntegratorOptions(t_horizon=5.0, record_every=4))
    assert thin.times.size < full.times.size
    assert thin.times[-1] == full.times[-1]


def test_sample_interval_lands_on_grid():
    tr = integrate(one(1.0, 2.0, 0.5), IntegratorOptions(t_horizon=2.0, sample_interval=0.25))
    for k in range(1, 9):
        assert np.any(np.isclose(tr.times, 0.25 * k, rtol=0, atol=1e-14))


def test_fixed_step_order_five():
    f = lambda y: y * y - y  # noqa: E731
    exact = 1.0 / (1.0 + math.exp(5.0))
    errs = []
    for m in (10, 20, 40, 80):
        h, y = 5.0 / m, np.array([0.5])
        for _ in range(m):
            y, _, _ = dopri_step(f, y, f(y), h)
        errs.append(abs(y[0] - exact))
    orders = [math.log2(e0 / e1) for e0, e1 in zip(errs, errs[1:])]
    assert min(orders) > 4.5


def test_adaptive_order_from_rtol_sweep():
    ps = one(1.0, 2.0, 0.5)
    steps, errs = [], []
    for rtol in (1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11):
        tr = integrate(ps, IntegratorOptions(rtol=rtol, atol=1e-16, t_horizon=5.0))
        errs.append(np.max(np.abs(tr.states[:, 0] - 1 / (1 + np.exp(tr.times)))))
        steps.append(tr.n_accepted)
    order = -np.polyfit(np.log(steps), np.log(errs), 1)[0]
    assert order >= 4.0


def test_energy_trace_examples():
    ps0 = ProblemSpec(path_graph(3), [1.0, 1.0, 1.0], 3.0, [0.0, 0.0, 0.0])
    assert all(J == 0 and N == 0 for _, J, N, _ in energy_trace(ps0, integrate(ps0)))

    ps = one(1.0, 3.0, 0.5)
    rows = energy_trace(ps, integrate(ps, IntegratorOptions(t_horizon=30.0)))
    J = np.array([r[1] for r in rows])
    N = np.array([r[2] for r in rows])
    assert np.all(np.diff(J) < 0) and np.all(N > 0)


def test_energy_slope_matches_dissipation():
    rng = np.random.default_rng(SUITE_SEED + 20)
    g = random_graph(rng, 5)
    ps = ProblemSpec(g, random_potential(rng, 5), 2.5, rng.uniform(0.1, 0.6, 5))
    tr = integrate(ps, IntegratorOptions(t_horizon=3.0, sample_interval=0.01, record_every=10**6))
    rows = np.array(energy_trace(ps, tr))
    t, J, D = rows[:, 0], rows[:, 1], rows[:, 3]
    slope = np.diff(J) / np.diff(t)
    mid = 0.5 * (D[1:] + D[:-1])
    smooth = np.abs(mid) > 1e-8
    assert np.all(np.abs(slope[smooth] - mid[smooth]) <= 0.05 * np.abs(mid[smooth]))


def test_energy_trace_rejects_offset_and_foreign_trajectory():
    ps = one(1.0, 3.0, 0.5)
    tr = integrate(ps, IntegratorOptions(t_horizon=1.0))
    with pytest.raises(ValueError):
        energy_trace(one(1.0, 3.0, 0.5, ubar=0.1), tr)
    with pytest.raises(ValueError):
        energy_trace(ProblemSpec(path_graph(2), [1.0, 1.0], 3.0, [0.1, 0.1]), tr)


def test_decay_envelope_single_node():
    ps = one(1.0, 2.0, 0.2)
    pair = principal_eigenpair(ps.graph, ps.a)
    rep = decay_envelope_check(ps, integrate(ps, IntegratorOptions(t_horizon=30.0)), pair)
    assert rep.applicable and rep.passed and rep.max_ratio <= 1.0
    # the decay threshold for this instance is exactly 0.25, so u0 = 0.25 fails the strict gate
    at_edge = one(1.0, 2.0, 0.25)
    rep = decay_envelope_check(at_edge, integrate(at_edge, IntegratorOptions(t_horizon=1.0)), pair)
    assert not rep.applicable and rep.epsilon0 == pytest.approx(0.25)
    zero = one(1.0, 2.0, 0.0)
    rep = decay_envelope_check(zero, integrate(zero), pair)
    assert rep.passed and rep.max_ratio == 0.0


def test_energy_non_increasing_within_band():
    rng = np.random.default_rng(SUITE_SEED + 21)
    for _ in range(15):
        n = int(rng.integers(1, 6))
        g = random_graph(rng, n)
        ps = ProblemSpec(g, random_potential(rng, n), float(rng.uniform(1.5, 3.5)), rng.normal(0, 0.8, n))
        opts = IntegratorOptions(t_horizon=2.0, u_max=1e6)
        tr = integrate(ps, opts)
        J = tr.traces["J"]
        band = 10 * (opts.atol + opts.rtol * np.abs(J[1:]))
        assert np.all(np.diff(J) <= band)


def test_mass_inequality_at_sampled_states():
    rng = np.random.default_rng(SUITE_SEED + 22)
    for _ in range(15):
        n = int(rng.integers(1, 6))
        g = random_graph(rng, n)
        ps = ProblemSpec(g, random_potential(rng, n), float(rng.uniform(1.5, 3.5)), rng.uniform(0, 1.5, n))
        tr = integrate(ps, IntegratorOptions(t_horizon=1.0, u_max=1e4))
        a0, vol = float(np.max(ps.a)), g.volume
        for u in tr.states:
            if np.any(u < 0):
                continue
            m = float(np.dot(g.mu, u))
            lhs = float(np.dot(g.mu, rhs(ps, u)))
            bound = vol ** (1 - ps.p) * m**ps.p - a0 * m
            assert lhs >= bound - 1e-10 * max(1.0, abs(bound))


def test_well_invariance_small_suite():
    rng = np.random.default_rng(SUITE_SEED + 23)
    checked = 0
    while checked < 8:
        n = int(rng.integers(1, 5))
        g = random_graph(rng, n)
        ps = ProblemSpec(g, random_potential(rng, n), float(rng.uniform(1.5, 3.5)), rng.uniform(0, 0.3, n))
        w = classify(ps)
        if w.classification is not Classification.IN_WELL:
            continue
        checked += 1
        tr = integrate(ps, IntegratorOptions(t_horizon=400.0))
        assert tr.status is Status.CONVERGED
        assert np.all(tr.traces["J"] < w.depth_r)
        zero = ~np.any(tr.states, axis=1)
        assert np.all((tr.traces["N"] > 0) | zero)


def test_offset_run_skips_energy_and_stalls():
    ps = ProblemSpec(path_graph(3), [2.0, 2.0, 2.0], 2.0, [0.1, 0.2, 0.3], ubar=0.1)
    tr = integrate(ps, IntegratorOptions(t_horizon=50.0))
    assert "J" not in tr.traces and "N" not in tr.traces
    assert tr.status is Status.CONVERGED
    assert np.max(np.abs(rhs(ps, tr.final))) < 1e-9


def test_csv_round_trip_and_header():
    ps = ProblemSpec(path_graph(2), [1.0, 0.5], 2.0, [0.3, 0.1])
    tr = integrate(ps, IntegratorOptions(t_horizon=1.0))
    text = trajectory_csv(tr)
    assert text.splitlines()[0] == "t,u_x1,u_x2,max_abs_u,l2_norm,J,N"
    header, cols = read_trajectory_csv(text)
    np.testing.assert_array_equal(cols["t"], tr.times)
    np.testing.assert_array_equal(cols["u_x2"], tr.states[:, 1])
    np.testing.assert_array_equal(cols["J"], tr.traces["J"])
    assert trajectory_csv(integrate(ps, IntegratorOptions(t_horizon=1.0))) == text


def test_csv_offset_leaves_energy_cells_empty():
    ps = ProblemSpec(path_graph(2), [1.0, 0.5], 2.0, [0.3, 0.1], ubar=0.2)
    tr = integrate(ps, IntegratorOptions(t_horizon=0.5))
    _, cols = read_trajectory_csv(trajectory_csv(tr))
    assert np.all(np.isnan(cols["J"]))


@pytest.mark.parametrize("text", ["", "t,u_x1\n"])
def test_csv_reader_rejects_empty(text):
    with pytest.raises(ValueError):
        read_trajectory_csv(text)
