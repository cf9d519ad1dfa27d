"""Engine tests: frame counters, initialization, the loop, and its invariants."""

import random

import pytest

from afmsim.controllers import ControllerSpec, make_controllers
from afmsim.engine import (
    buffer_occupancy,
    compute_lambdas,
    frames_received,
    frames_sent,
    init_state,
    link_occupancy,
    measure,
    select_node,
    simulate,
    step,
)
from afmsim.trajectory import AdmissibilityError, ClockTrajectory, DomainError

from conftest import two_node_scenario


def line(slope, intercept, t_lo=-30.0, t_hi=30.0):
    """Straight-line trajectory theta(t) = intercept + slope * t."""
    return ClockTrajectory(
        [(t_lo, intercept + slope * t_lo), (t_hi, intercept + slope * t_hi)]
    )


# -- frame counters ------------------------------------------------------------

def test_frames_sent_unit_slope():
    assert frames_sent(line(1.0, 0.0), 0.0, 5.5) == 5


def test_frames_sent_empty_interval():
    traj = line(1.3, 0.7)
    assert frames_sent(traj, 3.3, 3.3) == 0


def test_frames_sent_offset_slope():
    # theta(t) = 0.1 + 1.4 t over (0, 10]: floor(14.1) - floor(0.1) = 14
    assert frames_sent(line(1.4, 0.1), 0.0, 10.0) == 14


def test_frames_sent_rejects_reversed_interval():
    with pytest.raises(ValueError):
        frames_sent(line(1.0, 0.0), 1.0, 0.0)


def test_frames_received_is_delayed_send_count():
    traj = line(1.7, 0.3)
    for s, t, lat in ((0.0, 7.0, 1.0), (2.5, 9.25, 2.25)):
        assert frames_received(traj, s, t, lat) == frames_sent(traj, s - lat, t - lat)


def test_link_occupancy_examples():
    assert link_occupancy(line(1.0, 0.5), 3.0, 1.0) == 1
    assert link_occupancy(line(2.0, 0.1), 2.0, 1.0) == 2


def test_link_occupancy_nonnegative_by_monotonicity():
    traj = line(0.31, 0.17)
    for t in (0.0, 1.1, 5.7, 20.0):
        assert link_occupancy(traj, t, 2.5) >= 0


def test_counters_out_of_domain():
    traj = line(1.0, 0.0, t_lo=0.0, t_hi=10.0)
    with pytest.raises(DomainError):
        link_occupancy(traj, 0.5, 1.0)


def test_buffer_occupancy_identical_clocks_is_constant():
    a, b = line(1.0, 0.5), line(1.0, 0.5)
    lam = 8
    values = {buffer_occupancy(a, b, lam, 1.0, t) for t in (0.2, 1.3, 4.9, 7.7)}
    assert values == {7}


# -- initialization --------------------------------------------------------------

def test_lambda_reference_triangle(triangle_cfg):
    sc = triangle_cfg.scenario
    state = init_state(sc, make_controllers(triangle_cfg.controller, 3))
    # hand arithmetic: 50 - floor(0.1 - omega_u_src) + floor(0.1)
    assert state.lam == {
        (1, 2): 51, (1, 3): 51,
        (2, 1): 52, (2, 3): 52,
        (3, 1): 52, (3, 2): 52,
    }


def test_lambda_two_identical_nodes(zero_spec):
    sc = two_node_scenario()
    state = init_state(sc, make_controllers(zero_spec, 2))
    # 7 - floor(-0.5) + floor(0.5) = 7 + 1 + 0
    assert state.lam == {(1, 2): 8, (2, 1): 8}


def test_initial_conditions_shape(triangle_cfg):
    sc = triangle_cfg.scenario
    state = init_state(sc, make_controllers(triangle_cfg.controller, 3))
    for i in (1, 2, 3):
        traj = state.trajectories[i]
        assert len(traj) == 3
        assert traj.min_dom() == sc.params.epoch
        assert traj.eval(0.0) == sc.params.theta0[i - 1]
        w1 = sc.params.omega_init1[i - 1]
        assert traj.max_dom() == sc.params.d / w1
        assert state.steps[i] == 0


def test_beta_at_zero_equals_beta0(triangle_cfg, zero_spec):
    for sc, spec in (
        (triangle_cfg.scenario, triangle_cfg.controller),
        (two_node_scenario(omega_u=(1.3, 0.9), theta0=(0.25, 0.75), beta0=11), zero_spec),
    ):
        state = init_state(sc, make_controllers(spec, sc.topology.n_nodes))
        for (a, b) in sc.topology.directed_links():
            link = sc.topology.links[(a, b)]
            occ = buffer_occupancy(
                state.trajectories[a], state.trajectories[b],
                state.lam[(a, b)], link.latency, 0.0, link.gearbox,
            )
            assert occ == sc.params.beta0[(a, b)]


def test_lambda_recomputation_matches(triangle_cfg):
    sc = triangle_cfg.scenario
    state = init_state(sc, make_controllers(triangle_cfg.controller, 3))
    assert compute_lambdas(sc, state.trajectories) == state.lam


def test_init_state_requires_one_controller_per_node(triangle_cfg):
    with pytest.raises(ValueError):
        init_state(triangle_cfg.scenario, make_controllers(triangle_cfg.controller, 2))


# -- measurement -----------------------------------------------------------------

def test_measure_ordering_and_values(triangle_cfg):
    sc = triangle_cfg.scenario
    state = init_state(sc, make_controllers(triangle_cfg.controller, 3))
    y = measure(state, 1, 0.0)
    assert y == ((2, 50), (3, 50))


# -- stepping --------------------------------------------------------------------

def test_first_step_selects_fastest_initial_clock(triangle_cfg):
    # domains end at d/omega_init1: 1.818, 1.428, 1.0 -> node 3
    sc = triangle_cfg.scenario
    state = init_state(sc, make_controllers(triangle_cfg.controller, 3))
    assert select_node(state) == 3
    rec = step(state)
    assert rec.node == 3 and rec.step == 0


def test_zero_controller_extends_by_p_over_omega(zero_spec):
    sc = two_node_scenario(omega_u=(1.0, 1.0))
    state = init_state(sc, make_controllers(zero_spec, 2))
    for _ in range(6):
        before = {i: state.trajectories[i].max_dom() for i in (1, 2)}
        rec = step(state)
        after = {i: state.trajectories[i].max_dom() for i in (1, 2)}
        grown = rec.node
        assert after[grown] - before[grown] == pytest.approx(10.0 / 1.0, rel=1e-15)
        other = 3 - grown
        assert after[other] == before[other]
        assert rec.correction == 0.0


def test_step_grows_exactly_one_domain(triangle_cfg):
    sc = triangle_cfg.scenario
    state = init_state(sc, make_controllers(triangle_cfg.controller, 3))
    for _ in range(10):
        before = {i: state.trajectories[i].max_dom() for i in (1, 2, 3)}
        rec = step(state)
        after = {i: state.trajectories[i].max_dom() for i in (1, 2, 3)}
        assert after[rec.node] - before[rec.node] == pytest.approx(
            sc.params.p / rec.frequency, rel=1e-15
        )
        for other in set((1, 2, 3)) - {rec.node}:
            assert after[other] == before[other]


def test_admissibility_halt_on_first_violating_step():
    sc = two_node_scenario(omega_u=(1.1, 1.1))
    # forced correction of -2 drives frequency to -0.9 <= 0.1
    spec = ControllerSpec(kind="zero", clamp=(-2.0, -2.0))
    with pytest.raises(AdmissibilityError) as err:
        simulate(sc, spec, 50.0, check_admissibility=False)
    assert err.value.step == 0
    assert err.value.node is not None
    assert err.value.frequency == pytest.approx(-0.9)


def test_static_admissibility_check_blocks_run():
    sc = two_node_scenario(omega_u=(1.1, 1.1))
    spec = ControllerSpec(kind="zero", clamp=(-2.0, -2.0))
    with pytest.raises(AdmissibilityError):
        simulate(sc, spec, 50.0)


# -- full runs -------------------------------------------------------------------

def test_run_covers_t_max(triangle_cfg):
    trace = simulate(triangle_cfg.scenario, triangle_cfg.controller, 100.0)
    for i in (1, 2, 3):
        assert trace.knots[i][-1][0] >= 100.0
    assert trace.grid[0] == 0.0
    assert trace.grid[-1] == 100.0


def test_schedule_consistency(triangle_cfg):
    sc = triangle_cfg.scenario
    trace = simulate(sc, triangle_cfg.controller, 150.0)
    trajs = {i: ClockTrajectory(trace.knots[i], sc.params.omega_min) for i in (1, 2, 3)}
    p, d = sc.params.p, sc.params.d
    for rec in trace.samples:
        th0 = sc.params.theta0[rec.node - 1]
        assert abs(trajs[rec.node].eval(rec.t_sample) - (th0 + rec.step * p)) <= 1e-9
        assert abs(trajs[rec.node].eval(rec.t_apply) - (th0 + rec.step * p + d)) <= 1e-9


def test_one_knot_per_step_piecewise_constant_frequency(triangle_cfg):
    trace = simulate(triangle_cfg.scenario, triangle_cfg.controller, 100.0)
    per_node = {i: 0 for i in (1, 2, 3)}
    for rec in trace.samples:
        per_node[rec.node] += 1
    for i in (1, 2, 3):
        assert len(trace.knots[i]) == 3 + per_node[i]


def test_recorded_frequency_matches_trajectory_slope(triangle_cfg):
    sc = triangle_cfg.scenario
    trace = simulate(sc, triangle_cfg.controller, 80.0)
    trajs = {i: ClockTrajectory(trace.knots[i], sc.params.omega_min) for i in (1, 2, 3)}
    for rec in trace.samples:
        # slope immediately after actuation is the recorded frequency
        assert trajs[rec.node].slope_at(rec.t_apply) == pytest.approx(rec.frequency, rel=1e-15)


def test_conservation_and_lambda_invariance_at_random_times(triangle_cfg):
    sc = triangle_cfg.scenario
    ctrls = make_controllers(triangle_cfg.controller, 3)
    state = init_state(sc, ctrls)
    while min(t.max_dom() for t in state.trajectories.values()) < 120.0:
        step(state)
    rng = random.Random(99)
    from afmsim.engine import scaled_floor

    for (a, b) in sc.topology.edges():
        lat_ab = sc.topology.links[(a, b)].latency
        lat_ba = sc.topology.links[(b, a)].latency
        for _ in range(200):
            t = rng.uniform(0.0, 120.0)
            b_ab = buffer_occupancy(state.trajectories[a], state.trajectories[b], state.lam[(a, b)], lat_ab, t)
            b_ba = buffer_occupancy(state.trajectories[b], state.trajectories[a], state.lam[(b, a)], lat_ba, t)
            g_ab = link_occupancy(state.trajectories[a], t, lat_ab)
            g_ba = link_occupancy(state.trajectories[b], t, lat_ba)
            assert b_ab + g_ab + b_ba + g_ba == state.lam[(a, b)] + state.lam[(b, a)]
            # direct lambda recomputation at t
            recomputed = (
                b_ab
                - scaled_floor(1, state.trajectories[a].eval(t - lat_ab))
                + scaled_floor(1, state.trajectories[b].eval(t))
            )
            assert recomputed == state.lam[(a, b)]


def test_underflow_recorded_not_raised(zero_spec):
    # frequency mismatch with no control: the fast node drains its buffer
    sc = two_node_scenario(omega_u=(1.0, 2.0), beta0=3)
    trace = simulate(sc, zero_spec, 40.0)
    assert trace.fatal
    kinds = {(ev.kind, ev.link) for ev in trace.fatal_events}
    assert ("underflow", (1, 2)) in kinds
    assert trace.first_fatal.occupancy < 0
    # run still covers the horizon
    assert trace.grid[-1] == 40.0


def test_overflow_recorded_with_bounded_capacity(zero_spec):
    sc = two_node_scenario(omega_u=(1.0, 2.0), beta0=3, capacity=5)
    trace = simulate(sc, zero_spec, 40.0)
    kinds = {(ev.kind, ev.link) for ev in trace.fatal_events}
    assert ("overflow", (2, 1)) in kinds  # slow node's buffer fills


def test_tie_break_rules_agree(triangle_cfg):
    a = simulate(triangle_cfg.scenario, triangle_cfg.controller, 60.0, tie_break="min")
    b = simulate(triangle_cfg.scenario, triangle_cfg.controller, 60.0, tie_break="max")
    assert a.knots == b.knots


def test_omega_series_right_continuous(triangle_cfg):
    sc = triangle_cfg.scenario
    trace = simulate(sc, triangle_cfg.controller, 30.0)
    trajs = {i: ClockTrajectory(trace.knots[i], sc.params.omega_min) for i in (1, 2, 3)}
    for i in (1, 2, 3):
        for idx, t in enumerate(trace.grid):
            assert trace.omega[i][idx] == trajs[i].slope_at(t)


def test_simulate_argument_validation(triangle_cfg):
    with pytest.raises(ValueError):
        simulate(triangle_cfg.scenario, triangle_cfg.controller, 0.0)
    with pytest.raises(ValueError):
        simulate(triangle_cfg.scenario, triangle_cfg.controller, 10.0, grid_dt=0.0)
    with pytest.raises(ValueError):
        simulate(triangle_cfg.scenario, triangle_cfg.controller, 10.0, tie_break="random")
