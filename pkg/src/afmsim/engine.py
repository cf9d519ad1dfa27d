"""Simulation engine: exact frame counters and the least-advanced-first loop.

Frame counts are pure functions of the clock trajectories. A directed link
(i, j) carries frames from i into the elastic buffer at j; its occupancy is

    beta_ij(t) = floor(g * theta_i(t - l_ij)) - floor(g * theta_j(t)) + lam_ij

with the conserved integer ``lam_ij`` fixed by the initial conditions. All
floors go through ``scaled_floor`` so that every consumer (initialization,
occupancy queries, the frame-level oracle's calibration) shares one rounding
path; this is what makes beta(0) == beta0 and the cross-checks integer-exact.

The loop always extends the trajectory whose domain ends earliest: sample at
the phase ``k*p`` ticks past theta0, apply the correction ``d`` ticks later,
append one knot per step. Tie-breaking cannot change the result; it is
configurable only so tests can demonstrate that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .controllers import Controller, ControllerSpec, is_admissible, make_controllers
from .topology import Scenario
from .trajectory import AdmissibilityError, ClockTrajectory

Gearbox = Fraction | int


def scaled_floor(gearbox: Gearbox, phase: float) -> int:
    """Floor of the gearbox-scaled phase; the one rounding path for all counters."""
    if gearbox == 1:
        return math.floor(phase)
    return math.floor(phase * gearbox.numerator / gearbox.denominator)


def frames_sent(traj: ClockTrajectory, s: float, t: float, gearbox: Gearbox = 1) -> int:
    """Frames sent on the half-open wall-time interval (s, t]."""
    if t < s:
        raise ValueError(f"interval end {t!r} before start {s!r}")
    return scaled_floor(gearbox, traj.eval(t)) - scaled_floor(gearbox, traj.eval(s))


def frames_received(
    traj_src: ClockTrajectory, s: float, t: float, latency: float, gearbox: Gearbox = 1
) -> int:
    """Frames received over (s, t]: the sent count shifted by the link latency."""
    return frames_sent(traj_src, s - latency, t - latency, gearbox)


def link_occupancy(
    traj: ClockTrajectory, t: float, latency: float, gearbox: Gearbox = 1
) -> int:
    """Frames in flight at time t on a link fed by ``traj``.

    A frame exactly at the link entrance counts as on the link; one exactly
    at the exit does not (it is already in the buffer).
    """
    return scaled_floor(gearbox, traj.eval(t)) - scaled_floor(gearbox, traj.eval(t - latency))


def buffer_occupancy(
    traj_src: ClockTrajectory,
    traj_dst: ClockTrajectory,
    lam: int,
    latency: float,
    t: float,
    gearbox: Gearbox = 1,
) -> int:
    """Occupancy of the elastic buffer at the destination of a directed link."""
    return (
        scaled_floor(gearbox, traj_src.eval(t - latency))
        - scaled_floor(gearbox, traj_dst.eval(t))
        + lam
    )


@dataclass(frozen=True)
class FatalEvent:
    """A buffer bound violation; fatal for the modeled system, recorded and
    survived by the simulator so post-mortem traces exist."""

    kind: str  # "overflow" | "underflow"
    link: tuple[int, int]
    t: float
    occupancy: int


@dataclass(frozen=True)
class SampleRecord:
    """One controller firing: measurement at ``t_sample``, new frequency in
    force from ``t_apply`` on."""

    node: int
    step: int
    t_sample: float
    measurement: tuple[tuple[int, int], ...]
    t_apply: float
    correction: float
    frequency: float


@dataclass
class SystemState:
    """Everything the loop reads and writes while extending trajectories."""

    scenario: Scenario
    trajectories: dict[int, ClockTrajectory]
    controllers: dict[int, Controller]
    lam: dict[tuple[int, int], int]
    steps: dict[int, int]
    samples: list[SampleRecord] = field(default_factory=list)
    history: dict[int, list[tuple[tuple[int, int], ...]]] = field(default_factory=dict)
    fatal_candidates: list[FatalEvent] = field(default_factory=list)
    tie_break: str = "min"


def compute_lambdas(
    scenario: Scenario, trajectories: dict[int, ClockTrajectory]
) -> dict[tuple[int, int], int]:
    """Conserved per-link constants from the initial conditions.

    Evaluates theta through the trajectories themselves (not a closed form)
    so the floors here cancel exactly against the ones in later occupancy
    queries.
    """
    topo = scenario.topology
    beta0 = scenario.params.beta0
    lam: dict[tuple[int, int], int] = {}
    for (a, b) in topo.directed_links():
        link = topo.links[(a, b)]
        g = link.gearbox
        lam[(a, b)] = (
            beta0[(a, b)]
            - scaled_floor(g, trajectories[a].eval(-link.latency))
            + scaled_floor(g, trajectories[b].eval(0.0))
        )
    return lam


def init_state(
    scenario: Scenario,
    controllers: list[Controller] | dict[int, Controller],
    tie_break: str = "min",
) -> SystemState:
    """Fresh state at the epoch: three-knot trajectories, conserved link
    constants, zeroed step counters."""
    if tie_break not in ("min", "max"):
        raise ValueError(f"tie_break must be 'min' or 'max', got {tie_break!r}")
    par = scenario.params
    trajectories = {
        i: ClockTrajectory.from_initial_conditions(
            par.theta0[i - 1],
            par.epoch,
            par.omega_init2[i - 1],
            par.omega_init1[i - 1],
            float(par.d),
            min_slope=par.omega_min,
        )
        for i in scenario.topology.nodes()
    }
    if isinstance(controllers, dict):
        ctrl = dict(controllers)
    else:
        ctrl = {i: c for i, c in enumerate(controllers, start=1)}
    if sorted(ctrl) != list(scenario.topology.nodes()):
        raise ValueError("need exactly one controller per node")
    return SystemState(
        scenario=scenario,
        trajectories=trajectories,
        controllers=ctrl,
        lam=compute_lambdas(scenario, trajectories),
        steps={i: 0 for i in scenario.topology.nodes()},
        history={i: [] for i in scenario.topology.nodes()},
        tie_break=tie_break,
    )


def select_node(state: SystemState) -> int:
    """The node whose trajectory ends earliest; ties go to the smallest id
    (largest under the alternate rule, which provably cannot matter)."""
    if state.tie_break == "min":
        key = lambda i: (state.trajectories[i].max_dom(), i)
    else:
        key = lambda i: (state.trajectories[i].max_dom(), -i)
    return min(state.trajectories, key=key)


def measure(state: SystemState, i: int, t: float) -> tuple[tuple[int, int], ...]:
    """Occupancies of node i's incoming buffers at wall time t, ordered by
    ascending neighbor id.

    A domain error here means the scheduling order was violated; the epoch
    constraint guarantees in-domain lookups for a correct loop.
    """
    topo = state.scenario.topology
    traj_i = state.trajectories[i]
    out = []
    for j in topo.neighbors(i):
        link = topo.links[(j, i)]
        occ = buffer_occupancy(
            state.trajectories[j], traj_i, state.lam[(j, i)], link.latency, t, link.gearbox
        )
        out.append((j, occ))
    return tuple(out)


def _record_bound_violations(
    state: SystemState, t: float, link: tuple[int, int], occ: int
) -> None:
    cap = state.scenario.topology.buffer_capacity
    if occ < 0:
        state.fatal_candidates.append(FatalEvent("underflow", link, t, occ))
    elif cap is not None and occ > cap:
        state.fatal_candidates.append(FatalEvent("overflow", link, t, occ))


def step(state: SystemState) -> SampleRecord:
    """One loop iteration: pick the least-advanced node and extend it."""
    return _step_node(state, select_node(state))


def _step_node(state: SystemState, i: int) -> SampleRecord:
    par = state.scenario.params
    traj = state.trajectories[i]
    k = state.steps[i]
    s = traj.max_dom()
    phase_s = traj.eval(s)  # knot lookup: exactly theta0 + k*p + d
    t_sample = traj.inverse(phase_s - par.d)
    y = measure(state, i, t_sample)
    for j, occ in y:
        _record_bound_violations(state, t_sample, (j, i), occ)
    correction = state.controllers[i].update(y)
    frequency = correction + par.omega_u[i - 1]
    if frequency <= par.omega_min:
        raise AdmissibilityError(
            f"admissibility violated at node {i} step {k}: correction {correction!r}"
            f" + omega_u {par.omega_u[i - 1]!r} = {frequency!r}"
            f" <= omega_min {par.omega_min!r}",
            node=i,
            step=k,
            frequency=frequency,
        )
    traj.append(s + par.p / frequency, phase_s + par.p)
    state.steps[i] = k + 1
    record = SampleRecord(
        node=i,
        step=k,
        t_sample=t_sample,
        measurement=y,
        t_apply=s,
        correction=correction,
        frequency=frequency,
    )
    state.samples.append(record)
    state.history[i].append(y)
    return record


@dataclass
class Trace:
    """Everything a run leaves behind: final knots, per-sample controller
    records, resampled series on the output grid, and fatal events."""

    knots: dict[int, list[tuple[float, float]]]
    samples: list[SampleRecord]
    grid: list[float]
    theta: dict[int, list[float]]
    omega: dict[int, list[float]]
    beta: dict[tuple[int, int], list[int]]
    gamma: dict[tuple[int, int], list[int]]
    fatal_events: list[FatalEvent]
    fingerprint: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def fatal(self) -> bool:
        return bool(self.fatal_events)

    @property
    def first_fatal(self) -> FatalEvent | None:
        return self.fatal_events[0] if self.fatal_events else None


def _dedupe_fatal(candidates: list[FatalEvent]) -> list[FatalEvent]:
    """Earliest event per (kind, link), ordered by time."""
    first: dict[tuple[str, tuple[int, int]], FatalEvent] = {}
    for ev in sorted(candidates, key=lambda e: (e.t, e.kind, e.link)):
        first.setdefault((ev.kind, ev.link), ev)
    return sorted(first.values(), key=lambda e: (e.t, e.link, e.kind))


def build_trace(state: SystemState, t_max: float, grid_dt: float) -> Trace:
    """Resample the finished state onto the output grid and collect events."""
    topo = state.scenario.topology
    grid: list[float] = []
    k = 0
    while (t := k * grid_dt) <= t_max:
        grid.append(t)
        k += 1
    theta = {}
    omega = {}
    for i in topo.nodes():
        traj = state.trajectories[i]
        theta[i] = [traj.eval(t) for t in grid]
        omega[i] = [traj.slope_at(t) for t in grid]
    beta: dict[tuple[int, int], list[int]] = {}
    gamma: dict[tuple[int, int], list[int]] = {}
    for (a, b) in topo.directed_links():
        link = topo.links[(a, b)]
        lam = state.lam[(a, b)]
        bseries = []
        gseries = []
        for t in grid:
            occ = buffer_occupancy(
                state.trajectories[a], state.trajectories[b], lam, link.latency, t, link.gearbox
            )
            bseries.append(occ)
            gseries.append(link_occupancy(state.trajectories[a], t, link.latency, link.gearbox))
            _record_bound_violations(state, t, (a, b), occ)
        beta[(a, b)] = bseries
        gamma[(a, b)] = gseries
    return Trace(
        knots={i: state.trajectories[i].knots() for i in topo.nodes()},
        samples=list(state.samples),
        grid=grid,
        theta=theta,
        omega=omega,
        beta=beta,
        gamma=gamma,
        fatal_events=_dedupe_fatal(state.fatal_candidates),
    )


def simulate(
    scenario: Scenario,
    controller: ControllerSpec | list[Controller] | dict[int, Controller],
    t_max: float,
    *,
    grid_dt: float = 0.5,
    tie_break: str = "min",
    check_admissibility: bool = True,
) -> Trace:
    """Run until every trajectory covers [epoch, t_max]; return the trace.

    With ``check_admissibility`` the controller spec is statically vetted
    before the run; pass False to force a run and rely on the per-step check,
    which halts with AdmissibilityError on the first violating step. Buffer
    bound violations do not halt the run: they are recorded as fatal events
    and the trace is delivered to t_max regardless.
    """
    if t_max <= 0.0:
        raise ValueError(f"t_max must be positive, got {t_max!r}")
    if grid_dt <= 0.0:
        raise ValueError(f"grid_dt must be positive, got {grid_dt!r}")
    par = scenario.params
    if isinstance(controller, ControllerSpec):
        if check_admissibility:
            verdict = is_admissible(controller, par.omega_u, par.omega_min)
            if not verdict.ok:
                raise AdmissibilityError(f"controller rejected: {verdict.witness}")
        controllers: list[Controller] | dict[int, Controller] = make_controllers(
            controller, scenario.topology.n_nodes
        )
    else:
        controllers = controller
    state = init_state(scenario, controllers, tie_break=tie_break)
    while True:
        i = select_node(state)
        if state.trajectories[i].max_dom() >= t_max:
            break
        _step_node(state, i)
    return build_trace(state, t_max, grid_dt)
