"""Clock trajectory unit and property tests."""

import math
import random

import pytest
from hypothesis import given, strategies as st

from afmsim.trajectory import AdmissibilityError, ClockTrajectory, DomainError


def make(knots, min_slope=0.0):
    return ClockTrajectory(knots, min_slope=min_slope)


# -- strategies --------------------------------------------------------------

@st.composite
def trajectories(draw):
    """Random valid trajectories: slopes strictly above a random floor."""
    min_slope = draw(st.floats(0.0, 2.0))
    t = draw(st.floats(-100.0, 100.0))
    ph = draw(st.floats(-100.0, 100.0))
    knots = [(t, ph)]
    for _ in range(draw(st.integers(1, 12))):
        dt = draw(st.floats(0.01, 20.0))
        slope = min_slope + draw(st.floats(0.05, 4.0))
        t += dt
        ph += dt * slope
        knots.append((t, ph))
    return ClockTrajectory(knots, min_slope=min_slope)


# -- eval --------------------------------------------------------------------

def test_eval_midpoint():
    assert make([(0, 0), (2, 4)]).eval(1.0) == 2.0


def test_eval_endpoint_exact():
    assert make([(-1, -0.9), (0, 0.1)]).eval(-1.0) == -0.9


def test_eval_initial_segment_boundary():
    # node with theta0=0.1 free-running at 1.1 before time zero: phase at -1
    # lands exactly on -1.0
    traj = ClockTrajectory.from_initial_conditions(0.1, -25.0, 1.1, 1.1, 2.0)
    assert traj.eval(-1.0) == pytest.approx(-1.0, abs=1e-12)


def test_eval_out_of_domain():
    traj = make([(0, 0), (2, 4)])
    with pytest.raises(DomainError):
        traj.eval(-0.001)
    with pytest.raises(DomainError):
        traj.eval(2.001)


def test_eval_at_every_knot_is_exact():
    knots = [(0.0, 0.1), (1.7, 3.3), (2.9, 7.123), (10.0, 22.0)]
    traj = make(knots)
    for t, ph in knots:
        assert traj.eval(t) == ph


# -- inverse -----------------------------------------------------------------

def test_inverse_midpoint():
    assert make([(0, 0), (2, 4)]).inverse(2.0) == 1.0


def test_inverse_endpoint():
    assert make([(0, 0.1), (10, 10.1)]).inverse(10.1) == 10.0


def test_inverse_out_of_range():
    traj = make([(0, 0.1), (10, 10.1)])
    with pytest.raises(DomainError):
        traj.inverse(0.0)
    with pytest.raises(DomainError):
        traj.inverse(10.2)


def test_round_trip_100_random_times():
    traj = make([(0, 0.5), (3, 4.0), (7, 5.1), (20, 33.0)])
    rng = random.Random(7)
    for _ in range(100):
        t = rng.uniform(0.0, 20.0)
        back = traj.inverse(traj.eval(t))
        assert math.isclose(back, t, rel_tol=1e-12, abs_tol=1e-15)


# -- append ------------------------------------------------------------------

def test_append_extends_domain():
    traj = make([(-3, -2), (0, 0.1)])
    assert traj.max_dom() == 0.0
    traj.append(5.0, 10.1)
    assert traj.max_dom() == 5.0
    assert traj.eval(5.0) == 10.1


def test_append_rejects_shallow_slope():
    traj = make([(0, 0), (1, 1)], min_slope=0.5)
    with pytest.raises(AdmissibilityError):
        traj.append(2.0, 1.4)  # slope 0.4 <= 0.5


def test_append_rejects_nonincreasing():
    traj = make([(0, 0), (1, 1)])
    with pytest.raises(ValueError):
        traj.append(1.0, 2.0)
    with pytest.raises(ValueError):
        traj.append(2.0, 1.0)


def test_append_prefix_stability():
    traj = make([(0, 0), (1, 1)])
    before = traj.knots()
    traj.append(2.0, 3.0)
    assert traj.knots()[:2] == before


# -- max_dom -----------------------------------------------------------------

def test_max_dom_fresh_initial_conditions():
    traj = ClockTrajectory.from_initial_conditions(0.1, -25.0, 1.1, 1.1, 2.0)
    assert traj.max_dom() == 2.0 / 1.1
    assert len(traj) == 3
    assert traj.eval(0.0) == 0.1
    assert traj.eval(traj.max_dom()) == 0.1 + 2.0


# -- constructor validation ----------------------------------------------------

def test_constructor_rejects_bad_knots():
    with pytest.raises(ValueError):
        ClockTrajectory([])
    with pytest.raises(ValueError):
        make([(0, 0), (0, 1)])
    with pytest.raises(ValueError):
        make([(0, 1), (1, 1)])
    with pytest.raises(AdmissibilityError):
        make([(0, 0), (1, 0.3)], min_slope=0.5)


def test_slope_at_is_right_continuous():
    traj = make([(0, 0), (1, 2), (3, 3)])
    assert traj.slope_at(0.5) == 2.0
    assert traj.slope_at(1.0) == 0.5  # knot takes the following segment
    assert traj.slope_at(3.0) == 0.5  # domain end takes the last segment


# -- properties ----------------------------------------------------------------

@given(trajectories(), st.data())
def test_strict_monotonicity(traj, data):
    lo, hi = traj.min_dom(), traj.max_dom()
    t1 = data.draw(st.floats(lo, hi))
    t2 = data.draw(st.floats(lo, hi))
    if abs(t2 - t1) < 1e-9 * max(1.0, abs(t1)):
        return  # interpolation cannot resolve sub-ulp phase gaps
    if t1 > t2:
        t1, t2 = t2, t1
    assert traj.eval(t1) < traj.eval(t2)


@given(trajectories())
def test_slope_floor_every_segment(traj):
    for t0, p0, t1, p1 in traj.segments():
        assert (p1 - p0) / (t1 - t0) > traj.min_slope


@given(trajectories(), st.data())
def test_round_trip_property(traj, data):
    t = data.draw(st.floats(traj.min_dom(), traj.max_dom()))
    assert math.isclose(traj.inverse(traj.eval(t)), t, rel_tol=1e-12, abs_tol=1e-9)
    ph = data.draw(st.floats(traj.phases[0], traj.phases[-1]))
    assert math.isclose(traj.eval(traj.inverse(ph)), ph, rel_tol=1e-12, abs_tol=1e-9)


@given(trajectories())
def test_eval_knots_exact_property(traj):
    for t, ph in traj.knots():
        assert traj.eval(t) == ph
        assert traj.inverse(ph) == t


def test_copy_is_independent():
    traj = make([(0, 0), (1, 1)])
    dup = traj.copy()
    dup.append(2.0, 3.0)
    assert len(traj) == 2
    assert len(dup) == 3


def test_compacted_merges_collinear_knots_only():
    traj = make([(0.0, 0.0), (1.0, 2.0), (2.0, 4.0), (3.0, 5.0)])
    slim = traj.compacted()
    assert slim.knots() == [(0.0, 0.0), (2.0, 4.0), (3.0, 5.0)]
    assert len(traj) == 4  # original untouched
    for t in (0.0, 0.5, 1.0, 1.7, 2.5, 3.0):
        assert slim.eval(t) == traj.eval(t)


def test_compacted_preserves_non_collinear():
    traj = make([(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)])
    assert traj.compacted().knots() == traj.knots()
