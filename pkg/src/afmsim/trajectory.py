"""Piecewise-linear, strictly increasing clock phase functions.

A node's clock is stored as its phase history: a list of knots
(wall-time seconds, local-tick phase) joined by straight segments.
Segment slopes are instantaneous frequencies and must stay strictly
above a configured floor, which keeps the function invertible and rules
out Zeno behavior in the loop that extends these trajectories.
"""

from __future__ import annotations

from bisect import bisect_right
from collections.abc import Iterable, Iterator


class DomainError(ValueError):
    """Evaluation or inversion outside the stored knot range."""


class AdmissibilityError(RuntimeError):
    """A frequency fell to or below the configured minimum."""

    def __init__(
        self,
        message: str,
        *,
        node: int | None = None,
        step: int | None = None,
        frequency: float | None = None,
    ):
        super().__init__(message)
        self.node = node
        self.step = step
        self.frequency = frequency


class ClockTrajectory:
    """Clock phase as a piecewise-linear, strictly increasing function of time.

    Knot times and phases are kept in parallel sorted lists. Lookups keep a
    cursor hint so the near-sequential access pattern of the simulation loop
    costs O(1) amortized; cold lookups fall back to binary search.
    Evaluation at a knot returns the stored knot value exactly.
    """

    __slots__ = ("times", "phases", "min_slope", "_hint")

    def __init__(self, knots: Iterable[tuple[float, float]], min_slope: float = 0.0):
        times: list[float] = []
        phases: list[float] = []
        for t, ph in knots:
            times.append(float(t))
            phases.append(float(ph))
        if not times:
            raise ValueError("a trajectory needs at least one knot")
        for i in range(len(times) - 1):
            dt = times[i + 1] - times[i]
            dph = phases[i + 1] - phases[i]
            if dt <= 0.0:
                raise ValueError(f"knot times must be strictly increasing (index {i + 1})")
            if dph <= 0.0:
                raise ValueError(f"knot phases must be strictly increasing (index {i + 1})")
            if dph / dt <= min_slope:
                raise AdmissibilityError(
                    f"segment slope {dph / dt!r} is not above the minimum {min_slope!r}"
                )
        self.times = times
        self.phases = phases
        self.min_slope = min_slope
        self._hint = 0

    @classmethod
    def from_initial_conditions(
        cls,
        theta0: float,
        epoch: float,
        omega_init2: float,
        omega_init1: float,
        delay: float,
        min_slope: float = 0.0,
    ) -> "ClockTrajectory":
        """History covering [epoch, 0] at slope ``omega_init2`` and the stretch
        up to the first actuation at slope ``omega_init1``.

        The first actuation lands ``delay`` ticks past ``theta0``, i.e. at
        time ``delay / omega_init1``.
        """
        return cls(
            [
                (epoch, theta0 + omega_init2 * epoch),
                (0.0, theta0),
                (delay / omega_init1, theta0 + delay),
            ],
            min_slope=min_slope,
        )

    # -- lookups -----------------------------------------------------------

    def _segment(self, xs: list[float], x: float) -> int:
        n = len(xs)
        i = self._hint
        if i > n - 2:
            i = n - 2
        if not (xs[i] <= x <= xs[i + 1]):
            i = bisect_right(xs, x) - 1
            if i > n - 2:
                i = n - 2
            elif i < 0:
                i = 0
        self._hint = i
        return i

    def eval(self, t: float) -> float:
        """Phase at wall time ``t`` by linear interpolation between knots."""
        times = self.times
        if t < times[0] or t > times[-1]:
            raise DomainError(f"time {t!r} outside domain [{times[0]!r}, {times[-1]!r}]")
        phases = self.phases
        if len(times) == 1:
            return phases[0]
        i = self._segment(times, t)
        if t == times[i]:
            return phases[i]
        if t == times[i + 1]:
            return phases[i + 1]
        return phases[i] + (t - times[i]) * (phases[i + 1] - phases[i]) / (times[i + 1] - times[i])

    def inverse(self, phase: float) -> float:
        """The unique wall time at which the clock shows ``phase``."""
        phases = self.phases
        if phase < phases[0] or phase > phases[-1]:
            raise DomainError(
                f"phase {phase!r} outside range [{phases[0]!r}, {phases[-1]!r}]"
            )
        times = self.times
        if len(times) == 1:
            return times[0]
        i = self._segment(phases, phase)
        if phase == phases[i]:
            return times[i]
        if phase == phases[i + 1]:
            return times[i + 1]
        return times[i] + (phase - phases[i]) * (times[i + 1] - times[i]) / (phases[i + 1] - phases[i])

    def slope_at(self, t: float) -> float:
        """Instantaneous frequency at ``t``, right-continuous at knots."""
        times = self.times
        if t < times[0] or t > times[-1]:
            raise DomainError(f"time {t!r} outside domain [{times[0]!r}, {times[-1]!r}]")
        if len(times) == 1:
            raise DomainError("slope undefined for a single-knot trajectory")
        i = bisect_right(times, t) - 1
        if i > len(times) - 2:
            i = len(times) - 2
        phases = self.phases
        return (phases[i + 1] - phases[i]) / (times[i + 1] - times[i])

    # -- growth ------------------------------------------------------------

    def append(self, t_next: float, phase_next: float) -> None:
        """Add a knot at the end; rejects non-monotone input and slopes at or
        below the minimum."""
        last_t = self.times[-1]
        last_ph = self.phases[-1]
        if t_next <= last_t:
            raise ValueError(f"new knot time {t_next!r} must exceed {last_t!r}")
        if phase_next <= last_ph:
            raise ValueError(f"new knot phase {phase_next!r} must exceed {last_ph!r}")
        slope = (phase_next - last_ph) / (t_next - last_t)
        if slope <= self.min_slope:
            raise AdmissibilityError(
                f"appended slope {slope!r} is not above the minimum {self.min_slope!r}",
                frequency=slope,
            )
        self.times.append(t_next)
        self.phases.append(phase_next)

    # -- views -------------------------------------------------------------

    def max_dom(self) -> float:
        """Latest wall time at which the trajectory is defined."""
        return self.times[-1]

    def min_dom(self) -> float:
        return self.times[0]

    def knots(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.phases))

    def segments(self) -> Iterator[tuple[float, float, float, float]]:
        """Yield (t0, phase0, t1, phase1) for each linear piece in order."""
        times, phases = self.times, self.phases
        for i in range(len(times) - 1):
            yield times[i], phases[i], times[i + 1], phases[i + 1]

    def copy(self) -> "ClockTrajectory":
        dup = ClockTrajectory.__new__(ClockTrajectory)
        dup.times = list(self.times)
        dup.phases = list(self.phases)
        dup.min_slope = self.min_slope
        dup._hint = 0
        return dup

    def compacted(self, slope_tol: float = 0.0) -> "ClockTrajectory":
        """Copy with collinear interior knots merged.

        Off the hot path by design: merging can shift interpolated values by
        an ulp, so the engine never compacts and traces stay reproducible.
        """
        times, phases = self.times, self.phases
        if len(times) < 3:
            return self.copy()
        kept = [(times[0], phases[0])]
        for i in range(1, len(times) - 1):
            t0, p0 = kept[-1]
            s_in = (phases[i] - p0) / (times[i] - t0)
            s_out = (phases[i + 1] - phases[i]) / (times[i + 1] - times[i])
            if abs(s_out - s_in) > slope_tol:
                kept.append((times[i], phases[i]))
        kept.append((times[-1], phases[-1]))
        return ClockTrajectory(kept, min_slope=self.min_slope)

    def __len__(self) -> int:
        return len(self.times)

    def __repr__(self) -> str:
        return (
            f"ClockTrajectory({len(self.times)} knots, "
            f"dom=[{self.times[0]!r}, {self.times[-1]!r}], min_slope={self.min_slope!r})"
        )
