"""Closed-loop simulation of the vehicle pair tracking a target.

Vehicles are single integrators driven by the distance-only control law. The
loop is integrated with classical fixed-step RK4; at every stage the controller
is re-evaluated from measurements synthesized at the stage positions. The
target follows a prescribed law of time, so its stage positions are exact.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Union

from . import analysis
from .controller import (
    ControlComponents,
    FormationGoal,
    Gains,
    Measurements,
    control_law,
)
from .geometry import BinocularFrame, GeometryError, Side, Vec2, global_to_local

#: Abort when the half-baseline drops below this fraction of ``c_star``.
COINCIDENCE_RATIO = 1e-12


class SimulationAbort(RuntimeError):
    """The closed loop left the controller's domain; ``trace`` holds the records so far."""

    def __init__(self, message: str, t: float, trace: "Trace | None" = None):
        super().__init__(f"t={t:.6g}: {message}")
        self.t = t
        self.trace = trace


class SimState(NamedTuple):
    t: float
    p_l: Vec2
    p_r: Vec2
    p_t: Vec2


# -- target trajectories -----------------------------------------------------


@dataclass(frozen=True)
class Stationary:
    kind = "stationary"

    def position(self, t: float, p0: Vec2) -> Vec2:
        return Vec2(*p0)

    def velocity(self, t: float, p_t: Vec2) -> Vec2:
        return Vec2(0.0, 0.0)

    @property
    def speed_bound(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Circular:
    """Uniform motion on a circle; positive ``speed`` is counter-clockwise."""

    center: Vec2
    radius: float
    speed: float
    kind = "circular"

    def __post_init__(self):
        object.__setattr__(self, "center", Vec2(*self.center))
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValueError(f"circle radius must be positive, got {self.radius}")
        if not math.isfinite(self.speed):
            raise ValueError("circle speed must be finite")

    def position(self, t: float, p0: Vec2) -> Vec2:
        theta0 = math.atan2(p0[1] - self.center.y, p0[0] - self.center.x)
        theta = theta0 + self.speed / self.radius * t
        return Vec2(self.center.x + self.radius * math.cos(theta),
                    self.center.y + self.radius * math.sin(theta))

    def velocity(self, t: float, p_t: Vec2) -> Vec2:
        rx = p_t[0] - self.center.x
        ry = p_t[1] - self.center.y
        n = math.hypot(rx, ry)
        if n == 0.0:
            return Vec2(0.0, 0.0)
        return Vec2(-self.speed * ry / n, self.speed * rx / n)

    @property
    def speed_bound(self) -> float:
        return abs(self.speed)


@dataclass(frozen=True)
class Waypoints:
    """Constant-speed polyline through ``points``; the target stops at the last one.

    The target starts at ``points[0]`` regardless of the scenario's initial
    target position.
    """

    points: tuple[Vec2, ...]
    speed: float
    kind = "waypoints"
    _cum: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(Vec2(*p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("a waypoint trajectory needs at least two points")
        if not (math.isfinite(self.speed) and self.speed > 0.0):
            raise ValueError(f"waypoint speed must be positive, got {self.speed}")
        cum = [0.0]
        for a, b in zip(pts, pts[1:]):
            seg = math.hypot(b.x - a.x, b.y - a.y)
            if seg == 0.0:
                raise ValueError("consecutive waypoints must be distinct")
            cum.append(cum[-1] + seg)
        object.__setattr__(self, "_cum", tuple(cum))

    def _segment(self, t: float) -> tuple[int, float]:
        s = max(t, 0.0) * self.speed
        if s >= self._cum[-1]:
            return len(self.points) - 1, 0.0
        i = bisect.bisect_right(self._cum, s) - 1
        return i, s - self._cum[i]

    def position(self, t: float, p0: Vec2) -> Vec2:
        i, along = self._segment(t)
        a = self.points[i]
        if i == len(self.points) - 1:
            return a
        b = self.points[i + 1]
        f = along / (self._cum[i + 1] - self._cum[i])
        return Vec2(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))

    def velocity(self, t: float, p_t: Vec2) -> Vec2:
        i, _ = self._segment(t)
        if i == len(self.points) - 1:
            return Vec2(0.0, 0.0)
        a, b = self.points[i], self.points[i + 1]
        seg = self._cum[i + 1] - self._cum[i]
        return Vec2(self.speed * (b.x - a.x) / seg, self.speed * (b.y - a.y) / seg)

    @property
    def speed_bound(self) -> float:
        return self.speed


TargetTrajectory = Union[Stationary, Circular, Waypoints]


def target_velocity(traj: TargetTrajectory, t: float, p_t: Vec2) -> Vec2:
    return traj.velocity(t, p_t)


# -- scenario and trace ------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    initial: SimState
    goal: FormationGoal
    gains: Gains
    trajectory: TargetTrajectory = Stationary()
    dt: float = 0.01
    t_end: float = 100.0
    seed: int = 0
    decimate: int = 10
    name: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end >= self.initial.t):
            raise ValueError("t_end must be finite and not before the initial time")
        if self.t_end > self.initial.t and self.dt > self.t_end - self.initial.t:
            raise ValueError("dt must not exceed the simulated time span")
        if self.gains.max * self.dt >= 0.1:
            raise ValueError(
                f"dt={self.dt} too large for gains (need max gain * dt < 0.1)"
            )
        if self.decimate < 1:
            raise ValueError("decimate must be >= 1")
        BinocularFrame(self.initial.p_l, self.initial.p_r)

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.initial.t) / self.dt))


TRACE_FIELDS = ("t", "plx", "ply", "prx", "pry", "ptx", "pty",
                "e1", "e2", "e3", "V", "vc", "veta", "vxi", "c")


class TraceRecord(NamedTuple):
    t: float
    plx: float
    ply: float
    prx: float
    pry: float
    ptx: float
    pty: float
    e1: float
    e2: float
    e3: float
    V: float
    vc: float
    veta: float
    vxi: float
    c: float

    @property
    def p_l(self) -> Vec2:
        return Vec2(self.plx, self.ply)

    @property
    def p_r(self) -> Vec2:
        return Vec2(self.prx, self.pry)

    @property
    def p_t(self) -> Vec2:
        return Vec2(self.ptx, self.pty)

    @property
    def error_norm(self) -> float:
        return math.sqrt(self.e1 * self.e1 + self.e2 * self.e2 + self.e3 * self.e3)


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    scenario: Scenario | None = None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.records]

    def as_array(self):
        import numpy as np

        return np.array(self.records, dtype=float)


# -- measurement and dynamics ------------------------------------------------


def measure(state: SimState) -> Measurements:
    p_l, p_r, p_t = state.p_l, state.p_r, state.p_t
    d12 = math.hypot(p_r[0] - p_l[0], p_r[1] - p_l[1])
    d1t = math.hypot(p_t[0] - p_l[0], p_t[1] - p_l[1])
    d2t = math.hypot(p_t[0] - p_r[0], p_t[1] - p_r[1])
    # sign of the target's local y: cross(p_r - p_l, p_t - p_l)
    cross = (p_r[0] - p_l[0]) * (p_t[1] - p_l[1]) - (p_r[1] - p_l[1]) * (p_t[0] - p_l[0])
    return Measurements(d12, d1t, d2t, Side.UPPER if cross >= 0.0 else Side.LOWER)


def _velocities(
    t: float, p_l: Vec2, p_r: Vec2, p_t: Vec2, scenario: Scenario
) -> tuple[Vec2, Vec2, ControlComponents]:
    c = 0.5 * math.hypot(p_r[0] - p_l[0], p_r[1] - p_l[1])
    if c < COINCIDENCE_RATIO * scenario.goal.c_star:
        raise SimulationAbort(f"vehicles coincide (c={c:.3g})", t)
    frame = BinocularFrame(p_l, p_r)
    try:
        (u_l, u_r), comps = control_law(frame, measure(SimState(t, p_l, p_r, p_t)),
                                        scenario.goal, scenario.gains)
    except GeometryError as exc:
        raise SimulationAbort(str(exc), t) from exc
    return u_l, u_r, comps


def step(state: SimState, scenario: Scenario) -> SimState:
    """Advance the vehicles and target by one RK4 step of ``scenario.dt``."""
    dt = scenario.dt
    traj = scenario.trajectory
    p0 = scenario.initial.p_t
    t0 = scenario.initial.t
    t = state.t
    lx, ly = state.p_l
    rx, ry = state.p_r
    h2 = 0.5 * dt

    def target_at(tt: float) -> Vec2:
        return traj.position(tt - t0, p0)

    pt_mid = target_at(t + h2)
    pt_end = target_at(t + dt)

    k1l, k1r, _ = _velocities(t, state.p_l, state.p_r, state.p_t, scenario)
    k2l, k2r, _ = _velocities(t + h2, Vec2(lx + h2 * k1l[0], ly + h2 * k1l[1]),
                              Vec2(rx + h2 * k1r[0], ry + h2 * k1r[1]), pt_mid, scenario)
    k3l, k3r, _ = _velocities(t + h2, Vec2(lx + h2 * k2l[0], ly + h2 * k2l[1]),
                              Vec2(rx + h2 * k2r[0], ry + h2 * k2r[1]), pt_mid, scenario)
    k4l, k4r, _ = _velocities(t + dt, Vec2(lx + dt * k3l[0], ly + dt * k3l[1]),
                              Vec2(rx + dt * k3r[0], ry + dt * k3r[1]), pt_end, scenario)
    w = dt / 6.0
    p_l = Vec2(lx + w * (k1l[0] + 2.0 * k2l[0] + 2.0 * k3l[0] + k4l[0]),
               ly + w * (k1l[1] + 2.0 * k2l[1] + 2.0 * k3l[1] + k4l[1]))
    p_r = Vec2(rx + w * (k1r[0] + 2.0 * k2r[0] + 2.0 * k3r[0] + k4r[0]),
               ry + w * (k1r[1] + 2.0 * k2r[1] + 2.0 * k3r[1] + k4r[1]))
    return SimState(t + dt, p_l, p_r, pt_end)


def record(state: SimState, scenario: Scenario) -> TraceRecord:
    """Trace record at ``state``: errors, Lyapunov value and the commanded components."""
    _, _, comps = _velocities(state.t, state.p_l, state.p_r, state.p_t, scenario)
    frame = BinocularFrame(state.p_l, state.p_r)
    err = analysis.tracking_error_from_measurements(measure(state), scenario.goal)
    return TraceRecord(
        state.t, state.p_l[0], state.p_l[1], state.p_r[0], state.p_r[1],
        state.p_t[0], state.p_t[1], err.e1, err.e2, err.e3, analysis.lyapunov(err),
        comps.v_c, comps.v_eta, comps.v_xi, frame.c,
    )


def initial_state(scenario: Scenario) -> SimState:
    s = scenario.initial
    return SimState(s.t, Vec2(*s.p_l), Vec2(*s.p_r),
                    scenario.trajectory.position(0.0, Vec2(*s.p_t)))


def iterate(scenario: Scenario) -> Iterator[SimState]:
    """Yield the state at every integration step, starting with the initial one."""
    state = initial_state(scenario)
    yield state
    t0 = scenario.initial.t
    for n in range(1, scenario.n_steps + 1):
        state = step(state, scenario)
        # pin the clock to the grid so long runs do not accumulate drift
        state = state._replace(t=t0 + n * scenario.dt)
        yield state


def run(scenario: Scenario, decimate: int | None = None) -> Trace:
    """Simulate ``scenario`` and return its decimated trace.

    The final step is always recorded. On abort the partially filled trace is
    attached to the raised :class:`SimulationAbort`.
    """
    every = scenario.decimate if decimate is None else decimate
    if every < 1:
        raise ValueError("decimate must be >= 1")
    trace = Trace(scenario=scenario)
    last = scenario.n_steps
    states = iterate(scenario)
    n = 0
    try:
        for n, state in enumerate(states):
            if n % every == 0 or n == last:
                trace.records.append(record(state, scenario))
    except SimulationAbort as exc:
        exc.trace = trace
        raise
    return trace


def local_target(state: SimState | TraceRecord) -> tuple[Vec2, float]:
    """Target position in the pair's local frame, and the half-baseline ``c``."""
    frame = BinocularFrame(state.p_l, state.p_r)
    return global_to_local(frame, state.p_t), frame.c
