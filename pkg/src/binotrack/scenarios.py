"""Built-in scenario corpus.

Every scenario starts the vehicles at (-10, 5) and (10, 5), with gains
kappa_xi = kappa_eta = 1.0 and kappa_c = 0.1 and goal (xi*, eta*) = (1.2, pi/2).
Stationary targets use c* = 40, moving ones c* = 20. The stationary target
positions and the zig-zag waypoints are representative choices for each case.
"""

from __future__ import annotations

import math

from .controller import FormationGoal, Gains
from .geometry import Vec2
from .simulator import Circular, Scenario, SimState, Stationary, Waypoints

P_LEFT = Vec2(-10.0, 5.0)
P_RIGHT = Vec2(10.0, 5.0)
GAINS = Gains(kappa_c=0.1, kappa_eta=1.0, kappa_xi=1.0)
XI_STAR = 1.2
ETA_STAR = math.pi / 2
C_STAR_STATIONARY = 40.0
C_STAR_MOVING = 20.0

STATIONARY_TARGETS = {
    "fig3a": Vec2(15.0, 30.0),   # above the baseline
    "fig3b": Vec2(-20.0, -25.0),  # below the baseline
    "fig3c": Vec2(0.0, 5.0),     # midpoint of the vehicles
    "fig3d": Vec2(30.0, 5.0),    # on the baseline's extension, beyond the right vehicle
}

ZIGZAG = (
    Vec2(100.0, 50.0), Vec2(250.0, 200.0), Vec2(100.0, 350.0),
    Vec2(250.0, 500.0), Vec2(100.0, 650.0),
)


def stationary(name: str, dt: float = 0.01, t_end: float = 150.0) -> Scenario:
    return Scenario(
        initial=SimState(0.0, P_LEFT, P_RIGHT, STATIONARY_TARGETS[name]),
        goal=FormationGoal(XI_STAR, ETA_STAR, C_STAR_STATIONARY),
        gains=GAINS,
        trajectory=Stationary(),
        dt=dt,
        t_end=t_end,
        name=name,
    )


def circular(speed: float = 5.0, dt: float = 0.01, t_end: float = 400.0) -> Scenario:
    return Scenario(
        initial=SimState(0.0, P_LEFT, P_RIGHT, Vec2(100.0, 50.0)),
        goal=FormationGoal(XI_STAR, ETA_STAR, C_STAR_MOVING),
        gains=GAINS,
        trajectory=Circular(center=Vec2(100.0, 100.0), radius=50.0, speed=speed),
        dt=dt,
        t_end=t_end,
        name="fig4",
    )


def zigzag(speed: float = 5.0, dt: float = 0.01, t_end: float = 300.0) -> Scenario:
    return Scenario(
        initial=SimState(0.0, P_LEFT, P_RIGHT, ZIGZAG[0]),
        goal=FormationGoal(XI_STAR, ETA_STAR, C_STAR_MOVING),
        gains=GAINS,
        trajectory=Waypoints(points=ZIGZAG, speed=speed),
        dt=dt,
        t_end=t_end,
        name="fig5",
    )


BUILTIN_NAMES = ("fig3a", "fig3b", "fig3c", "fig3d", "fig4", "fig5")


def builtin(name: str) -> Scenario:
    if name in STATIONARY_TARGETS:
        return stationary(name)
    if name == "fig4":
        return circular()
    if name == "fig5":
        return zigzag()
    raise KeyError(f"unknown built-in scenario {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def all_builtins() -> dict[str, Scenario]:
    return {name: builtin(name) for name in BUILTIN_NAMES}
