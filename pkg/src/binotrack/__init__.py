"""Distance-only collaborative target tracking with a pair of vehicles in elliptic coordinates."""

from .analysis import TrackingError, bound_constants, lyapunov, rate_functions, tracking_error
from .controller import ControlComponents, ControlOutput, FormationGoal, Gains, Measurements
from .geometry import (
    BinocularFrame,
    EllipticCoord,
    GeometryError,
    InconsistentMeasurementError,
    Side,
    Vec2,
    distances_to_elliptic,
    elliptic_to_local,
    local_to_elliptic,
)
from .simulator import Circular, Scenario, SimState, SimulationAbort, Stationary, Trace, Waypoints, run
from .summary import ConvergenceSummary, summarize

__version__ = "0.1.0"

__all__ = [
    "BinocularFrame", "Circular", "ControlComponents", "ControlOutput", "ConvergenceSummary",
    "EllipticCoord", "FormationGoal", "Gains", "GeometryError", "InconsistentMeasurementError",
    "Measurements", "Scenario", "Side", "SimState", "SimulationAbort", "Stationary", "Trace",
    "TrackingError", "Vec2", "Waypoints", "bound_constants", "distances_to_elliptic",
    "elliptic_to_local", "local_to_elliptic", "lyapunov", "rate_functions", "run", "summarize",
    "tracking_error",
]
