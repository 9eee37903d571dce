"""Distance-only tracking law for the vehicle pair.

The pair is steered as one unit through three collective speeds: scaling
``v_c`` changes the baseline length, rotation ``v_eta`` turns the baseline
about its midpoint, and translation ``v_xi`` moves both vehicles together.
Every quantity here is computed from the vehicles' own positions and the two
target distances; the target position itself is never read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import (
    BinocularFrame,
    EllipticCoord,
    GeometryError,
    Side,
    Vec2,
    distances_to_elliptic,
)

#: Target counts as lying on the focal segment when ``xi`` is below this.
FOCAL_SEGMENT_TOL = 1e-9


@dataclass(frozen=True)
class Gains:
    kappa_c: float
    kappa_eta: float
    kappa_xi: float

    def __post_init__(self):
        for name in ("kappa_c", "kappa_eta", "kappa_xi"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be a positive finite number, got {v}")

    @property
    def max(self) -> float:
        return max(self.kappa_c, self.kappa_eta, self.kappa_xi)


@dataclass(frozen=True)
class FormationGoal:
    """Desired elliptic target coordinates ``(xi_star, eta_star)`` and half-baseline ``c_star``."""

    xi_star: float
    eta_star: float
    c_star: float

    def __post_init__(self):
        if not (math.isfinite(self.c_star) and self.c_star > 0.0):
            raise ValueError(f"c_star must be positive, got {self.c_star}")
        if not (math.isfinite(self.xi_star) and self.xi_star >= 0.0):
            raise ValueError(f"xi_star must be >= 0, got {self.xi_star}")
        if not (math.isfinite(self.eta_star) and 0.0 <= self.eta_star < 2.0 * math.pi):
            raise ValueError(f"eta_star must lie in [0, 2 pi), got {self.eta_star}")

    @property
    def side(self) -> Side:
        return Side.of_eta(self.eta_star)


class Measurements(NamedTuple):
    d12: float
    d1t: float
    d2t: float
    side: Side


class ControlComponents(NamedTuple):
    v_c: float
    v_eta: float
    v_xi: float


class ControlOutput(NamedTuple):
    u_l: Vec2
    u_r: Vec2


def rotation(angle: float) -> np.ndarray:
    """Counter-clockwise rotation matrix."""
    ca, sa = math.cos(angle), math.sin(angle)
    return np.array([[ca, -sa], [sa, ca]])


def target_coordinates(meas: Measurements) -> tuple[EllipticCoord, float]:
    """Elliptic target coordinates and ``c`` recovered from the measurements."""
    if not meas.d12 > 0.0:
        raise GeometryError(f"inter-vehicle distance must be positive, got {meas.d12}")
    c = 0.5 * meas.d12
    return distances_to_elliptic(meas.d1t, meas.d2t, c, meas.side), c


def control_components(meas: Measurements, goal: FormationGoal, gains: Gains) -> ControlComponents:
    coord, c = target_coordinates(meas)
    return ControlComponents(
        v_c=gains.kappa_c * (goal.c_star - c),
        v_eta=gains.kappa_eta * (goal.eta_star - coord.eta),
        v_xi=gains.kappa_xi * (goal.xi_star - coord.xi),
    )


def translation_direction(coord: EllipticCoord, c: float, goal_side: Side = Side.UPPER) -> Vec2:
    """Unit translation direction of the pair, in the local frame.

    Moving both vehicles along this direction pushes the target (relative to
    the pair) outward across the confocal ellipses, so a positive ``v_xi``
    raises ``xi``. Off the coordinate axes it is
    ``-sgn(xy) (y cos^2 eta, x sin^2 eta) / sqrt(x^2 sin^4 eta + y^2 cos^4 eta)``;
    dividing out ``c sin(eta) cos(eta)`` gives the form used here, which stays
    regular on the axes. On the focal segment (``xi = 0``) the outward normal
    is ambiguous and the pair moves so the target ends up on ``goal_side``.
    """
    xi, eta = coord
    nx = math.sinh(xi) * math.cos(eta)
    ny = math.cosh(xi) * math.sin(eta)
    n = math.hypot(nx, ny)
    if xi < FOCAL_SEGMENT_TOL or n < FOCAL_SEGMENT_TOL:
        return Vec2(0.0, -goal_side.sign)
    return Vec2(-nx / n, -ny / n)


def translation_direction_cartesian(local_target: Vec2, eta: float) -> Vec2 | None:
    """The same direction from local Cartesian coordinates; ``None`` on the axes."""
    x, y = local_target
    s2 = math.sin(eta) ** 2
    c2 = math.cos(eta) ** 2
    g_phi = math.sqrt(x * x * s2 * s2 + y * y * c2 * c2)
    if x * y == 0.0 or g_phi == 0.0:
        return None
    sgn = 1.0 if x * y > 0.0 else -1.0
    return Vec2(-sgn * y * c2 / g_phi, -sgn * x * s2 / g_phi)


def control_inputs(frame: BinocularFrame, comps: ControlComponents, d_hat: Vec2) -> ControlOutput:
    """Per-vehicle velocities ``u = A (p_r - p_l)``.

    With ``b = (p_r - p_l) / 2c`` the baseline unit vector,
    ``A_l (p_r - p_l) = v_xi R(phi) b + v_eta R(pi/2) b + v_c R(pi) b`` and
    ``A_r (p_r - p_l) = v_xi R(phi) b + v_eta R(-pi/2) b + v_c R(0) b``,
    where ``R(phi) b`` is ``d_hat`` carried into the global frame.
    """
    bx, by = frame.axis
    # R(phi) b: d_hat rotated from the local into the global frame
    tx = bx * d_hat[0] - by * d_hat[1]
    ty = by * d_hat[0] + bx * d_hat[1]
    v_c, v_eta, v_xi = comps
    # R(pi/2) b = (-by, bx)
    u_l = Vec2(v_xi * tx - v_eta * by - v_c * bx, v_xi * ty + v_eta * bx - v_c * by)
    u_r = Vec2(v_xi * tx + v_eta * by + v_c * bx, v_xi * ty - v_eta * bx + v_c * by)
    return ControlOutput(u_l, u_r)


def control_law(
    frame: BinocularFrame, meas: Measurements, goal: FormationGoal, gains: Gains
) -> tuple[ControlOutput, ControlComponents]:
    """Full evaluation: measurements to per-vehicle velocities."""
    coord, c = target_coordinates(meas)
    comps = ControlComponents(
        v_c=gains.kappa_c * (goal.c_star - c),
        v_eta=gains.kappa_eta * (goal.eta_star - coord.eta),
        v_xi=gains.kappa_xi * (goal.xi_star - coord.xi),
    )
    d_hat = translation_direction(coord, c, goal.side)
    return control_inputs(frame, comps, d_hat), comps

