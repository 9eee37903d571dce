"""Elliptic coordinates induced by a pair of vehicles.

The two vehicles sit at the foci ``(-c, 0)`` and ``(c, 0)`` of a local frame
whose origin is their midpoint and whose +x axis points from the left vehicle
to the right one. A target at local ``(x, y)`` has elliptic coordinates
``(xi, eta)`` with ``x = c cosh(xi) cos(eta)`` and ``y = c sinh(xi) sin(eta)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

TWO_PI = 2.0 * math.pi

#: Relative slack allowed on the triangle inequality before distances are
#: declared inconsistent.
MEASUREMENT_TOL = 1e-9


class GeometryError(ValueError):
    """Raised for inputs outside the domain of a coordinate transform."""


class InconsistentMeasurementError(GeometryError):
    """Distances that cannot come from a planar vehicle-vehicle-target triangle."""


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def __mul__(self, k):
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


class Side(enum.Enum):
    UPPER = "upper"  # eta in [0, pi], local y >= 0
    LOWER = "lower"  # eta in (pi, 2 pi)

    @property
    def sign(self) -> float:
        return 1.0 if self is Side.UPPER else -1.0

    @classmethod
    def of_eta(cls, eta: float) -> "Side":
        return cls.UPPER if normalize_eta(eta) <= math.pi else cls.LOWER


def normalize_eta(eta: float) -> float:
    """Map an angle into ``[0, 2 pi)``."""
    eta = math.fmod(eta, TWO_PI)
    if eta < 0.0:
        eta += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2 pi
    return 0.0 if eta >= TWO_PI else eta


class EllipticCoord(NamedTuple):
    xi: float
    eta: float

    @classmethod
    def make(cls, xi: float, eta: float) -> "EllipticCoord":
        if not (math.isfinite(xi) and math.isfinite(eta)):
            raise GeometryError(f"non-finite elliptic coordinate ({xi}, {eta})")
        if xi < 0.0:
            raise GeometryError(f"xi must be >= 0, got {xi}")
        return cls(xi, normalize_eta(eta))

    @property
    def side(self) -> Side:
        return Side.of_eta(self.eta)


class PQPair(NamedTuple):
    """``p = sin^2(eta)`` and ``q = -sinh^2(xi)``."""

    p: float
    q: float


@dataclass(frozen=True)
class BinocularFrame:
    """Local frame spanned by the left and right vehicle (global coordinates)."""

    p_l: Vec2
    p_r: Vec2

    def __post_init__(self):
        if type(self.p_l) is not Vec2:
            object.__setattr__(self, "p_l", Vec2(*self.p_l))
        if type(self.p_r) is not Vec2:
            object.__setattr__(self, "p_r", Vec2(*self.p_r))
        if self.p_l == self.p_r:
            raise GeometryError("vehicle positions coincide; the focal frame is undefined")

    @property
    def c(self) -> float:
        return 0.5 * math.hypot(self.p_r.x - self.p_l.x, self.p_r.y - self.p_l.y)

    @property
    def origin(self) -> Vec2:
        return Vec2(0.5 * (self.p_l.x + self.p_r.x), 0.5 * (self.p_l.y + self.p_r.y))

    @property
    def axis(self) -> Vec2:
        """Global unit vector of the local +x axis."""
        dx = self.p_r.x - self.p_l.x
        dy = self.p_r.y - self.p_l.y
        n = math.hypot(dx, dy)
        return Vec2(dx / n, dy / n)


def _check_c(c: float) -> None:
    if not c > 0.0 or not math.isfinite(c):
        raise GeometryError(f"focal half-distance must be positive and finite, got {c}")


def elliptic_to_local(coord: EllipticCoord, c: float) -> Vec2:
    _check_c(c)
    xi, eta = coord
    if xi < 0.0:
        raise GeometryError(f"xi must be >= 0, got {xi}")
    return Vec2(c * math.cosh(xi) * math.cos(eta), c * math.sinh(xi) * math.sin(eta))


def _pq_and_complements(x: float, y: float, c: float) -> tuple[float, float, float, float]:
    """Return ``(p, q, 1 - p, 1 - q)`` for a local point.

    ``p, q`` are the roots of ``t^2 + (B/c^2) t - y^2/c^2``; ``1-p, 1-q`` are the
    roots of ``s^2 - ((B + 2c^2)/c^2) s + x^2/c^2``. In both cases the large
    root is taken from the closed form and the small one from the root product,
    which avoids the cancellation in ``-B + sqrt(B^2 + 4c^2y^2)``.
    """
    c2 = c * c
    x2 = x * x
    y2 = y * y
    b = x2 + y2 - c2
    g1 = math.sqrt(b * b + 4.0 * c2 * y2)
    if b >= 0.0:
        q = -(b + g1) / (2.0 * c2)
        p = 2.0 * y2 / (b + g1) if b + g1 > 0.0 else 0.0
    else:
        p = (g1 - b) / (2.0 * c2)
        q = -2.0 * y2 / (g1 - b)
    s = b + 2.0 * c2  # = x^2 + y^2 + c^2 > 0
    one_minus_q = (s + g1) / (2.0 * c2)
    one_minus_p = 2.0 * x2 / (s + g1)
    p = min(max(p, 0.0), 1.0)
    q = min(q, 0.0)
    one_minus_p = min(max(one_minus_p, 0.0), 1.0)
    one_minus_q = max(one_minus_q, 1.0)
    return p, q, one_minus_p, one_minus_q


def compute_pq(local: Vec2, c: float) -> PQPair:
    """``p`` and ``q`` of a local point, clamped to ``p in [0, 1]``, ``q <= 0``.

    Algebraically ``p, q = (-B +/- sqrt(B^2 + 4 c^2 y^2)) / (2 c^2)`` with
    ``B = x^2 + y^2 - c^2``; the smaller-magnitude root is evaluated through the
    root product for accuracy.
    """
    _check_c(c)
    p, q, _, _ = _pq_and_complements(local[0], local[1], c)
    return PQPair(p, q)


def local_to_elliptic(local: Vec2, c: float) -> EllipticCoord:
    _check_c(c)
    x, y = local
    p, q, one_minus_p, _ = _pq_and_complements(x, y, c)
    # arcsin(sqrt(p)), written with atan2 so eta stays accurate near pi/2
    eta0 = math.atan2(math.sqrt(p), math.sqrt(one_minus_p))
    if y >= 0.0:
        eta = eta0 if x >= 0.0 else math.pi - eta0
    else:
        eta = math.pi + eta0 if x <= 0.0 else TWO_PI - eta0
    # xi = 1/2 ln(1 - 2q + 2 sqrt(q^2 - q))
    xi = 0.5 * math.log1p(-2.0 * q + 2.0 * math.sqrt(q * q - q))
    return EllipticCoord(xi, normalize_eta(eta))


def check_triangle(d1t: float, d2t: float, c: float, tol: float = MEASUREMENT_TOL) -> None:
    """Raise if ``|d1t - d2t| <= 2c <= d1t + d2t`` fails by more than ``tol * 2c``."""
    _check_c(c)
    if d1t < 0.0 or d2t < 0.0 or not (math.isfinite(d1t) and math.isfinite(d2t)):
        raise InconsistentMeasurementError(f"invalid target distances ({d1t}, {d2t})")
    slack = tol * 2.0 * c
    if abs(d1t - d2t) > 2.0 * c + slack:
        raise InconsistentMeasurementError(
            f"|d1t - d2t| = {abs(d1t - d2t):.12g} exceeds baseline 2c = {2.0 * c:.12g}"
        )
    if d1t + d2t < 2.0 * c - slack:
        raise InconsistentMeasurementError(
            f"d1t + d2t = {d1t + d2t:.12g} is shorter than baseline 2c = {2.0 * c:.12g}"
        )


def distances_to_elliptic(d1t: float, d2t: float, c: float, side: Side) -> EllipticCoord:
    """Elliptic coordinates of the target from its distances to both foci.

    ``d1t`` is measured from the left vehicle, ``d2t`` from the right one.
    The side bit resolves the reflection ambiguity across the baseline.
    """
    check_triangle(d1t, d2t, c)
    u = min(max((d1t - d2t) / (2.0 * c), -1.0), 1.0)
    w = max((d1t + d2t) / (2.0 * c), 1.0)
    eta = math.acos(u)
    if side is Side.LOWER:
        eta = TWO_PI - eta
    return EllipticCoord(math.acosh(w), normalize_eta(eta))


def global_to_local(frame: BinocularFrame, pt: Vec2) -> Vec2:
    o = frame.origin
    ax, ay = frame.axis
    dx = pt[0] - o.x
    dy = pt[1] - o.y
    return Vec2(ax * dx + ay * dy, -ay * dx + ax * dy)


def local_to_global(frame: BinocularFrame, v: Vec2) -> Vec2:
    o = frame.origin
    ax, ay = frame.axis
    return Vec2(o.x + ax * v[0] - ay * v[1], o.y + ay * v[0] + ax * v[1])


def local_direction_to_global(frame: BinocularFrame, v: Vec2) -> Vec2:
    """Rotate a local-frame vector into the global frame (no translation)."""
    ax, ay = frame.axis
    return Vec2(ax * v[0] - ay * v[1], ay * v[0] + ax * v[1])


def global_direction_to_local(frame: BinocularFrame, v: Vec2) -> Vec2:
    ax, ay = frame.axis
    return Vec2(ax * v[0] + ay * v[1], -ay * v[0] + ax * v[1])


def hyperbola_residual(local: Vec2, eta: float, c: float) -> float:
    """``sin^2(eta) x^2 - cos^2(eta) y^2 - c^2 sin^2(eta) cos^2(eta)``; zero on the hyperbola of ``eta``."""
    s2 = math.sin(eta) ** 2
    c2 = math.cos(eta) ** 2
    x, y = local
    return s2 * x * x - c2 * y * y - c * c * s2 * c2


def ellipse_residual(local: Vec2, xi: float, c: float) -> float:
    """``sinh^2(xi) x^2 + cosh^2(xi) y^2 - c^2 sinh^2(xi) cosh^2(xi)``; zero on the ellipse of ``xi``."""
    sh2 = math.sinh(xi) ** 2
    ch2 = math.cosh(xi) ** 2
    x, y = local
    return sh2 * x * x + ch2 * y * y - c * c * sh2 * ch2
