"""Tracking error, Lyapunov function and the convergence-rate machinery.

Notation follows the local frame of :mod:`binotrack.geometry`: the target is at
``(x, y)``, ``B = x^2 + y^2 - c^2``, ``G1 = sqrt(B^2 + 4 c^2 y^2)``, and the
normalized quantities ``g = (x^2 + y^2)/c^2`` and ``h = G1/c^2``. In elliptic
coordinates ``g = sinh^2(xi) + cos^2(eta)`` and ``h = sinh^2(xi) + sin^2(eta)``,
so ``1/(c sqrt(h))`` is the gradient magnitude of both ``xi`` and ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .controller import FormationGoal, Gains, Measurements, target_coordinates
from .geometry import (
    BinocularFrame,
    EllipticCoord,
    GeometryError,
    Vec2,
    _pq_and_complements,
)

#: ``|xy| / c^2`` below this is treated as lying on a coordinate axis.
DEGENERATE_TOL = 1e-12


class TrackingError(NamedTuple):
    e1: float  # 2 (c^2 - c*^2)
    e2: float  # eta - eta*, no wrap-around
    e3: float  # xi - xi*

    def norm(self) -> float:
        return math.sqrt(self.e1 * self.e1 + self.e2 * self.e2 + self.e3 * self.e3)


def tracking_error(frame: BinocularFrame | float, target: EllipticCoord, goal: FormationGoal) -> TrackingError:
    c = frame.c if isinstance(frame, BinocularFrame) else float(frame)
    return TrackingError(
        2.0 * (c * c - goal.c_star * goal.c_star),
        target.eta - goal.eta_star,
        target.xi - goal.xi_star,
    )


def tracking_error_from_measurements(meas: Measurements, goal: FormationGoal) -> TrackingError:
    coord, c = target_coordinates(meas)
    return tracking_error(c, coord, goal)


def lyapunov(e: Sequence[float]) -> float:
    return 0.5 * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2])


# -- intermediate quantities -------------------------------------------------


class _Q(NamedTuple):
    x: float
    y: float
    c: float
    B: float
    G1: float
    g: float
    h: float
    p: float
    q: float
    one_minus_p: float
    one_minus_q: float
    degenerate: bool

    @property
    def G2(self) -> float:
        return 1.0 / (2.0 * self.c * self.c * math.sqrt(self.p * self.one_minus_p))

    @property
    def G3(self) -> float:
        # q^2 - q = (-q)(1 - q)
        return 1.0 / (2.0 * self.c * self.c * math.sqrt(-self.q * self.one_minus_q))

    @property
    def G_phi(self) -> float:
        # sin^2(eta) = p, cos^2(eta) = 1 - p
        return math.sqrt(self.x ** 2 * self.p ** 2 + self.y ** 2 * self.one_minus_p ** 2)

    @property
    def sgn_xy(self) -> float:
        return 1.0 if self.x * self.y >= 0.0 else -1.0


def _quantities(local: Vec2, c: float) -> _Q:
    if not c > 0.0:
        raise GeometryError(f"focal half-distance must be positive, got {c}")
    x, y = float(local[0]), float(local[1])
    c2 = c * c
    b = x * x + y * y - c2
    g1 = math.sqrt(b * b + 4.0 * c2 * y * y)
    p, q, omp, omq = _pq_and_complements(x, y, c)
    degenerate = abs(x * y) <= DEGENERATE_TOL * c2
    return _Q(x, y, c, b, g1, (x * x + y * y) / c2, g1 / c2, p, q, omp, omq, degenerate)


# -- rate functions ----------------------------------------------------------


class Rates(NamedTuple):
    F1: float
    F2: float
    F3: float
    degenerate: bool


def f1(c: float, c_star: float, kappa_c: float) -> float:
    """Decay rate of ``e1``: ``2 c kappa_c / (c + c*)``."""
    return 2.0 * c * kappa_c / (c + c_star)


def f2_closed_form(g: float, h: float, c: float, kappa_eta: float) -> float:
    """Closed form ``(kappa_eta / 2c) sqrt(1 + (g/h)^2 + 2 g/h - 1/h^2)``."""
    r = g / h
    return kappa_eta / (2.0 * c) * math.sqrt(max(1.0 + r * r + 2.0 * r - 1.0 / (h * h), 0.0))


def f3_simplified(h: float, c: float, kappa_xi: float) -> float:
    """The simplified form ``kappa_xi / (c^3 sqrt(h))``, kept verbatim.

    It differs from the direct form returned by :func:`rate_functions` by a
    factor ``c^2``; the direct form equals ``kappa_xi / (c sqrt(h))``.
    """
    return kappa_xi / (c ** 3 * math.sqrt(h))


def rate_functions(local: Vec2, c: float, gains: Gains, c_star: float) -> Rates:
    """``F1``, ``F2 = 2 c kappa_eta |xy| G2 / G1`` and ``F3 = 2 |xy| kappa_xi G3 / G_phi``.

    On the coordinate axes ``F2`` and ``F3`` are 0/0; they are returned as 0
    with ``degenerate`` set.
    """
    Q = _quantities(local, c)
    F1 = f1(c, c_star, gains.kappa_c)
    if Q.degenerate:
        return Rates(F1, 0.0, 0.0, True)
    axy = abs(Q.x * Q.y)
    F2 = 2.0 * c * gains.kappa_eta * axy * Q.G2 / Q.G1
    F3 = 2.0 * axy * gains.kappa_xi * Q.G3 / Q.G_phi
    return Rates(F1, F2, F3, False)


def simplified_rates(local: Vec2, c: float, gains: Gains) -> tuple[float, float]:
    """``(F2, F3)`` from the simplified closed forms in ``g`` and ``h``."""
    Q = _quantities(local, c)
    return f2_closed_form(Q.g, Q.h, c, gains.kappa_eta), f3_simplified(Q.h, c, gains.kappa_xi)


def eta_coupling(local: Vec2, c: float, kappa_eta: float) -> float:
    """Coefficient of ``e2`` in the ``e3`` dynamics: ``2 c x y kappa_eta G3 / G1``."""
    Q = _quantities(local, c)
    if Q.degenerate:
        return 0.0
    return 2.0 * c * Q.x * Q.y * kappa_eta * Q.G3 / Q.G1


def predicted_error_rates(
    local: Vec2, c: float, err: TrackingError, gains: Gains, goal: FormationGoal
) -> tuple[float, float, float]:
    """Closed-form ``(de1, de2, de3)`` for a stationary target.

    ``de1 = -F1 e1``, ``de2 = -F2 e2`` and ``de3 = -F3 e3 - coupling * e2``.
    These forms treat ``xi`` and ``eta`` as functions of the local target
    position only; see :func:`scaling_coupling` for the part carried by a
    changing ``c``.
    """
    F1, F2, F3, _ = rate_functions(local, c, gains, goal.c_star)
    k = eta_coupling(local, c, gains.kappa_eta)
    return -F1 * err.e1, -F2 * err.e2, -F3 * err.e3 - k * err.e2


def scaling_coupling(local: Vec2, c: float, v_c: float) -> tuple[float, float]:
    """``(d eta/dt, d xi/dt)`` caused by ``dc/dt = v_c`` at a fixed local target.

    Stretching the baseline moves the target inward in normalized coordinates:
    ``d eta/dc = sin(2 eta) / (2 h c)`` and ``d xi/dc = -sinh(2 xi) / (2 h c)``.
    """
    Q = _quantities(local, c)
    # sin(2 eta) = 2 sgn(xy) sqrt(p (1-p)), sinh(2 xi) = 2 sqrt(-q (1-q))
    sin2eta = 2.0 * math.copysign(1.0, Q.x * Q.y) * math.sqrt(Q.p * Q.one_minus_p)
    sinh2xi = 2.0 * math.sqrt(-Q.q * Q.one_minus_q)
    if Q.x * Q.y == 0.0:
        sin2eta = 0.0
    denom = 2.0 * Q.h * c
    return v_c * sin2eta / denom, -v_c * sinh2xi / denom


# -- bound constants ---------------------------------------------------------


class BoundConstants(NamedTuple):
    k1: float
    k2: float
    k3: float
    k4: float


def bound_constants(
    e1_init: float,
    c_star: float,
    c: float,
    gains: Gains,
    mu: float | None = None,
    nu: float | None = None,
) -> BoundConstants:
    """Lower-bound constants for the decay rates at half-baseline ``c``.

    ``mu`` (default ``0.1 c``) is the minimum ``|y|`` of the target and ``nu``
    (default ``10 c``) the maximum target range assumed by the bounds on
    ``F2`` and ``F3``.
    """
    mu = 0.1 * c if mu is None else mu
    nu = 10.0 * c if nu is None else nu
    if not c > 0.0 or not c_star > 0.0:
        raise ValueError("c and c_star must be positive")
    if not 0.0 < mu < c:
        raise ValueError(f"mu must lie in (0, c), got {mu}")
    if not nu > c:
        raise ValueError(f"nu must exceed c, got {nu}")
    rad = e1_init / 2.0 + c_star * c_star
    if not rad > 0.0:
        raise ValueError("e1_init / 2 + c_star^2 must be positive")
    c0 = math.sqrt(rad)
    kc = gains.kappa_c
    k1 = 2.0 * min(2.0 * kc * c0 / (c0 + c_star), kc)
    k2 = gains.kappa_eta / c * math.sqrt(mu * mu / (mu * mu + c * c))
    k3 = gains.kappa_xi / (c * c * math.sqrt(nu * nu + c * c))
    return BoundConstants(k1, k2, k3, 2.0 * min(k1, k2, k3))


@dataclass(frozen=True)
class GridCheck:
    """Outcome of a sampled lower-bound check."""

    bound: float
    min_value: float
    points: int
    violations: int

    @property
    def ok(self) -> bool:
        return self.points > 0 and self.violations == 0


def _f2_grid(c: float, kappa_eta: float, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    X, Y = np.meshgrid(xs, ys)
    c2 = c * c
    B = X * X + Y * Y - c2
    g = (X * X + Y * Y) / c2
    h = np.sqrt(B * B + 4.0 * c2 * Y * Y) / c2
    r = g / h
    return kappa_eta / (2 * c) * np.sqrt(1 + r * r + 2 * r - 1 / (h * h))


def check_f2_bound(
    c: float, gains: Gains, mu: float | None = None, nu: float | None = None, n: int = 200
) -> GridCheck:
    """Sample ``F2 >= k2`` on an ``n x n`` grid of ``|y| in [mu, nu]``, ``x in [-nu, nu]``."""
    mu = 0.1 * c if mu is None else mu
    nu = 10.0 * c if nu is None else nu
    k2 = bound_constants(0.0, c, c, gains, mu, nu).k2
    xs = np.linspace(-nu, nu, n)
    half = np.linspace(mu, nu, n // 2)
    ys = np.concatenate([-half[::-1], half])
    F2 = _f2_grid(c, gains.kappa_eta, xs, ys)
    return GridCheck(k2, float(F2.min()), F2.size, int(np.count_nonzero(F2 < k2)))


def check_f3_bound(
    c: float, gains: Gains, nu: float | None = None, n: int = 200, mu: float | None = None
) -> GridCheck:
    """Sample ``F3 >= k3`` over grid points of the disk ``x^2 + y^2 <= nu^2``.

    ``F3`` here is the simplified form :func:`f3_simplified`, which is the one
    ``k3`` bounds.
    """
    mu = 0.1 * c if mu is None else mu
    nu = 10.0 * c if nu is None else nu
    k3 = bound_constants(0.0, c, c, gains, mu, nu).k3
    xs = np.linspace(-nu, nu, n)
    X, Y = np.meshgrid(xs, xs)
    inside = X * X + Y * Y <= nu * nu
    c2 = c * c
    B = X * X + Y * Y - c2
    h = np.sqrt(B * B + 4.0 * c2 * Y * Y) / c2
    F3 = gains.kappa_xi / (c ** 3 * np.sqrt(h[inside]))
    return GridCheck(k3, float(F3.min()), int(inside.sum()), int(np.count_nonzero(F3 < k3)))


def check_f3_direct_bound(c: float, gains: Gains, nu: float | None = None, n: int = 200) -> GridCheck:
    """Sample the direct ``F3 = kappa_xi / (c sqrt(h))`` against ``kappa_xi / sqrt(nu^2 + c^2)``."""
    nu = 10.0 * c if nu is None else nu
    bound = gains.kappa_xi / math.sqrt(nu * nu + c * c)
    xs = np.linspace(-nu, nu, n)
    X, Y = np.meshgrid(xs, xs)
    inside = (X * X + Y * Y <= nu * nu) & (np.abs(X * Y) > DEGENERATE_TOL * c * c)
    vals = np.array([rate_functions(Vec2(x, y), c, gains, c).F3 for x, y in zip(X[inside], Y[inside])])
    return GridCheck(bound, float(vals.min()), int(vals.size), int(np.count_nonzero(vals < bound)))


# -- perturbation ------------------------------------------------------------


class DriftTerms(NamedTuple):
    g_eta: float
    g_xi: float
    degenerate: bool


def perturbation_bound(local: Vec2, c: float, eps: float) -> float:
    """Common bound ``eps / (c sqrt(h))`` on both drift components."""
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    if eps == 0.0:
        return 0.0
    Q = _quantities(local, c)
    return eps / (c * math.sqrt(Q.h))


def drift_terms(local: Vec2, c: float, target_velocity: Vec2) -> DriftTerms:
    """Rates of ``eta`` and ``xi`` caused by the target's own velocity (local frame).

    ``g_eta = sgn(xy) G2 ((B/G1 - 1) x vx + ((B + 2c^2)/G1 - 1) y vy)`` and
    ``g_xi = G3 ((1 + B/G1) x vx + (1 + (B + 2c^2)/G1) y vy)``.
    """
    vx, vy = target_velocity
    Q = _quantities(local, c)
    if Q.degenerate:
        return DriftTerms(0.0, 0.0, True)
    B, G1, c2 = Q.B, Q.G1, c * c
    g_eta = Q.sgn_xy * Q.G2 * ((B / G1 - 1.0) * Q.x * vx + ((B + 2 * c2) / G1 - 1.0) * Q.y * vy)
    g_xi = Q.G3 * ((1.0 + B / G1) * Q.x * vx + (1.0 + (B + 2 * c2) / G1) * Q.y * vy)
    return DriftTerms(g_eta, g_xi, False)


# -- trajectory-level checks -------------------------------------------------


@dataclass(frozen=True)
class DecreaseCheck:
    k4: float
    points: int
    violations: int
    worst_excess: float

    @property
    def ok(self) -> bool:
        return self.points > 0 and self.violations == 0


def check_lyapunov_decrease(t: Sequence[float], V: Sequence[float], k4: float) -> DecreaseCheck:
    """Check ``dV/dt <= -k4 V`` by central differences, slack ``3 dt |dV/dt|``."""
    t = np.asarray(t, dtype=float)
    V = np.asarray(V, dtype=float)
    if len(t) < 3:
        return DecreaseCheck(k4, 0, 0, 0.0)
    dt = t[2:] - t[:-2]
    dV = (V[2:] - V[:-2]) / dt
    slack = 3.0 * (dt / 2.0) * np.abs(dV)
    excess = dV + k4 * V[1:-1] - slack
    return DecreaseCheck(k4, int(dV.size), int(np.count_nonzero(excess > 0.0)),
                         float(excess.max()))


def exponential_envelope_ok(t: Sequence[float], err_norm: Sequence[float], k4: float, slack: float = 0.0) -> bool:
    """``log |e(t)| <= log |e(0)| - (k4/2)(t - t0) + slack`` along the samples."""
    t = np.asarray(t, dtype=float)
    en = np.asarray(err_norm, dtype=float)
    if en[0] == 0.0:
        return bool(np.all(en == 0.0))
    with np.errstate(divide="ignore"):
        lhs = np.log(en)
    rhs = math.log(en[0]) - 0.5 * k4 * (t - t[0]) + slack
    return bool(np.all(lhs <= rhs))
