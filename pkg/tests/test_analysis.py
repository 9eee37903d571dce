import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binotrack.analysis import (
    TrackingError,
    simplified_rates,
    bound_constants,
    check_f2_bound,
    check_f3_bound,
    check_f3_direct_bound,
    check_lyapunov_decrease,
    drift_terms,
    exponential_envelope_ok,
    f1,
    lyapunov,
    perturbation_bound,
    predicted_error_rates,
    rate_functions,
    scaling_coupling,
    tracking_error,
    tracking_error_from_measurements,
)
from binotrack.controller import FormationGoal, Gains, Measurements, control_law
from binotrack.geometry import (
    BinocularFrame,
    EllipticCoord,
    Side,
    Vec2,
    elliptic_to_local,
    global_to_local,
    local_to_elliptic,
    normalize_eta,
)
from binotrack.simulator import Scenario, SimState, run

GAINS = Gains(0.1, 1.0, 1.0)

coords = st.tuples(
    st.floats(0.05, 4.0),
    st.floats(0.0, 2 * math.pi, exclude_max=True).filter(
        lambda e: min(abs(math.sin(e)), abs(math.cos(e))) > 1e-3),
    st.floats(0.5, 100.0),
)


def local_point(xi, eta, c):
    return elliptic_to_local(EllipticCoord(xi, eta), c)


def test_tracking_error_examples(goal):
    e = tracking_error(10.0, EllipticCoord(0.0, math.pi / 2), goal)
    assert e == pytest.approx((-3000.0, 0.0, -1.2))
    assert tracking_error(40.0, EllipticCoord(1.2, math.pi / 2), goal) == (0.0, 0.0, 0.0)
    frame = BinocularFrame(Vec2(-10, 5), Vec2(10, 5))
    assert tracking_error(frame, EllipticCoord(1.2, math.pi / 2), goal).e1 == -3000.0


def test_tracking_error_from_measurements(goal):
    d = 40 * math.cosh(1.2)
    e = tracking_error_from_measurements(Measurements(80.0, d, d, Side.UPPER), goal)
    assert e == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)


@pytest.mark.parametrize("e, v", [((0, 0, 0), 0.0), ((1, 1, 1), 1.5), ((-2, 0, 1), 2.5)])
def test_lyapunov(e, v):
    assert lyapunov(e) == v
    assert TrackingError(*e).norm() == pytest.approx(math.sqrt(2 * v))


def test_f1_at_goal_scale():
    assert f1(40.0, 40.0, 0.1) == pytest.approx(0.1)


@settings(max_examples=300)
@given(coords)
def test_f2_direct_matches_closed_form(coord):
    local = local_point(*coord)
    c = coord[2]
    direct = rate_functions(local, c, GAINS, c).F2
    closed, _ = simplified_rates(local, c, GAINS)
    assert direct == pytest.approx(closed, rel=1e-9)


@settings(max_examples=300)
@given(coords)
def test_f3_direct_form(coord):
    xi, eta, c = coord
    local = local_point(*coord)
    h = math.sinh(xi) ** 2 + math.sin(eta) ** 2
    F3 = rate_functions(local, c, GAINS, c).F3
    assert F3 == pytest.approx(1.0 / (c * math.sqrt(h)), rel=1e-9)
    # the simplified form carries an extra 1/c^2
    assert simplified_rates(local, c, GAINS)[1] == pytest.approx(F3 / c ** 2, rel=1e-9)


@pytest.mark.parametrize("c", [0.5, 4.0, 40.0])
def test_f2_far_field_limit(c):
    # g = (x^2 + y^2)/c^2 = 1e6
    r = 1e3 * c
    local = Vec2(r * math.cos(1.0), r * math.sin(1.0))
    F2 = rate_functions(local, c, GAINS, c).F2
    assert F2 == pytest.approx(GAINS.kappa_eta / c, rel=0.01)


def test_degenerate_rates_flagged():
    r = rate_functions(Vec2(0.0, 3.0), 2.0, GAINS, 2.0)
    assert r.degenerate and r.F2 == 0.0 and r.F3 == 0.0


def test_bound_constants_examples():
    k = bound_constants(0.0, 40.0, 40.0, GAINS)
    assert k.k1 == pytest.approx(2 * GAINS.kappa_c)
    # frozen from the closed forms at c = 40, mu = 4, nu = 400
    assert k.k2 == pytest.approx(1.0 / 40 * math.sqrt(16 / (16 + 1600)))
    assert k.k3 == pytest.approx(1.0 / (1600 * math.sqrt(160000 + 1600)))
    assert k.k4 == pytest.approx(2 * min(k.k1, k.k2, k.k3))


@pytest.mark.parametrize("kwargs", [
    dict(mu=0.0), dict(mu=50.0), dict(nu=10.0), dict(c=0.0), dict(e1_init=-4000.0),
])
def test_bound_constants_domain(kwargs):
    args = dict(e1_init=0.0, c_star=40.0, c=40.0, gains=GAINS) | kwargs
    with pytest.raises(ValueError):
        bound_constants(**args)


@pytest.mark.parametrize("c", [1.0, 20.0, 40.0])
def test_grid_bounds(c):
    for check in (check_f2_bound(c, GAINS), check_f3_bound(c, GAINS), check_f3_direct_bound(c, GAINS)):
        assert check.ok, check
        assert check.points > 10000


def test_perturbation_bound_basics():
    local = Vec2(3.0, 4.0)
    assert perturbation_bound(local, 1.0, 0.0) == 0.0
    assert perturbation_bound(local, 1.0, 2.0) == pytest.approx(2 * perturbation_bound(local, 1.0, 1.0))
    with pytest.raises(ValueError):
        perturbation_bound(local, 1.0, -1.0)


@settings(max_examples=200)
@given(coords, st.floats(0.0, 2 * math.pi), st.floats(0.1, 10.0))
def test_drift_terms_bounded(coord, heading, eps):
    local = local_point(*coord)
    c = coord[2]
    g = drift_terms(local, c, Vec2(eps * math.cos(heading), eps * math.sin(heading)))
    bound = perturbation_bound(local, c, eps)
    # the bound is attained for the worst heading, hence the relative slack
    assert abs(g.g_eta) <= bound * (1 + 1e-12)
    assert abs(g.g_xi) <= bound * (1 + 1e-12)


@settings(max_examples=200)
@given(coords, st.floats(0.0, 2 * math.pi))
def test_drift_terms_match_finite_difference(coord, heading):
    local = local_point(*coord)
    c = coord[2]
    v = Vec2(math.cos(heading), math.sin(heading)) * c
    h = 1e-7
    a = local_to_elliptic(local - v * h, c)
    b = local_to_elliptic(local + v * h, c)
    deta = ((b.eta - a.eta + math.pi) % (2 * math.pi) - math.pi) / (2 * h)
    g = drift_terms(local, c, v)
    assert g.g_eta == pytest.approx(deta, rel=1e-5, abs=1e-6)
    assert g.g_xi == pytest.approx((b.xi - a.xi) / (2 * h), rel=1e-5, abs=1e-6)


def test_drift_terms_zero_velocity():
    assert drift_terms(Vec2(3.0, 4.0), 1.0, Vec2(0.0, 0.0))[:2] == (0.0, 0.0)
    assert drift_terms(Vec2(3.0, 0.0), 1.0, Vec2(1.0, 0.0)).degenerate


@settings(max_examples=100, deadline=None)
@given(coords, st.floats(0.5, 100.0), st.floats(-3.0, 3.0), st.floats(0.1, 3.0))
def test_closed_loop_error_rates(coord, c_star, eta_star, xi_star):
    """Error rates from finite-differenced vehicle motion against the closed forms."""
    xi, eta, c = coord
    goal = FormationGoal(xi_star, normalize_eta(eta_star), c_star)
    frame = BinocularFrame(Vec2(-c, 0.0), Vec2(c, 0.0))
    p_t = local_point(xi, eta, c)
    meas = Measurements(2 * c, math.dist(frame.p_l, p_t), math.dist(frame.p_r, p_t),
                        Side.UPPER if p_t.y >= 0 else Side.LOWER)
    out, comps = control_law(frame, meas, goal, GAINS)

    def err(s):
        f = BinocularFrame(frame.p_l + out.u_l * s, frame.p_r + out.u_r * s)
        return np.array(tracking_error(f, local_to_elliptic(global_to_local(f, p_t), f.c), goal))

    h = 1e-7 / max(1.0, abs(comps.v_c), abs(comps.v_eta), abs(comps.v_xi))
    d = err(h) - err(-h)
    d[1] = (d[1] + math.pi) % (2 * math.pi) - math.pi
    measured = d / (2 * h)
    e = TrackingError(*err(0.0))
    de1, de2, de3 = predicted_error_rates(p_t, c, e, GAINS, goal)
    ceta, cxi = scaling_coupling(p_t, c, comps.v_c)
    scale = np.abs([de1, de2 + ceta, de3 + cxi]) + np.abs(comps) / np.array([1, c, c]) + 1e-3
    assert np.all(np.abs(measured - [de1, de2 + ceta, de3 + cxi]) <= 1e-4 * scale)


def stationary_run(c0, p_t, t_end=60.0):
    sc = Scenario(
        initial=SimState(0.0, Vec2(-c0, 0.0), Vec2(c0, 0.0), p_t),
        goal=FormationGoal(1.2, math.pi / 2, 40.0),
        gains=GAINS, dt=0.01, t_end=t_end, decimate=1,
    )
    return run(sc)


def test_e1_identity_and_monotone_c():
    trace = stationary_run(10.0, Vec2(15.0, 30.0))
    t = np.array(trace.column("t"))
    c = np.array(trace.column("c"))
    e1 = np.array(trace.column("e1"))
    # |p_l - p_r|^2 / 2 = 2 c^2, so de1/dt = d/dt |p_l - p_r|^2 / 2 = 4 c v_c
    vc = np.array(trace.column("vc"))
    assert np.allclose(np.gradient(e1, t)[1:-1], (4 * c * vc)[1:-1], rtol=1e-3, atol=1e-6)
    assert np.all(np.diff(c) >= 0.0)
    assert c.min() >= 10.0 and c.max() <= 40.0


def test_lyapunov_decrease_and_envelope():
    trace = stationary_run(40.0, Vec2(15.0, 30.0), t_end=80.0)
    t = trace.column("t")
    V = trace.column("V")
    k = bound_constants(trace[0].e1, 40.0, 40.0, GAINS)
    check = check_lyapunov_decrease(t, V, k.k4)
    assert check.ok, check
    assert np.all(np.diff(V) <= 0.0)
    assert exponential_envelope_ok(t, [r.error_norm for r in trace], k.k4, slack=1e-9)
