"""End-to-end acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured numbers
before asserting, so ``pytest -v`` output doubles as a report.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from binotrack import scenarios
from binotrack.analysis import (
    TrackingError,
    simplified_rates,
    check_f2_bound,
    check_f3_bound,
    check_f3_direct_bound,
    drift_terms,
    perturbation_bound,
    predicted_error_rates,
    scaling_coupling,
)
from binotrack.controller import FormationGoal, Gains
from binotrack.geometry import (
    EllipticCoord,
    Side,
    Vec2,
    distances_to_elliptic,
    elliptic_to_local,
    local_to_elliptic,
)
from binotrack.simulator import Scenario, SimState, local_target, run
from binotrack.summary import is_finite_trace, summarize


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail
    return emit


def eta_gap(a, b):
    d = abs(a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def test_transform_correctness(report):
    rng = np.random.default_rng(20240501)
    xs = rng.uniform(0.01, 5.0, 10_000)
    es = rng.uniform(0.0, 2 * math.pi, 10_000)
    cs = rng.uniform(0.5, 100.0, 10_000)
    start = time.perf_counter()
    worst_rt = worst_path = 0.0
    for xi, eta, c in zip(xs, es, cs):
        v = elliptic_to_local(EllipticCoord(xi, eta), c)
        back = local_to_elliptic(v, c)
        worst_rt = max(worst_rt, abs(back.xi - xi) / xi, eta_gap(back.eta, eta) / max(eta, 1.0))
        d1t = math.hypot(v.x + c, v.y)
        d2t = math.hypot(v.x - c, v.y)
        via = distances_to_elliptic(d1t, d2t, c, Side.UPPER if v.y >= 0 else Side.LOWER)
        worst_path = max(worst_path, abs(via.xi - back.xi) / back.xi, eta_gap(via.eta, back.eta))
    elapsed = time.perf_counter() - start
    ok = worst_rt < 1e-9 and worst_path < 1e-9 and elapsed < 1.0
    report(1, "transform correctness", ok,
           f"roundtrip max rel err {worst_rt:.2e}, path agreement {worst_path:.2e}, {elapsed:.2f} s")


def test_stationary_convergence(report):
    start = time.perf_counter()
    rows = []
    for name in ("fig3a", "fig3b", "fig3c", "fig3d"):
        s = summarize(run(scenarios.builtin(name)))
        rows.append((name, s))
    elapsed = time.perf_counter() - start
    ok = elapsed < 10.0 and all(
        s.final_error_norm < 1e-3 * s.initial_error_norm and s.fitted_rate is not None
        and s.fitted_rate > 0 and s.fit_r2 > 0.95 for _, s in rows)
    detail = "; ".join(f"{n} |e| {s.initial_error_norm:.4g}->{s.final_error_norm:.2e} "
                       f"rate {s.fitted_rate:.4f} R2 {s.fit_r2:.3f}" for n, s in rows)
    report(2, "stationary convergence", ok, f"{detail}; {elapsed:.2f} s")


def _derivative_errors(sc, with_coupling):
    tr = run(sc, decimate=1)
    t = np.array(tr.column("t"))
    E = np.array([[r.e1, r.e2, r.e3] for r in tr])
    measured = (E[2:] - E[:-2]) / (t[2:] - t[:-2])[:, None]
    # round-off floor of the differenced signal, in each component's own units
    floor = 1e-9 * np.array([sc.goal.c_star ** 2, 1.0, 1.0])
    worst = np.zeros(3)
    used = 0
    for i in range(1, len(tr) - 1):
        r = tr[i]
        local, c = local_target(r)
        if abs(local.x) < 1e-3 * c or abs(local.y) < 1e-3 * c:
            continue
        pred = np.array(predicted_error_rates(local, c, TrackingError(r.e1, r.e2, r.e3), sc.gains, sc.goal))
        if with_coupling:
            d_eta, d_xi = scaling_coupling(local, c, r.vc)
            pred[1] += d_eta
            pred[2] += d_xi
        rel = np.abs(measured[i - 1] - pred) / np.maximum(np.abs(pred), floor)
        worst = np.maximum(worst, rel)
        used += 1
    return worst, used


def test_derivative_consistency(report):
    fig3a = dataclasses.replace(scenarios.builtin("fig3a"), dt=1e-3, t_end=20.0)
    # baseline already at c*, where the closed forms hold without the scaling term
    at_scale = dataclasses.replace(
        fig3a, initial=SimState(0.0, Vec2(-40.0, 5.0), Vec2(40.0, 5.0), Vec2(15.0, 30.0)))
    w1, n1 = _derivative_errors(at_scale, with_coupling=False)
    w2, n2 = _derivative_errors(fig3a, with_coupling=True)
    ok = n1 > 1000 and n2 > 1000 and w1.max() < 1e-3 and w2.max() < 1e-3
    report(3, "derivative consistency", ok,
           f"c0=c*: max rel err (e1, e2, e3) = {np.array2string(w1, precision=2)} over {n1} points; "
           f"fig3a with scaling term: {np.array2string(w2, precision=2)} over {n2} points")


def test_rate_lower_bounds(report):
    gains = Gains(0.1, 1.0, 1.0)
    lines = []
    ok = True
    for c in (1.0, 20.0, 40.0):
        f2 = check_f2_bound(c, gains, n=200)
        f3 = check_f3_bound(c, gains, n=200)
        f3d = check_f3_direct_bound(c, gains, n=200)
        # the F3 grid is 200 x 200 over the bounding square, masked to the disk
        ok &= f2.ok and f3.ok and f3d.ok and f2.points == 200 * 200 and f3.points > 0.75 * 200 * 200
        lines.append(f"c={c:g}: F2 min {f2.min_value:.4g} >= k2 {f2.bound:.4g} ({f2.points} pts), "
                     f"F3 min {f3.min_value:.4g} >= k3 {f3.bound:.4g} ({f3.points} pts), "
                     f"direct F3 min {f3d.min_value:.4g} >= {f3d.bound:.4g}")
    # far field g = 1e6
    c = 20.0
    r = 1e3 * c
    limit_err = 0.0
    for ang in np.linspace(0.1, math.pi - 0.1, 7):
        F2, _ = simplified_rates(Vec2(r * math.cos(ang), r * math.sin(ang)), c, gains)
        limit_err = max(limit_err, abs(F2 * c / gains.kappa_eta - 1.0))
    ok &= limit_err < 0.01
    report(4, "rate lower bounds", ok, "; ".join(lines) + f"; F2 c/kappa_eta - 1 at g=1e6: {limit_err:.2e}")


def test_band_proportionality(report):
    bands = {}
    for speed in (1.25, 2.5, 5.0):
        tr = run(scenarios.circular(speed=speed))
        bands[speed] = summarize(tr).steady_state_band
    ratios = [b / v for v, b in bands.items()]
    spread = max(ratios) / min(ratios)
    ok = all(math.isfinite(b) for b in bands.values()) and spread <= 2.0
    report(5, "steady-state band scales with speed", ok,
           ", ".join(f"v={v:g}: band {b:.4g}" for v, b in bands.items())
           + f"; band/speed spread {spread:.3f}")


def test_perturbation_bound_soundness(report):
    rng = np.random.default_rng(7)
    headings = np.linspace(0.0, 2 * math.pi, 360, endpoint=False)
    worst = 0.0
    states = 0
    while states < 1000:
        xi, eta, c = rng.uniform(0.01, 5.0), rng.uniform(0, 2 * math.pi), rng.uniform(0.5, 100.0)
        eps = rng.uniform(0.1, 10.0)
        local = elliptic_to_local(EllipticCoord(xi, eta), c)
        bound = perturbation_bound(local, c, eps)
        for th in headings:
            g = drift_terms(local, c, Vec2(eps * math.cos(th), eps * math.sin(th)))
            if g.degenerate:
                break
            worst = max(worst, abs(g.g_eta) / bound, abs(g.g_xi) / bound)
        else:
            states += 1
    # Cauchy's inequality is attained at the worst heading, so allow round-off only
    ok = worst <= 1.0 + 1e-12
    report(6, "perturbation bound soundness", ok,
           f"max |g|/bound over {states} states x 360 headings = {worst:.15f}")


def test_axis_targets_nonsingular(report):
    rows = []
    ok = True
    for name in ("fig3c", "fig3d"):
        tr = run(scenarios.builtin(name))
        s = summarize(tr)
        fine = is_finite_trace(tr) and s.final_error_norm < 1e-3 * s.initial_error_norm
        ok &= fine
        rows.append(f"{name} finite={is_finite_trace(tr)} |e| {s.initial_error_norm:.4g}->{s.final_error_norm:.2e}")
    report(7, "axis targets converge without singularity", ok, "; ".join(rows))


def test_determinism_and_order(report):
    sc = dataclasses.replace(scenarios.builtin("fig3a"), t_end=30.0)
    same = run(sc).records == run(sc).records

    def smooth(dt):
        return Scenario(SimState(0.0, Vec2(-1.0, 0.0), Vec2(1.0, 0.0), Vec2(0.7, 1.3)),
                        FormationGoal(1.0, math.pi / 3, 1.5), Gains(0.5, 1.0, 1.0),
                        dt=dt, t_end=4.0, decimate=1)

    def final(dt):
        r = run(smooth(dt))[-1]
        return np.array([r.plx, r.ply, r.prx, r.pry])

    ref = final(0.0005)
    errs = [np.abs(final(dt) - ref).max() for dt in (0.08, 0.04, 0.02)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = same and min(ratios) >= 12.0
    report(8, "determinism and integrator order", ok,
           f"bit-identical={same}; dt-halving error ratios {', '.join(f'{r:.2f}' for r in ratios)}")
