import math

import numpy as np
import pytest

from binotrack.simulator import Trace, TraceRecord
from binotrack.summary import format_summary, is_finite_trace, log_linear_fit, summarize


def synthetic_trace(norms, dt=1.0):
    recs = [TraceRecord(i * dt, 0, 0, 0, 0, 0, 0, n, 0.0, 0.0, n * n / 2, 0, 0, 0, 1.0)
            for i, n in enumerate(norms)]
    return Trace(records=recs, scenario=None)


def test_log_linear_fit_exact():
    t = np.linspace(0, 10, 50)
    slope, r2 = log_linear_fit(t, 3.0 * np.exp(-0.7 * t))
    assert slope == pytest.approx(-0.7)
    assert r2 == pytest.approx(1.0)


def test_summarize_exponential():
    norms = [2.0 * math.exp(-0.5 * i) for i in range(40)]
    s = summarize(synthetic_trace(norms))
    assert s.initial_error_norm == 2.0
    assert s.tolerance == pytest.approx(2e-3)
    # first sample below 2e-3: exp(-0.5 i) < 1e-3 at i = 14
    assert s.settle_time == 14.0
    assert s.fit_samples == 15
    assert s.fitted_rate == pytest.approx(0.5)
    assert s.fit_r2 == pytest.approx(1.0)
    # tail starts at t = 39 - 0.2 * 39 = 31.2
    assert s.steady_state_band == pytest.approx(norms[32])


def test_summarize_not_settling():
    s = summarize(synthetic_trace([1.0 + 0.1 * math.sin(i) for i in range(30)]))
    assert s.settle_time is None
    assert s.fit_samples == 30
    assert "settle time = absent" in format_summary(s)


def test_summarize_short_window_has_no_rate():
    s = summarize(synthetic_trace([1.0, 1e-5, 1e-6]))
    assert s.settle_time == 1.0
    assert s.fitted_rate is None and s.fit_r2 is None


def test_summarize_absolute_tolerance():
    s = summarize(synthetic_trace([1.0, 0.5, 0.2, 0.05]), abs_tol=0.1)
    assert s.settle_time == 3.0 and s.tolerance == 0.1


def test_summarize_empty():
    with pytest.raises(ValueError):
        summarize(synthetic_trace([]))


def test_to_dict_and_finite():
    tr = synthetic_trace([1.0, 0.5])
    d = summarize(tr).to_dict()
    assert set(d) >= {"final_error_norm", "settle_time", "fitted_rate", "fit_r2", "steady_state_band"}
    assert is_finite_trace(tr)
    tr.records.append(tr.records[-1]._replace(e1=math.nan))
    assert not is_finite_trace(tr)
