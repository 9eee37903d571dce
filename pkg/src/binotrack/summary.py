"""Convergence metrics computed from a trace."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .simulator import Trace

#: A fitted rate is only reported with at least this many decay-window samples.
MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class ConvergenceSummary:
    initial_error_norm: float
    final_error_norm: float
    settle_time: float | None
    fitted_rate: float | None  # minus the slope of log|e|, so positive means decay
    fit_r2: float | None
    fit_samples: int
    steady_state_band: float
    tolerance: float
    t_end: float

    def to_dict(self) -> dict:
        return asdict(self)


def log_linear_fit(t: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of ``log y`` against ``t`` and the fit's R^2."""
    t = np.asarray(t, dtype=float)
    ly = np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(t, ly, 1)
    resid = ly - (slope * t + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0.0 else 1.0
    return float(slope), r2


def summarize(
    trace: Trace,
    rel_tol: float = 1e-3,
    abs_tol: float | None = None,
    tail_fraction: float = 0.2,
) -> ConvergenceSummary:
    """Summarize a trace.

    The settle tolerance is ``abs_tol`` if given, else ``rel_tol`` times the
    initial error norm. The decay window runs from the first sample up to and
    including the first sample below that tolerance (the whole trace if it
    never settles). The steady-state band is the largest error norm over the
    last ``tail_fraction`` of the simulated time.
    """
    if not len(trace):
        raise ValueError("cannot summarize an empty trace")
    t = np.array(trace.column("t"))
    en = np.array([r.error_norm for r in trace])
    tol = abs_tol if abs_tol is not None else rel_tol * en[0]

    below = np.nonzero(en < tol)[0]
    settle = float(t[below[0]]) if below.size else None
    end = int(below[0]) + 1 if below.size else len(en)
    window = slice(0, end)
    tw, ew = t[window], en[window]
    keep = ew > 0.0
    tw, ew = tw[keep], ew[keep]

    rate = r2 = None
    if tw.size >= MIN_FIT_SAMPLES:
        slope, r2 = log_linear_fit(tw, ew)
        rate = -slope

    t_cut = t[-1] - tail_fraction * (t[-1] - t[0])
    band = float(en[t >= t_cut].max())
    return ConvergenceSummary(
        initial_error_norm=float(en[0]),
        final_error_norm=float(en[-1]),
        settle_time=settle,
        fitted_rate=rate,
        fit_r2=r2,
        fit_samples=int(tw.size),
        steady_state_band=band,
        tolerance=float(tol),
        t_end=float(t[-1]),
    )


def format_summary(s: ConvergenceSummary) -> str:
    def f(v):
        return "absent" if v is None else f"{v:.6g}"

    return (
        f"final |e| = {f(s.final_error_norm)} (initial {f(s.initial_error_norm)}); "
        f"settle time = {f(s.settle_time)} (tol {f(s.tolerance)}); "
        f"fitted rate = {f(s.fitted_rate)} (R^2 {f(s.fit_r2)}, n={s.fit_samples}); "
        f"steady-state band = {f(s.steady_state_band)}"
    )


def is_finite_trace(trace: Trace) -> bool:
    return all(math.isfinite(v) for r in trace for v in r)
