"""Recursive out-of-sample forecasting, benchmark comparison, forecast
combination, and cumulative squared-forecast-error paths.

The benchmark forecast at every date is the expanding mean of realized
returns through that date; the model refits the one-step predictive
regression on data through the forecast-formation date only. No future data
can enter any fit: the recursion uses running sums over past pairs, which is
algebraically identical to a per-date least-squares refit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DegenerateSeriesError, InsufficientDataError
from .periods import Period, PeriodIndex, PeriodSeries, align, parse_period


@dataclass(frozen=True)
class ForecastPath:
    """Per-date model and benchmark forecasts with the realized returns they target."""

    index: PeriodIndex
    model_forecast: np.ndarray
    benchmark_forecast: np.ndarray
    realized: np.ndarray
    fallback: np.ndarray | None = None  # True where a degenerate fit fell back to the benchmark

    def __post_init__(self):
        n = self.index.length
        for name in ("model_forecast", "benchmark_forecast", "realized"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if len(arr) != n:
                raise AlignmentError(f"{name} length {len(arr)} != index length {n}")
        if self.fallback is not None:
            fb = np.array(self.fallback, dtype=bool, copy=True)
            fb.setflags(write=False)
            object.__setattr__(self, "fallback", fb)
        if n == 0:
            raise InsufficientDataError("empty forecast path")

    def __len__(self) -> int:
        return self.index.length

    def window(self, start: Period | str | None = None, end: Period | str | None = None) -> "ForecastPath":
        """Restrict to an inclusive sub-window of evaluation periods."""
        i = 0 if start is None else self.index.position(start)
        j = len(self) - 1 if end is None else self.index.position(end)
        if j < i:
            raise AlignmentError("window end precedes window start")
        sl = slice(i, j + 1)
        return ForecastPath(
            PeriodIndex(self.index.frequency, self.index.start + i, j - i + 1),
            self.model_forecast[sl],
            self.benchmark_forecast[sl],
            self.realized[sl],
            None if self.fallback is None else self.fallback[sl],
        )

    def with_model(self, model: np.ndarray) -> "ForecastPath":
        return ForecastPath(self.index, model, self.benchmark_forecast, self.realized)


def recursive_forecast(
    signal: PeriodSeries,
    returns: PeriodSeries,
    train_end: Period | str,
    min_train: int = 24,
) -> ForecastPath:
    """Expanding-window one-step forecasts starting the period after train_end.

    For each target date the slope regression of r_{s+1} on signal_s is
    re-estimated over all pairs with s strictly before the formation date;
    a zero-variance training signal falls back to the benchmark (flagged).
    """
    sig, ret = align(signal, returns)
    p_end = parse_period(train_end) if isinstance(train_end, str) else train_end
    split = sig.index.position(p_end) + 1  # number of periods in the training block
    n = len(ret)
    if split - 1 < min_train:
        raise InsufficientDataError(
            f"only {split - 1} training pairs before {p_end.label}, need {min_train}"
        )
    if split >= n:
        raise InsufficientDataError("no evaluation periods after train_end")

    x = sig.values
    r = ret.values
    # running sums over pairs (x_s, r_{s+1}); prefix c covers s = 0..c-1
    px = np.cumsum(x[: n - 1])
    pr = np.cumsum(r[1:])
    pxx = np.cumsum(x[: n - 1] * x[: n - 1])
    pxr = np.cumsum(x[: n - 1] * r[1:])
    pret = np.cumsum(r)  # for the expanding benchmark mean

    model = np.empty(n - split)
    bench = np.empty(n - split)
    fallback = np.zeros(n - split, dtype=bool)
    for j, t in enumerate(range(split - 1, n - 1)):
        c = t  # pairs s = 0..t-1
        sx, sr, sxx, sxr = px[c - 1], pr[c - 1], pxx[c - 1], pxr[c - 1]
        den = c * sxx - sx * sx
        if den <= 1e-12 * max(c * sxx, 1.0):
            model[j] = pret[t] / (t + 1)
            fallback[j] = True
        else:
            slope = (c * sxr - sx * sr) / den
            intercept = (sr - slope * sx) / c
            model[j] = intercept + slope * x[t]
        bench[j] = pret[t] / (t + 1)

    eval_index = PeriodIndex(ret.frequency, ret.index.start + split, n - split)
    return ForecastPath(eval_index, model, bench, r[split:], fallback)


def r2_os(path: ForecastPath) -> float:
    """Proportional reduction in squared forecast error versus the benchmark."""
    sse_model = float(np.sum((path.realized - path.model_forecast) ** 2))
    sse_bench = float(np.sum((path.realized - path.benchmark_forecast) ** 2))
    if sse_bench == 0.0:
        raise DegenerateSeriesError("benchmark has zero squared error; R2_OS undefined")
    return 1.0 - sse_model / sse_bench


def _nw_mean_tstat(f: np.ndarray, lags: int = 1) -> float:
    T = len(f)
    u = f - f.mean()
    s = float(u @ u)
    for j in range(1, lags + 1):
        s += 2.0 * (1.0 - j / (lags + 1.0)) * float(u[j:] @ u[:-j])
    if s <= 0.0:
        return 0.0
    return float(f.mean() / math.sqrt(s / (T * T)))


@dataclass(frozen=True, slots=True)
class MsfeAdjusted:
    statistic: float
    p_value: float


def msfe_adjusted(path: ForecastPath) -> MsfeAdjusted:
    """Nested-forecast comparison: regress the adjusted loss differential on a
    constant and take its Bartlett lag-1 t-statistic, one-sided normal p-value.

    f_t = (r_t - b_t)^2 - [(r_t - m_t)^2 - (b_t - m_t)^2]; identical model and
    benchmark yield the 0-statistic convention (p = 0.5).
    """
    if len(path) < 10:
        raise InsufficientDataError("need at least 10 evaluation periods")
    r, m, b = path.realized, path.model_forecast, path.benchmark_forecast
    f = (r - b) ** 2 - ((r - m) ** 2 - (b - m) ** 2)
    if np.allclose(f, 0.0, atol=1e-300):
        return MsfeAdjusted(0.0, 0.5)
    stat = _nw_mean_tstat(f, lags=1)
    p = 0.5 * math.erfc(stat / math.sqrt(2.0))
    return MsfeAdjusted(stat, p)


def csfe_difference(path: ForecastPath) -> PeriodSeries:
    """Cumulative benchmark-minus-model squared forecast error; rising segments
    mean the model is beating the benchmark there."""
    r, m, b = path.realized, path.model_forecast, path.benchmark_forecast
    diff = (r - b) ** 2 - (r - m) ** 2
    return PeriodSeries(path.index, np.cumsum(diff))


@dataclass(frozen=True)
class OosReport:
    r2_os: float
    msfe_adjusted: float
    p_value: float
    csfe_diff: PeriodSeries

    def to_dict(self) -> dict:
        return {
            "r2_os": self.r2_os,
            "msfe_adjusted": self.msfe_adjusted,
            "p_value": self.p_value,
            "n_eval": len(self.csfe_diff),
        }


def evaluate(path: ForecastPath) -> OosReport:
    cw = msfe_adjusted(path)
    return OosReport(r2_os(path), cw.statistic, cw.p_value, csfe_difference(path))


class CombinationMethod(enum.Enum):
    MC = "mc"
    IMC = "imc"
    IWC = "iwc"


def _check_members(paths: list[ForecastPath]) -> None:
    first = paths[0]
    for p in paths[1:]:
        if p.index != first.index:
            raise AlignmentError("combination members must share the evaluation index")
        if not np.array_equal(p.realized, first.realized) or not np.array_equal(
            p.benchmark_forecast, first.benchmark_forecast
        ):
            raise AlignmentError("combination members must share realized and benchmark series")


def discounted_msfe_weights(paths: list[ForecastPath], t: int, delta: float = 1.0) -> np.ndarray:
    """Member weights at evaluation position t from discounted past squared errors.

    Non-negative and summing to one; equal before any past errors exist, and
    members with zero discounted error (perfect history) split the weight.
    """
    k = len(paths)
    if t == 0:
        return np.full(k, 1.0 / k)
    d = np.empty(k)
    for i, p in enumerate(paths):
        err = p.realized[:t] - p.model_forecast[:t]
        disc = delta ** np.arange(t - 1, -1, -1)
        d[i] = float(np.sum(disc * err * err))
    if np.any(d == 0.0):
        w = (d == 0.0).astype(float)
    else:
        w = 1.0 / d
    return w / w.sum()


def _theta_hat(realized, combo, bench, t: int, window: int) -> float:
    """Shrinkage weight from past forecast pairs only; 1 until the window fills."""
    if t < window:
        return 1.0
    x = combo[:t] - bench[:t]
    y = realized[:t] - bench[:t]
    vx = float(np.sum((x - x.mean()) ** 2))
    if vx == 0.0:
        return 1.0
    th = float(np.sum((x - x.mean()) * (y - y.mean())) / vx)
    return min(max(th, 0.0), 2.0)


def combine(
    paths: list[ForecastPath],
    method: CombinationMethod = CombinationMethod.MC,
    theta_window: int = 12,
    delta: float = 1.0,
) -> ForecastPath:
    """Combine member forecast paths: equal-weight mean (MC), or the mean /
    discounted-error-weighted combination shrunk toward the benchmark with an
    expanding-window weight estimated from past data only (IMC / IWC)."""
    if not paths:
        raise InsufficientDataError("no member paths")
    _check_members(paths)
    base = paths[0]
    n = len(base)
    if all(np.array_equal(p.model_forecast, base.model_forecast) for p in paths[1:]):
        paths = paths[:1]  # identical members: their mean is the member, exactly
    members = np.column_stack([p.model_forecast for p in paths])

    if method is CombinationMethod.MC:
        return base.with_model(members.mean(axis=1))

    if method is CombinationMethod.IMC:
        combo = members.mean(axis=1)
    else:
        combo = np.empty(n)
        for t in range(n):
            w = discounted_msfe_weights(paths, t, delta)
            combo[t] = float(members[t] @ w)

    out = np.empty(n)
    for t in range(n):
        th = _theta_hat(base.realized, combo, base.benchmark_forecast, t, theta_window)
        out[t] = (1.0 - th) * base.benchmark_forecast[t] + th * combo[t]
    return base.with_model(out)
