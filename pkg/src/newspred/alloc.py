"""Mean-variance allocation backtest: forecasts to weights, weights to
portfolio returns, certainty-equivalent gains and Sharpe ratios, with
proportional transaction costs charged on turnover for model and benchmark
strategies alike.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AlignmentError, DegenerateSeriesError, InsufficientDataError
from .oos import ForecastPath
from .periods import PeriodIndex, PeriodSeries, align


@dataclass(frozen=True)
class BacktestConfig:
    gamma: float
    weight_bounds: tuple[float, float] = (0.0, 1.5)
    variance_window: int = 60
    tc_rate: float = 0.005
    periods_per_year: int = 12

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("risk aversion must be positive")
        lo, hi = self.weight_bounds
        if not lo < hi:
            raise ValueError("weight bounds must satisfy low < high")
        if self.variance_window < 12:
            raise ValueError("variance window must be at least 12 periods")
        if self.tc_rate < 0:
            raise ValueError("transaction cost rate must be non-negative")


def weights_from_forecasts(
    forecasts: PeriodSeries,
    realized: PeriodSeries,
    cfg: BacktestConfig,
) -> PeriodSeries:
    """w_t = clamp(forecast_t / (gamma * trailing variance), bounds).

    `forecasts` is indexed by target period; the variance forecast for a
    target is the sample variance of the trailing `variance_window` realized
    returns strictly before it. Targets without a full window are skipped.
    """
    if realized.frequency is not forecasts.frequency:
        raise AlignmentError("forecast and realized series must share a frequency")
    first = None
    w_vals = []
    for i, p in enumerate(forecasts.index):
        avail = p.ordinal - realized.index.start  # realized observations strictly before p
        if avail < cfg.variance_window or avail > len(realized):
            continue
        if first is None:
            first = i
        window = realized.values[avail - cfg.variance_window : avail]
        var = float(np.var(window, ddof=1))
        if var <= 1e-12 * float(np.mean(window * window)):
            raise DegenerateSeriesError(f"zero trailing return variance before {p.label}")
        raw = forecasts.values[i] / (cfg.gamma * var)
        w_vals.append(min(max(raw, cfg.weight_bounds[0]), cfg.weight_bounds[1]))
    if first is None:
        raise InsufficientDataError(
            f"no target has {cfg.variance_window} prior realized returns"
        )
    index = PeriodIndex(forecasts.frequency, forecasts.index.start + first, len(w_vals))
    return PeriodSeries(index, w_vals)


@dataclass(frozen=True)
class StrategyResult:
    weights: PeriodSeries
    gross_returns: PeriodSeries
    net_returns: PeriodSeries
    cer_gross: float
    cer_net: float
    sharpe_gross: float
    sharpe_net: float


@dataclass(frozen=True)
class BacktestReport:
    model: StrategyResult
    benchmark: StrategyResult
    cer_gain_gross: float
    cer_gain_net: float
    market_sharpe: float
    config: BacktestConfig

    def to_dict(self) -> dict:
        def strat(s: StrategyResult) -> dict:
            return {
                "cer_gross": s.cer_gross,
                "cer_net": s.cer_net,
                "sharpe_gross": s.sharpe_gross,
                "sharpe_net": s.sharpe_net,
            }

        return {
            "gamma": self.config.gamma,
            "tc_rate": self.config.tc_rate,
            "variance_window": self.config.variance_window,
            "weight_bounds": list(self.config.weight_bounds),
            "model": strat(self.model),
            "benchmark": strat(self.benchmark),
            "cer_gain_gross": self.cer_gain_gross,
            "cer_gain_net": self.cer_gain_net,
            "market_sharpe": self.market_sharpe,
            "n_periods": len(self.model.weights),
        }


def _cer(returns: np.ndarray, gamma: float, ppy: int) -> float:
    mu = float(returns.mean())
    var = float(returns.var(ddof=1)) if len(returns) > 1 else 0.0
    return (mu - 0.5 * gamma * var) * ppy


def _sharpe(excess: np.ndarray, ppy: int) -> float:
    sd = float(excess.std(ddof=1))
    if sd == 0.0:
        return 0.0
    return float(excess.mean()) / sd * ppy**0.5


def _run_strategy(
    forecasts: np.ndarray,
    index: PeriodIndex,
    realized_full: PeriodSeries,
    rf: np.ndarray,
    cfg: BacktestConfig,
) -> StrategyResult:
    fore = PeriodSeries(index, forecasts)
    w = weights_from_forecasts(fore, realized_full, cfg)
    pos0 = w.index.start - index.start  # first tradable position within the path
    off = index.start - realized_full.index.start
    rv = realized_full.values[off + pos0 : off + len(index)]
    rfv = rf[pos0:]
    wv = w.values
    gross = wv * rv + rfv
    prev = np.concatenate([[0.0], wv[:-1]])
    net = gross - cfg.tc_rate * np.abs(wv - prev)
    return StrategyResult(
        weights=w,
        gross_returns=PeriodSeries(w.index, gross),
        net_returns=PeriodSeries(w.index, net),
        cer_gross=_cer(gross, cfg.gamma, cfg.periods_per_year),
        cer_net=_cer(net, cfg.gamma, cfg.periods_per_year),
        sharpe_gross=_sharpe(gross - rfv, cfg.periods_per_year),
        sharpe_net=_sharpe(net - rfv, cfg.periods_per_year),
    )


def backtest(
    path: ForecastPath,
    rf: PeriodSeries,
    cfg: BacktestConfig,
    history: PeriodSeries | None = None,
) -> BacktestReport:
    """Run the model and benchmark forecast streams through the weight rule.

    `history` supplies realized returns before the evaluation window so the
    trailing variance window can start at the first evaluation date; it must
    end exactly one period before the path starts. Without it, early
    evaluation dates without a full window are skipped, not imputed.
    """
    rf_a = rf.window(path.index[0], path.index[len(path) - 1])
    if rf_a.index != path.index:
        raise AlignmentError("risk-free series must cover the evaluation window")

    if history is not None:
        if history.frequency is not path.index.frequency:
            raise AlignmentError("history frequency mismatch")
        if history.index.stop != path.index.start:
            raise AlignmentError("history must end exactly one period before the path")
        realized_full = PeriodSeries(
            PeriodIndex(history.frequency, history.index.start, len(history) + len(path)),
            np.concatenate([history.values, path.realized]),
        )
    else:
        realized_full = PeriodSeries(path.index, path.realized)

    model = _run_strategy(path.model_forecast, path.index, realized_full, rf_a.values, cfg)
    bench = _run_strategy(path.benchmark_forecast, path.index, realized_full, rf_a.values, cfg)
    if model.weights.index != bench.weights.index:
        raise AlignmentError("model and benchmark tradable windows differ")

    pos0 = model.weights.index.start - path.index.start
    market = path.realized[pos0:]
    return BacktestReport(
        model=model,
        benchmark=bench,
        cer_gain_gross=model.cer_gross - bench.cer_gross,
        cer_gain_net=model.cer_net - bench.cer_net,
        market_sharpe=_sharpe(market, cfg.periods_per_year),
        config=cfg,
    )


def write_report_json(path: str | Path, report: BacktestReport) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8")
