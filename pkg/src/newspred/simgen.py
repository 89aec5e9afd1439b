"""Synthetic data-generating processes and the oracle suite that keeps every
statistic verifiable at desk scale.

All randomness flows from one splittable seed: child streams are spawned per
role (market, corpus) and per Monte-Carlo replication, so results are
reproducible and independent of parallel worker counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Callable

import numpy as np

from . import oracles
from .corpus import HeadlineRecord, Label, LabelRecord
from .errors import ConfigError
from .periods import Frequency, Period, PeriodIndex, PeriodSeries, parse_period


@dataclass(frozen=True)
class LabelLink:
    """Logistic map from the latent signal to label frequencies.

    p_up = sigmoid(logit(p_up_base) + strength * s) and symmetrically for
    p_down with the opposite sign; the remainder is UNKNOWN. Base rates follow
    realistic good/bad news shares. When a large signal pushes p_up + p_down
    above 0.9 the pair is rescaled so some UNKNOWN mass always remains.
    """

    p_up_base: float = 0.18
    p_down_base: float = 0.13
    strength: float = 1.0

    def __post_init__(self):
        if not (0 < self.p_up_base < 1 and 0 < self.p_down_base < 1):
            raise ConfigError("label base rates must lie in (0, 1)")
        if self.p_up_base + self.p_down_base >= 1:
            raise ConfigError("label base rates must sum below 1")

    def probabilities(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a_up = math.log(self.p_up_base / (1 - self.p_up_base))
        a_dn = math.log(self.p_down_base / (1 - self.p_down_base))
        p_up = 1.0 / (1.0 + np.exp(-(a_up + self.strength * s)))
        p_dn = 1.0 / (1.0 + np.exp(-(a_dn - self.strength * s)))
        total = p_up + p_dn
        over = total > 0.9
        scale = np.where(over, 0.9 / total, 1.0)
        return p_up * scale, p_dn * scale


@dataclass(frozen=True)
class DgpConfig:
    seed: int
    T: int = 324
    beta: float = 0.5
    noise_sd: float = 1.0
    signal_persistence: float = 0.9
    label_link: LabelLink = field(default_factory=LabelLink)
    frequency: Frequency = Frequency.MONTHLY
    start: str = "1996-01"

    def __post_init__(self):
        problems = []
        if self.T < 60:
            problems.append("T must be at least 60")
        if self.noise_sd <= 0:
            problems.append("noise_sd must be positive")
        if not 0 <= self.signal_persistence < 1:
            problems.append("signal_persistence must lie in [0, 1)")
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class MarketSim:
    signal: PeriodSeries
    returns: PeriodSeries


def _spawn(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def simulate_market(cfg: DgpConfig) -> MarketSim:
    """Standardized AR(1) signal; returns[t+1] = beta * signal[t] + noise."""
    rng, _ = _spawn(cfg.seed, 2)
    rho = cfg.signal_persistence
    eps = rng.standard_normal(cfg.T)
    s = np.empty(cfg.T)
    s[0] = eps[0] / math.sqrt(1 - rho * rho) if rho > 0 else eps[0]
    for t in range(1, cfg.T):
        s[t] = rho * s[t - 1] + eps[t]
    s = (s - s.mean()) / s.std(ddof=1)
    shocks = rng.standard_normal(cfg.T) * cfg.noise_sd
    r = shocks.copy()
    r[1:] += cfg.beta * s[:-1]
    start = parse_period(cfg.start)
    index = PeriodIndex(cfg.frequency, start.ordinal, cfg.T)
    return MarketSim(PeriodSeries(index, s), PeriodSeries(index, r))


@dataclass(frozen=True)
class CorpusSim:
    headlines: list[HeadlineRecord]
    labels: list[LabelRecord]
    market: MarketSim


_FILLER = {Label.UP: "gainward", Label.DOWN: "lossward", Label.UNKNOWN: "sideways"}


def _period_day(p: Period, i: int) -> date:
    # spread headlines across days 1..28 of the month (safe for all months)
    if p.frequency is Frequency.MONTHLY:
        return date(p.ordinal // 12, p.ordinal % 12 + 1, 1 + i % 28)
    if p.frequency is Frequency.QUARTERLY:
        first_month = (p.ordinal % 4) * 3 + 1
        return date(p.ordinal // 4, first_month, 1 + i % 28)
    return date.fromordinal(p.ordinal * 7 + 1 + i % 7)


def simulate_corpus(cfg: DgpConfig, headlines_per_period: int) -> CorpusSim:
    """Emit schema-valid headlines and labels whose UP share rises with the
    latent signal, so the whole counts-to-backtest pipeline runs end to end.

    Headline text embeds a label-matched marker token, which lets the lexicon
    backend reproduce the planted labels exactly.
    """
    if headlines_per_period < 1:
        raise ConfigError("headlines_per_period must be >= 1")
    market = simulate_market(cfg)
    _, rng = _spawn(cfg.seed, 2)
    p_up, p_dn = cfg.label_link.probabilities(market.signal.values)
    headlines: list[HeadlineRecord] = []
    labels: list[LabelRecord] = []
    for t, p in enumerate(market.signal.index):
        draws = rng.random(headlines_per_period)
        for i in range(headlines_per_period):
            if draws[i] < p_up[t]:
                lab = Label.UP
            elif draws[i] < p_up[t] + p_dn[t]:
                lab = Label.DOWN
            else:
                lab = Label.UNKNOWN
            hid = f"h-{p.label}-{i:04d}"
            text = f"synthetic {_FILLER[lab]} item {i:04d} for {p.label}"
            headlines.append(HeadlineRecord(hid, _period_day(p, i), text))
            labels.append(LabelRecord(hid, lab, "synthetic", "dgp"))
    return CorpusSim(headlines, labels, market)


def run_seeded(fn: Callable[[int, np.random.SeedSequence], object], seed: int, n: int, threads: int = 1) -> list:
    """Map fn over n spawned child seeds; results are collected in seed order,
    so the output is identical for any worker count."""
    children = np.random.SeedSequence(seed).spawn(n)
    if threads <= 1:
        return [fn(i, ss) for i, ss in enumerate(children)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n), children))


# ---------------------------------------------------------------------------
# oracle suite


@dataclass(frozen=True, slots=True)
class OracleCheck:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


@dataclass(frozen=True)
class OracleReport:
    checks: tuple[OracleCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            out.append(f"{status}  {c.name}: max deviation {c.max_deviation:.3e} (tol {c.tolerance:.0e})")
        return out

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "max_deviation": c.max_deviation,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def oracle_suite(tolerances: dict[str, float] | None = None) -> OracleReport:
    """Run the independent oracles against the production implementations on
    fixed seeded fixtures. Any deviation beyond tolerance fails the suite,
    naming the operation."""
    from . import alloc, novelty, oos, regression
    from .periods import PeriodSeries as PS

    tol = {
        "ols_vs_normal_equations": 1e-8,
        "white_vs_direct": 1e-8,
        "newey_west_vs_direct": 1e-8,
        "hodrick_h1_vs_white_slope": 1e-8,
        "pca_eigenvalues_vs_jacobi": 1e-8,
        "novelty_vs_exhaustive": 1e-10,
        "recursive_vs_brute_refit": 1e-10,
        "backtest_vs_hand_arithmetic": 1e-10,
    }
    if tolerances:
        tol.update(tolerances)

    rng = np.random.default_rng(20240117)
    checks = []

    def rel_dev(a, b):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        scale = max(float(np.max(np.abs(b))), 1e-12)
        return float(np.max(np.abs(a - b))) / scale

    # least squares against the normal equations
    T, k = 60, 3
    X = regression.DesignMatrix(tuple(f"x{i}" for i in range(k)), rng.standard_normal((T, k)))
    y = rng.standard_normal(T)
    fit = regression.ols(X, y)
    Xa = np.column_stack([np.ones(T), X.values])
    checks.append(
        OracleCheck(
            "ols_vs_normal_equations",
            rel_dev(fit.coefficients, oracles.ols_normal_equations(Xa, y)),
            tol["ols_vs_normal_equations"],
        )
    )
    checks.append(
        OracleCheck(
            "white_vs_direct",
            rel_dev(fit.cov_nw, oracles.white_covariance_direct(Xa, fit.residuals)),
            tol["white_vs_direct"],
        )
    )
    nw = regression.newey_west_covariance(Xa, fit.residuals, 5)
    checks.append(
        OracleCheck(
            "newey_west_vs_direct",
            rel_dev(nw, oracles.newey_west_direct(Xa, fit.residuals, 5)),
            tol["newey_west_vs_direct"],
        )
    )

    # rolling-sum covariance at h=1 equals White on the one-period regression
    x1 = rng.standard_normal(90)
    r1 = 0.3 * np.roll(x1, 1) + rng.standard_normal(90)
    X1 = np.column_stack([np.ones(89), x1[:89]])
    coef1, *_ = np.linalg.lstsq(X1, r1[1:], rcond=None)
    e1 = r1[1:] - X1 @ coef1
    white = oracles.white_covariance_direct(X1, e1)
    hod = regression.hodrick_covariance(x1[:, None], r1, 1)
    checks.append(
        OracleCheck(
            "hodrick_h1_vs_white_slope",
            abs(hod[1, 1] - white[1, 1]) / abs(white[1, 1]),
            tol["hodrick_h1_vs_white_slope"],
        )
    )

    # correlation-matrix eigenvalues against the Jacobi solver
    Xp = regression.DesignMatrix(tuple(f"c{i}" for i in range(6)), rng.standard_normal((80, 6)))
    vals, _ = regression.correlation_eigen(Xp)
    Z = (Xp.values - Xp.values.mean(axis=0)) / Xp.values.std(axis=0, ddof=1)
    R = Z.T @ Z / 79
    checks.append(
        OracleCheck(
            "pca_eigenvalues_vs_jacobi",
            rel_dev(vals, oracles.jacobi_eigenvalues(R)),
            tol["pca_eigenvalues_vs_jacobi"],
        )
    )

    # novelty against exhaustive pairwise correlations
    means = [
        novelty.PeriodEmbedding(Period(Frequency.MONTHLY, 24 * 12 + i), rng.standard_normal(16))
        for i in range(10)
    ]
    nov = novelty.novelty_score(means)
    direct = oracles.novelty_direct([m.mean_vector for m in means])
    checks.append(
        OracleCheck("novelty_vs_exhaustive", rel_dev(nov.values, direct), tol["novelty_vs_exhaustive"])
    )

    # recursive forecasting against per-date refits
    sim = simulate_market(DgpConfig(seed=4242, T=120, beta=0.3, noise_sd=0.5))
    path = oos.recursive_forecast(sim.signal, sim.returns, sim.signal.index[59].label, min_train=24)
    m_o, b_o, r_o = oracles.recursive_refit_direct(sim.signal.values, sim.returns.values, 60)
    dev = max(
        rel_dev(path.model_forecast, m_o),
        rel_dev(path.benchmark_forecast, b_o),
        rel_dev(path.realized, r_o),
    )
    checks.append(OracleCheck("recursive_vs_brute_refit", dev, tol["recursive_vs_brute_refit"]))

    # backtest arithmetic against the hand-rolled loop oracle
    hist = 0.01 + 0.02 * rng.standard_normal(12)
    f_model = np.array([0.02, -0.01, 0.04, 0.0, 0.03, 0.06])
    f_bench = np.array([0.01, 0.01, 0.01, 0.01, 0.01, 0.01])
    realized = np.array([0.03, -0.02, 0.05, 0.01, -0.01, 0.04])
    rf = np.full(6, 0.002)
    cfg = alloc.BacktestConfig(gamma=3.0, variance_window=12, tc_rate=0.005)
    start = Period(Frequency.MONTHLY, 2005 * 12)
    hist_series = PS(PeriodIndex(Frequency.MONTHLY, start.ordinal - 12, 12), hist)
    fpath = oos.ForecastPath(
        PeriodIndex(Frequency.MONTHLY, start.ordinal, 6), f_model, f_bench, realized
    )
    report = alloc.backtest(fpath, PS(fpath.index, rf), cfg, history=hist_series)
    direct = oracles.backtest_direct(
        f_model, f_bench, realized, rf, hist, 3.0, (0.0, 1.5), 12, 0.005, 12
    )
    dev = max(
        rel_dev(report.model.weights.values, direct["model"]["weights"]),
        rel_dev(report.model.net_returns.values, direct["model"]["net"]),
        abs(report.cer_gain_gross - direct["cer_gain_gross"]),
        abs(report.cer_gain_net - direct["cer_gain_net"]),
        abs(report.model.sharpe_gross - direct["model"]["sharpe_gross"]),
    )
    checks.append(OracleCheck("backtest_vs_hand_arithmetic", dev, tol["backtest_vs_hand_arithmetic"]))

    return OracleReport(tuple(checks))


# ---------------------------------------------------------------------------
# DGP config files (TOML)


def load_dgp_config(path: str | Path) -> tuple[DgpConfig, int]:
    """Read a DGP config file; returns (config, headlines_per_period)."""
    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
        import tomli as tomllib

    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    dgp = dict(raw.get("dgp", {}))
    link = LabelLink(**raw.get("label_link", {}))
    headlines_per_period = int(dgp.pop("headlines_per_period", 50))
    freq = Frequency(dgp.pop("frequency", "monthly"))
    try:
        cfg = DgpConfig(label_link=link, frequency=freq, **dgp)
    except TypeError as exc:
        raise ConfigError(f"bad dgp config: {exc}") from exc
    return cfg, headlines_per_period
