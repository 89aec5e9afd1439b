"""Command-line entry point.

Subcommands: ingest, classify, ratios, insample, oos, backtest, macro,
interact, novelty, simulate, oracle. A declarative config file (key = value
under [paths] / [analysis] / [output] sections) supplies defaults; flags
override file values. All outputs are byte-reproducible; wall-clock
timestamps go only to the run.log sidecar.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import datetime as _dt
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (
    aggregate,
    ratios as compute_ratios,
    read_counts_csv,
    read_headlines_jsonl,
    read_labels_csv,
    read_ratios_csv,
    read_series_csv,
    summary_stats,
    write_counts_csv,
    write_labels_csv,
    write_ratios_csv,
    write_series_csv,
)
from .errors import ConfigError, NewspredError
from .periods import Frequency, PeriodSeries, parse_period, trailing_mean_dummy
from .regression import (
    CovFlavor,
    MacroFlavor,
    interaction_regression,
    macro_link_regression,
    predictive_regression,
)
from . import alloc as alloc_mod
from . import classify as classify_mod
from . import novelty as novelty_mod
from . import oos as oos_mod
from . import simgen as simgen_mod

TABLE_SCHEMA_VERSION = "1"


@dataclass
class RunConfig:
    paths: dict[str, str] = field(default_factory=dict)
    analysis: dict[str, str] = field(default_factory=dict)
    out_dir: str = "out"

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file {path} not found")
        cfg = cls()
        if parser.has_section("paths"):
            cfg.paths = dict(parser.items("paths"))
        if parser.has_section("analysis"):
            cfg.analysis = dict(parser.items("analysis"))
        if parser.has_option("output", "dir"):
            cfg.out_dir = parser.get("output", "dir")
        return cfg

    def path(self, key: str, flag_value: str | None) -> str | None:
        return flag_value if flag_value else self.paths.get(key)

    def param(self, key: str, flag_value, default):
        if flag_value is not None:
            return flag_value
        if key in self.analysis:
            return type(default)(self.analysis[key]) if default is not None else self.analysis[key]
        return default


def _require_files(**named_paths) -> dict[str, Path]:
    problems = []
    out = {}
    for name, p in named_paths.items():
        if p is None:
            problems.append(f"missing required input: {name}")
        elif not Path(p).exists():
            problems.append(f"{name} file does not exist: {p}")
        else:
            out[name] = Path(p)
    if problems:
        raise ConfigError(problems)
    return out


def _fmt(x: float) -> str:
    return "%.8g" % float(x)


def write_table(path: Path, name: str, units: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            f"# newspred-table schema={TABLE_SCHEMA_VERSION} "
            f"version={__version__} table={name} units={units}\n"
        )
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def read_table(path: str | Path) -> tuple[str, list[str], list[list[str]]]:
    """Read a report table back: (metadata line, header, rows)."""
    with open(path, newline="", encoding="utf-8") as fh:
        meta = fh.readline().rstrip("\n")
        if not meta.startswith("# newspred-table"):
            raise ValueError(f"{path}: not a newspred table")
        reader = csv.reader(fh)
        header = next(reader)
        return meta, header, [row for row in reader if row]


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", "utf-8")


def _log(outdir: Path, message: str) -> None:
    # the only place a wall-clock timestamp is allowed to appear
    with open(outdir / "run.log", "a", encoding="utf-8") as fh:
        fh.write(f"{_dt.datetime.now().isoformat()} {message}\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args, cfg: RunConfig, outdir: Path) -> int:
    files = _require_files(
        headlines=cfg.path("headlines", args.headlines),
        labels=cfg.path("labels", args.labels),
    )
    headlines = read_headlines_jsonl(files["headlines"])
    labels = read_labels_csv(files["labels"])
    freq = Frequency(args.frequency)
    counts = aggregate(headlines, labels, freq, source=args.source, prompt_id=args.prompt)
    write_counts_csv(outdir / "counts.csv", counts)
    stats = summary_stats(counts) if len(counts) >= 3 else {}
    _write_json(
        outdir / "ingest_summary.json",
        {
            "n_headlines": len(headlines),
            "n_labels": len(labels),
            "n_periods": len(counts),
            "stats": {k: dataclasses.asdict(v) for k, v in stats.items()},
        },
    )
    return 0


def cmd_classify(args, cfg: RunConfig, outdir: Path) -> int:
    needed = {"headlines": cfg.path("headlines", args.headlines)}
    if args.backend == "lexicon":
        needed["lexicon_positive"] = cfg.path("lexicon_positive", args.lexicon_positive)
        needed["lexicon_negative"] = cfg.path("lexicon_negative", args.lexicon_negative)
    else:
        needed["endpoint"] = cfg.path("endpoint", args.endpoint)
    files = _require_files(**needed)
    headlines = read_headlines_jsonl(files["headlines"])
    out_path = Path(args.out) if args.out else outdir / "labels.csv"
    if args.backend == "lexicon":
        lex = classify_mod.Lexicon.from_files(
            files["lexicon_positive"], files["lexicon_negative"]
        )
        labels = [classify_mod.lexicon_classify(h, lex) for h in headlines]
    else:
        endpoint = classify_mod.RemoteEndpointConfig.from_json_file(files["endpoint"])
        if args.threads:
            endpoint = classify_mod.RemoteEndpointConfig(
                **{**vars(endpoint), "max_in_flight": args.threads}
            )
        template = classify_mod.BUILTIN_PROMPTS.get(args.prompt)
        if template is None:
            raise ConfigError(
                f"unknown prompt id {args.prompt!r}; built-ins: "
                + ", ".join(sorted(classify_mod.BUILTIN_PROMPTS))
            )
        cache = classify_mod.LabelCache(args.cache)
        labels = classify_mod.llm_classify(headlines, template, endpoint, cache)
    write_labels_csv(out_path, labels)
    return 0


def cmd_ratios(args, cfg: RunConfig, outdir: Path) -> int:
    files = _require_files(counts=cfg.path("counts", args.counts))
    counts = read_counts_csv(files["counts"])
    r = compute_ratios(counts)
    write_ratios_csv(outdir / "ratios.csv", r)
    return 0


def _signal_column(path: Path, column: str) -> PeriodSeries:
    r = read_ratios_csv(path)
    if column == "nr_good":
        return r.nr_good
    if column == "nr_bad":
        return r.nr_bad
    raise ConfigError(f"unknown signal column {column!r} (expected nr_good or nr_bad)")


def _parse_horizons(spec: str) -> list[int]:
    try:
        hs = [int(tok) for tok in spec.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad horizons list {spec!r}") from None
    if any(h < 0 for h in hs) or not hs:
        raise ConfigError(f"horizons must be non-negative integers, got {spec!r}")
    return hs


def cmd_insample(args, cfg: RunConfig, outdir: Path) -> int:
    files = _require_files(
        ratios=cfg.path("ratios", args.ratios),
        returns=cfg.path("returns", args.returns),
    )
    returns = read_series_csv(files["returns"], args.returns_col)
    horizons = _parse_horizons(cfg.param("horizons", args.horizons, "0,1,3,6,9,12"))
    signals = [s.strip() for s in args.signal.split(",")]
    rows = []
    reports = []
    for name in signals:
        signal = _signal_column(files["ratios"], name)
        for h in horizons:
            fit = predictive_regression(signal, returns, h)
            t_nw = fit.t_stats(CovFlavor.NEWEY_WEST)[1]
            t_h = fit.t_stats(CovFlavor.HODRICK)[1] if fit.cov_hodrick is not None else None
            rows.append(
                [
                    name,
                    h,
                    _fmt(100.0 * fit.coefficient("signal")),
                    "" if t_h is None else _fmt(t_h),
                    _fmt(t_nw),
                    _fmt(100.0 * fit.r_squared),
                    fit.n_obs,
                ]
            )
            reports.append(fit.to_report(f"{name}_h{h}"))
    write_table(
        outdir / "insample.csv",
        "insample_predictive",
        "slope_pct,r2_pct in percent; slopes per 1 sd of signal",
        ["signal", "horizon", "slope_pct", "t_hodrick", "t_nw", "r2_pct", "n_obs"],
        rows,
    )
    _write_json(outdir / "insample.json", reports)
    return 0


def cmd_oos(args, cfg: RunConfig, outdir: Path) -> int:
    files = _require_files(
        ratios=cfg.path("ratios", args.ratios),
        returns=cfg.path("returns", args.returns),
    )
    returns = read_series_csv(files["returns"], args.returns_col)
    train_end = cfg.param("train_end", args.train_end, None)
    if train_end is None:
        raise ConfigError("train-end is required (flag --train-end or analysis.train_end)")
    signals = [s.strip() for s in args.signal.split(",")]
    paths = {}
    for name in signals:
        signal = _signal_column(files["ratios"], name)
        paths[name] = oos_mod.recursive_forecast(signal, returns, train_end, args.min_train)

    combos = [c.strip().lower() for c in args.combine.split(",") if c.strip()] if args.combine else []
    members = list(paths.values())
    for combo in combos:
        method = oos_mod.CombinationMethod(combo)
        paths[combo] = oos_mod.combine(members, method, theta_window=args.theta_window)

    report = {}
    csfe_cols = {}
    base = next(iter(paths.values()))
    for name, path in paths.items():
        rep = oos_mod.evaluate(path)
        report[name] = rep.to_dict()
        csfe_cols[name] = rep.csfe_diff.values
        rows = [
            [p.label, repr(float(r)), repr(float(b)), repr(float(m))]
            for p, r, b, m in zip(
                path.index, path.realized, path.benchmark_forecast, path.model_forecast
            )
        ]
        write_table(
            outdir / f"forecasts_{name}.csv",
            f"forecast_path_{name}",
            "decimal returns",
            ["period", "realized", "benchmark", "model"],
            rows,
        )
    csfe_rows = [
        [p.label] + [_fmt(csfe_cols[name][i]) for name in paths]
        for i, p in enumerate(base.index)
    ]
    write_table(
        outdir / "csfe.csv",
        "csfe_difference",
        "cumulative squared-error difference, decimal^2",
        ["period"] + [f"csfe_{name}" for name in paths],
        csfe_rows,
    )
    _write_json(outdir / "oos_report.json", report)
    return 0


def cmd_backtest(args, cfg: RunConfig, outdir: Path) -> int:
    files = _require_files(
        forecasts=args.forecasts,
        rf=cfg.path("rf", args.rf),
    )
    meta, header, rows = read_table(files["forecasts"])
    if header != ["period", "realized", "benchmark", "model"]:
        raise ConfigError(f"{files['forecasts']}: not a forecast path table")
    labels = [r[0] for r in rows]
    realized = PeriodSeries.from_labels(labels, [float(r[1]) for r in rows])
    path = oos_mod.ForecastPath(
        realized.index,
        np.array([float(r[3]) for r in rows]),
        np.array([float(r[2]) for r in rows]),
        realized.values,
    )
    rf = read_series_csv(files["rf"], args.rf_col)
    history = None
    ret_path = cfg.path("returns", args.returns)
    if ret_path:
        full = read_series_csv(_require_files(returns=ret_path)["returns"], args.returns_col)
        if full.index.start < path.index.start:
            history = full.window(end=path.index[0].shift(-1))
    bounds = tuple(float(b) for b in args.bounds.split(","))
    if len(bounds) != 2:
        raise ConfigError(f"bounds must be low,high, got {args.bounds!r}")
    bt_cfg = alloc_mod.BacktestConfig(
        gamma=float(cfg.param("gamma", args.gamma, 3.0)),
        weight_bounds=bounds,
        variance_window=int(cfg.param("variance_window", args.window, 60)),
        tc_rate=float(cfg.param("tc_bp", args.tc_bp, 50.0)) / 10000.0,
        periods_per_year=args.periods_per_year,
    )
    report = alloc_mod.backtest(path, rf, bt_cfg, history=history)
    _write_json(outdir / "backtest.json", report.to_dict())
    w = report.model.weights
    rows = [
        [
            p.label,
            _fmt(report.model.weights.values[i]),
            _fmt(report.benchmark.weights.values[i]),
            repr(float(report.model.gross_returns.values[i])),
            repr(float(report.model.net_returns.values[i])),
        ]
        for i, p in enumerate(w.index)
    ]
    write_table(
        outdir / "weights.csv",
        "backtest_paths",
        "weights unitless; returns decimal",
        ["period", "weight_model", "weight_benchmark", "gross_return_model", "net_return_model"],
        rows,
    )
    return 0


def cmd_macro(args, cfg: RunConfig, outdir: Path) -> int:
    files = _require_files(
        proxy=cfg.path("macro", args.proxy),
        ratios=cfg.path("ratios", args.ratios),
    )
    proxy = read_series_csv(files["proxy"], args.proxy_col)
    signals = [s.strip() for s in args.signal.split(",")]
    flavor = MacroFlavor(args.flavor)
    rows, reports = [], []
    for name in signals:
        signal = _signal_column(files["ratios"], name)
        fit = macro_link_regression(proxy, signal, flavor, nw_lags=args.nw_lags)
        t_nw = fit.t_stats(CovFlavor.NEWEY_WEST)
        row = [name, args.flavor, _fmt(fit.coefficient("signal")), _fmt(t_nw[1])]
        if flavor is MacroFlavor.AR_CONTROLLED:
            row += [_fmt(fit.coefficient("lagged_response")), _fmt(t_nw[2])]
        else:
            row += ["", ""]
        row += [_fmt(100.0 * fit.r_squared), fit.n_obs]
        rows.append(row)
        reports.append(fit.to_report(f"macro_{name}_{args.flavor}"))
    write_table(
        outdir / "macro.csv",
        "macro_link",
        "slopes in standardized units; r2_pct in percent",
        ["signal", "flavor", "slope", "t_nw", "psi", "psi_t_nw", "r2_pct", "n_obs"],
        rows,
    )
    _write_json(outdir / "macro.json", reports)
    return 0


def cmd_interact(args, cfg: RunConfig, outdir: Path) -> int:
    files = _require_files(
        ratios=cfg.path("ratios", args.ratios),
        returns=cfg.path("returns", args.returns),
        state=cfg.path("state", args.state),
    )
    returns = read_series_csv(files["returns"], args.returns_col)
    state = read_series_csv(files["state"], args.state_col)
    signal = _signal_column(files["ratios"], args.signal)
    dummy = trailing_mean_dummy(state, int(cfg.param("state_window", args.window, 60)))
    horizons = [h for h in _parse_horizons(cfg.param("horizons", args.horizons, "1,3,6,9,12")) if h >= 1]
    rows, reports = [], []
    for h in horizons:
        fit = interaction_regression(signal, returns, dummy, h)
        t_h = fit.t_stats(CovFlavor.HODRICK)
        coef = {n: _fmt(100.0 * fit.coefficient(n)) for n in fit.names if n != "intercept"}
        trow = {n: _fmt(t_h[fit.names.index(n)]) for n in fit.names if n != "intercept"}
        rows.append(
            [
                h,
                coef.get("high_x_signal", ""),
                trow.get("high_x_signal", ""),
                coef.get("low_x_signal", ""),
                trow.get("low_x_signal", ""),
                coef.get("high", ""),
                trow.get("high", ""),
                _fmt(100.0 * fit.r_squared),
                fit.n_obs,
            ]
        )
        reports.append(fit.to_report(f"interact_{args.signal}_h{h}"))
    write_table(
        outdir / "interact.csv",
        "state_interaction",
        "slopes in percent per 1 sd of signal",
        [
            "horizon",
            "high_x_signal_pct",
            "t_high",
            "low_x_signal_pct",
            "t_low",
            "high_pct",
            "t_state",
            "r2_pct",
            "n_obs",
        ],
        rows,
    )
    _write_json(outdir / "interact.json", reports)
    return 0


def cmd_novelty(args, cfg: RunConfig, outdir: Path) -> int:
    files = _require_files(embeddings=cfg.path("embeddings", args.embeddings))
    records = novelty_mod.read_embeddings(files["embeddings"])
    means = novelty_mod.period_mean(records)
    nov = novelty_mod.novelty_score(means, lookback=args.lookback, metric=args.metric)
    out_path = Path(args.out) if args.out else outdir / "novelty.csv"
    write_series_csv(out_path, nov, "novelty")
    if args.window:
        dummy = novelty_mod.similarity_dummy(
            means, window=args.window, lookback=args.lookback, metric=args.metric
        )
        write_series_csv(outdir / "similarity_dummy.csv", dummy.high_series(), "high_similarity")
    return 0


def cmd_simulate(args, cfg: RunConfig, outdir: Path) -> int:
    if args.dgp_config:
        dgp, per_period = simgen_mod.load_dgp_config(_require_files(dgp=args.dgp_config)["dgp"])
        if args.seed is not None:
            dgp = simgen_mod.DgpConfig(**{**_dgp_kwargs(dgp), "seed": args.seed})
    else:
        dgp = simgen_mod.DgpConfig(
            seed=args.seed if args.seed is not None else 0,
            T=args.periods,
            beta=args.beta,
            noise_sd=args.noise_sd,
            signal_persistence=args.persistence,
            label_link=simgen_mod.LabelLink(strength=args.link_strength),
        )
        per_period = args.headlines_per_period
    sim = simgen_mod.simulate_corpus(dgp, per_period)
    from .corpus import write_headlines_jsonl

    write_headlines_jsonl(outdir / "headlines.jsonl", sim.headlines)
    write_labels_csv(outdir / "labels.csv", sim.labels)
    write_series_csv(outdir / "returns.csv", sim.market.returns, "excess_return")
    write_series_csv(outdir / "signal.csv", sim.market.signal, "signal")
    _write_json(
        outdir / "dgp.json",
        {
            "seed": dgp.seed,
            "T": dgp.T,
            "beta": dgp.beta,
            "noise_sd": dgp.noise_sd,
            "signal_persistence": dgp.signal_persistence,
            "headlines_per_period": per_period,
        },
    )
    return 0


def _dgp_kwargs(dgp: simgen_mod.DgpConfig) -> dict:
    return {
        "seed": dgp.seed,
        "T": dgp.T,
        "beta": dgp.beta,
        "noise_sd": dgp.noise_sd,
        "signal_persistence": dgp.signal_persistence,
        "label_link": dgp.label_link,
        "frequency": dgp.frequency,
        "start": dgp.start,
    }


def cmd_oracle(args, cfg: RunConfig, outdir: Path) -> int:
    report = simgen_mod.oracle_suite()
    for line in report.lines():
        print(line)
    _write_json(outdir / "oracle.json", report.to_dict())
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="newspred", description=__doc__)
    p.add_argument("--config", help="run configuration file (key = value with sections)")
    p.add_argument("--out", help="output directory (default from config, else ./out)")
    p.add_argument("--seed", type=int, default=None, help="override the simulation seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads where applicable")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="validate headlines/labels and emit period counts")
    sp.add_argument("--headlines")
    sp.add_argument("--labels")
    sp.add_argument("--frequency", default="monthly", choices=[f.value for f in Frequency])
    sp.add_argument("--source", default=None)
    sp.add_argument("--prompt", default=None)
    sp.set_defaults(fn=cmd_ingest)

    sp = sub.add_parser("classify", help="label headlines with the lexicon or LLM backend")
    sp.add_argument("--backend", required=True, choices=["lexicon", "llm"])
    sp.add_argument("--prompt", default="direction-v1")
    sp.add_argument("--headlines")
    sp.add_argument("--out")
    sp.add_argument("--lexicon-positive", dest="lexicon_positive")
    sp.add_argument("--lexicon-negative", dest="lexicon_negative")
    sp.add_argument("--endpoint")
    sp.add_argument("--cache")
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("ratios", help="turn period counts into news ratios")
    sp.add_argument("--counts")
    sp.set_defaults(fn=cmd_ratios)

    sp = sub.add_parser("insample", help="predictive regressions across horizons")
    sp.add_argument("--signal", default="nr_good")
    sp.add_argument("--ratios")
    sp.add_argument("--returns")
    sp.add_argument("--returns-col", dest="returns_col", default=None)
    sp.add_argument("--horizons", default=None)
    sp.set_defaults(fn=cmd_insample)

    sp = sub.add_parser("oos", help="recursive out-of-sample evaluation and combinations")
    sp.add_argument("--signal", default="nr_good")
    sp.add_argument("--ratios")
    sp.add_argument("--returns")
    sp.add_argument("--returns-col", dest="returns_col", default=None)
    sp.add_argument("--train-end", dest="train_end", default=None)
    sp.add_argument("--combine", default="")
    sp.add_argument("--min-train", dest="min_train", type=int, default=24)
    sp.add_argument("--theta-window", dest="theta_window", type=int, default=12)
    sp.set_defaults(fn=cmd_oos)

    sp = sub.add_parser("backtest", help="mean-variance backtest of a forecast path")
    sp.add_argument("--forecasts", required=True, help="forecast path table from the oos command")
    sp.add_argument("--rf")
    sp.add_argument("--rf-col", dest="rf_col", default=None)
    sp.add_argument("--returns", help="full return history for the variance window")
    sp.add_argument("--returns-col", dest="returns_col", default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--tc-bp", dest="tc_bp", type=float, default=None)
    sp.add_argument("--bounds", default="0,1.5")
    sp.add_argument("--window", type=int, default=None)
    sp.add_argument("--periods-per-year", dest="periods_per_year", type=int, default=12)
    sp.set_defaults(fn=cmd_backtest)

    sp = sub.add_parser("macro", help="regress a macro proxy on the news signal")
    sp.add_argument("--proxy")
    sp.add_argument("--proxy-col", dest="proxy_col", default=None)
    sp.add_argument("--signal", default="nr_good")
    sp.add_argument("--ratios")
    sp.add_argument("--flavor", default="simple", choices=[f.value for f in MacroFlavor])
    sp.add_argument("--nw-lags", dest="nw_lags", type=int, default=None)
    sp.set_defaults(fn=cmd_macro)

    sp = sub.add_parser("interact", help="state-interaction predictive regressions")
    sp.add_argument("--signal", default="nr_good")
    sp.add_argument("--ratios")
    sp.add_argument("--returns")
    sp.add_argument("--returns-col", dest="returns_col", default=None)
    sp.add_argument("--state", help="state-variable series file")
    sp.add_argument("--state-col", dest="state_col", default=None)
    sp.add_argument("--window", type=int, default=None)
    sp.add_argument("--horizons", default=None)
    sp.set_defaults(fn=cmd_interact)

    sp = sub.add_parser("novelty", help="novelty scores from headline embeddings")
    sp.add_argument("--embeddings")
    sp.add_argument("--lookback", type=int, default=5)
    sp.add_argument("--metric", default="pearson", choices=["pearson", "cosine"])
    sp.add_argument("--window", type=int, default=None, help="also emit the similarity dummy")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_novelty)

    sp = sub.add_parser("simulate", help="generate synthetic headlines, labels, and returns")
    sp.add_argument("--dgp-config", dest="dgp_config", help="TOML config for the process")
    sp.add_argument("--periods", type=int, default=324)
    sp.add_argument("--beta", type=float, default=0.5)
    sp.add_argument("--noise-sd", dest="noise_sd", type=float, default=1.0)
    sp.add_argument("--persistence", type=float, default=0.9)
    sp.add_argument("--link-strength", dest="link_strength", type=float, default=1.0)
    sp.add_argument("--headlines-per-period", dest="headlines_per_period", type=int, default=50)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("oracle", help="run the independent-oracle suite")
    sp.set_defaults(fn=cmd_oracle)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        outdir = Path(args.out or cfg.out_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        _log(outdir, f"command={args.command}")
        return args.fn(args, cfg, outdir)
    except NewspredError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError):
            payload["problems"] = exc.problems
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
