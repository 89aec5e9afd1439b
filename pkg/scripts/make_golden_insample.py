#!/usr/bin/env python3
"""Regenerate tests/data/golden_insample.csv.

The golden table is computed here with independent oracle math (normal
equations, explicit double-sum HAC, explicit rolling-regressor sums), not the
production regression module. Only the CSV formatter is shared, so a
byte-for-byte match in the test certifies the production values.

Usage: python scripts/make_golden_insample.py
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from newspred.cli import _fmt, write_table  # shared formatter only
from newspred.corpus import read_ratios_csv, read_series_csv

FIXTURE_SEED = 777
HORIZONS = [0, 1, 3, 6, 9, 12]


def nw_cov_direct(Xa, e, lags):
    T, k = Xa.shape
    S = np.zeros((k, k))
    for t in range(T):
        S += e[t] ** 2 * np.outer(Xa[t], Xa[t])
    for j in range(1, lags + 1):
        w = 1.0 - j / (lags + 1.0)
        for t in range(j, T):
            c = e[t] * e[t - j] * np.outer(Xa[t], Xa[t - j])
            S += w * (c + c.T)
    Ainv = np.linalg.inv(Xa.T @ Xa)
    return Ainv @ S @ Ainv


def hodrick_cov_direct(x, r, h):
    T = len(r)
    X1 = np.column_stack([np.ones(T - 1), x[: T - 1]])
    b1 = np.linalg.solve(X1.T @ X1, X1.T @ r[1:])
    e = r[1:] - X1 @ b1
    xd = x[: T - 1] - x[: T - 1].mean()
    Q = np.column_stack([np.ones(T - 1), xd])
    A = np.zeros((2, 2))
    for t in range(T - 1):
        A += np.outer(Q[t], Q[t])
    S = np.zeros((2, 2))
    for t in range(h - 1, T - 1):
        z = np.zeros(2)
        for i in range(h):
            z += Q[t - i]
        S += e[t] ** 2 * np.outer(z, z)
    S /= h * h
    Ainv = np.linalg.inv(A)
    return Ainv @ S @ Ainv


def regress(signal, returns, h):
    """Oracle predictive regression: returns the golden row fields."""
    sig = (signal - signal.mean()) / signal.std(ddof=1)
    if h == 0:
        y = returns
        x = sig
    else:
        T = len(returns)
        y = np.array([returns[t + 1 : t + 1 + h].mean() for t in range(T - h)])
        x = sig[: T - h]
    Xa = np.column_stack([np.ones(len(x)), x])
    coef = np.linalg.solve(Xa.T @ Xa, Xa.T @ y)
    resid = y - Xa @ coef
    r2 = 1.0 - resid @ resid / np.sum((y - y.mean()) ** 2)
    nw = nw_cov_direct(Xa, resid, max(h, 1))
    t_nw = coef[1] / np.sqrt(nw[1, 1])
    if h == 0:
        t_h = None
    else:
        hod = hodrick_cov_direct(sig, returns, h)
        t_h = coef[1] / np.sqrt(hod[1, 1])
    return coef[1], t_h, t_nw, r2, len(y)


def main():
    golden = REPO / "tests" / "data" / "golden_insample.csv"
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [
                sys.executable, "-m", "newspred", "--out", tmp,
                "--seed", str(FIXTURE_SEED), "simulate",
                "--periods", "120", "--beta", "0.4", "--noise-sd", "1.0",
                "--headlines-per-period", "40",
            ],
            check=True,
            cwd=REPO,
        )
        subprocess.run(
            [
                sys.executable, "-m", "newspred", "--out", tmp, "ingest",
                "--headlines", f"{tmp}/headlines.jsonl", "--labels", f"{tmp}/labels.csv",
            ],
            check=True,
            cwd=REPO,
        )
        subprocess.run(
            [sys.executable, "-m", "newspred", "--out", tmp, "ratios", "--counts", f"{tmp}/counts.csv"],
            check=True,
            cwd=REPO,
        )
        r = read_ratios_csv(f"{tmp}/ratios.csv")
        returns = read_series_csv(f"{tmp}/returns.csv")

    rows = []
    for h in HORIZONS:
        slope, t_h, t_nw, r2, n = regress(r.nr_good.values, returns.values, h)
        rows.append(
            [
                "nr_good", h, _fmt(100.0 * slope),
                "" if t_h is None else _fmt(t_h), _fmt(t_nw), _fmt(100.0 * r2), n,
            ]
        )
    write_table(
        golden,
        "insample_predictive",
        "slope_pct,r2_pct in percent; slopes per 1 sd of signal",
        ["signal", "horizon", "slope_pct", "t_hodrick", "t_nw", "r2_pct", "n_obs"],
        rows,
    )
    print(f"wrote {golden}")


if __name__ == "__main__":
    main()
