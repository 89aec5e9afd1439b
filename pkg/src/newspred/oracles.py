"""Independent brute-force oracles for the statistical kernels.

Everything here is written the slow, obvious way (normal equations, explicit
double sums, Jacobi rotations, per-date refits) so the production code paths
have something genuinely independent to be checked against. Nothing in this
module may call into regression/oos/alloc implementations.
"""

from __future__ import annotations

import numpy as np


def ols_normal_equations(Xa: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Coefficients from inv(X'X) X'y; Xa already carries its intercept."""
    return np.linalg.solve(Xa.T @ Xa, Xa.T @ y)


def white_covariance_direct(Xa: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    T, k = Xa.shape
    S = np.zeros((k, k))
    for t in range(T):
        xt = Xa[t]
        S += residuals[t] ** 2 * np.outer(xt, xt)
    XtX_inv = np.linalg.inv(Xa.T @ Xa)
    return XtX_inv @ S @ XtX_inv


def newey_west_direct(Xa: np.ndarray, residuals: np.ndarray, lags: int) -> np.ndarray:
    T, k = Xa.shape
    S = np.zeros((k, k))
    for t in range(T):
        S += residuals[t] ** 2 * np.outer(Xa[t], Xa[t])
    for j in range(1, lags + 1):
        w = 1.0 - j / (lags + 1.0)
        for t in range(j, T):
            cross = residuals[t] * residuals[t - j] * np.outer(Xa[t], Xa[t - j])
            S += w * (cross + cross.T)
    XtX_inv = np.linalg.inv(Xa.T @ Xa)
    return XtX_inv @ S @ XtX_inv


def jacobi_eigenvalues(sym: np.ndarray, sweeps: int = 50, tol: float = 1e-14) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending."""
    A = np.array(sym, dtype=float, copy=True)
    n = A.shape[0]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += A[p, q] ** 2
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))[::-1]


def pearson_correlation_direct(a: np.ndarray, b: np.ndarray) -> float:
    """Correlation across vector components with explicit sums."""
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    cov = sum((a[i] - ma) * (b[i] - mb) for i in range(n))
    va = sum((a[i] - ma) ** 2 for i in range(n))
    vb = sum((b[i] - mb) ** 2 for i in range(n))
    return cov / np.sqrt(va * vb)


def novelty_direct(mean_vectors: list[np.ndarray], lookback: int = 5) -> list[float]:
    """Exhaustive pairwise-correlation novelty, one value per period from the second."""
    out = []
    for t in range(1, len(mean_vectors)):
        best = -np.inf
        for j in range(1, min(lookback, t) + 1):
            best = max(best, pearson_correlation_direct(mean_vectors[t], mean_vectors[t - j]))
        out.append(1.0 - best)
    return out


def recursive_refit_direct(
    signal: np.ndarray, returns: np.ndarray, n_train: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Expanding one-step forecasts with a full least-squares refit per date.

    Training pairs for target r_{t+1} are (signal_s, r_{s+1}) for s < t.
    Returns (model, benchmark, realized) over targets t+1 = n_train .. T-1.
    """
    T = len(returns)
    model, bench, real = [], [], []
    for t in range(n_train - 1, T - 1):
        x = signal[:t]
        y = returns[1 : t + 1]
        if np.std(x) == 0.0:
            f = float(np.mean(y))
        else:
            Xa = np.column_stack([np.ones(t), x])
            coef, *_ = np.linalg.lstsq(Xa, y, rcond=None)
            f = float(coef[0] + coef[1] * signal[t])
        model.append(f)
        bench.append(float(np.mean(returns[: t + 1])))
        real.append(float(returns[t + 1]))
    return np.array(model), np.array(bench), np.array(real)


def backtest_direct(
    model_forecasts: np.ndarray,
    benchmark_forecasts: np.ndarray,
    realized: np.ndarray,
    rf: np.ndarray,
    history: np.ndarray,
    gamma: float,
    bounds: tuple[float, float],
    variance_window: int,
    tc_rate: float,
    periods_per_year: int,
) -> dict:
    """Hand-rolled mean-variance backtest arithmetic, all loops explicit."""
    n = len(realized)
    past = list(history)

    def variance(window_vals):
        m = sum(window_vals) / len(window_vals)
        return sum((v - m) ** 2 for v in window_vals) / (len(window_vals) - 1)

    results = {}
    for name, forecasts in (("model", model_forecasts), ("benchmark", benchmark_forecasts)):
        weights, gross, net = [], [], []
        prev_w = 0.0
        hist = list(past)
        for t in range(n):
            var = variance(hist[-variance_window:])
            raw = forecasts[t] / (gamma * var)
            w = min(max(raw, bounds[0]), bounds[1])
            g = w * realized[t] + rf[t]
            turn = abs(w - prev_w)
            weights.append(w)
            gross.append(g)
            net.append(g - tc_rate * turn)
            prev_w = w
            hist.append(realized[t])
        out = {}
        for flavor, rp in (("gross", gross), ("net", net)):
            mu = sum(rp) / n
            var_p = sum((v - mu) ** 2 for v in rp) / (n - 1)
            out[f"cer_{flavor}"] = (mu - 0.5 * gamma * var_p) * periods_per_year
            ex = [rp[t] - rf[t] for t in range(n)]
            mu_ex = sum(ex) / n
            sd_ex = (sum((v - mu_ex) ** 2 for v in ex) / (n - 1)) ** 0.5
            out[f"sharpe_{flavor}"] = mu_ex / sd_ex * periods_per_year**0.5
        out["weights"] = weights
        out["gross"] = gross
        out["net"] = net
        results[name] = out
    results["cer_gain_gross"] = results["model"]["cer_gross"] - results["benchmark"]["cer_gross"]
    results["cer_gain_net"] = results["model"]["cer_net"] - results["benchmark"]["cer_net"]
    return results
