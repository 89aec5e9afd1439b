"""Regression kernel: OLS with intercept, overlapping-horizon predictive
regressions, heteroskedasticity-and-autocorrelation-consistent covariances
(rolling-regressor-sum and Bartlett-kernel forms), state-interaction and
macro-link regressions, and principal components of control variables.

Conventions pinned for exactness and testability:
  * the solver is an orthogonal decomposition (SVD least squares), never the
    normal equations; rank tolerance 1e-10 relative to the largest singular
    value;
  * slopes stay in decimal units internally; percentage scaling happens only
    in report emission;
  * t = coef / sqrt(diag(cov)) for whichever covariance flavor is requested.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    AlignmentError,
    DegenerateSeriesError,
    InsufficientDataError,
    SingularDesignError,
)
from .periods import (
    PeriodIndex,
    PeriodSeries,
    StateDummy,
    align,
    horizon_average,
    standardize,
)

RANK_RCOND = 1e-10


@dataclass(frozen=True)
class DesignMatrix:
    """Named regressor columns; the intercept is prepended automatically at fit time."""

    names: tuple[str, ...]
    values: np.ndarray
    index: PeriodIndex | None = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("design matrix must be two-dimensional")
        if arr.shape[1] != len(self.names):
            raise ValueError(f"{arr.shape[1]} columns but {len(self.names)} names")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def from_series(cls, **columns: PeriodSeries) -> "DesignMatrix":
        aligned = align(*columns.values())
        mat = np.column_stack([s.values for s in aligned])
        return cls(tuple(columns.keys()), mat, aligned[0].index)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


class CovFlavor(enum.Enum):
    OLS = "ols"
    NEWEY_WEST = "nw"
    HODRICK = "hodrick"


@dataclass(frozen=True)
class RegressionFit:
    """One fitted specification: coefficients, covariances, t-statistics, R^2."""

    names: tuple[str, ...]           # includes "intercept" first
    coefficients: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    r_squared: float
    cov_ols: np.ndarray
    cov_nw: np.ndarray
    nw_lags: int
    horizon: int = 0
    cov_hodrick: np.ndarray | None = None
    index: PeriodIndex | None = None
    dropped: tuple[str, ...] = ()

    @property
    def n_obs(self) -> int:
        return len(self.residuals)

    def t_stats(self, flavor: CovFlavor = CovFlavor.NEWEY_WEST) -> np.ndarray:
        cov = {
            CovFlavor.OLS: self.cov_ols,
            CovFlavor.NEWEY_WEST: self.cov_nw,
            CovFlavor.HODRICK: self.cov_hodrick,
        }[flavor]
        if cov is None:
            raise ValueError(f"no {flavor.value} covariance on this fit")
        se = np.sqrt(np.diag(cov))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(se > 0, self.coefficients / se, 0.0)
        return t

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def to_report(self, spec_label: str) -> dict:
        """JSON-serializable summary; slopes reported in percentage form here only."""
        rep = {
            "spec": spec_label,
            "horizon": self.horizon,
            "n_obs": self.n_obs,
            "r2": self.r_squared,
            "coefficients": {n: float(c) for n, c in zip(self.names, self.coefficients)},
            "t_nw": {n: float(t) for n, t in zip(self.names, self.t_stats(CovFlavor.NEWEY_WEST))},
        }
        if self.cov_hodrick is not None:
            rep["t_hodrick"] = {
                n: float(t) for n, t in zip(self.names, self.t_stats(CovFlavor.HODRICK))
            }
        if self.dropped:
            rep["dropped"] = list(self.dropped)
        return rep


def _solve_ls(Xa: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    coef, _, rank, _ = np.linalg.lstsq(Xa, y, rcond=RANK_RCOND)
    if rank < Xa.shape[1]:
        raise SingularDesignError(
            f"design matrix is rank deficient (rank {rank} < {Xa.shape[1]} columns)"
        )
    return coef, y - Xa @ coef


def ols(
    X: DesignMatrix,
    y: PeriodSeries | np.ndarray,
    nw_lags: int = 0,
    horizon: int = 0,
) -> RegressionFit:
    """Least squares with intercept via SVD; R^2 about the mean."""
    yv = y.values if isinstance(y, PeriodSeries) else np.asarray(y, dtype=float)
    index = y.index if isinstance(y, PeriodSeries) else X.index
    if X.n_rows != len(yv):
        raise AlignmentError(f"{X.n_rows} design rows but {len(yv)} responses")
    if len(yv) < X.n_cols + 2:
        raise InsufficientDataError(
            f"need at least {X.n_cols + 2} observations for {X.n_cols} regressors"
        )
    Xa = np.column_stack([np.ones(X.n_rows), X.values])
    coef, resid = _solve_ls(Xa, yv)
    fitted = yv - resid
    sst = float(np.sum((yv - yv.mean()) ** 2))
    ssr = float(resid @ resid)
    r2 = 0.0 if sst == 0.0 else 1.0 - ssr / sst
    dof = len(yv) - Xa.shape[1]
    xtx_inv = np.linalg.inv(Xa.T @ Xa)
    cov_ols = xtx_inv * (ssr / dof)
    cov_nw = newey_west_covariance(Xa, resid, nw_lags)
    return RegressionFit(
        names=("intercept",) + X.names,
        coefficients=coef,
        residuals=resid,
        fitted=fitted,
        r_squared=r2,
        cov_ols=cov_ols,
        cov_nw=cov_nw,
        nw_lags=nw_lags,
        horizon=horizon,
        index=index,
    )


def newey_west_covariance(Xa: np.ndarray, residuals: np.ndarray, lags: int) -> np.ndarray:
    """Bartlett-kernel HAC sandwich; lags=0 degenerates to the White estimator.

    `Xa` is the intercept-augmented design actually used in the fit.
    """
    T = len(residuals)
    if lags < 0:
        raise ValueError("lags must be >= 0")
    if lags >= T:
        raise InsufficientDataError(f"lags {lags} >= sample size {T}")
    xe = Xa * residuals[:, None]
    S = xe.T @ xe
    for j in range(1, lags + 1):
        w = 1.0 - j / (lags + 1.0)
        G = xe[j:].T @ xe[:-j]
        S += w * (G + G.T)
    xtx_inv = np.linalg.inv(Xa.T @ Xa)
    return xtx_inv @ S @ xtx_inv


def hodrick_covariance(regressors: np.ndarray, returns: np.ndarray, h: int) -> np.ndarray:
    """Covariance for the slope of an h-period-mean predictive regression,
    built from one-period residuals and an h-period rolling sum of the
    regressor rows (the form that sums regressors, not residuals).

    `regressors` holds the predictor rows x_t (no intercept) dated t = 0..T-1,
    `returns` the one-period returns r_t; the one-period pairs are
    (x_t, r_{t+1}). The spectral term is

        S = (1/h^2) * sum_t e_{t+1}^2 z_t z_t',
        z_t = sum_{i=0}^{h-1} q_{t-i},

    where e are fitted one-period residuals and q_t is the intercept-augmented,
    demeaned regressor row. The 1/h^2 factor converts the sum-return form to
    the mean-return regression this toolkit fits. At h=1 the slope block equals
    the White covariance of the one-period regression exactly.
    """
    X = np.asarray(regressors, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    r = np.asarray(returns, dtype=float)
    T = len(r)
    if h < 1:
        raise ValueError("horizon must be >= 1")
    if T <= h + X.shape[1] + 1:
        raise InsufficientDataError("too few observations for the requested horizon")

    xr = X[: T - 1]
    X1 = np.column_stack([np.ones(T - 1), xr])
    _, e = _solve_ls(X1, r[1:])          # e[t] pairs with predictor date t

    Q = np.column_stack([np.ones(T - 1), xr - xr.mean(axis=0)])
    A = Q.T @ Q
    csum = np.cumsum(Q, axis=0)
    Z = csum[h - 1 :].copy()
    if len(Z) > 1:
        Z[1:] -= csum[: (T - 1) - h]
    et = e[h - 1 :]
    S = (Z * et[:, None] ** 2).T @ Z / (h * h)
    A_inv = np.linalg.inv(A)
    return A_inv @ S @ A_inv


def predictive_regression(
    signal: PeriodSeries,
    returns: PeriodSeries,
    h: int,
    controls: DesignMatrix | None = None,
) -> RegressionFit:
    """Regress h-period-ahead mean returns (h>=1) or the contemporaneous return
    (h=0) on the standardized signal, with HAC covariances attached.

    Newey-West uses lags = max(h, 1); the rolling-regressor-sum covariance is
    attached for h >= 1.
    """
    if h < 0:
        raise ValueError("horizon must be >= 0")
    series = [signal, returns]
    if controls is not None:
        if controls.index is None:
            raise AlignmentError("controls need a period index for alignment")
        series.extend(
            PeriodSeries(controls.index, controls.values[:, j])
            for j in range(controls.n_cols)
        )
    aligned = align(*series)
    sig, ret = aligned[0], aligned[1]
    sig = standardize(sig)
    ctrl_cols = aligned[2:]
    names = ("signal",) + (tuple(controls.names) if controls is not None else ())
    full_rows = np.column_stack([sig.values] + [c.values for c in ctrl_cols])

    if h == 0:
        X = DesignMatrix(names, full_rows, sig.index)
        return ols(X, ret, nw_lags=1, horizon=0)

    y = horizon_average(ret, h)
    X = DesignMatrix(names, full_rows[: len(y)], y.index)
    fit = ols(X, y, nw_lags=h, horizon=h)
    cov_h = hodrick_covariance(full_rows, ret.values, h)
    return replace(fit, cov_hodrick=cov_h)


def interaction_regression(
    signal: PeriodSeries,
    returns: PeriodSeries,
    dummy: StateDummy,
    h: int,
) -> RegressionFit:
    """Fit R_{t+1..t+h} on (high x signal, low x signal, high) plus intercept.

    A constant dummy collapses the design; the redundant columns are dropped
    with a warning instead of failing, and the surviving interaction slope
    equals the plain predictive-regression slope.
    """
    if h < 1:
        raise ValueError("interaction regressions are predictive; horizon must be >= 1")
    sig_a, ret_a, high_a = align(signal, returns, dummy.high_series())
    sig_a = standardize(sig_a)
    high = high_a.values
    cols = {
        "high_x_signal": high * sig_a.values,
        "low_x_signal": (1.0 - high) * sig_a.values,
        "high": high,
    }
    dropped = []
    if np.all(high == 1.0):
        dropped = ["low_x_signal", "high"]
    elif np.all(high == 0.0):
        dropped = ["high_x_signal", "high"]
    if dropped:
        warnings.warn(
            f"state dummy is constant; dropping collinear columns {dropped}",
            RuntimeWarning,
            stacklevel=2,
        )
        for name in dropped:
            del cols[name]

    names = tuple(cols)
    rows = np.column_stack(list(cols.values()))
    y = horizon_average(ret_a, h)
    fit = ols(DesignMatrix(names, rows[: len(y)], y.index), y, nw_lags=h, horizon=h)
    cov_h = hodrick_covariance(rows, ret_a.values, h)
    return replace(fit, cov_hodrick=cov_h, dropped=tuple(dropped))


class MacroFlavor(enum.Enum):
    SIMPLE = "simple"
    AR_CONTROLLED = "ar_controlled"


def plugin_nw_lags(T: int) -> int:
    """Bartlett plug-in lag choice, floor(4 (T/100)^(2/9))."""
    return int(math.floor(4.0 * (T / 100.0) ** (2.0 / 9.0)))


def macro_link_regression(
    proxy: PeriodSeries,
    signal: PeriodSeries,
    flavor: MacroFlavor = MacroFlavor.SIMPLE,
    nw_lags: int | None = None,
) -> RegressionFit:
    """Regress the next-period macro proxy on the current signal.

    Both sides are standardized in-sample so slopes read in standardized
    units. The ar_controlled flavor adds the lagged proxy as a regressor
    (the survey-expectation design: y_t on signal_{t-1} and y_{t-1}).
    """
    proxy_a, sig_a = align(proxy, signal)
    proxy_s = standardize(proxy_a)
    sig_s = standardize(sig_a)
    y = PeriodSeries(proxy_s.index.truncate(drop_start=1), proxy_s.values[1:])
    if flavor is MacroFlavor.SIMPLE:
        names = ("signal",)
        rows = sig_s.values[:-1][:, None]
    else:
        names = ("signal", "lagged_response")
        rows = np.column_stack([sig_s.values[:-1], proxy_s.values[:-1]])
    lags = plugin_nw_lags(len(y)) if nw_lags is None else nw_lags
    return ols(DesignMatrix(names, rows, y.index), y, nw_lags=lags, horizon=1)


def correlation_eigen(X: DesignMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors of the column correlation matrix.

    Sign convention: within each eigenvector the largest-magnitude loading is
    made positive (first such index on ties).
    """
    Z = X.values
    sd = Z.std(axis=0, ddof=1)
    if np.any(sd == 0.0):
        bad = [X.names[j] for j in np.flatnonzero(sd == 0.0)]
        raise DegenerateSeriesError(f"zero-variance columns cannot enter a correlation matrix: {bad}")
    Zs = (Z - Z.mean(axis=0)) / sd
    R = Zs.T @ Zs / (X.n_rows - 1)
    vals, vecs = np.linalg.eigh(R)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    for j in range(vecs.shape[1]):
        pivot = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[pivot, j] < 0:
            vecs[:, j] = -vecs[:, j]
    return vals, vecs


def principal_components(X: DesignMatrix, k: int) -> DesignMatrix:
    """Scores on the first k correlation-matrix components, named pc1..pck."""
    if k < 1 or k > X.n_cols:
        raise ValueError(f"k must be in 1..{X.n_cols}")
    vals, vecs = correlation_eigen(X)
    rank = int(np.sum(vals > RANK_RCOND * max(vals[0], 1.0)))
    if k > rank:
        raise SingularDesignError(f"requested {k} components but correlation rank is {rank}")
    Z = X.values
    Zs = (Z - Z.mean(axis=0)) / Z.std(axis=0, ddof=1)
    scores = Zs @ vecs[:, :k]
    return DesignMatrix(tuple(f"pc{i + 1}" for i in range(k)), scores, X.index)
