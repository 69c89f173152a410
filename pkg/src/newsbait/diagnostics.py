"""Autocorrelation diagnostics and unit-root tests for daily mean series.

Implements the sample ACF (denominator-n convention, which keeps the
autocorrelation matrix positive semi-definite), PACF via the
Durbin-Levinson recursion, the augmented Dickey-Fuller regression test
(unit-root null) and the KPSS test (stationarity null). The two tests have
opposite nulls, so on a clearly stationary series ADF rejects while KPSS
fails to reject.

Critical values are embedded static tables: MacKinnon (2010) response
surfaces for ADF and the standard KPSS table. Exact p-values are out of
scope; decisions are made against the 5% level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, NumericalError

__all__ = [
    "AcfResult",
    "UnitRootResult",
    "acf",
    "pacf",
    "adf_test",
    "kpss_test",
]


@dataclass(slots=True)
class AcfResult:
    lags: list[int]
    coefficients: list[float]
    confidence_band: float  # +/- 1.96 / sqrt(n)


@dataclass(slots=True)
class UnitRootResult:
    statistic: float
    critical_values: dict[str, float]
    reject_null: bool
    lags_used: int
    null: str


def _as_series(values, min_len: int = 2) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if len(x) < min_len:
        raise ValueError(f"series needs at least {min_len} observations, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def acf(series, max_lag: int) -> AcfResult:
    """Sample autocorrelations r_0..r_max_lag with the denominator-n convention.

    r_k = sum_{t=1}^{n-k} (x_t - xbar)(x_{t+k} - xbar) / sum_t (x_t - xbar)^2.
    """
    x = _as_series(series)
    n = len(x)
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag must be in [0, {n - 1}], got {max_lag}")
    xd = x - x.mean()
    denom = float(xd @ xd)
    if denom <= 0.0:
        raise DegenerateSeriesError("series is constant; autocorrelation undefined")
    coeffs = [1.0]
    for k in range(1, max_lag + 1):
        coeffs.append(float(xd[:-k] @ xd[k:]) / denom)
    return AcfResult(
        lags=list(range(max_lag + 1)),
        coefficients=coeffs,
        confidence_band=1.96 / n ** 0.5,
    )


def pacf(series, max_lag: int) -> AcfResult:
    """Partial autocorrelations for lags 1..max_lag via Durbin-Levinson.

    pacf(1) equals the lag-1 autocorrelation; later values are the final
    coefficients of successively longer autoregressive predictors.
    """
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    sample = acf(series, max_lag)
    n = len(_as_series(series))
    r = np.asarray(sample.coefficients)
    values = _durbin_levinson_pacf(r)
    return AcfResult(
        lags=list(range(1, max_lag + 1)),
        coefficients=[float(v) for v in values],
        confidence_band=1.96 / n ** 0.5,
    )


def _durbin_levinson_pacf(r: np.ndarray) -> np.ndarray:
    """Reflection coefficients of the autocorrelation sequence r_0=1, r_1, ..."""
    max_lag = len(r) - 1
    pac = np.empty(max_lag)
    phi = np.empty(max_lag)  # current-order predictor coefficients
    v = 1.0
    phi[0] = pac[0] = r[1]
    for k in range(2, max_lag + 1):
        v *= 1.0 - pac[k - 2] ** 2
        if v <= 1e-300:
            raise NumericalError(
                f"Durbin-Levinson broke down at lag {k}: prediction variance vanished"
            )
        num = r[k] - phi[: k - 1] @ r[k - 1 : 0 : -1]
        pk = num / v
        if abs(pk) >= 1.0 + 1e-8:
            raise NumericalError(
                f"Durbin-Levinson produced |pacf| >= 1 at lag {k} (degenerate input)"
            )
        phi[: k - 1] -= pk * phi[k - 2 :: -1].copy()
        phi[k - 1] = pk
        pac[k - 1] = pk
    return pac


# -- augmented Dickey-Fuller

# MacKinnon (2010) response-surface coefficients: cv = b0 + b1/N + b2/N^2 + b3/N^3
_ADF_CRIT = {
    "constant": {
        "1%": (-3.43035, -6.5393, -16.786, -79.433),
        "5%": (-2.86154, -2.8903, -4.234, -40.040),
        "10%": (-2.56677, -1.5384, -2.809, 0.0),
    },
    "constant+trend": {
        "1%": (-3.95877, -9.0531, -28.428, -134.155),
        "5%": (-3.41049, -4.3904, -9.036, -45.374),
        "10%": (-3.12705, -2.5856, -3.925, -22.380),
    },
}

_KPSS_CRIT = {
    "level": {"10%": 0.347, "5%": 0.463, "2.5%": 0.574, "1%": 0.739},
    "trend": {"10%": 0.119, "5%": 0.146, "2.5%": 0.176, "1%": 0.216},
}


def _ols(X: np.ndarray, y: np.ndarray):
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise NumericalError("singular regressor matrix in unit-root regression")
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (len(y) - X.shape[1])
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(sigma2 * np.diag(xtx_inv))
    return beta, se, resid


def adf_test(series, regression: str = "constant", lags: int | str = "auto") -> UnitRootResult:
    """Augmented Dickey-Fuller test; the null hypothesis is a unit root.

    Regresses the first difference on the lagged level, ``lags`` lagged
    differences, and deterministic terms; the statistic is the t-ratio of
    the lagged-level coefficient. ``lags='auto'`` applies the Schwert rule
    floor(12 * (n/100)^(1/4)). ``reject_null=True`` (statistic below the 5%
    critical value) indicates stationarity.
    """
    x = _as_series(series, min_len=25)
    n = len(x)
    if regression not in _ADF_CRIT:
        raise ValueError(f"regression must be one of {sorted(_ADF_CRIT)}")
    if lags == "auto":
        lags = int(12.0 * (n / 100.0) ** 0.25)
    lags = int(lags)
    if lags < 0:
        raise ValueError("lags must be >= 0")
    dx = np.diff(x)
    nobs = n - 1 - lags
    ndet = 1 if regression == "constant" else 2
    if nobs <= lags + ndet + 2:
        raise ValueError(f"series too short for {lags} augmentation lags")

    cols = [x[lags : n - 1]]  # lagged level
    for i in range(1, lags + 1):
        cols.append(dx[lags - i : len(dx) - i])
    cols.append(np.ones(nobs))
    if regression == "constant+trend":
        cols.append(np.arange(1.0, nobs + 1.0))
    X = np.column_stack(cols)
    y = dx[lags:]

    beta, se, _ = _ols(X, y)
    stat = float(beta[0] / se[0])
    crit = {
        level: b[0] + b[1] / nobs + b[2] / nobs**2 + b[3] / nobs**3
        for level, b in _ADF_CRIT[regression].items()
    }
    return UnitRootResult(
        statistic=stat,
        critical_values=crit,
        reject_null=stat < crit["5%"],
        lags_used=lags,
        null="unit root",
    )


def kpss_test(series, null: str = "level", bandwidth: int | str = "auto") -> UnitRootResult:
    """KPSS test; the null hypothesis is (level or trend) stationarity.

    The statistic is n^-2 * sum of squared partial sums of the demeaned or
    detrended series, scaled by a Bartlett-kernel long-run variance with
    ``bandwidth='auto'`` = floor(4 * (n/100)^(1/4)). ``reject_null=True``
    (statistic above the 5% critical value) indicates non-stationarity.
    """
    x = _as_series(series, min_len=25)
    n = len(x)
    if null not in _KPSS_CRIT:
        raise ValueError(f"null must be one of {sorted(_KPSS_CRIT)}")
    if bandwidth == "auto":
        bandwidth = int(4.0 * (n / 100.0) ** 0.25)
    bandwidth = int(bandwidth)
    if bandwidth < 0:
        raise ValueError("bandwidth must be >= 0")
    if null == "level":
        resid = x - x.mean()
    else:
        t = np.arange(1.0, n + 1.0)
        X = np.column_stack([np.ones(n), t])
        beta, _, _ = _ols(X, x)
        resid = x - X @ beta

    s = np.cumsum(resid)
    eta = float(s @ s) / n**2
    gamma0 = float(resid @ resid) / n
    if gamma0 <= 0.0:
        raise DegenerateSeriesError("series is constant; KPSS undefined")
    long_run = gamma0
    for j in range(1, bandwidth + 1):
        weight = 1.0 - j / (bandwidth + 1.0)
        long_run += 2.0 * weight * float(resid[:-j] @ resid[j:]) / n
    stat = eta / long_run
    crit = dict(_KPSS_CRIT[null])
    return UnitRootResult(
        statistic=stat,
        critical_values=crit,
        reject_null=stat > crit["5%"],
        lags_used=bandwidth,
        null=f"{null} stationarity",
    )
