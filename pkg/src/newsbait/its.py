"""Interrupted time-series models with autoregressive-error GLS.

For a named event, the daily mean series gets a four-column segmented
design: intercept, observation-index trend T, event step D (0 before the
event, 1 from the first observation on/after it), and post-event counter P
(1 at the event observation, increasing by 1 per observation after). An
OLS stage supplies the baseline; the final model assumes AR(p) errors and
maximizes the exact Gaussian likelihood, profiled over the regression
coefficients and the innovation variance so only the p autoregressive
parameters are optimized.

Stationarity is enforced structurally: the optimizer works on unconstrained
reals mapped through tanh to partial autocorrelations and then through the
Levinson-Durbin recursion to AR coefficients, so every iterate is a valid
stationary process.
"""

from __future__ import annotations

import json
import math
import warnings
from bisect import bisect_left
from dataclasses import dataclass
from datetime import date
from importlib import resources

import numpy as np
from scipy.optimize import minimize

from .errors import (
    ConvergenceError,
    DesignError,
    NonStationaryError,
    NumericalError,
    RankDeficiencyError,
)
from .store import DailySeries

TERM_NAMES = ("intercept", "T", "D", "P")
DEFAULT_AR_ORDER = 16

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class EventSpec:
    name: str
    date: date


def load_events(path: str) -> list[EventSpec]:
    """Read a JSON array of {"name": ..., "date": "YYYY-MM-DD"} entries."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return [EventSpec(name=e["name"], date=date.fromisoformat(e["date"])) for e in raw]


def default_events() -> list[EventSpec]:
    """The five bundled world events."""
    text = resources.files("newsbait.data").joinpath("default_events.json").read_text("utf-8")
    raw = json.loads(text)
    return [EventSpec(name=e["name"], date=date.fromisoformat(e["date"])) for e in raw]


@dataclass(slots=True)
class SegmentedDesign:
    """Response plus the (n, 4) design matrix [1, T, D, P] for one event."""

    response: np.ndarray
    matrix: np.ndarray
    event_index: int  # 0-based row of the first observation on/after the event
    dates: list[date]
    event: EventSpec

    @property
    def n(self) -> int:
        return len(self.response)


@dataclass(slots=True)
class OlsFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    sigma2: float  # RSS / (n - 4)
    std_errors: np.ndarray
    loglik: float  # Gaussian log-likelihood at the MLE variance RSS / n
    rss: float


@dataclass(slots=True)
class ArCoefficients:
    order: int
    phi: tuple[float, ...]
    sigma2: float


@dataclass(slots=True)
class GlsFit:
    coefficients: np.ndarray
    ar: ArCoefficients
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    loglik: float
    aic: float
    term_names: tuple[str, ...] = TERM_NAMES
    significant: list[str] | None = None


def build_design(series: DailySeries, event: EventSpec) -> SegmentedDesign:
    """Segmented design for an event; the event row is the first date >= event.date."""
    dates = list(series.dates)
    if not dates:
        raise DesignError("empty series")
    if event.date < dates[0] or event.date > dates[-1]:
        raise DesignError(
            f"event {event.name!r} ({event.date}) outside series range "
            f"[{dates[0]}, {dates[-1]}]"
        )
    k = bisect_left(dates, event.date)
    n = len(dates)
    pre, post = k, n - k
    if pre < 2 or post < 2:
        raise DesignError(
            f"event {event.name!r} leaves {pre} observations before and {post} after; "
            "need at least 2 on each side"
        )
    if pre < 4 or post < 4:
        warnings.warn(
            f"event {event.name!r} has fewer than 4 observations on one side; "
            "estimates will be fragile",
            stacklevel=2,
        )
    t = np.arange(1.0, n + 1.0)
    d = np.zeros(n)
    d[k:] = 1.0
    p = np.zeros(n)
    p[k:] = np.arange(1.0, post + 1.0)
    X = np.column_stack([np.ones(n), t, d, p])
    return SegmentedDesign(
        response=np.asarray(series.means, dtype=float),
        matrix=X,
        event_index=k,
        dates=dates,
        event=event,
    )


def _check_full_rank(X: np.ndarray) -> None:
    from scipy.linalg import qr as scipy_qr

    R, pivots = scipy_qr(X, mode="r", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = (diag[0] if diag[0] > 0 else 1.0) * max(X.shape) * np.finfo(float).eps
    rank = int(np.sum(diag > tol))
    if rank < X.shape[1]:
        raise RankDeficiencyError([TERM_NAMES[j] for j in sorted(pivots[rank:])])


def _gaussian_loglik(rss: float, n: int) -> float:
    if rss <= 0.0:
        return math.inf  # perfect interpolation: unbounded likelihood
    return -0.5 * n * (_LOG_2PI + math.log(rss / n) + 1.0)


def ols_fit(design: SegmentedDesign) -> OlsFit:
    """Least squares via QR; errors assumed uncorrelated."""
    X, y = design.matrix, design.response
    n, k = X.shape
    _check_full_rank(X)
    Q, R = np.linalg.qr(X)
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - k)
    r_inv = np.linalg.inv(R)
    xtx_inv = r_inv @ r_inv.T
    se = np.sqrt(sigma2 * np.diag(xtx_inv))
    return OlsFit(
        coefficients=beta,
        residuals=resid,
        sigma2=sigma2,
        std_errors=se,
        loglik=_gaussian_loglik(rss, n),
        rss=rss,
    )


# -- AR(p) parameterization and autocovariance

def pacf_to_ar(pacf) -> np.ndarray:
    """Levinson-Durbin step-up: partial autocorrelations to AR coefficients."""
    phi = np.empty(0)
    for k, rho in enumerate(pacf, start=1):
        new = np.empty(k)
        new[: k - 1] = phi - rho * phi[::-1]
        new[k - 1] = rho
        phi = new
    return phi


def ar_to_pacf(phi) -> np.ndarray:
    """Step-down inverse; raises if the AR polynomial is not stationary."""
    a = np.array(phi, dtype=float)
    p = len(a)
    out = np.empty(p)
    for k in range(p, 0, -1):
        rho = a[k - 1]
        out[k - 1] = rho
        if abs(rho) >= 1.0:
            raise NonStationaryError(
                f"AR coefficients imply |partial autocorrelation| >= 1 at lag {k}"
            )
        if k > 1:
            a = (a[: k - 1] + rho * a[k - 2 :: -1]) / (1.0 - rho * rho)
    return out


def ar_autocovariance(phi, nlags: int) -> np.ndarray:
    """Stationary autocovariances gamma_0..gamma_nlags at unit innovation variance."""
    phi = np.asarray(phi, dtype=float)
    p = len(phi)
    if p == 0:
        gam = np.zeros(nlags + 1)
        gam[0] = 1.0
        return gam
    # gamma_k - sum_i phi_i gamma_|k-i| = delta_k0 for k = 0..p
    A = np.zeros((p + 1, p + 1))
    for k in range(p + 1):
        A[k, k] += 1.0
        for i in range(1, p + 1):
            A[k, abs(k - i)] -= phi[i - 1]
    b = np.zeros(p + 1)
    b[0] = 1.0
    head = np.linalg.solve(A, b)
    gam = np.empty(max(nlags + 1, p + 1))
    gam[: p + 1] = head
    for k in range(p + 1, nlags + 1):
        gam[k] = phi @ gam[k - 1 : k - p - 1 : -1]
    return gam[: nlags + 1]


class _Whitener:
    """Exact whitening transform for AR(p) errors at unit innovation variance.

    The first p rows use the order-0..order-(p-1) prediction coefficients
    from the Levinson-Durbin recursion on the process autocovariance; later
    rows quasi-difference with the AR coefficients. The log-determinant of
    the transform is -0.5 * sum(log prediction variances).
    """

    def __init__(self, phi):
        self.phi = np.asarray(phi, dtype=float)
        p = len(self.phi)
        pac = ar_to_pacf(self.phi)  # raises NonStationaryError when invalid
        gamma0 = ar_autocovariance(self.phi, 0)[0] if p else 1.0
        self.orders: list[np.ndarray] = []
        self.variances = np.empty(p)
        coeffs = np.empty(0)
        v = gamma0
        for k in range(p):
            self.orders.append(coeffs)
            self.variances[k] = v
            rho = pac[k]
            new = np.empty(k + 1)
            new[:k] = coeffs - rho * coeffs[::-1]
            new[k] = rho
            coeffs = new
            v *= 1.0 - rho * rho
        self.log_det = -0.5 * float(np.sum(np.log(self.variances))) if p else 0.0

    def apply(self, M: np.ndarray) -> np.ndarray:
        squeeze = M.ndim == 1
        M2 = M[:, None] if squeeze else M
        n = len(M2)
        p = len(self.phi)
        out = np.empty_like(M2, dtype=float)
        for t in range(min(p, n)):
            pred = self.orders[t] @ M2[t - 1 :: -1][:t] if t else 0.0
            out[t] = (M2[t] - pred) / math.sqrt(self.variances[t])
        if n > p:
            acc = M2[p:].astype(float, copy=True)
            for i in range(1, p + 1):
                acc -= self.phi[i - 1] * M2[p - i : n - i]
            out[p:] = acc
        return out[:, 0] if squeeze else out


def ar_profile_loglik(design: SegmentedDesign, phi) -> tuple[float, np.ndarray, float]:
    """Exact AR(p)-error log-likelihood profiled over beta and sigma^2.

    Returns ``(loglik, beta_hat, sigma2_hat)``. With an empty ``phi`` this
    reduces exactly to the OLS fit and its Gaussian log-likelihood.
    """
    phi = np.asarray(phi, dtype=float)
    n = design.n
    if n <= len(phi) + design.matrix.shape[1]:
        raise ValueError(f"need n > p + 4; got n={n}, p={len(phi)}")
    whitener = _Whitener(phi)
    wy = whitener.apply(design.response)
    wX = whitener.apply(design.matrix)
    Q, R = np.linalg.qr(wX)
    diag = np.abs(np.diag(R))
    if diag.min() <= diag.max() * 1e3 * np.finfo(float).eps:
        cond = diag.max() / max(diag.min(), 1e-300)
        raise NumericalError(f"ill-conditioned whitened system (condition ~ {cond:.3e})")
    beta = np.linalg.solve(R, Q.T @ wy)
    resid = wy - wX @ beta
    rss = float(resid @ resid)
    sigma2 = rss / n
    if rss <= 0.0:
        return math.inf, beta, 0.0
    loglik = -0.5 * n * (_LOG_2PI + 1.0 + math.log(sigma2)) + whitener.log_det
    return loglik, beta, sigma2


def _central_diff_gradient(fn, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(len(x)):
        h = rel_step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (fn(xp) - fn(xm)) / (2.0 * h)
    return grad


def _finite_diff_hessian(fn, x: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    p = len(x)
    h = rel_step * np.maximum(1.0, np.abs(x))
    H = np.empty((p, p))
    f0 = fn(x)
    for i in range(p):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        H[i, i] = (fn(xp) - 2.0 * f0 + fn(xm)) / (h[i] * h[i])
    for i in range(p):
        for j in range(i + 1, p):
            xpp = x.copy()
            xpm = x.copy()
            xmp = x.copy()
            xmm = x.copy()
            xpp[[i, j]] += h[[i, j]]
            xmm[[i, j]] -= h[[i, j]]
            xpm[i] += h[i]
            xpm[j] -= h[j]
            xmp[i] -= h[i]
            xmp[j] += h[j]
            H[i, j] = H[j, i] = (fn(xpp) - fn(xpm) - fn(xmp) + fn(xmm)) / (4.0 * h[i] * h[j])
    return H


def _newton_polish(fn, x: np.ndarray, iterations: int = 2) -> np.ndarray:
    """Deterministic Newton refinement to the gradient noise floor.

    Quasi-Newton stops within its tolerances of the optimum; a couple of
    damped Newton steps pin the optimum location precisely enough that
    equivalent inputs (e.g. a shifted response) reproduce the same AR
    estimates to ~1e-10. Steps that do not improve the objective are
    rejected, so the polish never worsens the fit.
    """
    fx = fn(x)
    for _ in range(iterations):
        grad = _central_diff_gradient(fn, x)
        try:
            H = _finite_diff_hessian(fn, x)
            step = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            return x
        if not np.all(np.isfinite(step)):
            return x
        for scale in (1.0, 0.5, 0.25):
            candidate = x + scale * step
            try:
                f_candidate = fn(candidate)
            except NumericalError:
                continue
            if f_candidate <= fx:
                x, fx = candidate, f_candidate
                break
        else:
            return x
    return x


def _yule_walker_start(residuals: np.ndarray, p: int) -> np.ndarray | None:
    """Unconstrained start point from Yule-Walker AR estimates of OLS residuals."""
    n = len(residuals)
    e = residuals - residuals.mean()
    acov = np.array([e[: n - k] @ e[k:] / n for k in range(p + 1)])
    if acov[0] <= 0.0:
        return None
    toeplitz = np.empty((p, p))
    for i in range(p):
        for j in range(p):
            toeplitz[i, j] = acov[abs(i - j)]
    try:
        phi = np.linalg.solve(toeplitz, acov[1 : p + 1])
        pac = ar_to_pacf(phi)
    except (np.linalg.LinAlgError, NonStationaryError):
        return None
    return np.arctanh(np.clip(pac, -0.99, 0.99))


def fit_gls_ar(design: SegmentedDesign, p: int = DEFAULT_AR_ORDER,
               max_iterations: int = 500) -> GlsFit:
    """Maximum-likelihood GLS fit with AR(p) errors.

    Optimizes the profiled likelihood over p unconstrained reals
    (tanh -> partial autocorrelations -> AR coefficients), multi-starting
    from the zero vector and from Yule-Walker estimates of the OLS
    residuals. Converges on gradient max-norm < 1e-6 or relative
    log-likelihood change < 1e-10; exhausting the budget raises
    :class:`ConvergenceError` carrying the best fit found.
    """
    if p < 0:
        raise ValueError("AR order must be >= 0")
    n = design.n
    if n <= p + design.matrix.shape[1]:
        raise DesignError(f"need n > p + 4 observations; got n={n}, p={p}")
    ols = ols_fit(design)

    if p == 0:
        loglik, beta, sigma2 = ar_profile_loglik(design, ())
        return _finalize_fit(design, np.empty(0), loglik)

    def objective(raw: np.ndarray) -> float:
        phi = pacf_to_ar(np.tanh(raw))
        loglik, _, _ = ar_profile_loglik(design, phi)
        return -loglik

    starts = [np.zeros(p)]
    yw = _yule_walker_start(ols.residuals, p)
    if yw is not None:
        starts.append(yw)

    best_raw = starts[0]
    best_neg = objective(starts[0])
    converged = False
    for raw0 in starts:
        neg0 = objective(raw0)
        if neg0 < best_neg:
            best_neg, best_raw = neg0, raw0
        result = minimize(
            objective,
            raw0,
            jac=lambda x: _central_diff_gradient(objective, x),
            method="L-BFGS-B",
            options={"maxiter": max_iterations, "ftol": 1e-10, "gtol": 1e-6},
        )
        if result.fun < best_neg:
            best_neg, best_raw = result.fun, result.x
        if result.success:
            converged = True
        else:
            grad = _central_diff_gradient(objective, result.x)
            if float(np.max(np.abs(grad))) < 1e-6:
                converged = True

    best_raw = _newton_polish(objective, best_raw)
    best_neg = min(best_neg, objective(best_raw))
    fit = _finalize_fit(design, pacf_to_ar(np.tanh(best_raw)), -best_neg)
    if not converged:
        grad = _central_diff_gradient(objective, best_raw)
        raise ConvergenceError(
            f"AR({p}) likelihood optimizer exhausted {max_iterations} iterations",
            best_fit=fit,
            grad_norm=float(np.max(np.abs(grad))),
        )
    return fit


def _finalize_fit(design: SegmentedDesign, phi: np.ndarray, loglik: float) -> GlsFit:
    n = design.n
    k = design.matrix.shape[1]
    p = len(phi)
    whitener = _Whitener(phi)
    wy = whitener.apply(design.response)
    wX = whitener.apply(design.matrix)
    Q, R = np.linalg.qr(wX)
    beta = np.linalg.solve(R, Q.T @ wy)
    resid = wy - wX @ beta
    rss = float(resid @ resid)
    r_inv = np.linalg.inv(R)
    xtx_inv = r_inv @ r_inv.T
    se = np.sqrt(rss / (n - k) * np.diag(xtx_inv))
    t_values = beta / se
    p_values = np.array([student_t_two_sided_p(float(t), n - k) for t in t_values])
    aic = -2.0 * loglik + 2.0 * (k + p + 1)
    return GlsFit(
        coefficients=beta,
        ar=ArCoefficients(order=p, phi=tuple(float(v) for v in phi), sigma2=rss / n),
        std_errors=se,
        t_values=t_values,
        p_values=p_values,
        loglik=loglik,
        aic=aic,
    )


def bonferroni_alpha(base_alpha: float, num_events: int) -> float:
    """Corrected per-test level: base_alpha / num_events."""
    if not 0.0 < base_alpha < 1.0:
        raise ValueError("base_alpha must be in (0, 1)")
    if num_events < 1:
        raise ValueError("num_events must be >= 1")
    return base_alpha / num_events


def flag_significance(fit: GlsFit, alpha_adjusted: float) -> list[str]:
    """Per-term 'Y'/'N' flags: Y iff p-value < alpha_adjusted. Stored on the fit."""
    flags = ["Y" if pv < alpha_adjusted else "N" for pv in fit.p_values]
    fit.significant = flags
    return flags


# -- Student-t tail probability via the regularized incomplete beta function

def student_t_two_sided_p(t: float, df: int) -> float:
    """Two-sided p-value 2*P(T_df > |t|) to about 1e-14 absolute accuracy."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if t == 0.0:
        return 1.0
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return _regularized_incomplete_beta(0.5 * df, 0.5, x)


def _regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Continued fraction converges fastest below the distribution's mean.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    max_iter = 500
    eps = 3e-16
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise NumericalError("incomplete beta continued fraction did not converge")
