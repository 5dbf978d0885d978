"""Maximum likelihood estimation for baseline, hurdle, and zero-inflated models.

Hurdle fits factor: the zero mass is estimated by the zero fraction
(phi_hat = 1 - m/n, exactly) and theta by maximizing the zero-truncated
likelihood

    sum_{y_i != 0} log f_theta(y_i) - m log(1 - p0(theta)).

Zero-inflated fits follow a two-case procedure.  With theta* the
truncated-likelihood maximizer:

  case 1  (m/n <= 1 - p0(theta*)):  theta_hat = theta*,
          phi_hat = 1 - (m/n) / (1 - p0(theta*)).
  case 2  (otherwise): maximize the profile likelihood
          (1-psi)^(n-m) psi^m prod f_tr(y_i | theta)  with
          psi(theta) = min(m/n, 1 - p0(theta)); then
          phi_hat = 1 - psi(theta_hat) / (1 - p0(theta_hat)), clipped
          into [0, 1].

The profile objective is continuous but has a kink where
1 - p0(theta) = m/n; the gradient used is the one-sided derivative of the
active branch, with ties resolved toward the truncated-likelihood branch.

Continuous families have p0 = 0, so both model kinds collapse to the same
closed-form solution on the nonzero subsample (mean/biased-sd for normal,
the same on logs for log-normal, sqrt(mean of squares) for half-normal,
m / sum(y) for exponential).

Optimization runs on log-transformed positive parameters and
logit-transformed probability parameters, with box bounds mapped into the
transformed scale; this avoids boundary stalls without changing the
stated box in the original scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize as _opt
from scipy import special as _sp

from . import families as fam
from .errors import (
    FitError,
    InsufficientDataError,
    ParameterError,
    SupportError,
)
from .families import Family
from .models import ModelKind, ModelParams, ModelSpec, model_log_density
from .special import log1m_exp

__all__ = [
    "OptimizerConfig",
    "OptResult",
    "FitCase",
    "FitResult",
    "maximize_bounded",
    "fit_truncated",
    "fit_hurdle",
    "fit_zero_inflated",
    "fit_zazi",
    "fit_baseline",
    "fit_integer_size",
    "fit_model",
    "log_likelihood",
]


@dataclass
class OptimizerConfig:
    bounds: list[tuple[float, float]] | None = None
    gradient_tolerance: float = 1e-8
    max_iterations: int = 500
    init: np.ndarray | None = None


@dataclass
class OptResult:
    x: np.ndarray
    value: float
    converged: bool
    iterations: int


class FitCase(str, Enum):
    HURDLE_CLOSED_FORM = "hurdle_closed_form"
    ZI_CASE1 = "zi_case1"
    ZI_CASE2 = "zi_case2"
    CLOSED_FORM_CONTINUOUS = "closed_form_continuous"
    BASELINE_FIT = "baseline_fit"


@dataclass
class FitResult:
    spec: ModelSpec
    params_hat: ModelParams
    loglik: float
    n: int
    m: int
    case_taken: FitCase
    converged: bool
    iterations: int
    theta_error: str | None = None
    degenerate: bool = False

    @property
    def usable(self) -> bool:
        return self.theta_error is None and not self.degenerate

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "params": self.params_hat.to_dict(self.spec) if self.theta_error is None else {"phi": self.params_hat.phi},
            "loglik": self.loglik,
            "n": self.n,
            "m": self.m,
            "case": self.case_taken.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "theta_error": self.theta_error,
            "degenerate": self.degenerate,
        }


# ---------------------------------------------------------------------------
# transformed box-constrained maximization


def _to_internal(x: np.ndarray, kinds: list[str]) -> np.ndarray:
    z = np.empty_like(x)
    for i, k in enumerate(kinds):
        z[i] = math.log(x[i]) if k == "positive" else (_sp.logit(x[i]) if k == "prob" else x[i])
    return z


def _from_internal(z: np.ndarray, kinds: list[str]) -> np.ndarray:
    x = np.empty_like(z)
    for i, k in enumerate(kinds):
        x[i] = math.exp(z[i]) if k == "positive" else (_sp.expit(z[i]) if k == "prob" else z[i])
    return x


def _dx_dz(x: np.ndarray, kinds: list[str]) -> np.ndarray:
    d = np.ones_like(x)
    for i, k in enumerate(kinds):
        if k == "positive":
            d[i] = x[i]
        elif k == "prob":
            d[i] = x[i] * (1.0 - x[i])
    return d


def maximize_bounded(fg, config: OptimizerConfig, kinds: list[str] | None = None) -> OptResult:
    """Box-constrained quasi-Newton ascent of `fg` (returns value, gradient).

    `config.init` and `config.bounds` are in the original scale; positive
    parameters are optimized on the log scale and probabilities on the
    logit scale.  Returns a point whose projected gradient is below the
    tolerance, or the best point after `max_iterations` (flagged).
    """
    if config.init is None or config.bounds is None:
        raise FitError("optimizer needs both an init and bounds")
    x0 = np.asarray(config.init, dtype=float).copy()
    bounds = [(float(lo), float(hi)) for lo, hi in config.bounds]
    kinds = list(kinds) if kinds is not None else ["positive"] * len(x0)
    for (lo, hi), k in zip(bounds, kinds):
        if k == "positive" and lo <= 0:
            raise FitError("positive parameters need a positive lower bound")
        if k == "prob" and not (0 < lo < hi < 1):
            raise FitError("probability bounds must lie strictly inside (0, 1)")
    x0 = np.clip(x0, [b[0] for b in bounds], [b[1] for b in bounds])

    f0, _ = fg(x0)
    if not np.isfinite(f0):
        raise FitError(f"objective is not finite at the initial point {x0}")

    z0 = _to_internal(x0, kinds)
    zbounds = [
        tuple(_to_internal(np.array([lo, hi]), [k] * 2))
        for (lo, hi), k in zip(bounds, kinds)
    ]
    lo_arr = np.array([b[0] for b in bounds])
    hi_arr = np.array([b[1] for b in bounds])

    def neg(z):
        # clip the round trip so exp(log(bound)) lands exactly on the bound
        # (one ulp below would e.g. drop the top beta-binomial support point)
        x = np.clip(_from_internal(z, kinds), lo_arr, hi_arr)
        f, g = fg(x)
        if not np.isfinite(f):
            # large finite penalty keeps the line search interpolable
            return 1e30, np.zeros_like(z)
        return -f, -(np.asarray(g) * _dx_dz(x, kinds))

    res = _opt.minimize(
        neg,
        z0,
        jac=True,
        method="L-BFGS-B",
        bounds=zbounds,
        options={
            "maxiter": config.max_iterations,
            "gtol": config.gradient_tolerance,
            "ftol": 1e-13,
        },
    )
    x_opt = np.clip(_from_internal(res.x, kinds), lo_arr, hi_arr)
    return OptResult(x=x_opt, value=-float(res.fun), converged=bool(res.success), iterations=int(res.nit))


# ---------------------------------------------------------------------------
# data preparation


def _clean_data(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float).ravel()
    if arr.size == 0:
        raise InsufficientDataError("no observations")
    if np.any(~np.isfinite(arr)):
        raise SupportError("observations must be finite")
    return arr


def _check_support(family: Family, values: np.ndarray) -> None:
    if fam.is_discrete(family):
        bad = ~(np.abs(values - np.rint(values)) <= fam.INTEGRALITY_TOL) | (values < 0)
        if np.any(bad):
            i = int(np.nonzero(bad)[0][0])
            raise SupportError(
                f"{family}: observation {values[bad][0]} at index {i} is not a nonnegative integer"
            )
    elif family in (Family.LOG_NORMAL, Family.HALF_NORMAL, Family.EXPONENTIAL):
        bad = values < 0
        if np.any(bad):
            i = int(np.nonzero(bad)[0][0])
            raise SupportError(
                f"{family}: observation {values[bad][0]} at index {i} is negative"
            )


def _collapse(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v, c = np.unique(values, return_counts=True)
    return v, c.astype(float)


# ---------------------------------------------------------------------------
# objective builders (weighted over unique values)


def _truncated_fg(family: Family, v: np.ndarray, c: np.ndarray, m: float):
    """Zero-truncated log likelihood and gradient as a function of theta."""

    def fg(theta):
        logf = fam.log_density(family, theta, v, validate=False)
        if np.any(np.isneginf(logf)):
            return -np.inf, np.zeros_like(theta)
        log_p0 = fam.log_zero_prob(family, theta, validate=False)
        log_1mp0 = float(log1m_exp(log_p0))
        ll = float(logf @ c) - m * log_1mp0
        g = fam.grad_log_density(family, theta, v, validate=False).T @ c
        if np.isfinite(log_p0):
            ratio = math.exp(log_p0 - log_1mp0)  # p0 / (1 - p0)
            g = g + m * ratio * fam.grad_log_zero_prob(family, theta, validate=False)
        return ll, g

    return fg


def _zi_profile_fg(family: Family, v: np.ndarray, c: np.ndarray, m: float, n: float):
    """Zero-inflated profile log likelihood with psi = min(m/n, 1 - p0).

    In the region 1 - p0 >= m/n the weight psi = m/n is constant, so the
    objective is the truncated log likelihood plus a data-only constant;
    in the other region it collapses to (n-m) log p0 + sum log f.  Ties
    at the kink take the truncated branch.
    """
    frac = m / n
    # (n-m) log(1 - m/n) + m log(m/n), with 0 log 0 = 0
    const = m * math.log(frac) + ((n - m) * math.log1p(-frac) if n > m else 0.0)

    def fg(theta):
        logf = fam.log_density(family, theta, v, validate=False)
        if np.any(np.isneginf(logf)):
            return -np.inf, np.zeros_like(theta)
        log_p0 = fam.log_zero_prob(family, theta, validate=False)
        log_1mp0 = float(log1m_exp(log_p0))
        grads = fam.grad_log_density(family, theta, v, validate=False).T @ c
        g0 = fam.grad_log_zero_prob(family, theta, validate=False)
        if math.exp(log_1mp0) >= frac:
            ll = const + float(logf @ c) - m * log_1mp0
            ratio = math.exp(log_p0 - log_1mp0)
            g = grads + m * ratio * g0
        else:
            ll = float(logf @ c) + (n - m) * log_p0
            g = grads + (n - m) * g0
        return ll, g

    return fg


def _baseline_fg(family: Family, v: np.ndarray, c: np.ndarray):
    def fg(theta):
        logf = fam.log_density(family, theta, v, validate=False)
        if np.any(np.isneginf(logf)):
            return -np.inf, np.zeros_like(theta)
        g = fam.grad_log_density(family, theta, v, validate=False).T @ c
        return float(logf @ c), g

    return fg


def _masked_fg(fg, template: np.ndarray, free: np.ndarray):
    """Restrict an objective over full theta to the free coordinates."""

    def sub(x):
        th = template.copy()
        th[free] = x
        f, g = fg(th)
        return f, np.asarray(g)[free]

    return sub


# ---------------------------------------------------------------------------
# method-of-moments starting values


def _weighted_moments(v: np.ndarray, c: np.ndarray) -> tuple[float, float]:
    w = c / c.sum()
    mean = float(w @ v)
    var = float(w @ (v - mean) ** 2)
    return mean, max(var, 1e-12)


def _clip_box(x: float, lo: float, hi: float) -> float:
    return float(min(max(x, lo), hi))


def _bnb_moment_solve(m1: float, m2: float, m3: float) -> np.ndarray | None:
    """Solve the first three factorial moments of the beta-negative-binomial.

    m_k = (r)_k (beta)_k / ((alpha-1)...(alpha-k)); the solution determines
    {r, beta} only as an unordered pair (the pmf is r <-> beta symmetric);
    the larger root is assigned to r.  Returns None when the moments are
    infeasible (e.g. near-Poisson data pushing alpha out of range).
    """
    if min(m1, m2, m3) <= 0:
        return None
    r1, r2 = m2 / m1, m3 / m2
    den = 2.0 * r1 - m1 - r2
    if abs(den) < 1e-12:
        return None
    alpha = (4.0 * r1 - m1 - 3.0 * r2 - 2.0) / den
    if not np.isfinite(alpha) or alpha <= 3.0:
        return None
    prod = m1 * (alpha - 1.0)
    ssum = r1 * (alpha - 2.0) - prod - 1.0
    disc = ssum * ssum - 4.0 * prod
    if ssum <= 0.0 or disc < 0.0:
        return None
    root = math.sqrt(disc)
    r = (ssum + root) / 2.0
    beta = (ssum - root) / 2.0
    if r <= 0.0 or beta <= 0.0:
        return None
    return np.array([r, alpha, beta])


def _factorial_moments(v: np.ndarray, c: np.ndarray, k: int) -> list[float]:
    w = c / c.sum()
    out = []
    term = np.ones_like(v)
    for j in range(k):
        term = term * (v - j)
        out.append(float(w @ term))
    return out


def default_init(
    family: Family, v: np.ndarray, c: np.ndarray, bounds: list[tuple[float, float]],
    *, truncated: bool = False,
) -> np.ndarray:
    """Method-of-moments starting point, clipped into the box.

    With `truncated=True` the data are the nonzero part of the sample and
    factorial moments are deflated by an estimate of 1 - p0 (fixed point
    in theta) before moment matching; falling factorials vanish at zero,
    so that correction is exact given p0.
    """
    mean, var = _weighted_moments(v, c)
    if family is Family.POISSON:
        return np.array([_clip_box(mean, *bounds[0])])
    if family is Family.GEOMETRIC:
        return np.array([_clip_box(1.0 / (1.0 + mean), *bounds[0])])
    if family is Family.NEG_BINOMIAL:
        p = mean / var if var > mean else 0.7
        p = _clip_box(p, *bounds[1])
        r = _clip_box(mean * p / max(1.0 - p, 1e-12), *bounds[0])
        return np.array([r, p])
    if family is Family.BETA_BINOMIAL:
        n0 = max(float(v.max()), bounds[0][0]) + 1.0
        n0 = _clip_box(n0, *bounds[0])
        pbar = min(max(mean / n0, 0.05), 0.95)
        denom = n0 * pbar * (1.0 - pbar)
        cfac = var / denom if denom > 0 else 1.0
        if cfac > 1.0 + 1e-9 and n0 > cfac:
            s = (n0 - cfac) / (cfac - 1.0)
        else:
            s = 20.0
        a = _clip_box(s * pbar, *bounds[1])
        b = _clip_box(s * (1.0 - pbar), *bounds[2])
        return np.array([n0, a, b])
    if family is Family.BETA_NEG_BINOMIAL:
        m1, m2, m3 = _factorial_moments(v, c, 3)
        theta = _bnb_moment_solve(m1, m2, m3)
        if truncated:
            # deflate moments by 1 - p0(theta), iterating the fixed point
            for _ in range(3):
                if theta is None:
                    break
                p0 = fam.zero_prob(Family.BETA_NEG_BINOMIAL, np.clip(theta, 1e-6, None), validate=False)
                scale = 1.0 - p0
                theta = _bnb_moment_solve(m1 * scale, m2 * scale, m3 * scale)
        if theta is not None:
            return np.array(
                [
                    _clip_box(theta[0], *bounds[0]),
                    _clip_box(theta[1], *bounds[1]),
                    _clip_box(theta[2], *bounds[2]),
                ]
            )
        r0 = _clip_box(2.0, *bounds[0])
        a0 = _clip_box(3.0, *bounds[1])
        b0 = _clip_box(mean * (a0 - 1.0) / r0, *bounds[2])
        return np.array([r0, a0, b0])
    raise ParameterError(f"{family}: no method-of-moments init")


def _resolve_bounds(
    spec: ModelSpec, config: OptimizerConfig | None, nonzero_max: float | None
) -> list[tuple[float, float]]:
    bounds = list(config.bounds) if config is not None and config.bounds is not None else spec.param_bounds()
    if spec.family is Family.BETA_BINOMIAL and nonzero_max is not None:
        lo, hi = bounds[0]
        lo = max(lo, float(nonzero_max))
        if lo > hi:
            raise FitError(f"beta-binomial needs n >= max(y) = {nonzero_max}, above the upper bound {hi}")
        bounds[0] = (lo, hi)
    return bounds


_KINDS_CACHE = {f: [d.kind for d in fam.param_defs(f)] for f in Family}


# ---------------------------------------------------------------------------
# closed-form continuous fits


def _continuous_theta(family: Family, nz: np.ndarray) -> tuple[np.ndarray, bool]:
    """Baseline MLE on the (nonzero) subsample; flag degenerate spread."""
    if family is Family.NORMAL:
        mu = float(nz.mean())
        sigma = float(np.sqrt(np.mean((nz - mu) ** 2)))
        return np.array([mu, sigma]), sigma == 0.0
    if family is Family.LOG_NORMAL:
        if np.any(nz <= 0):
            raise SupportError("lognormal: nonzero observations must be positive")
        lz = np.log(nz)
        mu = float(lz.mean())
        sigma = float(np.sqrt(np.mean((lz - mu) ** 2)))
        return np.array([mu, sigma]), sigma == 0.0
    if family is Family.HALF_NORMAL:
        if np.any(nz <= 0):
            raise SupportError("halfnormal: nonzero observations must be positive")
        sigma = float(np.sqrt(np.mean(nz**2)))
        return np.array([sigma]), sigma == 0.0
    if family is Family.EXPONENTIAL:
        if np.any(nz <= 0):
            raise SupportError("exponential: nonzero observations must be positive")
        lam = float(len(nz) / nz.sum())
        return np.array([lam]), False
    raise ParameterError(f"{family} is not continuous")


# ---------------------------------------------------------------------------
# public fitters


def fit_truncated(
    family: Family,
    nonzero_data,
    config: OptimizerConfig | None = None,
    *,
    spec: ModelSpec | None = None,
    fixed_size: float | None = None,
) -> tuple[np.ndarray, OptResult]:
    """MLE of theta for the zero-truncated baseline on nonzero observations."""
    family = Family(family)
    nz = _clean_data(nonzero_data)
    if np.any(nz == 0.0):
        raise SupportError("truncated fit requires nonzero observations")
    _check_support(family, nz)
    spec = spec or ModelSpec(family, ModelKind.HURDLE)

    if not fam.is_discrete(family):
        theta, _ = _continuous_theta(family, nz)
        return theta, OptResult(theta, 0.0, True, 0)

    v, c = _collapse(nz)
    m = float(c.sum())

    if family is Family.GEOMETRIC:
        # closed form: p = m / sum(y) on the truncated sample
        bounds = _resolve_bounds(spec, config, None)
        p = _clip_box(m / float(v @ c), *bounds[0])
        theta = np.array([p])
        return theta, OptResult(theta, _truncated_fg(family, v, c, m)(theta)[0], True, 0)

    bounds = _resolve_bounds(spec, config, float(v.max()))
    kinds = list(_KINDS_CACHE[family])
    init = (
        np.asarray(config.init, float)
        if config is not None and config.init is not None
        else default_init(family, v, c, bounds, truncated=True)
    )
    fg = _truncated_fg(family, v, c, m)
    theta, opt = _optimize_theta(fg, init, bounds, kinds, family, config, fixed_size)
    return theta, opt


def _optimize_theta(fg, init, bounds, kinds, family, config, fixed_size):
    init = np.asarray(init, dtype=float).copy()
    size_ix = fam.size_param_index(family)
    if fixed_size is not None:
        if size_ix is None:
            raise ParameterError(f"{family}: no size parameter to fix")
        init[size_ix] = float(fixed_size)
        free = np.ones(len(init), dtype=bool)
        free[size_ix] = False
        sub_cfg = OptimizerConfig(
            bounds=[b for b, f in zip(bounds, free) if f],
            gradient_tolerance=config.gradient_tolerance if config else 1e-8,
            max_iterations=config.max_iterations if config else 500,
            init=init[free],
        )
        sub_kinds = [k for k, f in zip(kinds, free) if f]
        opt = maximize_bounded(_masked_fg(fg, init, free), sub_cfg, sub_kinds)
        theta = init.copy()
        theta[free] = opt.x
        return theta, OptResult(theta, opt.value, opt.converged, opt.iterations)
    cfg = OptimizerConfig(
        bounds=bounds,
        gradient_tolerance=config.gradient_tolerance if config else 1e-8,
        max_iterations=config.max_iterations if config else 500,
        init=init,
    )
    opt = maximize_bounded(fg, cfg, kinds)
    return opt.x, opt


def _empty_theta_result(spec: ModelSpec, n: int, case: FitCase) -> FitResult:
    return FitResult(
        spec=spec,
        params_hat=ModelParams(phi=1.0, theta=None),
        loglik=0.0,  # all mass on the zero atom: each term is log 1
        n=n,
        m=0,
        case_taken=case,
        converged=True,
        iterations=0,
        theta_error="no nonzero observations",
    )


def fit_zazi(spec: ModelSpec, data) -> FitResult:
    """Closed-form fit for continuous-baseline models (ZI and hurdle agree)."""
    if spec.is_discrete:
        raise ParameterError("fit_zazi requires a continuous family")
    arr = _clean_data(data)
    _check_support(spec.family, arr)
    n = len(arr)
    nz = arr[arr != 0.0]
    m = len(nz)
    if m == 0:
        return _empty_theta_result(spec, n, FitCase.CLOSED_FORM_CONTINUOUS)
    theta, degenerate = _continuous_theta(spec.family, nz)
    phi = (n - m) / n
    params = ModelParams(phi=phi, theta=theta)
    ll = math.inf if degenerate else log_likelihood(spec, params, arr)
    return FitResult(
        spec=spec,
        params_hat=params,
        loglik=ll,
        n=n,
        m=m,
        case_taken=FitCase.CLOSED_FORM_CONTINUOUS,
        converged=True,
        iterations=0,
        degenerate=degenerate,
    )


def fit_hurdle(spec: ModelSpec, data, config: OptimizerConfig | None = None) -> FitResult:
    """Hurdle MLE: phi from the zero count, theta from the truncated fit."""
    if not spec.is_discrete:
        return fit_zazi(spec, data)
    arr = _clean_data(data)
    _check_support(spec.family, arr)
    n = len(arr)
    nz = arr[arr != 0.0]
    m = len(nz)
    if m == 0:
        return _empty_theta_result(spec, n, FitCase.HURDLE_CLOSED_FORM)
    theta, opt = fit_truncated(spec.family, nz, config, spec=spec)
    phi = (n - m) / n
    params = ModelParams(phi=phi, theta=theta)
    return FitResult(
        spec=spec,
        params_hat=params,
        loglik=log_likelihood(spec, params, arr),
        n=n,
        m=m,
        case_taken=FitCase.HURDLE_CLOSED_FORM,
        converged=opt.converged,
        iterations=opt.iterations,
    )


def fit_zero_inflated(spec: ModelSpec, data, config: OptimizerConfig | None = None) -> FitResult:
    """Two-case zero-inflated MLE (continuous families defer to fit_zazi)."""
    if not spec.is_discrete:
        return fit_zazi(spec, data)
    arr = _clean_data(data)
    _check_support(spec.family, arr)
    n = len(arr)
    nz = arr[arr != 0.0]
    m = len(nz)
    if m == 0:
        return _empty_theta_result(spec, n, FitCase.ZI_CASE1)

    theta_star, opt = fit_truncated(spec.family, nz, config, spec=spec)
    p0_star = fam.zero_prob(spec.family, theta_star, validate=False)
    frac = m / n

    if frac <= 1.0 - p0_star:
        phi = min(max(1.0 - frac / (1.0 - p0_star), 0.0), 1.0)
        params = ModelParams(phi=phi, theta=theta_star)
        return FitResult(
            spec=spec,
            params_hat=params,
            loglik=log_likelihood(spec, params, arr),
            n=n,
            m=m,
            case_taken=FitCase.ZI_CASE1,
            converged=opt.converged,
            iterations=opt.iterations,
        )

    # case 2: fewer zeros than the truncated fit implies
    v, c = _collapse(nz)
    bounds = _resolve_bounds(spec, config, float(v.max()))
    kinds = list(_KINDS_CACHE[spec.family])
    fg = _zi_profile_fg(spec.family, v, c, float(m), float(n))
    cfg = OptimizerConfig(
        bounds=bounds,
        gradient_tolerance=config.gradient_tolerance if config else 1e-8,
        max_iterations=config.max_iterations if config else 500,
        init=theta_star,
    )
    opt2 = maximize_bounded(fg, cfg, kinds)
    theta_hat = opt2.x
    p0_hat = fam.zero_prob(spec.family, theta_hat, validate=False)
    psi = min(frac, 1.0 - p0_hat)
    phi = min(max(1.0 - psi / (1.0 - p0_hat), 0.0), 1.0)
    params = ModelParams(phi=phi, theta=theta_hat)
    ll = log_likelihood(spec, params, arr)

    # the boundary candidate (theta*, phi = 0) can never win, but guard
    # against optimizer noise so case 2 only improves on it
    params0 = ModelParams(phi=0.0, theta=theta_star)
    ll0 = log_likelihood(spec, params0, arr)
    if ll0 > ll:
        params, ll = params0, ll0
    return FitResult(
        spec=spec,
        params_hat=params,
        loglik=ll,
        n=n,
        m=m,
        case_taken=FitCase.ZI_CASE2,
        converged=opt2.converged,
        iterations=opt.iterations + opt2.iterations,
    )


def fit_baseline(spec: ModelSpec, data, config: OptimizerConfig | None = None) -> FitResult:
    """Plain baseline MLE on the full sample."""
    arr = _clean_data(data)
    family = spec.family
    _check_support(family, arr)
    if family in (Family.LOG_NORMAL, Family.HALF_NORMAL, Family.EXPONENTIAL) and np.any(arr == 0.0):
        raise SupportError(f"{family}: baseline support excludes zero observations")
    n = len(arr)
    m = int((arr != 0.0).sum())

    if not fam.is_discrete(family):
        theta, degenerate = _continuous_theta(family, arr)
        params = ModelParams(phi=0.0, theta=theta)
        ll = math.inf if degenerate else log_likelihood(spec, params, arr)
        return FitResult(spec, params, ll, n, m, FitCase.BASELINE_FIT, True, 0, degenerate=degenerate)

    v, c = _collapse(arr)
    if family is Family.POISSON:
        bounds = _resolve_bounds(spec, config, None)
        lam = _clip_box(float(c @ v / c.sum()), *bounds[0])
        theta = np.array([lam])
        opt = OptResult(theta, 0.0, True, 0)
    elif family is Family.GEOMETRIC:
        bounds = _resolve_bounds(spec, config, None)
        mean = float(c @ v / c.sum())
        theta = np.array([_clip_box(1.0 / (1.0 + mean), *bounds[0])])
        opt = OptResult(theta, 0.0, True, 0)
    else:
        bounds = _resolve_bounds(spec, config, float(v.max()))
        kinds = list(_KINDS_CACHE[family])
        init = (
            np.asarray(config.init, float)
            if config is not None and config.init is not None
            else default_init(family, v, c, bounds)
        )
        fg = _baseline_fg(family, v, c)
        theta, opt = _optimize_theta(fg, init, bounds, kinds, family, config, None)

    params = ModelParams(phi=0.0, theta=theta)
    return FitResult(
        spec, params, log_likelihood(spec, params, arr), n, m,
        FitCase.BASELINE_FIT, opt.converged, opt.iterations,
    )


def _refit_with_size(
    spec: ModelSpec, data, config, size: float, anchor: np.ndarray | None = None
) -> FitResult:
    """Re-run the appropriate fitter with the size parameter pinned.

    `anchor` (typically the real-valued fit) seeds the remaining
    parameters, keeping profile refits in the same likelihood basin."""
    arr = _clean_data(data)
    n = len(arr)
    nz = arr[arr != 0.0]
    m = len(nz)
    family = spec.family
    v, c = _collapse(nz if spec.kind is not ModelKind.BASELINE else arr)
    bounds = _resolve_bounds(spec, config, float(v.max()) if len(v) else None)
    kinds = list(_KINDS_CACHE[family])
    if anchor is not None:
        init = np.asarray(anchor, dtype=float).copy()
    else:
        init = default_init(
            family, v, c, bounds, truncated=spec.kind is not ModelKind.BASELINE
        )

    if spec.kind is ModelKind.BASELINE:
        fg = _baseline_fg(family, v, c)
        theta, opt = _optimize_theta(fg, init, bounds, kinds, family, config, size)
        params = ModelParams(phi=0.0, theta=theta)
        return FitResult(spec, params, log_likelihood(spec, params, arr), n, m,
                         FitCase.BASELINE_FIT, opt.converged, opt.iterations)

    fg = _truncated_fg(family, v, c, float(m))
    theta, opt = _optimize_theta(fg, init, bounds, kinds, family, config, size)

    if spec.kind is ModelKind.HURDLE:
        params = ModelParams(phi=(n - m) / n, theta=theta)
        return FitResult(spec, params, log_likelihood(spec, params, arr), n, m,
                         FitCase.HURDLE_CLOSED_FORM, opt.converged, opt.iterations)

    # zero-inflated with pinned size: rerun the two-case logic
    p0_star = fam.zero_prob(family, theta, validate=False)
    frac = m / n
    if frac <= 1.0 - p0_star:
        phi = min(max(1.0 - frac / (1.0 - p0_star), 0.0), 1.0)
        params = ModelParams(phi=phi, theta=theta)
        return FitResult(spec, params, log_likelihood(spec, params, arr), n, m,
                         FitCase.ZI_CASE1, opt.converged, opt.iterations)
    fg2 = _zi_profile_fg(family, v, c, float(m), float(n))
    cfg = OptimizerConfig(bounds=bounds, init=theta)
    theta2, opt2 = _optimize_theta(fg2, theta, bounds, kinds, family, cfg, size)
    p0_hat = fam.zero_prob(family, theta2, validate=False)
    psi = min(frac, 1.0 - p0_hat)
    phi = min(max(1.0 - psi / (1.0 - p0_hat), 0.0), 1.0)
    params = ModelParams(phi=phi, theta=theta2)
    return FitResult(spec, params, log_likelihood(spec, params, arr), n, m,
                     FitCase.ZI_CASE2, opt2.converged, opt.iterations + opt2.iterations)


def fit_integer_size(spec: ModelSpec, data, config: OptimizerConfig | None = None) -> FitResult:
    """Profile fit with the size parameter (r or n) restricted to integers.

    Runs the real-valued fit, then re-optimizes the remaining parameters
    at the nearby integers and keeps the best profile likelihood.
    """
    size_ix = fam.size_param_index(spec.family)
    if size_ix is None:
        raise ParameterError(f"{spec.family}: no integer-size parameter")
    real_spec = ModelSpec(spec.family, spec.kind, integer_size=False, lower=spec.lower, upper=spec.upper)
    base = _fit_real(real_spec, data, config)
    if base.theta_error is not None:
        return FitResult(spec, base.params_hat, base.loglik, base.n, base.m,
                         base.case_taken, base.converged, base.iterations,
                         theta_error=base.theta_error)

    r_hat = float(base.params_hat.theta[size_ix])
    lo_int = 1.0
    if spec.family is Family.BETA_BINOMIAL:
        arr = _clean_data(data)
        nz = arr[arr != 0.0] if spec.kind is not ModelKind.BASELINE else arr
        lo_int = float(np.ceil(np.rint(nz.max()))) if len(nz) else 1.0
    candidates = sorted(
        {
            k
            for k in (
                math.floor(r_hat) - 1,
                math.floor(r_hat),
                math.ceil(r_hat),
                math.ceil(r_hat) + 1,
            )
            if k >= max(1.0, lo_int) and k <= spec.upper
        }
    )
    if abs(r_hat - round(r_hat)) < 1e-9 and round(r_hat) in candidates:
        # real optimum already integral: keep it verbatim under the integer spec
        best = base
        best_ll = base.loglik
        candidates = [k for k in candidates if k != round(r_hat)]
    else:
        best, best_ll = None, -math.inf
    anchor = np.asarray(base.params_hat.theta, dtype=float)
    for k in candidates:
        try:
            res = _refit_with_size(real_spec, data, config, float(k), anchor=anchor)
        except (FitError, ParameterError):
            continue
        if res.loglik > best_ll:
            best, best_ll = res, res.loglik
    if best is None:
        raise FitError(f"{spec.family}: no integer size candidate could be fitted")
    return FitResult(spec, best.params_hat, best.loglik, best.n, best.m,
                     best.case_taken, best.converged, best.iterations)


def _fit_real(spec: ModelSpec, data, config: OptimizerConfig | None) -> FitResult:
    if spec.kind is ModelKind.BASELINE:
        return fit_baseline(spec, data, config)
    if spec.kind is ModelKind.HURDLE:
        return fit_hurdle(spec, data, config)
    return fit_zero_inflated(spec, data, config)


def fit_model(spec: ModelSpec, data, config: OptimizerConfig | None = None) -> FitResult:
    """Dispatch on model kind and the integer-size flag."""
    if spec.integer_size:
        return fit_integer_size(spec, data, config)
    return _fit_real(spec, data, config)


def log_likelihood(spec: ModelSpec, params: ModelParams, data) -> float:
    """Sum of model log densities; -inf when any observation has zero density."""
    arr = np.asarray(data, dtype=float).ravel()
    v, c = np.unique(arr, return_counts=True)
    ld = model_log_density(spec, params, v)
    with np.errstate(invalid="ignore"):
        total = float(ld @ c)
    if np.any(np.isneginf(ld) & (c > 0)):
        return -math.inf
    return total
