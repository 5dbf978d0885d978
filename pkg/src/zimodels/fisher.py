"""Analytic Fisher information, Wald intervals, and the zero-alteration test.

All matrices are per-observation (information of the distribution, not of
the sample) and ordered with phi first, then the family parameters.

Hurdle models have block-diagonal information

    [ 1/(phi (1-phi))          0        ]
    [        0            F_za_theta    ]

with F_za_theta = -(1-phi)/(1-p0) (E[H] + p0/(1-p0) g0 g0^T), where H is
the Hessian of the baseline log density, g0 the gradient of log p0, and
expectations are under the baseline.  Zero-inflated models couple phi and
theta:

    (1,1)  (1-p0) / (d (1-phi))          with d = phi + (1-phi) p0
    cross  (p0 / d) g0
    block  -(1-phi) (E[H] + (phi p0 / d) g0 g0^T)

and the inverse has a closed form built from F_theta = -E[H]:

    delta = 1 - (phi p0 / d) g0^T F_theta^{-1} g0
    (1,1) of the inverse: phi (1-phi) d delta / (d delta - p0),

which is also the asymptotic variance of phi_hat.  Continuous baselines
(p0 = 0) reduce to a block-diagonal matrix with theta block
(1-phi) F_theta.

Expectations of trigamma terms that lack closed forms are Monte Carlo
estimates with a fixed, reported seed; for the beta-binomial (finite
support) they are computed by exact summation instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from . import families as fam
from .errors import (
    BoundaryError,
    NumericalError,
    ParameterError,
    SingularityError,
    UnsupportedFamilyError,
)
from .families import Family
from .mle import FitResult
from .models import ModelKind, ModelParams, ModelSpec
from .seeding import substream

__all__ = [
    "MonteCarloConfig",
    "FisherMatrix",
    "ZiFisherInverse",
    "ConfidenceIntervals",
    "ZeroAlterationReport",
    "expected_trigamma",
    "fisher_hurdle",
    "fisher_zero_inflated",
    "fisher_zazi",
    "fisher_baseline",
    "inverse_fisher_zi",
    "inverse_fisher",
    "confidence_intervals",
    "test_zero_alteration",
]

DEFAULT_MC_DRAWS = 100_000
DEFAULT_MC_SEED = 715


@dataclass(frozen=True)
class MonteCarloConfig:
    n_draws: int = DEFAULT_MC_DRAWS
    seed: int = DEFAULT_MC_SEED

    def to_dict(self) -> dict:
        return {"n_draws": self.n_draws, "seed": self.seed}


@dataclass
class FisherMatrix:
    matrix: np.ndarray
    names: tuple[str, ...]
    mc_config: MonteCarloConfig | None = None

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "matrix": self.matrix.tolist(),
            "mc_config": self.mc_config.to_dict() if self.mc_config else None,
        }


@dataclass
class ZiFisherInverse:
    matrix: np.ndarray
    names: tuple[str, ...]
    phi_variance: float
    d: float
    delta: float
    mc_config: MonteCarloConfig | None = None

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "matrix": self.matrix.tolist(),
            "phi_variance": self.phi_variance,
            "mc_config": self.mc_config.to_dict() if self.mc_config else None,
        }


# ---------------------------------------------------------------------------
# expected trigamma terms


def expected_trigamma(family: Family, theta, kernel, mc: MonteCarloConfig) -> float:
    """Monte Carlo estimate of E[trigamma(kernel(Y'))], Y' ~ baseline.

    Deterministic given mc.seed.  Draws whose kernel argument is not
    strictly positive are skipped; more than 0.1% skips is an error.
    """
    theta = fam.validate_params(family, theta)
    if mc.n_draws < 1:
        raise ParameterError("n_draws must be >= 1")
    rng = substream(mc.seed)
    y = fam.sample_baseline(family, theta, mc.n_draws, rng)
    args = np.asarray(kernel(y), dtype=float)
    ok = args > 0
    skipped = int(args.size - ok.sum())
    if skipped > 0.001 * args.size:
        raise NumericalError(
            f"expected_trigamma: {skipped}/{args.size} draws gave nonpositive kernel arguments"
        )
    return float(np.mean(_sp.polygamma(1, args[ok])))


def _exact_expected_trigamma(family: Family, theta, kernels: list) -> list[float]:
    """Exact sum of E[trigamma(kernel(Y))] over a finite/truncated support."""
    pmf = fam.pmf_table(family, theta, validate=False)
    w = pmf / pmf.sum()
    ys = np.arange(len(pmf), dtype=float)
    out = []
    for kern in kernels:
        args = np.asarray(kern(ys), dtype=float)
        ok = args > 0
        out.append(float(w[ok] @ _sp.polygamma(1, args[ok])))
    return out


# ---------------------------------------------------------------------------
# per-family building blocks


@dataclass
class _Pieces:
    p0: float
    g0: np.ndarray | None
    e_hess: np.ndarray
    mc_used: bool


def _baseline_pieces(family: Family, theta: np.ndarray, mc: MonteCarloConfig) -> _Pieces:
    tri = lambda x: float(_sp.polygamma(1, x))
    if family is Family.POISSON:
        (lam,) = theta
        return _Pieces(math.exp(-lam), np.array([-1.0]), np.array([[-1.0 / lam]]), False)
    if family is Family.GEOMETRIC:
        (p,) = theta
        return _Pieces(
            p, np.array([1.0 / p]), np.array([[-1.0 / (p * p * (1.0 - p))]]), False
        )
    if family is Family.NEG_BINOMIAL:
        r, p = theta
        rng = substream(mc.seed)
        y = fam.sample_baseline(family, theta, mc.n_draws, rng)
        e_tri_yr = float(np.mean(_sp.polygamma(1, y + r)))
        e_hess = np.array(
            [
                [e_tri_yr - tri(r), 1.0 / p],
                [1.0 / p, -r / (p * p * (1.0 - p))],
            ]
        )
        return _Pieces(p**r, fam.grad_log_zero_prob(family, theta, validate=False), e_hess, True)
    if family is Family.BETA_BINOMIAL:
        n, a, b = theta
        e_nyb, e_ny1, e_ya = _exact_expected_trigamma(
            family, theta, [lambda y: n - y + b, lambda y: n - y + 1.0, lambda y: y + a]
        )
        s = n + a + b
        A = np.array(
            [
                [tri(n + 1.0) - tri(s) + e_nyb - e_ny1, -tri(s), e_nyb - tri(s)],
                [-tri(s), tri(a + b) - tri(s) - tri(a) + e_ya, tri(a + b) - tri(s)],
                [e_nyb - tri(s), tri(a + b) - tri(s), tri(a + b) - tri(b) - tri(s) + e_nyb],
            ]
        )
        p0 = fam.zero_prob(family, theta, validate=False)
        return _Pieces(p0, fam.grad_log_zero_prob(family, theta, validate=False), A, False)
    if family is Family.BETA_NEG_BINOMIAL:
        r, a, b = theta
        rng = substream(mc.seed)
        y = fam.sample_baseline(family, theta, mc.n_draws, rng)
        e_ry = float(np.mean(_sp.polygamma(1, y + r)))
        e_ryab = float(np.mean(_sp.polygamma(1, r + y + a + b)))
        e_yb = float(np.mean(_sp.polygamma(1, y + b)))
        A = np.array(
            [
                [e_ry - tri(r) + tri(r + a) - e_ryab, tri(r + a) - e_ryab, -e_ryab],
                [tri(r + a) - e_ryab, tri(r + a) - e_ryab + tri(a + b) - tri(a), tri(a + b) - e_ryab],
                [-e_ryab, tri(a + b) - e_ryab, e_yb - e_ryab + tri(a + b) - tri(b)],
            ]
        )
        p0 = fam.zero_prob(family, theta, validate=False)
        return _Pieces(p0, fam.grad_log_zero_prob(family, theta, validate=False), A, True)
    if family in (Family.NORMAL, Family.LOG_NORMAL):
        sigma = theta[1]
        return _Pieces(0.0, None, np.diag([-1.0 / sigma**2, -2.0 / sigma**2]), False)
    if family is Family.HALF_NORMAL:
        (sigma,) = theta
        return _Pieces(0.0, None, np.array([[-2.0 / sigma**2]]), False)
    if family is Family.EXPONENTIAL:
        (lam,) = theta
        return _Pieces(0.0, None, np.array([[-1.0 / lam**2]]), False)
    raise UnsupportedFamilyError(str(family))


def _check_interior(params: ModelParams, spec: ModelSpec) -> None:
    params.validate(spec)
    if not (0.0 < params.phi < 1.0):
        raise BoundaryError(
            f"phi = {params.phi}: information diverges on the boundary of [0, 1]"
        )


def _names(spec: ModelSpec) -> tuple[str, ...]:
    return ("phi",) + fam.param_names(spec.family)


# ---------------------------------------------------------------------------
# information matrices


def fisher_hurdle(
    spec: ModelSpec, params: ModelParams, mc: MonteCarloConfig | None = None
) -> FisherMatrix:
    """Information matrix of the hurdle model at (phi, theta)."""
    mc = mc or MonteCarloConfig()
    if not spec.is_discrete:
        return fisher_zazi(spec, params)
    _check_interior(params, spec)
    phi = float(params.phi)
    pieces = _baseline_pieces(spec.family, params.theta, mc)
    p0, g0 = pieces.p0, pieces.g0
    if p0 >= 1.0:
        raise SingularityError("baseline zero probability is 1")
    block = -(1.0 - phi) / (1.0 - p0) * (
        pieces.e_hess + (p0 / (1.0 - p0)) * np.outer(g0, g0)
    )
    d = block.shape[0]
    out = np.zeros((d + 1, d + 1))
    out[0, 0] = 1.0 / (phi * (1.0 - phi))
    out[1:, 1:] = block
    return FisherMatrix(out, _names(spec), mc if pieces.mc_used else None)


def fisher_zero_inflated(
    spec: ModelSpec, params: ModelParams, mc: MonteCarloConfig | None = None
) -> FisherMatrix:
    """Information matrix of the zero-inflated model at (phi, theta)."""
    mc = mc or MonteCarloConfig()
    if not spec.is_discrete:
        raise UnsupportedFamilyError(
            "continuous baselines have p0 = 0: use fisher_zazi"
        )
    _check_interior(params, spec)
    phi = float(params.phi)
    pieces = _baseline_pieces(spec.family, params.theta, mc)
    p0, g0 = pieces.p0, pieces.g0
    dd = phi + (1.0 - phi) * p0
    block = -(1.0 - phi) * (pieces.e_hess + (phi * p0 / dd) * np.outer(g0, g0))
    k = block.shape[0]
    out = np.zeros((k + 1, k + 1))
    out[0, 0] = (1.0 - p0) / (dd * (1.0 - phi))
    out[0, 1:] = out[1:, 0] = (p0 / dd) * g0
    out[1:, 1:] = block
    return FisherMatrix(out, _names(spec), mc if pieces.mc_used else None)


def fisher_zazi(spec: ModelSpec, params: ModelParams) -> FisherMatrix:
    """Information matrix for continuous-baseline models (ZI = hurdle)."""
    if spec.is_discrete:
        raise UnsupportedFamilyError("fisher_zazi requires a continuous family")
    _check_interior(params, spec)
    phi = float(params.phi)
    pieces = _baseline_pieces(spec.family, params.theta, MonteCarloConfig())
    f_theta = -pieces.e_hess
    d = f_theta.shape[0]
    out = np.zeros((d + 1, d + 1))
    out[0, 0] = 1.0 / (phi * (1.0 - phi))
    out[1:, 1:] = (1.0 - phi) * f_theta
    return FisherMatrix(out, _names(spec), None)


def fisher_baseline(
    spec: ModelSpec, params: ModelParams, mc: MonteCarloConfig | None = None
) -> FisherMatrix:
    """Information matrix of the baseline family alone (no phi row)."""
    mc = mc or MonteCarloConfig()
    params.validate(spec)
    pieces = _baseline_pieces(spec.family, params.theta, mc)
    return FisherMatrix(
        -pieces.e_hess, fam.param_names(spec.family), mc if pieces.mc_used else None
    )


def inverse_fisher_zi(
    spec: ModelSpec, params: ModelParams, mc: MonteCarloConfig | None = None
) -> ZiFisherInverse:
    """Closed-form inverse of the zero-inflated information matrix.

    Built from F_theta = -E[H] via the rank-one update structure rather
    than generic inversion; also exposes the phi-variance scalar."""
    mc = mc or MonteCarloConfig()
    if not spec.is_discrete:
        raise UnsupportedFamilyError("use inverse_fisher on the ZAZI matrix")
    _check_interior(params, spec)
    phi = float(params.phi)
    pieces = _baseline_pieces(spec.family, params.theta, mc)
    p0, g0 = pieces.p0, pieces.g0
    f_theta = -pieces.e_hess
    try:
        f_inv = np.linalg.inv(f_theta)
    except np.linalg.LinAlgError as e:
        raise SingularityError(f"baseline information is singular: {e}") from e
    dd = phi + (1.0 - phi) * p0
    cvec = f_inv @ g0
    delta = 1.0 - (phi * p0 / dd) * float(g0 @ cvec)
    if delta == 0.0:
        raise SingularityError("delta = 0: the closed-form inverse does not exist")
    denom = dd * delta - p0
    if denom == 0.0:
        raise SingularityError("d * delta = p0: the inverse does not exist")
    k = len(g0)
    out = np.zeros((k + 1, k + 1))
    phi_var = phi * (1.0 - phi) * dd * delta / denom
    out[0, 0] = phi_var
    cross = -(phi * p0 / denom) * cvec
    out[0, 1:] = out[1:, 0] = cross
    out[1:, 1:] = (f_inv + (phi * p0 / denom) * np.outer(cvec, cvec)) / (1.0 - phi)
    return ZiFisherInverse(
        out, _names(spec), phi_var, dd, delta, mc if pieces.mc_used else None
    )


def inverse_fisher(fm: FisherMatrix) -> np.ndarray:
    """Generic inverse of a computed information matrix."""
    try:
        return np.linalg.inv(fm.matrix)
    except np.linalg.LinAlgError as e:
        raise SingularityError(f"information matrix is singular: {e}") from e


# ---------------------------------------------------------------------------
# Wald intervals and the zero-alteration test


@dataclass
class ConfidenceIntervals:
    level: float
    names: tuple[str, ...]
    estimates: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    mc_config: MonteCarloConfig | None = None

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "names": list(self.names),
            "estimates": self.estimates.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "mc_config": self.mc_config.to_dict() if self.mc_config else None,
        }

    def interval(self, name: str) -> tuple[float, float]:
        i = self.names.index(name)
        return float(self.lower[i]), float(self.upper[i])


def _z_quantile(level: float) -> float:
    if not (0.0 < level < 1.0):
        raise ParameterError("confidence level must lie in (0, 1)")
    return float(_sp.ndtri(0.5 + level / 2.0))


def confidence_intervals(
    fit: FitResult, level: float = 0.95, mc: MonteCarloConfig | None = None
) -> ConfidenceIntervals:
    """Wald intervals for all parameters at the fitted point.

    Zero-weight intervals use the exact phi(1-phi) variance for hurdle
    and continuous models and the inflated closed-form variance for
    zero-inflated models; theta intervals use the diagonal of the inverse
    information, all scaled by 1/n.
    """
    mc = mc or MonteCarloConfig()
    spec, params, n = fit.spec, fit.params_hat, fit.n
    if fit.theta_error is not None:
        raise BoundaryError(f"no interval available: {fit.theta_error}")
    if fit.degenerate:
        raise BoundaryError("no interval available: degenerate fit (zero spread)")
    z = _z_quantile(level)
    mc_used = None

    if spec.kind is ModelKind.BASELINE:
        fm = fisher_baseline(spec, params, mc)
        variances = np.diag(inverse_fisher(fm)).copy()
        names = fam.param_names(spec.family)
        estimates = np.asarray(params.theta, float).copy()
        mc_used = fm.mc_config
    else:
        phi = float(params.phi)
        if phi in (0.0, 1.0):
            raise BoundaryError(f"no interval available: phi = {phi} is on the boundary")
        names = _names(spec)
        estimates = np.concatenate([[phi], params.theta])
        if not spec.is_discrete:
            fm = fisher_zazi(spec, params)
            theta_var = np.diag(np.linalg.inv(fm.matrix[1:, 1:]))
            variances = np.concatenate([[phi * (1.0 - phi)], theta_var])
        elif spec.kind is ModelKind.HURDLE:
            fm = fisher_hurdle(spec, params, mc)
            theta_var = np.diag(inverse_fisher(FisherMatrix(fm.matrix[1:, 1:], names[1:])))
            variances = np.concatenate([[phi * (1.0 - phi)], theta_var])
            mc_used = fm.mc_config
        else:
            inv = inverse_fisher_zi(spec, params, mc)
            variances = np.diag(inv.matrix).copy()
            variances[0] = inv.phi_variance
            mc_used = inv.mc_config

    if np.any(variances < 0):
        raise SingularityError("negative variance from the information matrix")
    half = z * np.sqrt(variances / n)
    lower = estimates - half
    upper = estimates + half
    if spec.kind is not ModelKind.BASELINE:
        lower[0] = max(lower[0], 0.0)
        upper[0] = min(upper[0], 1.0)
    return ConfidenceIntervals(level, tuple(names), estimates, lower, upper, mc_used)


@dataclass
class ZeroAlterationReport:
    verdict: str  # "inflated" | "deflated" | "neither"
    phi_interval: tuple[float, float]
    p0_at_theta_hat: float
    level: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "phi_interval": list(self.phi_interval),
            "p0_at_theta_hat": self.p0_at_theta_hat,
            "level": self.level,
        }


def test_zero_alteration(
    fit: FitResult, level: float = 0.95, mc: MonteCarloConfig | None = None
) -> ZeroAlterationReport:
    """Test whether the hurdle zero mass differs from the baseline zero
    probability (zero inflation when phi_hat is significantly above
    p0(theta_hat), deflation when below).

    Because theta_hat carries sampling noise of its own, the comparison is
    a Wald test of phi = p0(theta) whose variance combines phi(1-phi) with
    the delta-method variance of p0(theta_hat); under the hurdle
    factorization the two estimates are independent, so the combination is
    exact.  Reading p0 against the reported phi interval alone would
    over-reject on plain baseline data.
    """
    spec = fit.spec
    if spec.kind is not ModelKind.HURDLE or not spec.is_discrete:
        raise ParameterError("zero-alteration test requires a discrete hurdle fit")
    if fit.theta_error is not None:
        raise BoundaryError(f"no test available: {fit.theta_error}")
    phi = float(fit.params_hat.phi)
    if phi in (0.0, 1.0):
        raise BoundaryError(f"no test available: phi = {phi} is on the boundary")
    mc = mc or MonteCarloConfig()
    z = _z_quantile(level)
    half = z * math.sqrt(phi * (1.0 - phi) / fit.n)
    lo, hi = max(phi - half, 0.0), min(phi + half, 1.0)
    p0 = fam.zero_prob(spec.family, fit.params_hat.theta)

    pieces = _baseline_pieces(spec.family, fit.params_hat.theta, mc)
    block = -(1.0 - phi) / (1.0 - p0) * (
        pieces.e_hess + (p0 / (1.0 - p0)) * np.outer(pieces.g0, pieces.g0)
    )
    grad_p0 = p0 * pieces.g0  # gradient of p0 itself
    try:
        var_p0 = float(grad_p0 @ np.linalg.solve(block, grad_p0)) / fit.n
    except np.linalg.LinAlgError as e:
        raise SingularityError(f"information matrix is singular: {e}") from e
    var_diff = phi * (1.0 - phi) / fit.n + max(var_p0, 0.0)
    band = z * math.sqrt(var_diff)
    if p0 < phi - band:
        verdict = "inflated"
    elif p0 > phi + band:
        verdict = "deflated"
    else:
        verdict = "neither"
    return ZeroAlterationReport(verdict, (lo, hi), p0, level)
