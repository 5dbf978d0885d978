"""The nine baseline distribution families.

Discrete: Poisson, geometric, negative binomial (NB), beta-binomial (BB),
beta-negative-binomial (BNB).  Continuous: normal, log-normal, half-normal,
exponential.  Each family provides a log density, the zero probability
p0(theta) and its log, analytic gradients of log f and log p0, the CDF,
and an exact sampler.

Conventions
-----------
* Geometric counts failures before the first success: f(y) = p (1-p)^y on
  {0, 1, ...}, so p0 = p.
* NB uses the success-probability form f(y) = C(y+r-1, y) p^r (1-p)^y, so
  p0 = p^r and the mean is r(1-p)/p.  Many references swap the roles of p
  and 1-p; this module does not, and all gradient and information
  formulas below assume this convention.
* The size parameters n (BB) and r (NB, BNB) are real-valued by default;
  integer-constrained fitting is a fitting-time option.  For BB with real
  n the support is {0, ..., floor(n)} and the log density is the
  Gamma-function continuation of the integer-n formula.  That
  continuation is exactly normalized only at integer n; `baseline_cdf`
  and the sampler renormalize over the support so that they always
  describe one and the same probability law, while `log_density`,
  `zero_prob`, and the gradients keep the closed formulas used by the
  likelihood machinery.
* Log-normal, half-normal, and exponential have support y > 0; normal has
  support on all reals.  Continuous families have p0 identically 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special as _sp

from .errors import ParameterError, SupportError, UnsupportedFamilyError
from .special import log1m_exp

__all__ = [
    "Family",
    "ParamDef",
    "param_defs",
    "param_names",
    "is_discrete",
    "size_param_index",
    "make_params",
    "params_dict",
    "validate_params",
    "log_density",
    "log_zero_prob",
    "zero_prob",
    "grad_log_density",
    "grad_log_zero_prob",
    "baseline_cdf",
    "pmf_table",
    "sample_baseline",
]

INTEGRALITY_TOL = 1e-9
TAIL_EPS = 1e-12
MAX_TABLE_LEN = 1 << 21  # hard stop for heavy-tailed pmf summation

_LOG_2PI = float(np.log(2.0 * np.pi))


class Family(str, Enum):
    POISSON = "poisson"
    GEOMETRIC = "geometric"
    NEG_BINOMIAL = "nb"
    BETA_BINOMIAL = "bb"
    BETA_NEG_BINOMIAL = "bnb"
    NORMAL = "normal"
    LOG_NORMAL = "lognormal"
    HALF_NORMAL = "halfnormal"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class ParamDef:
    name: str
    kind: str  # "positive" | "prob" | "real"


_PARAM_DEFS: dict[Family, tuple[ParamDef, ...]] = {
    Family.POISSON: (ParamDef("lambda", "positive"),),
    Family.GEOMETRIC: (ParamDef("p", "prob"),),
    Family.NEG_BINOMIAL: (ParamDef("r", "positive"), ParamDef("p", "prob")),
    Family.BETA_BINOMIAL: (
        ParamDef("n", "positive"),
        ParamDef("alpha", "positive"),
        ParamDef("beta", "positive"),
    ),
    Family.BETA_NEG_BINOMIAL: (
        ParamDef("r", "positive"),
        ParamDef("alpha", "positive"),
        ParamDef("beta", "positive"),
    ),
    Family.NORMAL: (ParamDef("mu", "real"), ParamDef("sigma", "positive")),
    Family.LOG_NORMAL: (ParamDef("mu", "real"), ParamDef("sigma", "positive")),
    Family.HALF_NORMAL: (ParamDef("sigma", "positive"),),
    Family.EXPONENTIAL: (ParamDef("lambda", "positive"),),
}

_DISCRETE = frozenset(
    {
        Family.POISSON,
        Family.GEOMETRIC,
        Family.NEG_BINOMIAL,
        Family.BETA_BINOMIAL,
        Family.BETA_NEG_BINOMIAL,
    }
)

# index of the size parameter that may be constrained to integers
_SIZE_INDEX = {
    Family.NEG_BINOMIAL: 0,
    Family.BETA_BINOMIAL: 0,
    Family.BETA_NEG_BINOMIAL: 0,
}


def param_defs(family: Family) -> tuple[ParamDef, ...]:
    return _PARAM_DEFS[Family(family)]


def param_names(family: Family) -> tuple[str, ...]:
    return tuple(d.name for d in param_defs(family))


def is_discrete(family: Family) -> bool:
    return Family(family) in _DISCRETE


def size_param_index(family: Family) -> int | None:
    return _SIZE_INDEX.get(Family(family))


def make_params(family: Family, **kwargs) -> np.ndarray:
    """Build a parameter vector from named components, validating it."""
    defs = param_defs(family)
    names = [d.name for d in defs]
    unknown = set(kwargs) - set(names)
    if unknown:
        raise ParameterError(f"{family}: unknown parameters {sorted(unknown)}")
    missing = [n for n in names if n not in kwargs]
    if missing:
        raise ParameterError(f"{family}: missing parameters {missing}")
    theta = np.array([float(kwargs[n]) for n in names])
    validate_params(family, theta)
    return theta


def params_dict(family: Family, theta: np.ndarray) -> dict[str, float]:
    return {d.name: float(v) for d, v in zip(param_defs(family), np.asarray(theta, float))}


def validate_params(family: Family, theta) -> np.ndarray:
    """Check domain constraints; return the vector as a float array."""
    defs = param_defs(family)
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.shape != (len(defs),):
        raise ParameterError(
            f"{family}: expected {len(defs)} parameters {param_names(family)}, got shape {arr.shape}"
        )
    if np.any(~np.isfinite(arr)):
        raise ParameterError(f"{family}: parameters must be finite, got {arr}")
    for d, v in zip(defs, arr):
        if d.kind == "positive" and v <= 0.0:
            raise ParameterError(f"{family}: {d.name} must be > 0, got {v}")
        if d.kind == "prob" and not (0.0 < v < 1.0):
            raise ParameterError(f"{family}: {d.name} must lie in (0, 1), got {v}")
    return arr


# ---------------------------------------------------------------------------
# support handling


def _is_integral(y: np.ndarray) -> np.ndarray:
    return np.isfinite(y) & (np.abs(y - np.rint(y)) <= INTEGRALITY_TOL)


def _support_mask(family: Family, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
    if family in _DISCRETE:
        mask = _is_integral(y) & (y >= -INTEGRALITY_TOL)
        if family is Family.BETA_BINOMIAL:
            mask &= y <= np.floor(theta[0]) + INTEGRALITY_TOL
        return mask
    if family is Family.NORMAL:
        return np.isfinite(y)
    # lognormal / halfnormal / exponential
    return np.isfinite(y) & (y > 0.0)


def in_support(family: Family, theta, y) -> np.ndarray:
    theta = validate_params(family, theta)
    return _support_mask(family, theta, np.asarray(y, dtype=float))


# ---------------------------------------------------------------------------
# log densities


def _log_density_raw(family: Family, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Log density formula on in-support values (no gating)."""
    if family is Family.POISSON:
        (lam,) = theta
        return y * np.log(lam) - lam - _sp.gammaln(y + 1.0)
    if family is Family.GEOMETRIC:
        (p,) = theta
        return np.log(p) + y * np.log1p(-p)
    if family is Family.NEG_BINOMIAL:
        r, p = theta
        return (
            _sp.gammaln(y + r)
            - _sp.gammaln(y + 1.0)
            - _sp.gammaln(r)
            + r * np.log(p)
            + y * np.log1p(-p)
        )
    if family is Family.BETA_BINOMIAL:
        n, a, b = theta
        return (
            _sp.gammaln(n + 1.0)
            - _sp.gammaln(y + 1.0)
            - _sp.gammaln(n - y + 1.0)
            + _sp.betaln(y + a, n - y + b)
            - _sp.betaln(a, b)
        )
    if family is Family.BETA_NEG_BINOMIAL:
        r, a, b = theta
        return (
            _sp.gammaln(r + y)
            - _sp.gammaln(y + 1.0)
            - _sp.gammaln(r)
            + _sp.betaln(r + a, y + b)
            - _sp.betaln(a, b)
        )
    if family is Family.NORMAL:
        mu, sigma = theta
        z = (y - mu) / sigma
        return -0.5 * _LOG_2PI - np.log(sigma) - 0.5 * z * z
    if family is Family.LOG_NORMAL:
        mu, sigma = theta
        ly = np.log(y)
        z = (ly - mu) / sigma
        return -ly - 0.5 * _LOG_2PI - np.log(sigma) - 0.5 * z * z
    if family is Family.HALF_NORMAL:
        (sigma,) = theta
        return 0.5 * np.log(2.0 / np.pi) - np.log(sigma) - 0.5 * (y / sigma) ** 2
    if family is Family.EXPONENTIAL:
        (lam,) = theta
        return np.log(lam) - lam * y
    raise UnsupportedFamilyError(str(family))


def log_density(family: Family, theta, y, *, validate: bool = True):
    """Log pmf/pdf at y; -inf outside the support."""
    family = Family(family)
    theta = validate_params(family, theta) if validate else np.asarray(theta, float)
    ya = np.asarray(y, dtype=float)
    scalar = ya.ndim == 0
    ya1 = np.atleast_1d(ya)
    mask = _support_mask(family, theta, ya1)
    out = np.full(ya1.shape, -np.inf)
    if np.any(mask):
        ok = ya1[mask]
        # rint so that 2.0000000001 evaluates exactly like 2 for discrete laws
        if family in _DISCRETE:
            ok = np.rint(ok)
        out[mask] = _log_density_raw(family, theta, ok)
    return float(out[0]) if scalar else out


def log_zero_prob(family: Family, theta, *, validate: bool = True) -> float:
    """log p0(theta); -inf for continuous families."""
    family = Family(family)
    theta = validate_params(family, theta) if validate else np.asarray(theta, float)
    if family is Family.POISSON:
        return -float(theta[0])
    if family is Family.GEOMETRIC:
        return float(np.log(theta[0]))
    if family is Family.NEG_BINOMIAL:
        r, p = theta
        return float(r * np.log(p))
    if family is Family.BETA_BINOMIAL:
        n, a, b = theta
        return float(
            _sp.gammaln(n + b) + _sp.gammaln(a + b) - _sp.gammaln(n + a + b) - _sp.gammaln(b)
        )
    if family is Family.BETA_NEG_BINOMIAL:
        r, a, b = theta
        return float(
            _sp.gammaln(r + a) + _sp.gammaln(a + b) - _sp.gammaln(r + a + b) - _sp.gammaln(a)
        )
    return -np.inf


def zero_prob(family: Family, theta, *, validate: bool = True) -> float:
    """P(Y = 0) under the baseline; exactly 0 for continuous families."""
    return float(np.exp(log_zero_prob(family, theta, validate=validate)))


def log_one_minus_zero_prob(family: Family, theta, *, validate: bool = True) -> float:
    """log(1 - p0), computed in log scale."""
    return float(log1m_exp(log_zero_prob(family, theta, validate=validate)))


# ---------------------------------------------------------------------------
# gradients


def _grad_raw(family: Family, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
    psi = _sp.psi
    if family is Family.POISSON:
        (lam,) = theta
        return (y / lam - 1.0)[:, None]
    if family is Family.GEOMETRIC:
        (p,) = theta
        return (1.0 / p - y / (1.0 - p))[:, None]
    if family is Family.NEG_BINOMIAL:
        r, p = theta
        g_r = psi(y + r) - psi(r) + np.log(p)
        g_p = r / p - y / (1.0 - p)
        return np.stack([g_r, g_p], axis=1)
    if family is Family.BETA_BINOMIAL:
        n, a, b = theta
        g_n = psi(n + 1.0) - psi(n - y + 1.0) + psi(n - y + b) - psi(n + a + b)
        g_a = psi(y + a) - psi(n + a + b) + psi(a + b) - psi(a)
        g_b = psi(n - y + b) - psi(n + a + b) + psi(a + b) - psi(b)
        return np.stack([g_n, g_a, g_b], axis=1)
    if family is Family.BETA_NEG_BINOMIAL:
        r, a, b = theta
        g_r = psi(r + y) - psi(r) + psi(r + a) - psi(r + y + a + b)
        g_a = psi(r + a) - psi(r + y + a + b) + psi(a + b) - psi(a)
        g_b = psi(y + b) - psi(r + y + a + b) + psi(a + b) - psi(b)
        return np.stack([g_r, g_a, g_b], axis=1)
    if family is Family.NORMAL:
        mu, sigma = theta
        d = y - mu
        return np.stack([d / sigma**2, -1.0 / sigma + d * d / sigma**3], axis=1)
    if family is Family.LOG_NORMAL:
        mu, sigma = theta
        d = np.log(y) - mu
        return np.stack([d / sigma**2, -1.0 / sigma + d * d / sigma**3], axis=1)
    if family is Family.HALF_NORMAL:
        (sigma,) = theta
        return (-1.0 / sigma + y * y / sigma**3)[:, None]
    if family is Family.EXPONENTIAL:
        (lam,) = theta
        return (1.0 / lam - y)[:, None]
    raise UnsupportedFamilyError(str(family))


def grad_log_density(family: Family, theta, y, *, validate: bool = True):
    """Componentwise d log f / d theta; shape (d,) for scalar y, (len, d) else."""
    family = Family(family)
    theta = validate_params(family, theta) if validate else np.asarray(theta, float)
    ya = np.asarray(y, dtype=float)
    scalar = ya.ndim == 0
    ya1 = np.atleast_1d(ya)
    mask = _support_mask(family, theta, ya1)
    if not np.all(mask):
        bad = ya1[~mask][0]
        raise SupportError(f"{family}: observation {bad} outside the support")
    vals = np.rint(ya1) if family in _DISCRETE else ya1
    g = _grad_raw(family, theta, vals)
    return g[0] if scalar else g


def grad_log_zero_prob(family: Family, theta, *, validate: bool = True) -> np.ndarray:
    """d log p0 / d theta; defined only for discrete families."""
    family = Family(family)
    theta = validate_params(family, theta) if validate else np.asarray(theta, float)
    psi = _sp.psi
    if family is Family.POISSON:
        return np.array([-1.0])
    if family is Family.GEOMETRIC:
        return np.array([1.0 / theta[0]])
    if family is Family.NEG_BINOMIAL:
        r, p = theta
        return np.array([np.log(p), r / p])
    if family is Family.BETA_BINOMIAL:
        n, a, b = theta
        return np.array(
            [
                psi(n + b) - psi(n + a + b),
                psi(a + b) - psi(n + a + b),
                psi(n + b) + psi(a + b) - psi(n + a + b) - psi(b),
            ]
        )
    if family is Family.BETA_NEG_BINOMIAL:
        r, a, b = theta
        return np.array(
            [
                psi(r + a) - psi(r + a + b),
                psi(r + a) + psi(a + b) - psi(r + a + b) - psi(a),
                psi(a + b) - psi(r + a + b),
            ]
        )
    raise UnsupportedFamilyError(f"{family}: p0 is identically zero, log p0 has no gradient")


# ---------------------------------------------------------------------------
# pmf tables and CDFs


def pmf_table(
    family: Family,
    theta,
    *,
    min_len: int | None = None,
    tail_eps: float = TAIL_EPS,
    validate: bool = True,
) -> np.ndarray:
    """pmf values on {0, 1, ..., K} for a discrete family.

    K is chosen so that the accumulated mass exceeds 1 - tail_eps (and
    at least `min_len` entries are returned when requested).  For BB the
    table covers the full support and is renormalized so that it always
    sums to one, which matters only for non-integer n.
    """
    family = Family(family)
    theta = validate_params(family, theta) if validate else np.asarray(theta, float)
    if family not in _DISCRETE:
        raise UnsupportedFamilyError(f"{family}: pmf table requires a discrete family")
    if family is Family.BETA_BINOMIAL:
        sup = np.arange(int(np.floor(theta[0])) + 1, dtype=float)
        pmf = np.exp(_log_density_raw(family, theta, sup))
        pmf /= pmf.sum()
        if min_len is not None and len(pmf) < min_len:
            pmf = np.concatenate([pmf, np.zeros(min_len - len(pmf))])
        return pmf

    chunks = []
    total = 0.0
    start = 0
    block = 256
    while True:
        ys = np.arange(start, start + block, dtype=float)
        pm = np.exp(_log_density_raw(family, theta, ys))
        chunks.append(pm)
        total += float(pm.sum())
        start += block
        long_enough = min_len is None or start >= min_len
        if total >= 1.0 - tail_eps and long_enough:
            break
        if start >= MAX_TABLE_LEN:
            break
        block = min(block * 2, MAX_TABLE_LEN - start, 1 << 16)
    return np.concatenate(chunks)


def baseline_cdf(family: Family, theta, y, *, validate: bool = True):
    """P(Y <= y) under the baseline distribution."""
    family = Family(family)
    theta = validate_params(family, theta) if validate else np.asarray(theta, float)
    ya = np.asarray(y, dtype=float)
    scalar = ya.ndim == 0
    ya1 = np.atleast_1d(ya)

    if family in _DISCRETE:
        finite = ya1[np.isfinite(ya1)]
        hint = int(np.floor(finite.max())) + 1 if finite.size and finite.max() >= 0 else 1
        pmf = pmf_table(family, theta, min_len=min(hint, MAX_TABLE_LEN), validate=False)
        cum = np.cumsum(pmf)
        idx = np.floor(np.clip(ya1, -1.0, len(cum) - 1.0)).astype(np.int64)
        out = np.zeros(ya1.shape)
        pos = idx >= 0
        out[pos] = cum[idx[pos]]
        out[ya1 == np.inf] = 1.0
    elif family is Family.NORMAL:
        mu, sigma = theta
        out = _sp.ndtr((ya1 - mu) / sigma)
    elif family is Family.LOG_NORMAL:
        mu, sigma = theta
        out = np.zeros(ya1.shape)
        pos = ya1 > 0
        out[pos] = _sp.ndtr((np.log(ya1[pos]) - mu) / sigma)
        out[ya1 == np.inf] = 1.0
    elif family is Family.HALF_NORMAL:
        (sigma,) = theta
        out = np.zeros(ya1.shape)
        pos = ya1 > 0
        out[pos] = _sp.erf(ya1[pos] / (sigma * np.sqrt(2.0)))
        out[ya1 == np.inf] = 1.0
    elif family is Family.EXPONENTIAL:
        (lam,) = theta
        out = np.zeros(ya1.shape)
        pos = ya1 > 0
        out[pos] = -np.expm1(-lam * ya1[pos])
        out[ya1 == np.inf] = 1.0
    else:
        raise UnsupportedFamilyError(str(family))
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# sampling


def sample_baseline(family: Family, theta, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` i.i.d. observations; deterministic given the generator."""
    family = Family(family)
    theta = validate_params(family, theta)
    count = int(count)
    if count < 1:
        raise ParameterError("count must be >= 1")
    if family is Family.POISSON:
        return rng.poisson(theta[0], count).astype(float)
    if family is Family.GEOMETRIC:
        # numpy's geometric counts trials to the first success (support {1, 2, ...})
        return (rng.geometric(theta[0], count) - 1).astype(float)
    if family is Family.NEG_BINOMIAL:
        r, p = theta
        return rng.negative_binomial(r, p, count).astype(float)
    if family is Family.BETA_BINOMIAL:
        n, a, b = theta
        if abs(n - np.rint(n)) <= INTEGRALITY_TOL:
            probs = rng.beta(a, b, count)
            return rng.binomial(int(np.rint(n)), probs).astype(float)
        # non-integer n: inverse-CDF draw from the (renormalized) support table
        pmf = pmf_table(family, theta, validate=False)
        cum = np.cumsum(pmf)
        u = rng.random(count) * cum[-1]
        return np.searchsorted(cum, u, side="right").astype(float)
    if family is Family.BETA_NEG_BINOMIAL:
        r, a, b = theta
        probs = rng.beta(a, b, count)
        return rng.negative_binomial(r, probs).astype(float)
    if family is Family.NORMAL:
        mu, sigma = theta
        return rng.normal(mu, sigma, count)
    if family is Family.LOG_NORMAL:
        mu, sigma = theta
        return np.exp(rng.normal(mu, sigma, count))
    if family is Family.HALF_NORMAL:
        (sigma,) = theta
        return np.abs(rng.normal(0.0, sigma, count))
    if family is Family.EXPONENTIAL:
        (lam,) = theta
        return rng.exponential(1.0 / lam, count)
    raise UnsupportedFamilyError(str(family))
