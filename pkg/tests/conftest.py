"""Shared test oracles.

These implement independent routes to the quantities under test: a
from-scratch model log density (used for finite-difference Hessians), a
Monte Carlo estimate of the information matrix, central finite
differences, and coarse-to-fine grid searches for likelihood maxima.
They deliberately avoid the package's own density/gradient code paths.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special as sp

from zimodels import Family, ModelKind, ModelParams, ModelSpec, sample_model
from zimodels.seeding import substream


# ---------------------------------------------------------------------------
# independent log densities (formula-level, no support gating)


def oracle_baseline_logpdf(family: Family, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if family is Family.POISSON:
        (lam,) = theta
        return y * math.log(lam) - lam - sp.gammaln(y + 1)
    if family is Family.GEOMETRIC:
        (p,) = theta
        return math.log(p) + y * math.log1p(-p)
    if family is Family.NEG_BINOMIAL:
        r, p = theta
        return sp.gammaln(y + r) - sp.gammaln(y + 1) - sp.gammaln(r) + r * math.log(p) + y * math.log1p(-p)
    if family is Family.BETA_BINOMIAL:
        n, a, b = theta
        return (
            sp.gammaln(n + 1) - sp.gammaln(y + 1) - sp.gammaln(n - y + 1)
            + sp.betaln(y + a, n - y + b) - sp.betaln(a, b)
        )
    if family is Family.BETA_NEG_BINOMIAL:
        r, a, b = theta
        return (
            sp.gammaln(r + y) - sp.gammaln(y + 1) - sp.gammaln(r)
            + sp.betaln(r + a, y + b) - sp.betaln(a, b)
        )
    if family is Family.NORMAL:
        mu, sg = theta
        return -0.5 * math.log(2 * math.pi) - math.log(sg) - 0.5 * ((y - mu) / sg) ** 2
    if family is Family.LOG_NORMAL:
        mu, sg = theta
        return -np.log(y) - 0.5 * math.log(2 * math.pi) - math.log(sg) - 0.5 * ((np.log(y) - mu) / sg) ** 2
    if family is Family.HALF_NORMAL:
        (sg,) = theta
        return 0.5 * math.log(2 / math.pi) - math.log(sg) - 0.5 * (y / sg) ** 2
    if family is Family.EXPONENTIAL:
        (lam,) = theta
        return math.log(lam) - lam * y
    raise ValueError(family)


def oracle_log_p0(family: Family, theta: np.ndarray) -> float:
    if family is Family.POISSON:
        return -float(theta[0])
    if family is Family.GEOMETRIC:
        return math.log(theta[0])
    if family is Family.NEG_BINOMIAL:
        r, p = theta
        return r * math.log(p)
    if family is Family.BETA_BINOMIAL:
        n, a, b = theta
        return float(sp.gammaln(n + b) + sp.gammaln(a + b) - sp.gammaln(n + a + b) - sp.gammaln(b))
    if family is Family.BETA_NEG_BINOMIAL:
        r, a, b = theta
        return float(sp.gammaln(r + a) + sp.gammaln(a + b) - sp.gammaln(r + a + b) - sp.gammaln(a))
    return -math.inf


def oracle_model_logpdf(spec: ModelSpec, eta: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Model log density as a function of eta = (phi, theta), formula level."""
    y = np.asarray(y, dtype=float)
    phi, theta = eta[0], eta[1:]
    if spec.kind is ModelKind.BASELINE:
        return oracle_baseline_logpdf(spec.family, theta, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        base = oracle_baseline_logpdf(spec.family, theta, y)
    zero = y == 0.0
    out = np.empty_like(base)
    discrete = spec.is_discrete
    if spec.kind is ModelKind.HURDLE or not discrete:
        p0 = math.exp(oracle_log_p0(spec.family, theta)) if discrete else 0.0
        out[zero] = math.log(phi)
        out[~zero] = math.log1p(-phi) + base[~zero] - math.log1p(-p0)
    else:
        p0 = math.exp(oracle_log_p0(spec.family, theta))
        out[zero] = math.log(phi + (1 - phi) * p0)
        out[~zero] = math.log1p(-phi) + base[~zero]
    return out


# ---------------------------------------------------------------------------
# finite differences


def fd_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    g = np.zeros(len(x))
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def fd_hessian(f, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    d = len(x)
    out = np.empty((d, d))
    f0 = f(x)
    for i in range(d):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        out[i, i] = (f(xp) - 2 * f0 + f(xm)) / h**2
    for i in range(d):
        for j in range(i + 1, d):
            xpp, xpm, xmp, xmm = x.copy(), x.copy(), x.copy(), x.copy()
            xpp[[i, j]] += h
            xmm[[i, j]] -= h
            xpm[i] += h
            xpm[j] -= h
            xmp[i] -= h
            xmp[j] += h
            out[i, j] = out[j, i] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4 * h**2)
    return out


def mc_fisher_oracle(
    spec: ModelSpec,
    params: ModelParams,
    n_draws: int = 1_000_000,
    seed: int = 77,
    h: float = 1e-4,
    batches: int = 1,
):
    """-E[Hessian of the model log density], estimated from model draws.

    Uses the independent formula-level density above, collapsed over
    unique values for discrete families.  With `batches` > 1 the draws
    are split and the entrywise standard error of the estimate is
    returned alongside the mean."""
    rng = substream(seed, 424242)
    y = sample_model(spec, params, n_draws, rng)
    eta0 = np.concatenate([[params.phi], params.theta])

    def hess_of(sample):
        if spec.is_discrete:
            vals, cnts = np.unique(sample, return_counts=True)
        else:
            vals, cnts = sample, np.ones(len(sample))
        w = cnts / cnts.sum()

        def g(eta):
            return float(oracle_model_logpdf(spec, eta, vals) @ w)

        return -fd_hessian(g, eta0, h=h)

    if batches <= 1:
        return hess_of(y)
    parts = np.array_split(y, batches)
    mats = np.stack([hess_of(p) for p in parts])
    mean = mats.mean(axis=0)
    se = mats.std(axis=0, ddof=1) / math.sqrt(batches)
    return mean, se


# ---------------------------------------------------------------------------
# grid searches


def grid_max_1d(f, lo: float, hi: float, n: int = 400, rounds: int = 5):
    """Vectorized coarse-to-fine grid maximization; final resolution
    (hi-lo)/n**rounds."""
    for _ in range(rounds):
        xs = np.linspace(lo, hi, n)
        vals = f(xs)
        i = int(np.argmax(vals))
        lo = xs[max(i - 1, 0)]
        hi = xs[min(i + 1, n - 1)]
    return 0.5 * (lo + hi), float(np.max(vals))


def grid_max_nd(f, boxes, n: int = 12, rounds: int = 4):
    """Coarse-to-fine grid maximization in up to 3 dimensions (log-spaced).

    f takes a (k, d) matrix of parameter rows and returns k values."""
    boxes = [list(map(float, b)) for b in boxes]
    best_x, best_v = None, -np.inf
    for _ in range(rounds):
        axes = [np.geomspace(lo, hi, n) for lo, hi in boxes]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        vals = f(pts)
        i = int(np.argmax(vals))
        if vals[i] > best_v:
            best_v = float(vals[i])
            best_x = pts[i].copy()
        new_boxes = []
        for d, ax in enumerate(axes):
            j = list(np.unravel_index(i, grids[0].shape))[d]
            lo = ax[max(j - 1, 0)]
            hi = ax[min(j + 1, n - 1)]
            new_boxes.append([lo, hi])
        boxes = new_boxes
    return best_x, best_v


def profile_phi_zi(p0: float, n: int, m: int) -> float:
    """Optimal zero-inflation weight for fixed theta (clipped into [0, 1])."""
    phi = 1.0 - (m / n) / (1.0 - p0)
    return min(max(phi, 0.0), 1.0)


# ---------------------------------------------------------------------------
# random interior parameter points per family (away from boundaries)


def random_theta(family: Family, rng: np.random.Generator, *, integer_size: bool = False) -> np.ndarray:
    if family is Family.POISSON:
        return np.array([rng.uniform(0.5, 12.0)])
    if family is Family.GEOMETRIC:
        return np.array([rng.uniform(0.15, 0.85)])
    if family is Family.NEG_BINOMIAL:
        return np.array([rng.uniform(1.0, 12.0), rng.uniform(0.2, 0.8)])
    if family is Family.BETA_BINOMIAL:
        n = float(rng.integers(4, 10)) if integer_size else rng.uniform(4.3, 9.7)
        return np.array([n, rng.uniform(2.0, 9.0), rng.uniform(2.0, 9.0)])
    if family is Family.BETA_NEG_BINOMIAL:
        return np.array([rng.uniform(2.0, 8.0), rng.uniform(3.0, 9.0), rng.uniform(2.0, 8.0)])
    if family in (Family.NORMAL, Family.LOG_NORMAL):
        return np.array([rng.uniform(-2.0, 2.0), rng.uniform(0.5, 2.5)])
    if family is Family.HALF_NORMAL:
        return np.array([rng.uniform(0.5, 3.0)])
    if family is Family.EXPONENTIAL:
        return np.array([rng.uniform(0.3, 4.0)])
    raise ValueError(family)


def random_observation(family: Family, theta: np.ndarray, rng: np.random.Generator) -> float:
    from zimodels.families import sample_baseline

    return float(sample_baseline(family, theta, 1, rng)[0])


DISCRETE_FAMILIES = [
    Family.POISSON,
    Family.GEOMETRIC,
    Family.NEG_BINOMIAL,
    Family.BETA_BINOMIAL,
    Family.BETA_NEG_BINOMIAL,
]

CONTINUOUS_FAMILIES = [
    Family.NORMAL,
    Family.LOG_NORMAL,
    Family.HALF_NORMAL,
    Family.EXPONENTIAL,
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240803)
