"""Zero-inflated and hurdle wrappers over the baseline families.

A hurdle model places mass phi exactly at zero and spreads 1 - phi over
the zero-truncated baseline.  A zero-inflated model mixes an extra zero
atom of weight phi with the full baseline, so P(Y=0) = phi + (1-phi) p0.
When the baseline is continuous (p0 = 0) the two constructions coincide;
both kinds then share one code path, so their densities, CDFs, and
samplers are bit-identical.

The two weight parameterizations are interchangeable whenever the hurdle
zero mass is at least p0:

    phi_za = phi_zi + (1 - phi_zi) p0(theta)
    phi_zi = (phi_za - p0(theta)) / (1 - p0(theta))
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import families as fam
from .errors import (
    NoEquivalentZIError,
    ParameterError,
    SamplerStarvationError,
    UnsupportedFamilyError,
)
from .families import Family
from .special import log1m_exp

__all__ = [
    "ModelKind",
    "ModelSpec",
    "ModelParams",
    "model_log_density",
    "model_cdf",
    "MixedCdf",
    "make_cdf",
    "sample_model",
    "zi_to_za",
    "za_to_zi",
    "spec_token",
    "parse_spec_token",
    "all_candidate_specs",
]

REJECTION_BUDGET = 1_000_000

DEFAULT_LOWER = 0.01
DEFAULT_UPPER = 10_000.0


class ModelKind(str, Enum):
    BASELINE = "baseline"
    ZERO_INFLATED = "zi"
    HURDLE = "hurdle"


@dataclass(frozen=True)
class ModelSpec:
    """A family plus model kind plus the box used when fitting."""

    family: Family
    kind: ModelKind
    integer_size: bool = False
    lower: float = DEFAULT_LOWER
    upper: float = DEFAULT_UPPER

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if not (0.0 < self.lower < self.upper):
            raise ParameterError("bounds must satisfy 0 < lower < upper")
        if self.integer_size and fam.size_param_index(self.family) is None:
            raise ParameterError(f"{self.family}: no integer-size parameter")

    @property
    def is_discrete(self) -> bool:
        return fam.is_discrete(self.family)

    def param_bounds(self) -> list[tuple[float, float]]:
        """Per-parameter (lower, upper) box in the original scale."""
        out = []
        for d in fam.param_defs(self.family):
            if d.kind == "prob":
                out.append((self.lower, min(self.upper, 1.0 - self.lower)))
            elif d.kind == "real":
                out.append((-self.upper, self.upper))
            else:
                out.append((self.lower, self.upper))
        return out

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "kind": self.kind.value,
            "integer_size": self.integer_size,
            "lower": self.lower,
            "upper": self.upper,
        }


@dataclass
class ModelParams:
    """Zero-weight phi plus the baseline parameter vector."""

    phi: float
    theta: np.ndarray | None

    def __post_init__(self):
        if self.theta is not None:
            self.theta = np.asarray(self.theta, dtype=float)

    def validate(self, spec: ModelSpec) -> None:
        if not (0.0 <= self.phi <= 1.0):
            raise ParameterError(f"phi must lie in [0, 1], got {self.phi}")
        if self.theta is None:
            raise ParameterError("theta is undefined")
        fam.validate_params(spec.family, self.theta)

    def to_dict(self, spec: ModelSpec) -> dict:
        d = {"phi": float(self.phi)}
        if self.theta is not None:
            d.update(fam.params_dict(spec.family, self.theta))
        return d


def _effective_kind(spec: ModelSpec) -> ModelKind:
    # continuous ZI and hurdle are the same law; use one code path
    if spec.kind is ModelKind.ZERO_INFLATED and not spec.is_discrete:
        return ModelKind.HURDLE
    return spec.kind


def model_log_density(spec: ModelSpec, params: ModelParams, y, *, validate: bool = True):
    """Log density of the full model at y (atom handled in log scale)."""
    if validate:
        params.validate(spec)
    kind = _effective_kind(spec)
    if kind is ModelKind.BASELINE:
        return fam.log_density(spec.family, params.theta, y, validate=False)

    ya = np.asarray(y, dtype=float)
    scalar = ya.ndim == 0
    ya1 = np.atleast_1d(ya)
    phi = float(params.phi)
    with np.errstate(divide="ignore"):
        log_phi = np.log(phi) if phi > 0.0 else -np.inf
        log_1mphi = np.log1p(-phi) if phi < 1.0 else -np.inf

    base = fam.log_density(spec.family, params.theta, ya1, validate=False)
    zero = ya1 == 0.0
    out = np.empty(ya1.shape)
    if kind is ModelKind.HURDLE:
        log_p0 = fam.log_zero_prob(spec.family, params.theta, validate=False)
        log_1mp0 = float(log1m_exp(log_p0))
        out[zero] = log_phi
        out[~zero] = log_1mphi + base[~zero] - log_1mp0
    else:  # zero-inflated, discrete baseline
        log_p0 = fam.log_zero_prob(spec.family, params.theta, validate=False)
        out[zero] = np.logaddexp(log_phi, log_1mphi + log_p0)
        out[~zero] = log_1mphi + base[~zero]
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# CDFs with explicit jump structure (what the KS machinery consumes)


@dataclass
class MixedCdf:
    """A right-continuous CDF together with its atom locations and masses."""

    jumps: np.ndarray
    jump_mass: np.ndarray
    _cdf: callable = field(repr=False)

    def cdf(self, y) -> np.ndarray:
        return self._cdf(np.asarray(y, dtype=float))

    def mass_at(self, pts) -> np.ndarray:
        """Atom mass at each point (zero off the jump set)."""
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape)
        if len(self.jumps):
            idx = np.searchsorted(self.jumps, pts)
            ok = (idx < len(self.jumps)) & np.isin(
                pts, self.jumps, assume_unique=False
            )
            out[ok] = self.jump_mass[idx[ok]]
        return out

    def cdf_left(self, y) -> np.ndarray:
        """Left limits P(Y < y)."""
        y = np.asarray(y, dtype=float)
        return self.cdf(y) - self.mass_at(y)


def make_cdf(spec: ModelSpec, params: ModelParams, *, validate: bool = True) -> MixedCdf:
    """Build the model CDF view used by KS statistics and CDF distances."""
    if validate:
        params.validate(spec)
    kind = _effective_kind(spec)
    family, theta = spec.family, params.theta

    if spec.is_discrete:
        base = fam.pmf_table(family, theta, validate=False)
        if kind is ModelKind.BASELINE:
            pmf = base
        else:
            phi = float(params.phi)
            pmf = np.empty_like(base)
            if kind is ModelKind.HURDLE:
                p0 = base[0]
                pmf[0] = phi
                pmf[1:] = (1.0 - phi) * base[1:] / (1.0 - p0) if p0 < 1.0 else 0.0
            else:
                pmf[0] = phi + (1.0 - phi) * base[0]
                pmf[1:] = (1.0 - phi) * base[1:]
        cum = np.cumsum(pmf)
        jumps = np.arange(len(pmf), dtype=float)

        def _cdf(y, cum=cum):
            y = np.atleast_1d(y)
            idx = np.floor(np.clip(y, -1.0, len(cum) - 1.0)).astype(np.int64)
            out = np.zeros(idx.shape)
            pos = idx >= 0
            out[pos] = cum[idx[pos]]
            return np.clip(out, 0.0, 1.0)

        return MixedCdf(jumps=jumps, jump_mass=pmf, _cdf=_cdf)

    # continuous baseline
    if kind is ModelKind.BASELINE:
        def _cdf(y, family=family, theta=theta):
            return fam.baseline_cdf(family, theta, np.atleast_1d(y), validate=False)

        return MixedCdf(jumps=np.empty(0), jump_mass=np.empty(0), _cdf=_cdf)

    phi = float(params.phi)

    def _cdf(y, family=family, theta=theta, phi=phi):
        y = np.atleast_1d(y)
        fb = fam.baseline_cdf(family, theta, y, validate=False)
        return np.where(y >= 0.0, phi + (1.0 - phi) * fb, (1.0 - phi) * fb)

    return MixedCdf(jumps=np.array([0.0]), jump_mass=np.array([phi]), _cdf=_cdf)


def model_cdf(spec: ModelSpec, params: ModelParams, y, *, validate: bool = True):
    """Right-continuous model CDF at y."""
    view = make_cdf(spec, params, validate=validate)
    ya = np.asarray(y, dtype=float)
    out = view.cdf(np.atleast_1d(ya))
    return float(out[0]) if ya.ndim == 0 else out


# ---------------------------------------------------------------------------
# sampling


def sample_model(
    spec: ModelSpec, params: ModelParams, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw from the model; hurdle nonzeros come from rejection sampling."""
    params.validate(spec)
    count = int(count)
    if count < 1:
        raise ParameterError("count must be >= 1")
    kind = _effective_kind(spec)
    if kind is ModelKind.BASELINE:
        return fam.sample_baseline(spec.family, params.theta, count, rng)

    phi = float(params.phi)
    out = np.zeros(count)
    zero_mask = rng.random(count) < phi
    k = int(count - zero_mask.sum())
    if k == 0:
        return out

    if kind is ModelKind.ZERO_INFLATED or not spec.is_discrete:
        body = fam.sample_baseline(spec.family, params.theta, k, rng)
        if not spec.is_discrete:
            # exact float zeros have probability ~0 but would be read as atoms
            while True:
                bad = body == 0.0
                nbad = int(bad.sum())
                if nbad == 0:
                    break
                body[bad] = fam.sample_baseline(spec.family, params.theta, nbad, rng)
    else:
        # discrete hurdle: resample zeros from the baseline; the budget
        # counts consecutive rejections (draws since the last acceptance)
        body = np.empty(k)
        filled = 0
        consecutive = 0
        while filled < k:
            want = k - filled
            batch = fam.sample_baseline(
                spec.family, params.theta, max(2 * want, 32), rng
            )
            keep = batch[batch != 0.0][:want]
            consecutive = consecutive + len(batch) if len(keep) == 0 else 0
            body[filled : filled + len(keep)] = keep
            filled += len(keep)
            if consecutive > REJECTION_BUDGET:
                raise SamplerStarvationError(
                    f"{spec.family}: baseline zero probability too close to 1"
                )
    out[~zero_mask] = body
    return out


# ---------------------------------------------------------------------------
# hurdle <-> zero-inflated weight maps


def zi_to_za(family: Family, phi_zi: float, theta) -> float:
    """Hurdle zero mass giving the same law as the ZI model with weight phi_zi."""
    if not (0.0 <= phi_zi <= 1.0):
        raise ParameterError(f"phi must lie in [0, 1], got {phi_zi}")
    p0 = fam.zero_prob(family, theta)
    return phi_zi + (1.0 - phi_zi) * p0


def za_to_zi(family: Family, phi_za: float, theta) -> float:
    """ZI weight giving the same law as the hurdle model with zero mass phi_za."""
    if not (0.0 <= phi_za <= 1.0):
        raise ParameterError(f"phi must lie in [0, 1], got {phi_za}")
    p0 = fam.zero_prob(family, theta)
    if phi_za < p0:
        raise NoEquivalentZIError(
            f"hurdle zero mass {phi_za} below baseline zero probability {p0}: "
            "the zero-deflated model has no zero-inflated counterpart"
        )
    if p0 >= 1.0:
        raise ParameterError("baseline is a point mass at zero")
    return (phi_za - p0) / (1.0 - p0)


# ---------------------------------------------------------------------------
# spec naming (shared by the CLI and the benches)

_BASE_TOKENS = {
    Family.POISSON: "poisson",
    Family.GEOMETRIC: "geometric",
    Family.NEG_BINOMIAL: "nb",
    Family.BETA_BINOMIAL: "bb",
    Family.BETA_NEG_BINOMIAL: "bnb",
    Family.NORMAL: "normal",
    Family.LOG_NORMAL: "lognormal",
    Family.HALF_NORMAL: "halfnormal",
    Family.EXPONENTIAL: "exponential",
}

_ZI_TOKENS = {
    Family.POISSON: "zip",
    Family.GEOMETRIC: "zigeom",
    Family.NEG_BINOMIAL: "zinb",
    Family.BETA_BINOMIAL: "zibb",
    Family.BETA_NEG_BINOMIAL: "zibnb",
    Family.NORMAL: "zinormal",
    Family.LOG_NORMAL: "zilognorm",
    Family.HALF_NORMAL: "zihalfnorm",
    Family.EXPONENTIAL: "ziexp",
}

_HURDLE_TOKENS = {
    Family.POISSON: "ph",
    Family.GEOMETRIC: "geomh",
    Family.NEG_BINOMIAL: "nbh",
    Family.BETA_BINOMIAL: "bbh",
    Family.BETA_NEG_BINOMIAL: "bnbh",
    Family.NORMAL: "normalh",
    Family.LOG_NORMAL: "lognormh",
    Family.HALF_NORMAL: "halfnormh",
    Family.EXPONENTIAL: "exph",
}


def spec_token(spec: ModelSpec) -> str:
    table = {
        ModelKind.BASELINE: _BASE_TOKENS,
        ModelKind.ZERO_INFLATED: _ZI_TOKENS,
        ModelKind.HURDLE: _HURDLE_TOKENS,
    }[spec.kind]
    return table[spec.family] + ("1" if spec.integer_size else "")


def parse_spec_token(token: str, *, lower: float = DEFAULT_LOWER, upper: float = DEFAULT_UPPER) -> ModelSpec:
    tok = token.strip().lower()
    integer_size = False
    if tok.endswith("1") and tok not in _BASE_TOKENS.values():
        integer_size = True
        tok = tok[:-1]
    for kind, table in (
        (ModelKind.BASELINE, _BASE_TOKENS),
        (ModelKind.ZERO_INFLATED, _ZI_TOKENS),
        (ModelKind.HURDLE, _HURDLE_TOKENS),
    ):
        for family, t in table.items():
            if t == tok:
                return ModelSpec(family, kind, integer_size=integer_size, lower=lower, upper=upper)
    raise ParameterError(f"unknown model token {token!r}")


def all_candidate_specs(*, lower: float = DEFAULT_LOWER, upper: float = DEFAULT_UPPER) -> list[ModelSpec]:
    """The default candidate battery: nine baselines plus the five discrete
    zero-inflated and five discrete hurdle variants (19 specs)."""
    specs = [ModelSpec(f, ModelKind.BASELINE, lower=lower, upper=upper) for f in Family]
    for f in Family:
        if fam.is_discrete(f):
            specs.append(ModelSpec(f, ModelKind.ZERO_INFLATED, lower=lower, upper=upper))
    for f in Family:
        if fam.is_discrete(f):
            specs.append(ModelSpec(f, ModelKind.HURDLE, lower=lower, upper=upper))
    return specs
