"""Bootstrapped goodness-of-fit tests and model selection.

The KS statistic here is the exact sup over the real line of
|F_n(y) - F(y)| for a model CDF F that may carry atoms: both one-sided
gaps are evaluated at every sample point and every model jump point,
which is where the sup of a piecewise pattern like this is attained.

Two bootstrap p-value estimators are provided.  Both resample the data
with replacement, refit, and simulate a synthetic sample from the refit
model; they differ in which parameter estimate the synthetic sample is
compared against:

  variant A: against the resample fit itself;
  variant B: against a fresh fit on the synthetic sample (nested
             bootstrap; better calibrated for small n, costs one more
             fit per replicate).

p-values are exact counts: #{replicate statistic > observed}/B with
strict inequality, with failed replicates removed from both numerator
and denominator (and reported).  More than 20% failures invalidates the
test.  Each replicate derives its own random stream from (seed, b), so
reports are bit-reproducible regardless of thread count.

The likelihood ratio test compares two fitted candidate models on log
scale, Lambda = loglik(H0 fit) - loglik(H1 fit); replicates resample,
refit both, simulate from the H0 refit, refit both on the synthetic
sample, and count Lambda_b < Lambda.  Small p-values favor H1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryError,
    FitError,
    GofError,
    InsufficientDataError,
    NumericalError,
    ParameterError,
    SamplerStarvationError,
    SingularityError,
    SupportError,
)
from .mle import OptimizerConfig, fit_model
from .models import MixedCdf, ModelSpec, make_cdf, sample_model, spec_token
from .seeding import Seed, substream

__all__ = [
    "KsReport",
    "LrtReport",
    "SelectionReport",
    "ks_statistic",
    "kstest_A",
    "kstest_B",
    "lrt_bootstrap",
    "model_select",
]

MAX_FAILURE_FRACTION = 0.20

_FIT_FAILURES = (
    FitError,
    InsufficientDataError,
    SupportError,
    ParameterError,
    BoundaryError,
    SingularityError,
    NumericalError,
    SamplerStarvationError,
)


@dataclass
class KsReport:
    statistic: float
    p_value: float
    B: int
    replicate_statistics: list[float]
    failed_replicates: int
    algorithm: str  # "A" | "B"
    seed: Seed
    spec: ModelSpec | None = None

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "B": self.B,
            "replicate_statistics": list(self.replicate_statistics),
            "failed_replicates": self.failed_replicates,
            "algorithm": self.algorithm,
            "seed": list(self.seed) if isinstance(self.seed, tuple) else self.seed,
            "spec": self.spec.to_dict() if self.spec else None,
        }


@dataclass
class LrtReport:
    statistic: float  # log-scale likelihood ratio
    p_value: float
    B: int
    replicate_statistics: list[float]
    failed_replicates: int
    seed: Seed
    h0_spec: ModelSpec | None = None
    h1_spec: ModelSpec | None = None

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "B": self.B,
            "replicate_statistics": list(self.replicate_statistics),
            "failed_replicates": self.failed_replicates,
            "seed": list(self.seed) if isinstance(self.seed, tuple) else self.seed,
            "h0_spec": self.h0_spec.to_dict() if self.h0_spec else None,
            "h1_spec": self.h1_spec.to_dict() if self.h1_spec else None,
        }


@dataclass
class SelectionReport:
    candidates: list[ModelSpec]
    ks_pvalues: list[float | None]  # None: candidate could not be fitted
    threshold: float
    passing: list[int]  # indices into candidates
    lrt_matrix: list[list[float]]  # over passing candidates, row = H0
    recommendation: list[int]
    seed: Seed
    algorithm: str
    skipped: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "candidates": [spec_token(s) for s in self.candidates],
            "ks_pvalues": self.ks_pvalues,
            "threshold": self.threshold,
            "passing": [spec_token(self.candidates[i]) for i in self.passing],
            "lrt_matrix": self.lrt_matrix,
            "recommendation": [spec_token(self.candidates[i]) for i in self.recommendation],
            "seed": list(self.seed) if isinstance(self.seed, tuple) else self.seed,
            "algorithm": self.algorithm,
            "skipped": self.skipped,
        }


# ---------------------------------------------------------------------------
# KS statistic


def ks_statistic(data, cdf: MixedCdf) -> float:
    """Exact sup_y |F_n(y) - F(y)| for a CDF with known jump points."""
    xs = np.sort(np.asarray(data, dtype=float).ravel())
    if xs.size == 0:
        raise InsufficientDataError("no observations")
    n = xs.size
    pts = np.union1d(xs, cdf.jumps) if len(cdf.jumps) else np.unique(xs)
    f_right = cdf.cdf(pts)
    f_left = f_right - cdf.mass_at(pts)
    fn_right = np.searchsorted(xs, pts, side="right") / n
    fn_left = np.searchsorted(xs, pts, side="left") / n
    d = max(
        float(np.max(np.abs(fn_right - f_right))),
        float(np.max(np.abs(fn_left - f_left))),
    )
    return d


# ---------------------------------------------------------------------------
# replicate machinery


def _run_replicates(worker, B: int, threads: int) -> list:
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(worker, range(B)))
    return [worker(b) for b in range(B)]


def _pvalue_from_replicates(observed: float, stats: list, comparator) -> tuple[float, list[float], int]:
    good = [s for s in stats if s is not None]
    failed = len(stats) - len(good)
    if failed > MAX_FAILURE_FRACTION * len(stats):
        raise GofError(
            f"{failed}/{len(stats)} bootstrap replicates failed; report would be meaningless"
        )
    if not good:
        raise GofError("all bootstrap replicates failed")
    count = sum(1 for s in good if comparator(s, observed))
    return count / len(good), good, failed


def _check_B(B: int) -> None:
    if B < 1:
        raise GofError("at least one bootstrap replicate is required")


def _fit_usable(fit) -> bool:
    return fit.theta_error is None and not fit.degenerate


def _kstest(
    data,
    spec: ModelSpec,
    B: int,
    seed: Seed,
    *,
    nested: bool,
    threads: int = 1,
    config: OptimizerConfig | None = None,
) -> KsReport:
    _check_B(B)
    arr = np.asarray(data, dtype=float).ravel()
    n = len(arr)
    fit0 = fit_model(spec, arr, config)
    if not _fit_usable(fit0):
        raise FitError(f"cannot fit {spec_token(spec)} on the data: {fit0.theta_error}")
    d_obs = ks_statistic(arr, make_cdf(spec, fit0.params_hat))

    def worker(b: int):
        rng = substream(seed, b)
        resample = arr[rng.integers(0, n, n)]
        try:
            fit_b = fit_model(spec, resample, config)
            if not _fit_usable(fit_b):
                return None
            synth = sample_model(spec, fit_b.params_hat, n, rng)
            if nested:
                fit_c = fit_model(spec, synth, config)
                if not _fit_usable(fit_c):
                    return None
                ref = make_cdf(spec, fit_c.params_hat)
            else:
                ref = make_cdf(spec, fit_b.params_hat)
            return ks_statistic(synth, ref)
        except _FIT_FAILURES:
            return None

    stats = _run_replicates(worker, B, threads)
    p, good, failed = _pvalue_from_replicates(d_obs, stats, lambda s, o: s > o)
    return KsReport(
        statistic=d_obs,
        p_value=p,
        B=B,
        replicate_statistics=good,
        failed_replicates=failed,
        algorithm="B" if nested else "A",
        seed=seed,
        spec=spec,
    )


def kstest_A(data, spec: ModelSpec, B: int, seed: Seed, *, threads: int = 1,
             config: OptimizerConfig | None = None) -> KsReport:
    """Bootstrap KS test: replicate statistics use the resample fit."""
    return _kstest(data, spec, B, seed, nested=False, threads=threads, config=config)


def kstest_B(data, spec: ModelSpec, B: int, seed: Seed, *, threads: int = 1,
             config: OptimizerConfig | None = None) -> KsReport:
    """Nested bootstrap KS test: replicate statistics use a refit on the
    simulated sample."""
    return _kstest(data, spec, B, seed, nested=True, threads=threads, config=config)


# ---------------------------------------------------------------------------
# bootstrapped likelihood ratio test


def lrt_bootstrap(
    data,
    h0_spec: ModelSpec,
    h1_spec: ModelSpec,
    B: int,
    seed: Seed,
    *,
    threads: int = 1,
    config: OptimizerConfig | None = None,
) -> LrtReport:
    """Bootstrap likelihood ratio test of h0 against h1 (small p favors h1)."""
    _check_B(B)
    arr = np.asarray(data, dtype=float).ravel()
    n = len(arr)
    fit0 = fit_model(h0_spec, arr, config)
    fit1 = fit_model(h1_spec, arr, config)
    if not (_fit_usable(fit0) and _fit_usable(fit1)):
        raise FitError("cannot fit both hypotheses on the data")
    lam = fit0.loglik - fit1.loglik

    def worker(b: int):
        rng = substream(seed, b)
        resample = arr[rng.integers(0, n, n)]
        try:
            rf0 = fit_model(h0_spec, resample, config)
            rf1 = fit_model(h1_spec, resample, config)
            if not (_fit_usable(rf0) and _fit_usable(rf1)):
                return None
            synth = sample_model(h0_spec, rf0.params_hat, n, rng)
            cf0 = fit_model(h0_spec, synth, config)
            cf1 = fit_model(h1_spec, synth, config)
            if not (_fit_usable(cf0) and _fit_usable(cf1)):
                return None
            return cf0.loglik - cf1.loglik
        except _FIT_FAILURES:
            return None

    stats = _run_replicates(worker, B, threads)
    # small replicate statistics favor H1; ties (within float jitter, as
    # produced by exactly equivalent model pairs) count toward H0 so that
    # self-comparisons can never come out significant
    tie = 1e-9 * max(1.0, abs(lam))
    p, good, failed = _pvalue_from_replicates(lam, stats, lambda s, o: s <= o + tie)
    return LrtReport(
        statistic=lam,
        p_value=p,
        B=B,
        replicate_statistics=good,
        failed_replicates=failed,
        seed=seed,
        h0_spec=h0_spec,
        h1_spec=h1_spec,
    )


# ---------------------------------------------------------------------------
# model selection pipeline


def model_select(
    data,
    candidates: list[ModelSpec],
    B: int,
    seed: Seed,
    *,
    threshold: float = 0.05,
    algorithm: str = "A",
    threads: int = 1,
    config: OptimizerConfig | None = None,
) -> SelectionReport:
    """KS-screen the candidates, then rank the survivors by pairwise LRTs.

    A candidate passes when its KS p-value strictly exceeds `threshold`.
    The LRT matrix over passing candidates has rows as H0; a candidate is
    recommended when no other passing candidate beats it (no entry in its
    row falls below the threshold).
    """
    if not candidates:
        raise ParameterError("candidates must be nonempty")
    if algorithm not in ("A", "B"):
        raise ParameterError("algorithm must be 'A' or 'B'")
    runner = kstest_A if algorithm == "A" else kstest_B
    arr = np.asarray(data, dtype=float).ravel()

    pvals: list[float | None] = []
    skipped: list[str] = []
    for i, spec in enumerate(candidates):
        try:
            rep = runner(arr, spec, B, _child(seed, 1, i), threads=threads, config=config)
            pvals.append(rep.p_value)
        except (GofError, *_FIT_FAILURES) as e:
            pvals.append(None)
            skipped.append(f"{spec_token(spec)}: {e}")

    passing = [i for i, p in enumerate(pvals) if p is not None and p > threshold]

    k = len(passing)
    matrix = [[1.0] * k for _ in range(k)]
    for a in range(k):
        for b in range(k):
            if a == b:
                continue
            try:
                rep = lrt_bootstrap(
                    arr,
                    candidates[passing[a]],
                    candidates[passing[b]],
                    B,
                    _child(seed, 2, passing[a], passing[b]),
                    threads=threads,
                    config=config,
                )
                matrix[a][b] = rep.p_value
            except (GofError, *_FIT_FAILURES) as e:
                matrix[a][b] = math.nan
                skipped.append(
                    f"lrt {spec_token(candidates[passing[a]])} vs "
                    f"{spec_token(candidates[passing[b]])}: {e}"
                )

    recommendation = [
        passing[a]
        for a in range(k)
        if all(math.isnan(p) or p >= threshold for p in matrix[a])
    ]
    return SelectionReport(
        candidates=list(candidates),
        ks_pvalues=pvals,
        threshold=threshold,
        passing=passing,
        lrt_matrix=matrix,
        recommendation=recommendation,
        seed=seed,
        algorithm=algorithm,
        skipped=skipped,
    )


def _child(seed: Seed, *path: int) -> tuple:
    base = seed if isinstance(seed, tuple) else (seed,)
    return base + path
