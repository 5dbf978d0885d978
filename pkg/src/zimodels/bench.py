"""Desk-scale simulation studies: size and power of the bootstrap KS tests,
MLE convergence on nested samples, and CDF approximation distances.

Every study is driven by a `StudyConfig` and returns a `StudyResult`
whose rows are plain dicts (CSV/JSON ready).  Replications derive their
random streams from (seed, structural indices), so results are identical
whatever the worker count; rates are exact ratios of integer counts.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GofError, ParameterError
from .gof import _FIT_FAILURES, kstest_A, kstest_B
from .mle import OptimizerConfig, fit_model
from .models import (
    MixedCdf,
    ModelParams,
    ModelSpec,
    make_cdf,
    sample_model,
    spec_token,
)
from .seeding import substream

__all__ = [
    "StudyConfig",
    "StudyResult",
    "type_one_error_study",
    "power_study",
    "mle_convergence_study",
    "cdf_approximation_study",
    "cdf_sup_distance",
    "l1_relative_distance",
]


@dataclass
class StudyConfig:
    true_spec: ModelSpec
    true_params: ModelParams
    test_specs: list[ModelSpec] = field(default_factory=list)
    sample_sizes: list[int] = field(default_factory=lambda: [30, 100, 500])
    replications: int = 200
    B: int = 100
    seed: int = 0
    threads: int = 1
    algorithms: tuple[str, ...] = ("A", "B")
    alpha: float = 0.05
    init: list[float] | None = None  # optional protocol starting values

    def __post_init__(self):
        if self.replications < 1:
            raise ParameterError("replications must be >= 1")
        if any(n < 10 for n in self.sample_sizes):
            raise ParameterError("sample sizes below 10 are not supported")

    def optimizer_config(self) -> OptimizerConfig | None:
        if self.init is None:
            return None
        return OptimizerConfig(init=np.asarray(self.init, dtype=float))

    def to_dict(self) -> dict:
        return {
            "true_spec": self.true_spec.to_dict(),
            "true_params": self.true_params.to_dict(self.true_spec),
            "test_specs": [s.to_dict() for s in self.test_specs],
            "sample_sizes": list(self.sample_sizes),
            "replications": self.replications,
            "B": self.B,
            "seed": self.seed,
            "algorithms": list(self.algorithms),
            "alpha": self.alpha,
        }


@dataclass
class StudyResult:
    study: str
    rows: list[dict]
    config: dict

    def to_dict(self) -> dict:
        return {"study": self.study, "config": self.config, "rows": self.rows}

    def to_csv(self) -> str:
        if not self.rows:
            return ""
        cols = [k for k in self.rows[0] if not k.startswith("_")]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _csv_cell(row.get(k)) for k in cols})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def _csv_cell(v):
    if isinstance(v, (list, tuple)):
        return json.dumps(v)
    return v


# ---------------------------------------------------------------------------
# rejection-rate engine (type I error and power share it)


def _rejection_worker(args) -> list[tuple[int, int, float | None]]:
    """One replication: simulate a dataset, run every (spec, algorithm)."""
    (cfg_true_spec, cfg_true_params, test_specs, n, B, seed, j, i, algorithms) = args
    data = sample_model(cfg_true_spec, cfg_true_params, n, substream(seed, 0, j, i))
    out = []
    for k, spec in enumerate(test_specs):
        for ai, algo in enumerate(algorithms):
            run = kstest_A if algo == "A" else kstest_B
            try:
                rep = run(data, spec, B, (seed, 1, j, i, k, ai))
                out.append((k, ai, rep.p_value))
            except (GofError, *_FIT_FAILURES):
                out.append((k, ai, None))
    return out


def _rejection_study(config: StudyConfig, study_name: str) -> StudyResult:
    if not config.test_specs:
        raise ParameterError("test_specs must be nonempty")
    rows = []
    for j, n in enumerate(config.sample_sizes):
        tasks = [
            (
                config.true_spec,
                config.true_params,
                config.test_specs,
                n,
                config.B,
                config.seed,
                j,
                i,
                config.algorithms,
            )
            for i in range(config.replications)
        ]
        if config.threads > 1:
            with ProcessPoolExecutor(max_workers=config.threads) as ex:
                results = list(ex.map(_rejection_worker, tasks, chunksize=1))
        else:
            results = [_rejection_worker(t) for t in tasks]

        for k, spec in enumerate(config.test_specs):
            for ai, algo in enumerate(config.algorithms):
                pvals = [
                    p for res in results for kk, aa, p in res if kk == k and aa == ai
                ]
                valid = [p for p in pvals if p is not None]
                failures = len(pvals) - len(valid)
                rejections = sum(1 for p in valid if p < config.alpha)
                rows.append(
                    {
                        "study": study_name,
                        "true": spec_token(config.true_spec),
                        "test": spec_token(spec),
                        "algorithm": algo,
                        "n": n,
                        "replications": config.replications,
                        "B": config.B,
                        "rejections": rejections,
                        "valid": len(valid),
                        "failures": failures,
                        "rate": rejections / len(valid) if valid else None,
                        "pvalues": pvals,
                    }
                )
    return StudyResult(study_name, rows, config.to_dict())


def type_one_error_study(config: StudyConfig) -> StudyResult:
    """Rejection rate of the KS tests when the tested model is the truth."""
    tokens = [spec_token(s) for s in config.test_specs]
    if spec_token(config.true_spec) not in tokens:
        raise ParameterError("type-I study requires the true spec among test_specs")
    return _rejection_study(config, "type_one_error")


def power_study(config: StudyConfig) -> StudyResult:
    """Rejection rate of the KS tests against misspecified candidates."""
    tokens = [spec_token(s) for s in config.test_specs]
    if spec_token(config.true_spec) in tokens:
        raise ParameterError("power study requires test_specs different from the truth")
    return _rejection_study(config, "power")


# ---------------------------------------------------------------------------
# MLE convergence on nested samples


def l1_relative_distance(spec: ModelSpec, fitted: ModelParams, truth: ModelParams) -> float:
    """Sum over parameters (phi included) of |estimate - truth| / |truth|."""
    est = np.concatenate([[fitted.phi], np.asarray(fitted.theta, float)])
    tru = np.concatenate([[truth.phi], np.asarray(truth.theta, float)])
    if np.any(tru == 0.0):
        raise ParameterError("L1 relative distance undefined at zero true parameters")
    return float(np.sum(np.abs(est - tru) / np.abs(tru)))


def mle_convergence_study(config: StudyConfig) -> StudyResult:
    """Fit nested prefixes of one maximal sample; report L1 relative distance.

    Runs both the real-valued and the integer-size fit for families with a
    size parameter.
    """
    sizes = sorted(config.sample_sizes)
    data = sample_model(
        config.true_spec, config.true_params, sizes[-1], substream(config.seed, 0)
    )
    spec_real = ModelSpec(
        config.true_spec.family, config.true_spec.kind, integer_size=False,
        lower=config.true_spec.lower, upper=config.true_spec.upper,
    )
    modes = [("real", spec_real)]
    try:
        spec_int = ModelSpec(
            config.true_spec.family, config.true_spec.kind, integer_size=True,
            lower=config.true_spec.lower, upper=config.true_spec.upper,
        )
        modes.append(("integer", spec_int))
    except ParameterError:
        pass

    rows = []
    for n in sizes:
        prefix = data[:n]
        for mode, spec in modes:
            fit = fit_model(spec, prefix, config.optimizer_config())
            rows.append(
                {
                    "study": "mle_convergence",
                    "model": spec_token(config.true_spec),
                    "mode": mode,
                    "n": n,
                    "loglik": fit.loglik,
                    "l1rd": l1_relative_distance(spec, fit.params_hat, config.true_params),
                    "estimates": [fit.params_hat.phi] + list(map(float, fit.params_hat.theta)),
                }
            )
    return StudyResult("mle_convergence", rows, config.to_dict())


# ---------------------------------------------------------------------------
# CDF approximation distance


def cdf_sup_distance(c1: MixedCdf, c2: MixedCdf) -> float:
    """Exact sup |F1 - F2| for two step CDFs (evaluated at all jumps)."""
    pts = np.union1d(c1.jumps, c2.jumps)
    if pts.size == 0:
        raise ParameterError("cdf_sup_distance requires jump-point CDFs")
    right = np.abs(c1.cdf(pts) - c2.cdf(pts))
    left = np.abs(
        (c1.cdf(pts) - c1.mass_at(pts)) - (c2.cdf(pts) - c2.mass_at(pts))
    )
    return float(max(right.max(), left.max()))


def cdf_approximation_study(config: StudyConfig) -> StudyResult:
    """How closely a misspecified fitted model tracks the true CDF.

    Simulates nested samples from the truth, fits each test spec on each
    prefix, and reports the exact sup distance between the true CDF and
    the fitted CDF.  Both models must be discrete (step CDFs)."""
    if not config.test_specs:
        raise ParameterError("test_specs must be nonempty")
    if not config.true_spec.is_discrete or any(not s.is_discrete for s in config.test_specs):
        raise ParameterError("cdf_approximation_study supports discrete specs only")
    sizes = sorted(config.sample_sizes)
    data = sample_model(
        config.true_spec, config.true_params, sizes[-1], substream(config.seed, 0)
    )
    true_cdf = make_cdf(config.true_spec, config.true_params)
    rows = []
    for n in sizes:
        prefix = data[:n]
        for spec in config.test_specs:
            fit = fit_model(spec, prefix)
            if not (fit.theta_error is None and not fit.degenerate):
                raise GofError(f"fit of {spec_token(spec)} failed at n={n}")
            dist = cdf_sup_distance(true_cdf, make_cdf(spec, fit.params_hat))
            rows.append(
                {
                    "study": "cdf_approximation",
                    "true": spec_token(config.true_spec),
                    "fitted": spec_token(spec),
                    "n": n,
                    "sup_distance": dist,
                    "estimates": [fit.params_hat.phi] + list(map(float, fit.params_hat.theta)),
                }
            )
    return StudyResult("cdf_approximation", rows, config.to_dict())
