"""Command-line front end.

Subcommands: fit, ks, lrt, select, simulate, bench.  Input data is a
single column of numbers (CSV or whitespace-delimited, optional header).
Every randomized command requires --seed or generates and prints one, and
every report embeds a manifest (command, statistical flags, seed, library
version, input checksum) so a run can be reproduced bit-for-bit.  Wall
time is printed to stdout but kept out of the JSON report, and
execution-only knobs (--threads, output paths) are not part of the
manifest, so reruns with the same seed produce byte-identical JSON.

Exit codes: 0 success; 1 statistical failure (e.g. no candidate passes
the screen); 2 input error; 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__
from . import bench as bench_mod
from . import families as fam
from .errors import (
    BoundaryError,
    FitError,
    GofError,
    InputError,
    InsufficientDataError,
    NumericalError,
    ParameterError,
    SamplerStarvationError,
    SingularityError,
    SupportError,
    ZimodelsError,
)
from .families import Family
from .fisher import (
    MonteCarloConfig,
    confidence_intervals,
    fisher_baseline,
    fisher_hurdle,
    fisher_zazi,
    fisher_zero_inflated,
    inverse_fisher,
    inverse_fisher_zi,
    test_zero_alteration,
)
from .gof import kstest_A, kstest_B, lrt_bootstrap, model_select
from .mle import OptimizerConfig, fit_model
from .models import (
    ModelKind,
    ModelParams,
    ModelSpec,
    all_candidate_specs,
    parse_spec_token,
    sample_model,
    spec_token,
)

SCHEMA_VERSION = 1

_INPUT_ERRORS = (InputError, InsufficientDataError, SupportError, ParameterError)
_NUMERICAL_ERRORS = (
    NumericalError,
    SingularityError,
    BoundaryError,
    FitError,
    GofError,
    SamplerStarvationError,
)

_PARAM_FLAGS = ["lambda", "p", "r", "n", "alpha", "beta", "mu", "sigma"]


# ---------------------------------------------------------------------------
# plumbing


def _read_data(path: str) -> tuple[np.ndarray, str]:
    """Parse a one-column numeric file; returns (values, sha256 of bytes)."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    checksum = hashlib.sha256(raw).hexdigest()
    values = []
    for lineno, line in enumerate(raw.decode("utf-8", errors="replace").splitlines(), 1):
        token = line.split("#", 1)[0].strip().strip(",")
        if not token:
            continue
        try:
            values.append(float(token))
        except ValueError:
            if lineno == 1 and not values:
                continue  # header line
            raise InputError(f"{path}:{lineno}: not a number: {token!r}") from None
    if not values:
        raise InputError("no observations")
    return np.array(values), checksum


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and (obj != obj or obj in (float("inf"), float("-inf"))):
        return repr(obj)
    return obj


def _canonical_json(obj) -> str:
    return json.dumps(_to_jsonable(obj), sort_keys=True, separators=(",", ":")) + "\n"


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    seed = int(np.random.SeedSequence().entropy % (2**63))
    print(f"seed: {seed} (generated; pass --seed {seed} to reproduce)")
    return seed


def _manifest(command: str, seed: int, flags: dict, input_sha: str | None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "flags": flags,
        "seed": seed,
        "version": __version__,
        "input_sha256": input_sha,
    }


def _emit(report: dict, json_path: str | None) -> None:
    if json_path:
        with open(json_path, "w") as fh:
            fh.write(_canonical_json(report))


def _spec_from_args(args) -> ModelSpec:
    if getattr(args, "model", None):
        spec = parse_spec_token(args.model)
        lo, hi = _bounds_from_args(args, spec.lower, spec.upper)
        return ModelSpec(spec.family, spec.kind, spec.integer_size, lo, hi)
    if not args.family:
        raise InputError("either --model or --family/--kind is required")
    lo, hi = _bounds_from_args(args, 0.01, 10000.0)
    return ModelSpec(
        Family(args.family),
        ModelKind(args.kind),
        integer_size=bool(getattr(args, "integer_size", False)),
        lower=lo,
        upper=hi,
    )


def _bounds_from_args(args, lo: float, hi: float) -> tuple[float, float]:
    if getattr(args, "bounds", None):
        try:
            lo_s, hi_s = args.bounds.split(",")
            lo, hi = float(lo_s), float(hi_s)
        except ValueError:
            raise InputError(f"--bounds expects LO,HI, got {args.bounds!r}") from None
    return lo, hi


def _optimizer_config(args, spec: ModelSpec) -> OptimizerConfig | None:
    init_pairs = getattr(args, "init", None)
    if not init_pairs:
        return None
    names = fam.param_names(spec.family)
    given = {}
    for pair in init_pairs:
        try:
            k, v = pair.split("=")
            given[k.strip()] = float(v)
        except ValueError:
            raise InputError(f"--init expects name=value, got {pair!r}") from None
    missing = [n for n in names if n not in given]
    if missing:
        raise InputError(f"--init must cover all of {list(names)}; missing {missing}")
    return OptimizerConfig(init=np.array([given[n] for n in names]))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_fit(args) -> int:
    data, sha = _read_data(args.input)
    seed = _resolve_seed(args)
    spec = _spec_from_args(args)
    config = _optimizer_config(args, spec)
    mc = MonteCarloConfig(seed=seed)
    fit = fit_model(spec, data, config)

    result: dict = {"fit": fit.to_dict()}
    print(f"model: {spec_token(spec)}   n = {fit.n}   nonzero = {fit.m}")
    if fit.theta_error is not None:
        print(f"phi_hat = {fit.params_hat.phi:.6f}; theta undefined: {fit.theta_error}")
    else:
        print("estimates:", {k: round(v, 6) for k, v in fit.params_hat.to_dict(spec).items()})
        print(f"loglik = {fit.loglik:.4f}   case = {fit.case_taken.value}")
        try:
            if spec.kind is ModelKind.BASELINE:
                fm = fisher_baseline(spec, fit.params_hat, mc)
                inv = inverse_fisher(fm)
                result["fisher"] = fm.to_dict()
                result["inverse_fisher"] = inv.tolist()
            elif not spec.is_discrete:
                fm = fisher_zazi(spec, fit.params_hat)
                result["fisher"] = fm.to_dict()
                result["inverse_fisher"] = inverse_fisher(fm).tolist()
            elif spec.kind is ModelKind.HURDLE:
                fm = fisher_hurdle(spec, fit.params_hat, mc)
                result["fisher"] = fm.to_dict()
                result["inverse_fisher"] = inverse_fisher(fm).tolist()
            else:
                fm = fisher_zero_inflated(spec, fit.params_hat, mc)
                inv = inverse_fisher_zi(spec, fit.params_hat, mc)
                result["fisher"] = fm.to_dict()
                result["inverse_fisher"] = inv.matrix.tolist()
            ci = confidence_intervals(fit, level=args.level, mc=mc)
            result["confidence_intervals"] = ci.to_dict()
            for name, lo, hi in zip(ci.names, ci.lower, ci.upper):
                print(f"  {int(ci.level*100)}% CI {name}: ({lo:.6f}, {hi:.6f})")
            if spec.kind is ModelKind.HURDLE and spec.is_discrete:
                za = test_zero_alteration(fit, level=args.level)
                result["zero_alteration"] = za.to_dict()
                print(
                    f"zero-alteration verdict: {za.verdict} "
                    f"(p0 at theta_hat = {za.p0_at_theta_hat:.6f}, "
                    f"phi CI = ({za.phi_interval[0]:.6f}, {za.phi_interval[1]:.6f}))"
                )
        except (BoundaryError, SingularityError) as e:
            result["inference_unavailable"] = str(e)
            print(f"inference unavailable: {e}")

    report = {
        "manifest": _manifest(
            "fit",
            seed,
            {
                "model": spec_token(spec),
                "level": args.level,
                "bounds": [spec.lower, spec.upper],
            },
            sha,
        ),
        "result": result,
    }
    _emit(report, args.json)
    return 0


def _cmd_ks(args) -> int:
    data, sha = _read_data(args.input)
    seed = _resolve_seed(args)
    spec = _spec_from_args(args)
    runner = kstest_A if args.algorithm == "A" else kstest_B
    rep = runner(data, spec, args.bootstrap, seed, threads=args.threads)
    print(
        f"KS test ({args.algorithm}) for {spec_token(spec)}: D = {rep.statistic:.6f}, "
        f"p = {rep.p_value:.6g}  (B = {rep.B}, failed = {rep.failed_replicates})"
    )
    report = {
        "manifest": _manifest(
            "ks",
            seed,
            {"model": spec_token(spec), "algorithm": args.algorithm, "B": args.bootstrap},
            sha,
        ),
        "result": rep.to_dict(),
    }
    _emit(report, args.json)
    return 0


def _cmd_lrt(args) -> int:
    data, sha = _read_data(args.input)
    seed = _resolve_seed(args)
    h0 = parse_spec_token(args.h0)
    h1 = parse_spec_token(args.h1)
    rep = lrt_bootstrap(data, h0, h1, args.bootstrap, seed, threads=args.threads)
    verdict = "H1 significantly better" if rep.p_value < 0.05 else "no significant improvement"
    print(
        f"LRT {args.h0} vs {args.h1}: Lambda = {rep.statistic:.4f}, p = {rep.p_value:.6g} "
        f"({verdict}; B = {rep.B}, failed = {rep.failed_replicates})"
    )
    report = {
        "manifest": _manifest(
            "lrt", seed, {"h0": args.h0, "h1": args.h1, "B": args.bootstrap}, sha
        ),
        "result": rep.to_dict(),
    }
    _emit(report, args.json)
    return 0


def _cmd_select(args) -> int:
    data, sha = _read_data(args.input)
    seed = _resolve_seed(args)
    if args.candidates.strip().lower() == "all":
        candidates = all_candidate_specs()
    else:
        candidates = [parse_spec_token(t) for t in args.candidates.split(",") if t.strip()]
    sel = model_select(
        data,
        candidates,
        args.bootstrap,
        seed,
        threshold=args.threshold,
        algorithm=args.algorithm,
        threads=args.threads,
    )
    for spec, p in zip(sel.candidates, sel.ks_pvalues):
        mark = "skipped" if p is None else f"p = {p:.4g}"
        print(f"  {spec_token(spec):12s} {mark}")
    passing = [spec_token(sel.candidates[i]) for i in sel.passing]
    rec = [spec_token(sel.candidates[i]) for i in sel.recommendation]
    print(f"passing (p > {sel.threshold}): {passing or 'none'}")
    print(f"recommended: {rec or 'none'}")
    report = {
        "manifest": _manifest(
            "select",
            seed,
            {
                "candidates": [spec_token(s) for s in candidates],
                "algorithm": args.algorithm,
                "B": args.bootstrap,
                "threshold": args.threshold,
            },
            sha,
        ),
        "result": sel.to_dict(),
    }
    _emit(report, args.json)
    return 0 if sel.passing else 1


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    spec = _spec_from_args(args)
    given = {
        name: getattr(args, name if name != "lambda" else "lambda_")
        for name in _PARAM_FLAGS
        if getattr(args, name if name != "lambda" else "lambda_", None) is not None
    }
    theta = fam.make_params(spec.family, **given)
    phi = args.phi if spec.kind is not ModelKind.BASELINE else 0.0
    params = ModelParams(phi=phi, theta=theta)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    draws = sample_model(spec, params, args.count, rng)
    lines = "\n".join(f"{v:.17g}" for v in draws) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(lines)
        print(f"wrote {args.count} draws to {args.out}")
    else:
        sys.stdout.write(lines)
    report = {
        "manifest": _manifest(
            "simulate",
            seed,
            {
                "model": spec_token(spec),
                "phi": phi,
                "theta": {k: float(v) for k, v in given.items()},
                "count": args.count,
            },
            None,
        ),
        "result": {"draws": draws.tolist()},
    }
    _emit(report, args.json)
    return 0


def _preset_config(name: str, seed: int, threads: int, replications: int | None, B: int | None):
    mk = lambda fmly, kind, **kw: (
        ModelSpec(fmly, kind),
        ModelParams(phi=kw.pop("phi"), theta=fam.make_params(fmly, **kw)),
    )
    presets: dict[str, dict] = {
        "table1-desk": dict(
            study="mle_convergence",
            true=mk(Family.BETA_NEG_BINOMIAL, ModelKind.HURDLE, phi=0.3, r=5, alpha=8, beta=3),
            sizes=[10_000, 50_000, 200_000],
            init=[6.0, 9.0, 4.0],
        ),
        "table2-desk": dict(
            study="mle_convergence",
            true=mk(Family.BETA_BINOMIAL, ModelKind.HURDLE, phi=0.6, n=5, alpha=8, beta=3),
            sizes=[10_000, 50_000, 200_000],
            init=[6.0, 9.0, 4.0],
        ),
        "table3-desk": dict(
            study="type_one_error",
            true=mk(Family.POISSON, ModelKind.ZERO_INFLATED, phi=0.3, **{"lambda": 10}),
            tests=["zip"], sizes=[200],
        ),
        "table4-desk": dict(
            study="type_one_error",
            true=mk(Family.NEG_BINOMIAL, ModelKind.ZERO_INFLATED, phi=0.3, r=5, p=0.2),
            tests=["zinb"], sizes=[200],
        ),
        "table5-desk": dict(
            study="type_one_error",
            true=mk(Family.BETA_NEG_BINOMIAL, ModelKind.ZERO_INFLATED, phi=0.3, r=3, alpha=3, beta=5),
            tests=["zibnb"], sizes=[200],
        ),
        "table6-desk": dict(
            study="type_one_error",
            true=mk(Family.BETA_BINOMIAL, ModelKind.ZERO_INFLATED, phi=0.3, n=5, alpha=8, beta=3),
            tests=["zibb"], sizes=[200],
        ),
        "table7-desk": dict(
            study="power",
            true=mk(Family.POISSON, ModelKind.ZERO_INFLATED, phi=0.3, **{"lambda": 10}),
            tests=["zibnb"], sizes=[100],
        ),
        "table9-desk": dict(
            study="cdf_approximation",
            true=mk(Family.POISSON, ModelKind.ZERO_INFLATED, phi=0.3, **{"lambda": 10}),
            tests=["zinb"], sizes=[100, 1000, 5000],
        ),
        "table10-desk": dict(
            study="cdf_approximation",
            true=mk(Family.BETA_NEG_BINOMIAL, ModelKind.ZERO_INFLATED, phi=0.3, r=15, alpha=19, beta=10),
            tests=["zibb"], sizes=[100, 1000, 5000],
        ),
    }
    if name not in presets:
        raise InputError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    p = presets[name]
    spec, params = p["true"]
    cfg = bench_mod.StudyConfig(
        true_spec=spec,
        true_params=params,
        test_specs=[parse_spec_token(t) for t in p.get("tests", [])],
        sample_sizes=p["sizes"],
        replications=replications or 200,
        B=B or 100,
        seed=seed,
        threads=threads,
        init=p.get("init"),
    )
    return p["study"], cfg


def _config_from_file(path: str, seed: int, threads: int, replications, B):
    with open(path) as fh:
        raw = json.load(fh)
    spec = parse_spec_token(raw["true"]["model"])
    theta = fam.make_params(spec.family, **raw["true"]["theta"])
    params = ModelParams(phi=raw["true"].get("phi", 0.0), theta=theta)
    cfg = bench_mod.StudyConfig(
        true_spec=spec,
        true_params=params,
        test_specs=[parse_spec_token(t) for t in raw.get("tests", [])],
        sample_sizes=raw.get("sizes", [30, 100, 500]),
        replications=replications or raw.get("replications", 200),
        B=B or raw.get("B", 100),
        seed=seed,
        threads=threads,
        algorithms=tuple(raw.get("algorithms", ["A", "B"])),
    )
    return raw["study"], cfg


def _cmd_bench(args) -> int:
    seed = _resolve_seed(args)
    if args.preset:
        study, cfg = _preset_config(args.preset, seed, args.threads, args.replications, args.bootstrap)
        tag = args.preset
    elif args.config:
        study, cfg = _config_from_file(args.config, seed, args.threads, args.replications, args.bootstrap)
        tag = "config"
    else:
        raise InputError("bench needs --preset or --config")
    runner = {
        "type_one_error": bench_mod.type_one_error_study,
        "power": bench_mod.power_study,
        "mle_convergence": bench_mod.mle_convergence_study,
        "cdf_approximation": bench_mod.cdf_approximation_study,
    }[study]
    t0 = time.monotonic()
    result = runner(cfg)
    elapsed = time.monotonic() - t0
    import os

    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, f"{tag}.csv")
    json_path = os.path.join(args.out_dir, f"{tag}.json")
    with open(csv_path, "w") as fh:
        fh.write(result.to_csv())
    report = {
        "manifest": _manifest("bench", seed, {"study": study, "tag": tag, "B": cfg.B,
                                              "replications": cfg.replications}, None),
        "result": result.to_dict(),
    }
    with open(json_path, "w") as fh:
        fh.write(_canonical_json(report))
    print(f"{study}: wrote {csv_path} and {json_path} ({elapsed:.1f}s)")
    for row in result.rows:
        brief = {k: v for k, v in row.items() if k not in ("pvalues", "estimates")}
        print("  " + json.dumps(_to_jsonable(brief), sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="model token (e.g. zinb, ph, bnbh1)")
    p.add_argument("--family", choices=[f.value for f in Family])
    p.add_argument("--kind", choices=[k.value for k in ModelKind], default="zi")
    p.add_argument("--integer-size", action="store_true", dest="integer_size")
    p.add_argument("--bounds", help="parameter box LO,HI (default 0.01,10000)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", help="write the JSON report here")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zimodels", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("fit", help="fit a model; report MLE, information, intervals")
    p.add_argument("input")
    _add_model_flags(p)
    p.add_argument("--init", nargs="*", help="initial values as name=value pairs")
    p.add_argument("--level", type=float, default=0.95)
    _add_common(p)
    p.set_defaults(run=_cmd_fit)

    p = sub.add_parser("ks", help="bootstrap KS test")
    p.add_argument("input")
    _add_model_flags(p)
    p.add_argument("--algorithm", choices=["A", "B"], default="A")
    p.add_argument("--bootstrap", type=int, default=1000, metavar="B")
    _add_common(p)
    p.set_defaults(run=_cmd_ks)

    p = sub.add_parser("lrt", help="bootstrap likelihood ratio test")
    p.add_argument("input")
    p.add_argument("--h0", required=True)
    p.add_argument("--h1", required=True)
    p.add_argument("--bootstrap", type=int, default=1000, metavar="B")
    _add_common(p)
    p.set_defaults(run=_cmd_lrt)

    p = sub.add_parser("select", help="KS screen plus pairwise LRT ranking")
    p.add_argument("input")
    p.add_argument("--candidates", default="all", help="'all' or comma-separated tokens")
    p.add_argument("--algorithm", choices=["A", "B"], default="A")
    p.add_argument("--bootstrap", type=int, default=1000, metavar="B")
    p.add_argument("--threshold", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(run=_cmd_select)

    p = sub.add_parser("simulate", help="draw a seeded sample from a model")
    _add_model_flags(p)
    p.add_argument("--phi", type=float, default=0.0)
    for name in _PARAM_FLAGS:
        p.add_argument(f"--{name}", type=float, default=None,
                       dest=name if name != "lambda" else "lambda_")
    p.add_argument("-n", "--count", type=int, required=True)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    _add_common(p)
    p.set_defaults(run=_cmd_simulate)

    p = sub.add_parser("bench", help="run a desk-scale simulation study")
    p.add_argument("--preset")
    p.add_argument("--config", help="JSON study config")
    p.add_argument("--out-dir", default="bench-out")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--bootstrap", type=int, default=None, metavar="B")
    _add_common(p)
    p.set_defaults(run=_cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.monotonic()
    try:
        rc = args.run(args)
    except _INPUT_ERRORS as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except ZimodelsError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    print(f"wall time: {time.monotonic() - t0:.2f}s")
    return rc


if __name__ == "__main__":
    sys.exit(main())
