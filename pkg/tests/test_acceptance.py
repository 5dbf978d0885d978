"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`.  Several criteria are
long simulation studies; the full suite takes on the order of an hour on
two cores.  Every randomized criterion runs at a fixed seed, mirroring
how the reference results report a single realization.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import (
    CONTINUOUS_FAMILIES,
    DISCRETE_FAMILIES,
    fd_gradient,
    grid_max_nd,
    mc_fisher_oracle,
    profile_phi_zi,
    random_theta,
)
from zimodels import (
    Family,
    ModelKind,
    ModelParams,
    ModelSpec,
    MonteCarloConfig,
    confidence_intervals,
    fisher_hurdle,
    fisher_zazi,
    fisher_zero_inflated,
    fit_model,
    inverse_fisher_zi,
    ks_statistic,
    log_likelihood,
    make_cdf,
    model_log_density,
    parse_spec_token,
    sample_model,
    zi_to_za,
)
from zimodels import families as fam
from zimodels import test_zero_alteration as zero_alteration_verdict
from zimodels.bench import (
    StudyConfig,
    cdf_approximation_study,
    mle_convergence_study,
    power_study,
    type_one_error_study,
)
from zimodels.mle import OptimizerConfig
from zimodels.seeding import substream

pytestmark = pytest.mark.acceptance

THREADS = 2


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")


# ---------------------------------------------------------------------------


def test_criterion_01_gradient_correctness():
    """Analytic gradients match central finite differences (50 points/family)."""
    rng = substream(101)
    worst = 0.0
    for family in DISCRETE_FAMILIES + CONTINUOUS_FAMILIES:
        checked = 0
        while checked < 50:
            theta = random_theta(family, rng)
            y = float(fam.sample_baseline(family, theta, 1, rng)[0])
            if y == 0.0 and family in (Family.LOG_NORMAL, Family.HALF_NORMAL, Family.EXPONENTIAL):
                continue
            checked += 1
            g = fam.grad_log_density(family, theta, y)
            fd = fd_gradient(lambda t: fam.log_density(family, t, y), theta)
            worst = max(worst, float(np.max(np.abs(g - fd))))
            if family in DISCRETE_FAMILIES:
                g0 = fam.grad_log_zero_prob(family, theta)
                fd0 = fd_gradient(lambda t: fam.log_zero_prob(family, t), theta)
                worst = max(worst, float(np.max(np.abs(g0 - fd0))))
    ok = worst <= 1e-4
    report("01-gradients", ok, f"worst |analytic - fd| = {worst:.2e} <= 1e-4")
    assert ok


_C2_SETTINGS = [
    ("geometric", ModelKind.HURDLE),
    ("poisson", ModelKind.HURDLE),
    ("nb", ModelKind.HURDLE),
    ("bb", ModelKind.HURDLE),
    ("bnb", ModelKind.HURDLE),
    ("geometric", ModelKind.ZERO_INFLATED),
    ("poisson", ModelKind.ZERO_INFLATED),
    ("nb", ModelKind.ZERO_INFLATED),
    ("bb", ModelKind.ZERO_INFLATED),
    ("bnb", ModelKind.ZERO_INFLATED),
    ("normal", ModelKind.HURDLE),
    ("lognormal", ModelKind.HURDLE),
    ("halfnormal", ModelKind.HURDLE),
    ("exponential", ModelKind.HURDLE),
]


def test_criterion_02_fisher_oracle_equivalence():
    """Analytic information matches the MC -E[Hessian] oracle, 3 points each."""
    rng = substream(102)
    mc = MonteCarloConfig(n_draws=400_000, seed=1021)
    failures = []
    worst = 0.0
    for famname, kind in _C2_SETTINGS:
        family = Family(famname)
        spec = ModelSpec(family, kind)
        for k in range(3):
            theta = random_theta(family, rng, integer_size=True)
            phi = float(rng.uniform(0.2, 0.6))
            params = ModelParams(phi, theta)
            if not spec.is_discrete:
                F = fisher_zazi(spec, params).matrix
            elif kind is ModelKind.HURDLE:
                F = fisher_hurdle(spec, params, mc).matrix
            else:
                F = fisher_zero_inflated(spec, params, mc).matrix
            M, se = mc_fisher_oracle(
                spec, params, n_draws=1_000_000, seed=1000 + k, batches=10
            )
            # the oracle carries Monte Carlo noise of its own (relevant for
            # structurally-zero entries of continuous models), so the floor
            # is widened by three oracle standard errors
            gap = np.abs(F - M)
            tol = np.maximum(0.05 * np.abs(M), 1e-3 + 3.0 * se)
            score = float(np.max(gap / tol))
            worst = max(worst, score)
            if not np.all(gap <= tol):
                failures.append((famname, kind.value, k, score))
    ok = not failures
    report("02-fisher-oracle", ok, f"max gap/tolerance = {worst:.3f}; failures: {failures}")
    assert ok


def test_criterion_03_closed_form_inverse():
    """Closed-form ZI inverse times the ZI information is the identity."""
    rng = substream(103)
    worst = 0.0
    for family in DISCRETE_FAMILIES:
        spec = ModelSpec(family, ModelKind.ZERO_INFLATED)
        for k in range(20):
            theta = random_theta(family, rng, integer_size=True)
            params = ModelParams(float(rng.uniform(0.1, 0.8)), theta)
            mc = MonteCarloConfig(n_draws=50_000, seed=2000 + k)
            F = fisher_zero_inflated(spec, params, mc).matrix
            inv = inverse_fisher_zi(spec, params, mc).matrix
            worst = max(worst, float(np.max(np.abs(F @ inv - np.eye(len(F))))))
    ok = worst <= 1e-8
    report("03-theorem1-inverse", ok, f"max |F Finv - I| = {worst:.2e} <= 1e-8")
    assert ok


def test_criterion_04_weight_map_equivalence():
    """ZI and hurdle densities coincide after the weight map, pointwise."""
    rng = substream(104)
    worst = 0.0
    for family in DISCRETE_FAMILIES:
        zi = ModelSpec(family, ModelKind.ZERO_INFLATED)
        za = ModelSpec(family, ModelKind.HURDLE)
        for _ in range(20):
            theta = random_theta(family, rng, integer_size=True)
            phi_zi = float(rng.uniform(0.02, 0.95))
            phi_za = zi_to_za(family, phi_zi, theta)
            pmf = fam.pmf_table(family, theta, tail_eps=1e-9)
            ys = np.arange(len(pmf), dtype=float)
            d1 = model_log_density(zi, ModelParams(phi_zi, theta), ys)
            d2 = model_log_density(za, ModelParams(phi_za, theta), ys)
            worst = max(worst, float(np.max(np.abs(d1 - d2))))
    ok = worst <= 1e-12
    report("04-theorem3-equivalence", ok, f"max |log f_zi - log f_za| = {worst:.2e} <= 1e-12")
    assert ok


def test_criterion_05_mle_exactness():
    """Hurdle phi is the exact zero fraction; grid search never beats the
    fitter by more than 1e-3 on small datasets."""
    rng = substream(105)
    # part 1: exact phi on 100 random datasets
    exact = True
    for _ in range(100):
        n = int(rng.integers(10, 80))
        data = fam.sample_baseline(Family.POISSON, [2.0], n, rng)
        if not np.any(data != 0):
            continue
        fit = fit_model(ModelSpec(Family.POISSON, ModelKind.HURDLE), data)
        m = int((data != 0).sum())
        exact &= fit.params_hat.phi == (n - m) / n

    # part 2: grid-search oracle comparison, 30 datasets per discrete family
    worst_gap = -np.inf
    for family in DISCRETE_FAMILIES:
        for k in range(30):
            kind = ModelKind.HURDLE if k % 2 == 0 else ModelKind.ZERO_INFLATED
            spec = ModelSpec(family, kind)
            theta = random_theta(family, rng, integer_size=True)
            data = sample_model(spec, ModelParams(0.3, theta), 50, rng)
            if not np.any(data != 0):
                continue
            fit = fit_model(spec, data)
            n, m = len(data), int((data != 0).sum())
            maxy = data.max()

            def profile_ll(pts):
                out = np.empty(len(pts))
                for i, th in enumerate(pts):
                    try:
                        fam.validate_params(family, th)
                    except Exception:
                        out[i] = -np.inf
                        continue
                    if family is Family.BETA_BINOMIAL and th[0] < maxy:
                        out[i] = -np.inf
                        continue
                    p0 = fam.zero_prob(family, th, validate=False)
                    phi = profile_phi_zi(p0, n, m) if kind is ModelKind.ZERO_INFLATED else (n - m) / n
                    out[i] = log_likelihood(spec, ModelParams(phi, th), data)
                return out

            d = len(theta)
            if family is Family.GEOMETRIC:
                boxes = [(0.02, 0.98)]
            elif family is Family.POISSON:
                boxes = [(0.02, 2000.0)]
            elif family is Family.NEG_BINOMIAL:
                boxes = [(0.02, 2000.0), (0.02, 0.98)]
            elif family is Family.BETA_BINOMIAL:
                boxes = [(max(maxy, 0.011), 200.0), (0.05, 500.0), (0.05, 500.0)]
            else:
                boxes = [(0.02, 2000.0)] * 3
            _, best = grid_max_nd(profile_ll, boxes, n=10 if d == 3 else 60, rounds=4)
            worst_gap = max(worst_gap, best - fit.loglik)
    ok = exact and worst_gap <= 1e-3
    report(
        "05-mle-exactness",
        ok,
        f"phi exact on all datasets: {exact}; max (grid - fitter) loglik gap = {worst_gap:.2e} <= 1e-3",
    )
    assert ok


def _l1rd(fit, truth):
    est = np.concatenate([[fit.params_hat.phi], fit.params_hat.theta])
    tru = np.concatenate([[truth.phi], truth.theta])
    return float(np.sum(np.abs(est - tru) / np.abs(tru)))


def _convergence_run(token, truth, seed):
    cfg = StudyConfig(
        true_spec=parse_spec_token(token),
        true_params=truth,
        test_specs=[],
        sample_sizes=[10_000, 50_000, 200_000],
        replications=1,
        B=1,
        seed=seed,
        init=[6.0, 9.0, 4.0],  # reference protocol starting values
    )
    res = mle_convergence_study(cfg)
    return [r["l1rd"] for r in res.rows if r["mode"] == "integer"]


def test_criterion_06_bnbh_convergence():
    """Nested-sample integer-size fits for the BNB hurdle model.

    The size parameter of this family is weakly identified at these
    sample sizes (the smallest information eigenvalue is ~2e-5, so the
    total information along that direction is O(1) even at N=5e4); the
    stated bounds hold only on the minority of sample paths whose integer
    profile lands on the true size.  The run below is one fixed
    realization and is expected to fall short at the larger sizes."""
    vals = _convergence_run("bnbh", ModelParams(0.3, np.array([5.0, 8.0, 3.0])), seed=10)
    bounds = [0.6, 0.25, 0.15]
    ok_bounds = all(v <= b for v, b in zip(vals, bounds))
    ok_trend = all(vals[i + 1] <= vals[i] * 1.1 for i in range(2))
    ok = ok_bounds and ok_trend
    report(
        "06-bnbh-convergence",
        ok,
        f"integer-size L1RD over N=(1e4,5e4,2e5): {np.round(vals, 3).tolist()} vs bounds {bounds}",
    )
    assert ok


def test_criterion_06_bbh_convergence():
    """Nested-sample integer-size fits for the BB hurdle model."""
    vals = _convergence_run("bbh", ModelParams(0.6, np.array([5.0, 8.0, 3.0])), seed=10)
    bounds = [0.10, 0.10, 0.10]
    ok_bounds = all(v <= b for v, b in zip(vals, bounds))
    ok_trend = all(vals[i + 1] <= vals[i] * 1.1 for i in range(2))
    ok = ok_bounds and ok_trend
    report(
        "06-bbh-convergence",
        ok,
        f"integer-size L1RD over N=(1e4,5e4,2e5): {np.round(vals, 3).tolist()} vs bounds {bounds}",
    )
    assert ok


def test_criterion_07_ci_coverage():
    """95% Wald intervals cover the truth between 90% and 99% of the time."""
    spec = parse_spec_token("zinb")
    truth = ModelParams(0.4, np.array([10.0, 0.2]))
    names = ["phi", "r", "p"]
    truth_vec = {"phi": 0.4, "r": 10.0, "p": 0.2}
    covered = {k: 0 for k in names}
    runs = 0
    for i in range(200):
        data = sample_model(spec, truth, 1000, substream(107, i))
        try:
            fit = fit_model(spec, data)
            ci = confidence_intervals(fit, level=0.95, mc=MonteCarloConfig(50_000, 1070 + i))
        except Exception:
            continue
        runs += 1
        for k in names:
            lo, hi = ci.interval(k)
            covered[k] += lo <= truth_vec[k] <= hi
    rates = {k: covered[k] / runs for k in names}
    ok = all(0.90 <= r <= 0.99 for r in rates.values())
    report("07-ci-coverage", ok, f"coverage over {runs} runs: " + json.dumps(np.round(list(rates.values()), 3).tolist()))
    assert ok


def test_criterion_08_zero_alteration_verdicts():
    """Plain Poisson data reads 'neither'; inflated data reads 'inflated'."""
    ph = parse_spec_token("ph")
    neither = 0
    for i in range(100):
        data = sample_model(
            parse_spec_token("poisson"), ModelParams(0.0, [0.8]), 1000, substream(108, i)
        )
        fit = fit_model(ph, data)
        neither += zero_alteration_verdict(fit).verdict == "neither"
    inflated = 0
    for i in range(100):
        data = sample_model(parse_spec_token("zip"), ModelParams(0.3, [10.0]), 500, substream(118, i))
        fit = fit_model(ph, data)
        inflated += zero_alteration_verdict(fit).verdict == "inflated"
    ok = neither >= 90 and inflated >= 95
    report("08-zero-alteration", ok, f"neither {neither}/100 (need >=90), inflated {inflated}/100 (need >=95)")
    assert ok


_T1_SETTINGS = [
    ("zip", ModelParams(0.3, [10.0])),
    ("zinb", ModelParams(0.3, [5.0, 0.2])),
    ("zibnb", ModelParams(0.3, [3.0, 3.0, 5.0])),
    ("zibb", ModelParams(0.3, [5.0, 8.0, 3.0])),
]


def test_criterion_09_type_one_error():
    """Both bootstrap KS tests keep type-I error at or below 5%."""
    rates = {}
    ok = True
    for j, (token, truth) in enumerate(_T1_SETTINGS):
        cfg = StudyConfig(
            true_spec=parse_spec_token(token),
            true_params=truth,
            test_specs=[parse_spec_token(token)],
            sample_sizes=[200],
            replications=200,
            B=100,
            seed=1090 + j,
            threads=THREADS,
            algorithms=("A", "B"),
        )
        res = type_one_error_study(cfg)
        for row in res.rows:
            rates[f"{token}/{row['algorithm']}"] = row["rate"]
            ok &= row["rate"] is not None and row["rate"] <= 0.05
    report("09-type-one-error", ok, json.dumps(rates))
    assert ok


def _power(true_token, truth, test_token, seed):
    cfg = StudyConfig(
        true_spec=parse_spec_token(true_token),
        true_params=truth,
        test_specs=[parse_spec_token(test_token)],
        sample_sizes=[100],
        replications=200,
        B=100,
        seed=seed,
        threads=THREADS,
        algorithms=("A",),
    )
    res = power_study(cfg)
    return res.rows[0]["rate"]


def test_criterion_10_power_zip_vs_zibnb():
    rate = _power("zip", ModelParams(0.3, [10.0]), "zibnb", 1101)
    ok = rate is not None and rate >= 0.85
    report("10-power-zip-vs-zibnb", ok, f"rejection rate {rate} (need >= 0.85)")
    assert ok


def test_criterion_10_power_zibnb_vs_zip():
    rate = _power("zibnb", ModelParams(0.3, [3.0, 3.0, 5.0]), "zip", 1102)
    ok = rate is not None and rate >= 0.95
    report("10-power-zibnb-vs-zip", ok, f"rejection rate {rate} (need >= 0.95)")
    assert ok


def test_criterion_10_power_zibb_vs_zibnb():
    rate = _power("zibb", ModelParams(0.3, [5.0, 8.0, 3.0]), "zibnb", 1103)
    ok = rate is not None and rate >= 0.90
    report("10-power-zibb-vs-zibnb", ok, f"rejection rate {rate} (need >= 0.90)")
    assert ok


def test_criterion_11_cdf_approximation():
    """Fitted flexible models track the true CDF at N=5000."""
    cfg = StudyConfig(
        true_spec=parse_spec_token("zip"),
        true_params=ModelParams(0.3, [10.0]),
        test_specs=[parse_spec_token("zinb")],
        sample_sizes=[100, 1000, 5000],
        replications=1,
        B=1,
        seed=111,
    )
    res1 = cdf_approximation_study(cfg)
    d1 = [r["sup_distance"] for r in res1.rows]
    cfg2 = StudyConfig(
        true_spec=parse_spec_token("zibnb"),
        true_params=ModelParams(0.3, [15.0, 19.0, 10.0]),
        test_specs=[parse_spec_token("zibb")],
        sample_sizes=[100, 1000, 5000],
        replications=1,
        B=1,
        seed=112,
    )
    res2 = cdf_approximation_study(cfg2)
    d2 = [r["sup_distance"] for r in res2.rows]
    inversions = sum(1 for i in range(2) if d1[i + 1] > d1[i])
    ok = d1[-1] <= 0.03 and d2[-1] <= 0.03 and inversions <= 1
    report(
        "11-cdf-approximation",
        ok,
        f"zip->zinb distances {np.round(d1, 4).tolist()} (last <= 0.03, <=1 inversion); "
        f"zibnb->zibb distances {np.round(d2, 4).tolist()} (last <= 0.03)",
    )
    assert ok


def _dense_grid_sup(data, view, step):
    xs = np.sort(data)
    lo = min(xs.min(), view.jumps.min() if len(view.jumps) else xs.min()) - 1.0
    hi = max(xs.max(), view.jumps.max() if len(view.jumps) else xs.max()) + 1.0
    pts = np.unique(np.concatenate([np.arange(lo, hi, step), view.jumps, xs]))
    fn = np.searchsorted(xs, pts, side="right") / len(xs)
    return float(np.max(np.abs(fn - view.cdf(pts))))


def test_criterion_12_ks_statistic_oracle():
    """Jump-point sup equals the dense-grid brute-force sup to 1e-9.

    The grid (step 1e-4 between jump points) is exact for step CDFs; for a
    continuous-baseline model the grid can only approach the sup to within
    step * max density, which is checked as a two-sided bound."""
    rng = substream(112)
    worst = 0.0
    specs = [
        parse_spec_token("zip"),
        parse_spec_token("zigeom"),
        parse_spec_token("zinb"),
        parse_spec_token("ph"),
        parse_spec_token("zibb"),
    ]
    for k in range(50):
        spec = specs[k % len(specs)]
        theta = random_theta(spec.family, rng, integer_size=True)
        params = ModelParams(float(rng.uniform(0.1, 0.6)), theta)
        data_params = ModelParams(float(rng.uniform(0.1, 0.6)), random_theta(spec.family, rng, integer_size=True))
        data = sample_model(spec, data_params, 60, rng)
        view = make_cdf(spec, params)
        exact = ks_statistic(data, view)
        brute = _dense_grid_sup(data, view, 1e-4)
        worst = max(worst, abs(exact - brute))
    ok = worst <= 1e-9

    # continuous-baseline sanity: the exact sup dominates every grid value
    # and exceeds it by at most the grid resolution times the peak density
    cont_ok = True
    spec = parse_spec_token("ziexp")
    for k in range(10):
        lam = float(rng.uniform(0.3, 4.0))
        params = ModelParams(float(rng.uniform(0.1, 0.6)), [lam])
        data = sample_model(spec, ModelParams(0.3, [rng.uniform(0.3, 4.0)]), 60, rng)
        view = make_cdf(spec, params)
        exact = ks_statistic(data, view)
        brute = _dense_grid_sup(data, view, 1e-4)
        cont_ok &= brute - 1e-12 <= exact <= brute + 1e-4 * lam + 1e-12
    ok = ok and cont_ok
    report(
        "12-ks-oracle",
        ok,
        f"max |jump-point sup - dense-grid sup| = {worst:.2e} <= 1e-9 (step CDFs); "
        f"continuous bound ok: {cont_ok}",
    )
    assert ok


def test_criterion_13_cli_reproducibility(tmp_path):
    """Same seed, different --threads: byte-identical JSON reports."""
    data = sample_model(parse_spec_token("zip"), ModelParams(0.3, [10.0]), 150, substream(113))
    path = tmp_path / "data.csv"
    path.write_text("\n".join(str(int(v)) for v in data) + "\n")

    def run(threads, out):
        res = subprocess.run(
            [
                sys.executable, "-m", "zimodels.cli", "ks", str(path),
                "--model", "zip", "--bootstrap", "60", "--seed", "9",
                "--threads", str(threads), "--json", str(out),
            ],
            capture_output=True,
            text=True,
        )
        assert res.returncode == 0, res.stderr
        return out.read_bytes()

    b1 = run(1, tmp_path / "a.json")
    b2 = run(3, tmp_path / "b.json")
    ok = b1 == b2
    report("13-cli-reproducibility", ok, f"identical bytes: {ok} ({len(b1)} bytes)")
    assert ok
