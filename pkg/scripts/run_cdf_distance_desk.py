#!/usr/bin/env python3
"""How well a flexible fitted model approximates a simpler truth, measured
by the sup distance between the true CDF and the fitted CDF."""

import argparse
import os

from zimodels import ModelParams, parse_spec_token
from zimodels.bench import StudyConfig, cdf_approximation_study

SETTINGS = [
    ("zip", ModelParams(0.3, [10.0]), "zinb"),
    ("zibnb", ModelParams(0.3, [15.0, 19.0, 10.0]), "zibb"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[30, 50, 100, 200, 500, 1000, 5000])
    ap.add_argument("--seed", type=int, default=111)
    ap.add_argument("--out-dir", default="bench-out")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    for j, (token, truth, test) in enumerate(SETTINGS):
        cfg = StudyConfig(
            true_spec=parse_spec_token(token),
            true_params=truth,
            test_specs=[parse_spec_token(test)],
            sample_sizes=args.sizes,
            replications=1,
            B=1,
            seed=args.seed + j,
        )
        res = cdf_approximation_study(cfg)
        base = os.path.join(args.out_dir, f"cdf_distance_{token}_to_{test}")
        with open(base + ".csv", "w") as fh:
            fh.write(res.to_csv())
        with open(base + ".json", "w") as fh:
            fh.write(res.to_json())
        for row in res.rows:
            print(f"{token} -> {row['fitted']} N={row['n']}: sup distance {row['sup_distance']:.4f}")


if __name__ == "__main__":
    main()
