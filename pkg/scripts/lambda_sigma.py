"""Fitted Gaussian width against lambda, with the lambda / sigma^4 ratio and the continuum limit."""

import numpy as np
from _common import write_csv

from resistive_sift.kernels import REFERENCE_LAMBDAS, lambda_sigma_curve


def main():
    lams = sorted(set(REFERENCE_LAMBDAS) | {1.0, 2.0, 8.0, 16.0, 64.0, 256.0, 1000.0, 4000.0})
    rows = lambda_sigma_curve(lams)
    write_csv("lambda_sigma.csv", ["lambda", "sigma_star", "lambda_over_sigma4"], rows)
    for lam, sigma, ratio in rows:
        print(f"lambda {lam:7g}  sigma* {sigma:7.4f}  lambda/sigma^4 {ratio:.4f}")
    work = np.array([r[2] for r in rows if r[0] in REFERENCE_LAMBDAS])
    print(f"working set: lambda/sigma^4 spread {100 * np.abs(work / work.mean() - 1).max():.1f}% of mean")
    x = np.log([r[0] for r in rows])
    y = np.log([r[1] for r in rows])
    print(f"log-log slope of sigma on lambda over all rows: {np.polyfit(x, y, 1)[0]:.4f} (1/4 = 0.25)")


if __name__ == "__main__":
    main()
