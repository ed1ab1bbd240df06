"""Monte Carlo check of the truncated-SVD coefficient variance.

Compares the empirical spread of each fitted coefficient over many seeds with
the formula sum_i v_ji^2 / s_i^2 times the residual variance, and with the
heteroscedasticity-robust sandwich estimate.
"""

import argparse
import warnings
from pathlib import Path

import numpy as np

from su11tomo.config import ExperimentConfig
from su11tomo.experiment import run_ensemble


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", type=Path)
    ap.add_argument("--n-seeds", type=int, default=200)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    summary = run_ensemble(cfg, args.n_seeds, workers=args.workers, write=False)
    print(f"{'k':>3}  empirical/formula            empirical/sandwich")
    for k, band in summary["bands"].items():
        emp = np.array(band["empirical_variance"])
        f = np.round(emp / np.array(band["formula_variance"]), 2)
        r = np.round(emp / np.array(band["robust_variance"]), 2)
        print(f"{k:>3}  {f.tolist()}  {r.tolist()}")


if __name__ == "__main__":
    main()
