"""Sequential sums of squares and sign-change counts for every band of one noisy record.

Writes diagnostics.csv (k, degree, S, sign_changes) next to the printed table.
"""

import argparse
import csv
import warnings
from pathlib import Path

from su11tomo.config import ExperimentConfig
from su11tomo.diagnostics import diagnose
from su11tomo.experiment import simulate_record
from su11tomo.transforms import moment_table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", type=Path)
    ap.add_argument("--output", type=Path, default=Path("output/diagnostics"))
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    _, record = simulate_record(cfg)
    args.output.mkdir(parents=True, exist_ok=True)
    with open(args.output / "diagnostics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "degree", "S", "sign_changes"])
        for k in range(cfg.n_max + 1):
            d = diagnose(moment_table(record, k), cfg.n_max, "auto")
            for deg, sc in enumerate(d.sign_changes):
                s = d.seq_sum_squares[deg - 1] if deg else ""
                w.writerow([k, deg, s, int(sc)])
            print(f"k={k:2d} auto degree {d.selected_degree}  S_c {d.sign_changes.tolist()}")


if __name__ == "__main__":
    main()
