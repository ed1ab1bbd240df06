import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .diagnostics import DegreePolicy
from .experiment import (
    reconstruction_config,
    report_payload,
    run_ensemble,
    run_experiment,
    simulate_record,
    write_json,
)
from .inversion import reconstruct
from .simulation import MeasurementRecord, NoiseMode
from .transforms import moment_table

NOISE_CHOICES = [m.value for m in NoiseMode]


def parse_degree_policy(text: str):
    """``auto`` | ``paper`` | ``fixed:<d0,d1,...>`` (degree per k starting at 0)."""
    if text in ("auto", "paper"):
        return DegreePolicy(text), {}
    if text.startswith("fixed:"):
        parts = [p for p in text[len("fixed:"):].split(",") if p.strip()]
        try:
            degrees = {k: int(p) for k, p in enumerate(parts)}
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad degree list in {text!r}") from None
        return DegreePolicy.USER_FIXED, degrees
    raise argparse.ArgumentTypeError(f"unknown degree policy {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config JSON")
    common.add_argument("--seed", type=int, help="noise seed (overrides config)")
    common.add_argument("--output", type=Path, help="output directory (overrides config)")
    common.add_argument("--assume-symmetry", action="store_true",
                        help="fit only k=0,1 and fill the rest (real q=0 Perelomov states)")
    common.add_argument("--noise-mode", choices=NOISE_CHOICES)
    common.add_argument("--threshold", type=float, help="singular-value cutoff")
    common.add_argument("--degree-policy", type=parse_degree_policy,
                        help="auto | paper | fixed:<d0,d1,...>")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="su11tomo",
        description="Simulate and invert SU(1,1) parametric-amplifier state reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="state -> measurement record")
    p = sub.add_parser("reconstruct", parents=[common], help="record -> reconstruction report")
    p.add_argument("record", type=Path)
    p = sub.add_parser("diagnose", parents=[common], help="record -> per-k diagnostics")
    p.add_argument("record", type=Path)
    sub.add_parser("run", parents=[common], help="full pipeline")
    p = sub.add_parser("ensemble", parents=[common], help="pipeline over many seeds")
    p.add_argument("--n-seeds", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    return parser


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    noise = cfg.noise
    if args.seed is not None:
        noise = replace(noise, seed=args.seed)
    if args.noise_mode is not None:
        noise = replace(noise, mode=NoiseMode(args.noise_mode))
    cfg = replace(cfg, noise=noise)
    if args.output is not None:
        cfg = replace(cfg, output_dir=str(args.output))
    if args.threshold is not None:
        cfg = replace(cfg, threshold=args.threshold)
    if args.degree_policy is not None:
        policy, degrees = args.degree_policy
        cfg = replace(cfg, degree_policy=policy, fixed_degrees=degrees)
    if args.assume_symmetry:
        cfg = replace(cfg, assume_symmetry=True)
    return cfg


def _record_config(cfg: ExperimentConfig, record: MeasurementRecord):
    rcfg = reconstruction_config(cfg)
    if cfg.assume_symmetry and rcfg.symmetry is None and record.q == 0:
        # Without the source state we take the flag at face value.
        rcfg.symmetry = "perelomov"
    return rcfg


def cmd_simulate(cfg: ExperimentConfig, args) -> None:
    rho, record = simulate_record(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "exact_rho.json", rho.to_dict())
    record.save(out / "record.json")
    record.to_csv(out / "record.csv")
    print(out / "record.json")


def cmd_reconstruct(cfg: ExperimentConfig, args) -> None:
    record = MeasurementRecord.load(args.record)
    report = reconstruct(record, _record_config(cfg, record))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report_payload(report))
    print(out / "report.json")


def cmd_diagnose(cfg: ExperimentConfig, args) -> None:
    record = MeasurementRecord.load(args.record)
    rcfg = _record_config(cfg, record)
    report = reconstruct(record, rcfg)
    print(f"{'k':>3} {'deg':>4} {'kept':>5} {'S_c by degree':<40} S(m)")
    for k in sorted(report.diagnostics):
        d = report.diagnostics[k]
        sc = " ".join(str(int(c)) for c in d.sign_changes)
        ss = " ".join(f"{v:.2e}" for v in d.seq_sum_squares)
        kept = report.per_k[k].retained_count
        print(f"{k:>3} {report.degrees_used[k]:>4} {kept:>5} {sc:<40} {ss}")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "diagnostics.json",
               {str(k): d.to_dict() for k, d in sorted(report.diagnostics.items())})
    for k in rcfg.k_values():
        moment_table(record, k).to_csv(out / f"moments_k{k:02d}.csv")


def cmd_run(cfg: ExperimentConfig, args) -> None:
    report = run_experiment(cfg)
    rho = cfg.state.build(cfg.n_max)
    err = np.max(np.abs(report.rho_hat.elements - rho.elements))
    print(f"max |rho_hat - rho| = {err:.4g}; outputs in {cfg.output_dir}")


def cmd_ensemble(cfg: ExperimentConfig, args) -> None:
    summary = run_ensemble(cfg, args.n_seeds, workers=args.workers)
    errs = np.array(summary["max_abs_error_per_seed"])
    print(f"{args.n_seeds} seeds: median max error {np.median(errs):.4g}, "
          f"fraction < 0.1: {np.mean(errs < 0.1):.2f}")


COMMANDS = {
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "diagnose": cmd_diagnose,
    "run": cmd_run,
    "ensemble": cmd_ensemble,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args)
        COMMANDS[args.command](cfg, args)
    except Exception as exc:  # noqa: BLE001 - single exit path for the CLI
        msg = json.dumps(str(exc))
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
