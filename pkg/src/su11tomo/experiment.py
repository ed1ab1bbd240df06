"""Simulate -> reconstruct -> report pipeline and seed ensembles."""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .inversion import ReconstructionConfig, ReconstructionReport, reconstruct
from .simulation import MeasurementRecord, add_noise, sample_exact
from .states import DensityMatrix
from .transforms import moment_table

log = logging.getLogger(__name__)


def _jsonable(obj):
    # Strict JSON: non-finite floats become null.
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def write_json(path, payload) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(_jsonable(payload), indent=1, allow_nan=False) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_matrix_csv(path, matrix: np.ndarray) -> None:
    """Figure-data table: one ``m, n, value, imag`` row per element."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "n", "value", "imag"])
        for (m, n), v in np.ndenumerate(matrix):
            w.writerow([m, n, repr(float(v.real)), repr(float(v.imag))])


def reconstruction_config(config: ExperimentConfig) -> ReconstructionConfig:
    symmetry = None
    if config.assume_symmetry:
        if config.state.supports_perelomov_symmetry():
            symmetry = "perelomov"
        else:
            warnings.warn("--assume-symmetry ignored: state is not a real q=0 Perelomov state")
    return ReconstructionConfig(
        n_max=config.n_max,
        threshold=config.threshold,
        relative_threshold=config.relative_threshold,
        degree_policy=config.degree_policy,
        fixed_degrees=config.fixed_degrees,
        symmetry=symmetry,
    )


def simulate_record(config: ExperimentConfig) -> tuple[DensityMatrix, MeasurementRecord]:
    rho = config.state.build(config.n_max)
    exact = sample_exact(rho, rho.q, config.grid)
    return rho, add_noise(exact, config.noise)


def report_payload(report: ReconstructionReport, rho: DensityMatrix | None = None) -> dict:
    payload = report.to_dict()
    for k, entry in payload["per_k"].items():
        entry["below_noise_floor"] = report.below_noise_floor(int(k))
    if rho is not None:
        diff = report.rho_hat.elements - rho.elements
        payload["max_abs_error"] = float(np.max(np.abs(diff)))
    return payload


def run_experiment(config: ExperimentConfig, write: bool = True) -> ReconstructionReport:
    """Full pipeline; with ``write`` the artifacts land in ``config.output_dir``."""
    rho, record = simulate_record(config)
    rcfg = reconstruction_config(config)
    report = reconstruct(record, rcfg)
    for k, msg in report.failures.items():
        log.warning("band k=%d failed: %s", k, msg)
    if not write:
        return report
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    write_json(out / "config.json", config.to_dict())
    write_json(out / "exact_rho.json", rho.to_dict())
    write_json(out / "record.json", record.to_dict())
    record.to_csv(out / "record.csv")
    for k in rcfg.k_values():
        moment_table(record, k).to_csv(out / f"moments_k{k:02d}.csv")
    write_json(out / "report.json", report_payload(report, rho))
    write_matrix_csv(out / "fig_exact.csv", rho.elements)
    write_matrix_csv(out / "fig_reconstructed.csv", report.rho_hat.elements)
    write_matrix_csv(out / "fig_difference.csv", rho.elements - report.rho_hat.elements)
    return report


def _seed_config(config: ExperimentConfig, i: int) -> ExperimentConfig:
    # The grid warning was already raised when ``config`` was built.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return replace(config, noise=replace(config.noise, seed=config.noise.seed + i))


def _one_seed(args):
    config, i = args
    cfg = _seed_config(config, i)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = run_experiment(cfg, write=False)
    return i, report


def run_ensemble(config: ExperimentConfig, n_seeds: int, workers: int = 1, write: bool = True) -> dict:
    """Repeat the pipeline over seeds ``seed .. seed + n_seeds - 1``.

    Returns per-element mean and RMS errors plus, for every band, the empirical
    coefficient variance next to the SVD-formula and sandwich predictions.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    rho = config.state.build(config.n_max)
    jobs = [(config, i) for i in range(n_seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_one_seed, jobs))
    else:
        results = dict(map(_one_seed, jobs))
    reports = [results[i] for i in range(n_seeds)]

    errors = np.array([r.rho_hat.elements - rho.elements for r in reports])
    max_err = np.max(np.abs(errors), axis=(1, 2))
    bands = {}
    for k in sorted(reports[0].per_k):
        sols = [r.per_k[k] for r in reports if k in r.per_k]
        coefs = np.array([s.coefficients for s in sols])
        ddof = 1 if len(sols) > 1 else 0
        empirical = np.var(coefs.real, axis=0, ddof=ddof) + np.var(coefs.imag, axis=0, ddof=ddof)
        formula = np.mean([s.variances * s.residual_variance for s in sols], axis=0)
        robust = np.mean([s.robust_variances for s in sols], axis=0)
        bands[str(k)] = {
            "empirical_variance": empirical.tolist(),
            "formula_variance": formula.tolist(),
            "robust_variance": robust.tolist(),
            "retained_count": sols[0].retained_count,
        }
    summary = {
        "n_seeds": n_seeds,
        "first_seed": config.noise.seed,
        "noise_mode": config.noise.mode.value,
        "mean_error_re": errors.mean(axis=0).real.tolist(),
        "mean_error_im": errors.mean(axis=0).imag.tolist(),
        "rms_error": np.sqrt(np.mean(np.abs(errors) ** 2, axis=0)).tolist(),
        "max_abs_error_per_seed": max_err.tolist(),
        "median_max_abs_error": float(np.median(max_err)),
        "spread": float(np.max(np.abs(errors - errors[0]))),
        "bands": bands,
    }
    if write:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "ensemble.json", summary)
    return summary
