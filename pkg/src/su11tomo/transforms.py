"""Phase Fourier components of a record and their polynomial moments."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .simulation import MeasurementRecord, NoiseMode, NoiseSpec


@dataclass(frozen=True)
class MomentTable:
    q: int
    k: int
    y_values: np.ndarray = field(repr=False)
    f_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        y = np.array(self.y_values, dtype=float)
        f = np.array(self.f_values, dtype=complex)
        if y.shape != f.shape or y.ndim != 1:
            raise ValueError("y_values and f_values must be 1-d with equal length")
        if np.any(np.diff(y) <= 0):
            raise ValueError("y_values must be strictly increasing")
        if y.size and (y[0] <= 0 or y[-1] >= 1):
            raise ValueError("y_values must lie in (0, 1)")
        y.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "y_values", y)
        object.__setattr__(self, "f_values", f)

    def __len__(self):
        return self.y_values.size

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# q={self.q} k={self.k}\n")
            w = csv.writer(fh)
            w.writerow(["y", "re_f", "im_f"])
            for y, f in zip(self.y_values, self.f_values):
                w.writerow([repr(float(y)), repr(float(f.real)), repr(float(f.imag))])


def dft_phase(record: MeasurementRecord, k: int) -> np.ndarray:
    """``g_k(y_i) = (1/n_phi) sum_s exp(2 pi i k s / n_phi) Q(y_i, phi_s)``."""
    n_phi = record.grid.n_phi
    s = np.arange(n_phi)
    kernel = np.exp(2j * math.pi * k * s / n_phi)
    return record.values @ kernel / n_phi


def scale_to_moments(g, y_values, q: int, k: int) -> MomentTable:
    y = np.asarray(y_values, dtype=float)
    if np.any((y <= 0) | (y >= 1)):
        raise ValueError("y must lie strictly inside (0, 1)")
    f = np.asarray(g, dtype=complex) * y ** (-k / 2) / (1 - y) ** (q + 1)
    return MomentTable(q=q, k=k, y_values=y, f_values=f)


def moments_to_g(table: MomentTable) -> np.ndarray:
    y = table.y_values
    return table.f_values * y ** (table.k / 2) * (1 - y) ** (table.q + 1)


def perturb_moments(table: MomentTable, noise: NoiseSpec) -> MomentTable:
    """Add ``R g sqrt(|f|/tau)`` to the real and imaginary parts of ``f_k``.

    Draws for table k come from ``default_rng([seed, k])``, so each band's
    noise is fixed by (seed, k) alone.
    """
    rng = np.random.default_rng([noise.seed, table.k])
    shape = table.f_values.shape

    def jitter(x):
        r = rng.uniform(-1.0, 1.0, shape)
        g = rng.standard_normal(shape)
        return x + r * g * np.sqrt(np.abs(x) / noise.tau)

    f = table.f_values
    return MomentTable(table.q, table.k, table.y_values, jitter(f.real) + 1j * jitter(f.imag))


def moment_table(record: MeasurementRecord, k: int) -> MomentTable:
    """Moment table for index k, with moment-level noise applied if the record asks for it."""
    table = scale_to_moments(dft_phase(record, k), record.grid.y_values, record.q, k)
    if record.noise.mode is NoiseMode.PAPER_MOMENTS:
        table = perturb_moments(table, record.noise)
    return table


@lru_cache(maxsize=None)
def series_coefficient(m: int, k: int, q: int) -> float:
    """``B_mk(q) = (1/q!) sqrt((m+k+q)! (m+q)! / (m! (m+k)!))``."""
    if min(m, k, q) < 0:
        raise ValueError("m, k, q must be nonnegative")
    lg = math.lgamma
    log_b = 0.5 * (lg(m + k + q + 1) + lg(m + q + 1) - lg(m + 1) - lg(m + k + 1)) - lg(q + 1)
    return math.exp(log_b)


def series_coefficients(n_terms: int, k: int, q: int) -> np.ndarray:
    return np.array([series_coefficient(m, k, q) for m in range(n_terms)])
