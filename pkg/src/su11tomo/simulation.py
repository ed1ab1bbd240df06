"""Measurement records on the (y, phi) probe grid, exact or with shot noise.

Noise draws come from numpy's PCG64 bit generator (``numpy.random.default_rng``),
drawn as whole ``(n_y, n_phi)`` arrays in C order so a seed fixes every value
regardless of how the caller slices the work afterwards.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .forward import q_values
from .states import DensityMatrix


class NoiseMode(str, enum.Enum):
    EXACT = "exact"
    PAPER_LITERAL = "paper"
    PHYSICAL_SHOT = "shot"
    PAPER_MOMENTS = "moments"


@dataclass(frozen=True)
class GridSpec:
    y_min: float = 0.1
    y_max: float = 0.9
    n_y: int = 101
    n_phi: int = 20

    def __post_init__(self):
        if not 0 < self.y_min < self.y_max < 1:
            raise ValueError(f"need 0 < y_min < y_max < 1, got {self.y_min}, {self.y_max}")
        if self.n_y < 2 or self.n_phi < 1:
            raise ValueError(f"need n_y >= 2 and n_phi >= 1, got {self.n_y}, {self.n_phi}")

    @property
    def y_values(self) -> np.ndarray:
        i = np.arange(self.n_y)
        return self.y_min + (self.y_max - self.y_min) * i / (self.n_y - 1)

    @property
    def phi_values(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.n_phi) / self.n_phi

    def to_dict(self) -> dict:
        return {"y_min": self.y_min, "y_max": self.y_max, "n_y": self.n_y, "n_phi": self.n_phi}


@dataclass(frozen=True)
class NoiseSpec:
    mode: NoiseMode = NoiseMode.PHYSICAL_SHOT
    tau: int = 20000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict:
        return {"mode": self.mode.value, "tau": self.tau, "seed": self.seed}


EXACT = NoiseSpec(mode=NoiseMode.EXACT)


@dataclass(frozen=True)
class MeasurementRecord:
    q: int
    grid: GridSpec
    noise: NoiseSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_y, self.grid.n_phi):
            raise ValueError(f"values shape {v.shape} does not match grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("measurement values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "grid": self.grid.to_dict(),
            "noise": self.noise.to_dict(),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MeasurementRecord":
        return cls(
            q=int(data["q"]),
            grid=GridSpec(**data["grid"]),
            noise=NoiseSpec(**data["noise"]),
            values=np.asarray(data["values"], dtype=float),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "MeasurementRecord":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_csv(self, path) -> None:
        ys, ps = self.grid.y_values, self.grid.phi_values
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y", "phi", "value"])
            for i, y in enumerate(ys):
                for s, p in enumerate(ps):
                    w.writerow([repr(float(y)), repr(float(p)), repr(float(self.values[i, s]))])


def sample_exact(rho: DensityMatrix, q: int, grid: GridSpec = GridSpec()) -> MeasurementRecord:
    if q != rho.q:
        raise ValueError(f"record charge q={q} does not match rho.q={rho.q}")
    yy, pp = np.meshgrid(grid.y_values, grid.phi_values, indexing="ij")
    vals = q_values(rho, yy.ravel(), pp.ravel()).reshape(yy.shape)
    return MeasurementRecord(q=q, grid=grid, noise=EXACT, values=vals)


def add_noise(record: MeasurementRecord, noise: NoiseSpec) -> MeasurementRecord:
    """Emulate ``noise.tau`` trials per probe setting on an exact record.

    ``shot``: Gaussian limit of binomial counting, clamped to [0, 1].
    ``paper``: ``v + R g sqrt(|v|/tau)`` with R uniform on [-1, 1] and g
    standard normal, unclamped.
    ``moments``: values stay exact; the same ``R g sqrt(|f|/tau)`` term is
    added later to each moment table ``f_k`` (see ``transforms.perturb_moments``).
    """
    if record.noise.mode is not NoiseMode.EXACT:
        raise ValueError("add_noise expects an exact record")
    if noise.mode in (NoiseMode.EXACT, NoiseMode.PAPER_MOMENTS):
        return replace(record, noise=noise)
    rng = np.random.default_rng(noise.seed)
    v = record.values
    g = rng.standard_normal(v.shape)
    if noise.mode is NoiseMode.PHYSICAL_SHOT:
        var = np.clip(v * (1 - v), 0.0, None) / noise.tau
        out = np.clip(v + g * np.sqrt(var), 0.0, 1.0)
    else:
        r = rng.uniform(-1.0, 1.0, v.shape)
        out = v + r * g * np.sqrt(np.abs(v) / noise.tau)
    return MeasurementRecord(q=record.q, grid=record.grid, noise=noise, values=out)


def simulate(rho: DensityMatrix, grid: GridSpec = GridSpec(), noise: NoiseSpec = EXACT):
    return add_noise(sample_exact(rho, rho.q, grid), noise)
