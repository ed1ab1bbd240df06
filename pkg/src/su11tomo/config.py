"""Dataclass configs for states and end-to-end experiments (JSON-backed)."""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import DegreePolicy
from .simulation import GridSpec, NoiseMode, NoiseSpec
from .states import (
    DensityMatrix,
    state_custom,
    state_pair_coherent,
    state_perelomov,
    state_superposition_pair,
)


class StateFamily(str, enum.Enum):
    PAIR_COHERENT = "pair_coherent"
    PERELOMOV = "perelomov"
    SUPERPOSITION_PAIR = "superposition_pair"
    CUSTOM = "custom"


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


@dataclass
class StateParams:
    family: StateFamily = StateFamily.PAIR_COHERENT
    xi: complex = 3.0
    eta: complex = 0.6
    charge: int = 0
    custom_coeffs: list[complex] | None = None

    def __post_init__(self):
        self.family = StateFamily(self.family)
        self.xi = _complex(self.xi)
        self.eta = _complex(self.eta)
        if self.custom_coeffs is not None:
            self.custom_coeffs = [_complex(c) for c in self.custom_coeffs]
        if self.family is StateFamily.PERELOMOV and not abs(self.eta) < 1:
            raise ValueError("Perelomov state needs |eta| < 1")
        if self.family is StateFamily.CUSTOM and not self.custom_coeffs:
            raise ValueError("custom state needs custom_coeffs")

    def build(self, n_max: int) -> DensityMatrix:
        fam = self.family
        if fam is StateFamily.PAIR_COHERENT:
            return state_pair_coherent(self.xi, self.charge, n_max)
        if fam is StateFamily.PERELOMOV:
            return state_perelomov(self.eta, self.charge, n_max)
        if fam is StateFamily.SUPERPOSITION_PAIR:
            return state_superposition_pair(self.xi, self.charge, n_max)
        c = np.zeros(n_max + 1, dtype=complex)
        given = np.asarray(self.custom_coeffs, dtype=complex)[: n_max + 1]
        c[: given.size] = given
        return state_custom(c, self.charge, normalize=False)

    def supports_perelomov_symmetry(self) -> bool:
        return self.family is StateFamily.PERELOMOV and self.charge == 0 and self.eta.imag == 0

    def to_dict(self) -> dict:
        d = {
            "family": self.family.value,
            "xi": [self.xi.real, self.xi.imag],
            "eta": [self.eta.real, self.eta.imag],
            "charge": self.charge,
        }
        if self.custom_coeffs is not None:
            d["custom_coeffs"] = [[c.real, c.imag] for c in self.custom_coeffs]
        return d


@dataclass
class ExperimentConfig:
    state: StateParams = field(default_factory=StateParams)
    n_max: int = 10
    grid: GridSpec = field(default_factory=GridSpec)
    # Noise on f_k keeps the high bands resolvable at tau=20000.
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(mode=NoiseMode.PAPER_MOMENTS))
    threshold: float = 0.1
    relative_threshold: bool = False
    degree_policy: DegreePolicy = DegreePolicy.PAPER_FIXED
    fixed_degrees: dict[int, int] = field(default_factory=dict)
    assume_symmetry: bool = False
    output_dir: str = "output"

    def __post_init__(self):
        self.degree_policy = DegreePolicy(self.degree_policy)
        self.fixed_degrees = {int(k): int(v) for k, v in self.fixed_degrees.items()}
        if self.grid.n_phi < 2 * self.n_max + 1:
            warnings.warn(
                f"n_phi={self.grid.n_phi} < 2*n_max+1={2 * self.n_max + 1}: "
                "phase discretization may alias the highest bands",
                stacklevel=3,
            )

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "state" in data:
            data["state"] = StateParams(**data["state"])
        if "grid" in data:
            data["grid"] = GridSpec(**data["grid"])
        if "noise" in data:
            data["noise"] = NoiseSpec(**data["noise"])
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "state": self.state.to_dict(),
            "n_max": self.n_max,
            "grid": asdict(self.grid),
            "noise": self.noise.to_dict(),
            "threshold": self.threshold,
            "relative_threshold": self.relative_threshold,
            "degree_policy": self.degree_policy.value,
            "fixed_degrees": {str(k): v for k, v in sorted(self.fixed_degrees.items())},
            "assume_symmetry": self.assume_symmetry,
            "output_dir": self.output_dir,
        }
