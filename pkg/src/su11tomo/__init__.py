"""Reconstruction of two-mode SU(1,1) states from parametric-amplifier photon counts."""

from .forward import ProbeSetting, probe_to_z, q_function, q_values, z_to_probe
from .inversion import (
    ReconstructionConfig,
    ReconstructionReport,
    build_design,
    extract_rho_band,
    reconstruct,
    solve_svd,
)
from .simulation import GridSpec, MeasurementRecord, NoiseMode, NoiseSpec, add_noise, sample_exact
from .states import (
    DensityMatrix,
    state_custom,
    state_pair_coherent,
    state_perelomov,
    state_superposition_pair,
)
from .transforms import dft_phase, scale_to_moments, series_coefficient

__version__ = "0.1.0"
