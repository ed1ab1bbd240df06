"""SVD-regularized polynomial least squares for the density-matrix bands.

For each Fourier index k the moment ``f_k(y)`` is a polynomial whose m-th
coefficient is ``B_mk(q) rho_{m+k,m}(q)``.  Fitting it on the raw monomial
basis is badly conditioned, so singular values below a threshold are dropped
from the pseudo-inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DegreePolicy, DiagnosticsReport, diagnose
from .simulation import MeasurementRecord
from .states import DensityMatrix, physicality
from .transforms import MomentTable, moment_table, series_coefficients


class InversionError(RuntimeError):
    def __init__(self, k: int, message: str):
        super().__init__(f"k={k}: {message}")
        self.k = k


@dataclass(frozen=True)
class DesignProblem:
    k: int
    q: int
    degree: int
    design: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)


@dataclass
class SvdSolution:
    coefficients: np.ndarray
    variances: np.ndarray
    singular_values: np.ndarray
    retained_count: int
    chi_squared: float
    n_points: int
    robust_variances: np.ndarray | None = None

    @property
    def residual_variance(self) -> float:
        """Noise variance per point estimated from chi-squared (real + imaginary)."""
        dof = self.n_points - self.retained_count
        return self.chi_squared / dof if dof > 0 else math.nan

    @property
    def coefficient_std(self) -> np.ndarray:
        """Formula variances scaled by the pooled residual variance."""
        return np.sqrt(self.variances * self.residual_variance)

    def to_dict(self) -> dict:
        return {
            "coefficients_re": self.coefficients.real.tolist(),
            "coefficients_im": self.coefficients.imag.tolist(),
            "variances": self.variances.tolist(),
            "singular_values": self.singular_values.tolist(),
            "retained_count": self.retained_count,
            "chi_squared": self.chi_squared,
            "robust_variances": None
            if self.robust_variances is None
            else self.robust_variances.tolist(),
        }


def build_design(moments: MomentTable, degree: int) -> DesignProblem:
    if degree < 0 or degree + 1 > len(moments):
        raise ValueError(f"degree {degree} not supported by {len(moments)} data points")
    G = np.vander(moments.y_values, degree + 1, increasing=True)
    return DesignProblem(moments.k, moments.q, degree, G, moments.f_values.copy())


def solve_svd(problem: DesignProblem, threshold: float = 0.1, relative: bool = False) -> SvdSolution:
    """Truncated-SVD least squares; real and imaginary targets share one SVD.

    Singular values ``<= threshold`` (or ``<= threshold * sigma_1`` when
    ``relative``) are dropped together with their inverses.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    G, b = problem.design, problem.target
    try:
        U, s, Vt = np.linalg.svd(G, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise InversionError(problem.k, f"SVD failed: {exc}") from exc
    cut = threshold * s[0] if relative else threshold
    keep = s > cut
    U_r, s_r, V_r = U[:, keep], s[keep], Vt[keep].T
    rhs = np.column_stack([b.real, b.imag])
    a = V_r @ ((U_r.T @ rhs) / s_r[:, None])
    coef = a[:, 0] + 1j * a[:, 1]
    var = np.sum(V_r**2 / s_r**2, axis=1)
    resid = G @ coef - b
    chi2 = float(np.sum(np.abs(resid) ** 2))
    # Sandwich estimate: the noise level varies strongly with y.
    n, r = G.shape[0], int(keep.sum())
    pinv = V_r @ (U_r.T / s_r[:, None])
    robust = (pinv**2) @ np.abs(resid) ** 2 * (n / (n - r) if n > r else math.nan)
    return SvdSolution(coef, var, s, r, chi2, n, robust)


def extract_rho_band(solution: SvdSolution, k: int, q: int) -> np.ndarray:
    """``rho_{m+k,m} = a_{m+1} / B_mk(q)`` for ``m = 0..degree``."""
    B = series_coefficients(solution.coefficients.size, k, q)
    return solution.coefficients / B


def band_variances(solution: SvdSolution, k: int, q: int) -> np.ndarray:
    """Unit-noise variances of the band elements, ``sigma^2(a) / B^2``."""
    B = series_coefficients(solution.coefficients.size, k, q)
    return solution.variances / B**2


def band_std(solution: SvdSolution, k: int, q: int) -> np.ndarray:
    """Heteroscedasticity-consistent standard deviations of the band elements."""
    B = series_coefficients(solution.coefficients.size, k, q)
    if solution.robust_variances is None:
        return np.sqrt(band_variances(solution, k, q) * solution.residual_variance)
    return np.sqrt(solution.robust_variances) / B


@dataclass
class ReconstructionConfig:
    n_max: int = 10
    threshold: float = 0.1
    relative_threshold: bool = False
    degree_policy: DegreePolicy = DegreePolicy.PAPER_FIXED
    fixed_degrees: dict[int, int] = field(default_factory=dict)
    ks: list[int] | None = None
    symmetry: str | None = None  # "perelomov": fill bands from k = 0, 1 only

    def __post_init__(self):
        self.degree_policy = DegreePolicy(self.degree_policy)
        self.fixed_degrees = {int(k): int(v) for k, v in self.fixed_degrees.items()}
        if self.symmetry not in (None, "perelomov"):
            raise ValueError(f"unknown symmetry {self.symmetry!r}")

    def k_values(self) -> list[int]:
        if self.ks is not None:
            return sorted(self.ks)
        if self.symmetry == "perelomov":
            return [k for k in (0, 1) if k <= self.n_max]
        return list(range(self.n_max + 1))

    def fixed_degree_for(self, k: int) -> int | None:
        if k in self.fixed_degrees:
            return self.fixed_degrees[k]
        if self.degree_policy is DegreePolicy.USER_FIXED:
            return self.n_max - k
        return None


@dataclass
class ReconstructionReport:
    rho_hat: DensityMatrix
    per_k: dict[int, SvdSolution]
    degrees_used: dict[int, int]
    truncation_threshold: float
    diagnostics: dict[int, DiagnosticsReport]
    estimated: np.ndarray
    std: np.ndarray
    failures: dict[int, str] = field(default_factory=dict)

    def band_significance(self, k: int) -> float:
        """Largest ``|rho_hat| / std`` over the estimated elements of band k."""
        mask = np.diagonal(self.estimated, offset=-k)
        vals = np.abs(self.rho_hat.band(k))[mask]
        sd = np.diagonal(self.std, offset=-k)[mask]
        if vals.size == 0:
            return math.nan
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(sd > 0, vals / sd, np.inf)
        return float(np.max(ratio))

    def below_noise_floor(self, k: int, n_sigma: float = 3.0) -> bool:
        return self.band_significance(k) < n_sigma

    def to_dict(self) -> dict:
        per_k = {}
        for k, sol in sorted(self.per_k.items()):
            entry = sol.to_dict()
            entry["degree"] = self.degrees_used[k]
            if k in self.diagnostics:
                entry["diagnostics"] = self.diagnostics[k].to_dict()
            entry["significance"] = self.band_significance(k)
            per_k[str(k)] = entry
        return {
            "rho_hat": self.rho_hat.to_dict(),
            "estimated": self.estimated.astype(int).tolist(),
            "std": self.std.tolist(),
            "truncation_threshold": self.truncation_threshold,
            "per_k": per_k,
            "failures": {str(k): v for k, v in sorted(self.failures.items())},
            "physicality": physicality(self.rho_hat),
        }


def solve_band(moments: MomentTable, config: ReconstructionConfig):
    k = moments.k
    n_max = config.n_max
    policy = config.degree_policy
    fixed = config.fixed_degree_for(k)
    if fixed is not None:
        policy = DegreePolicy.USER_FIXED
    diag = diagnose(moments, n_max, policy, fixed)
    degree = min(diag.selected_degree, n_max - k)
    sol = solve_svd(build_design(moments, degree), config.threshold, config.relative_threshold)
    return diag, degree, sol


def reconstruct(record: MeasurementRecord, config: ReconstructionConfig) -> ReconstructionReport:
    """Fourier-analyse the record and fit every band ``k = 0..n_max``.

    Entries above the fitted degree of their band are left at zero and marked
    as not estimated.
    """
    n_max, q = config.n_max, record.q
    dim = n_max + 1
    rho = np.zeros((dim, dim), dtype=complex)
    est = np.zeros((dim, dim), dtype=bool)
    std = np.zeros((dim, dim))
    per_k, degrees, diags, failures = {}, {}, {}, {}
    for k in config.k_values():
        try:
            diag, degree, sol = solve_band(moment_table(record, k), config)
        except (InversionError, ValueError, np.linalg.LinAlgError) as exc:
            failures[k] = f"{type(exc).__name__}: {exc}"
            continue
        band = extract_rho_band(sol, k, q)
        sd = band_std(sol, k, q)
        m = np.arange(degree + 1)
        if k == 0:
            band = band.real.astype(complex)
        rho[m + k, m] = band
        rho[m, m + k] = band.conj()
        est[m + k, m] = est[m, m + k] = True
        std[m + k, m] = std[m, m + k] = sd
        per_k[k], degrees[k], diags[k] = sol, degree, diag
    if config.symmetry == "perelomov":
        rho, est, std = _fill_perelomov(rho, est, std)
    return ReconstructionReport(
        rho_hat=DensityMatrix(q=q, n_max=n_max, elements=rho),
        per_k=per_k,
        degrees_used=degrees,
        truncation_threshold=config.threshold,
        diagnostics=diags,
        estimated=est,
        std=std,
        failures=failures,
    )


def _fill_perelomov(rho, est, std):
    # rho_{n+2j,n} = rho_{n+j,n+j} and rho_{n+2j+1,n} = rho_{n+j+1,n+j}
    dim = rho.shape[0]
    rho, est, std = rho.copy(), est.copy(), std.copy()
    for a in range(dim):
        for b in range(a + 1):
            if (a - b) < 2:
                continue
            src = ((a + b) // 2, (a + b) // 2) if (a - b) % 2 == 0 else ((a + b + 1) // 2, (a + b - 1) // 2)
            rho[a, b] = rho[src]
            rho[b, a] = np.conj(rho[src])
            est[a, b] = est[b, a] = est[src]
            std[a, b] = std[b, a] = std[src]
    return rho, est, std
