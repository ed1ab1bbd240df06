"""Polynomial-degree selection for the moment fits.

Two indicators guide the choice: the sequential sum of squares (how much each
added monomial improves the fit) and the number of sign changes along the
residual sequence, which approaches ``N/2`` once only uncorrelated noise is left.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .transforms import MomentTable


class DegreePolicy(str, enum.Enum):
    AUTO = "auto"
    PAPER_FIXED = "paper"
    USER_FIXED = "fixed"


# Auto-policy thresholds; see select_degree.
SIGN_CHANGE_SLACK = 1.0
TAIL_FRACTION = 0.01


@dataclass
class DiagnosticsReport:
    k: int
    seq_sum_squares: np.ndarray
    sign_changes: np.ndarray
    selected_degree: int
    policy: DegreePolicy
    fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seq_sum_squares": self.seq_sum_squares.tolist(),
            "sign_changes": self.sign_changes.tolist(),
            "selected_degree": self.selected_degree,
            "policy": self.policy.value,
            "fallback": self.fallback,
        }


def _vander(y: np.ndarray, degree: int) -> np.ndarray:
    return np.vander(y, degree + 1, increasing=True)


def _as_real_columns(f: np.ndarray) -> np.ndarray:
    return np.column_stack([f.real, f.imag])


def fit_residuals(moments: MomentTable, degree: int) -> np.ndarray:
    """Residuals of the untruncated least-squares polynomial fit of given degree."""
    G = _vander(moments.y_values, degree)
    b = _as_real_columns(moments.f_values)
    coef, *_ = np.linalg.lstsq(G, b, rcond=None)
    r = b - G @ coef
    return r[:, 0] + 1j * r[:, 1]


def chi_squared_by_degree(moments: MomentTable, max_degree: int) -> np.ndarray:
    return np.array(
        [np.sum(np.abs(fit_residuals(moments, d)) ** 2) for d in range(max_degree + 1)]
    )


def sequential_sum_of_squares(moments: MomentTable, m_cap: int) -> np.ndarray:
    """``S(m) = chi2(m-1) - chi2(m)`` for ``m = 1..m_cap`` (entry ``m-1``)."""
    if m_cap + 1 > len(moments):
        raise ValueError(f"m_cap={m_cap} needs at least {m_cap + 1} data points")
    chi2 = chi_squared_by_degree(moments, m_cap)
    return np.clip(chi2[:-1] - chi2[1:], 0.0, None)


def sequential_sum_of_squares_qr(moments: MomentTable, m_cap: int) -> np.ndarray:
    """Same quantity from projections on the orthonormalized monomials."""
    if m_cap + 1 > len(moments):
        raise ValueError(f"m_cap={m_cap} needs at least {m_cap + 1} data points")
    Q, _ = np.linalg.qr(_vander(moments.y_values, m_cap))
    proj = Q.T @ _as_real_columns(moments.f_values)
    return np.sum(proj**2, axis=1)[1:]


def sign_change_count(residuals) -> int:
    """Sign alternations along ``residuals``; exact zeros are skipped."""
    r = np.asarray(residuals, dtype=float)
    s = np.sign(r[r != 0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _dominant_part(moments: MomentTable, residuals: np.ndarray) -> np.ndarray:
    # Counting runs on the quadrature carrying most of the signal.
    f = moments.f_values
    if np.sum(f.imag**2) > np.sum(f.real**2):
        return residuals.imag
    return residuals.real


def sign_changes_by_degree(moments: MomentTable, max_degree: int) -> np.ndarray:
    return np.array(
        [
            sign_change_count(_dominant_part(moments, fit_residuals(moments, d)))
            for d in range(max_degree + 1)
        ]
    )


def schedule_degree(k: int, n_max: int) -> int:
    """Degrees used for the pair coherent example, capped at ``n_max - k``."""
    if k == 0:
        d = 6
    elif k <= 2:
        d = 5
    elif k <= 5:
        d = 4
    else:
        d = n_max - k
    return min(d, n_max - k)


def diagnose(
    moments: MomentTable,
    n_max: int,
    policy=DegreePolicy.AUTO,
    fixed_degree: int | None = None,
    slack: float = SIGN_CHANGE_SLACK,
    tail_fraction: float = TAIL_FRACTION,
) -> DiagnosticsReport:
    k = moments.k
    policy = DegreePolicy(policy)
    cap = min(n_max - k, len(moments) - 2)
    if cap < 0:
        raise ValueError(f"no admissible degree for k={k}, n_max={n_max}")
    chi2 = chi_squared_by_degree(moments, cap)
    S = np.clip(chi2[:-1] - chi2[1:], 0.0, None)
    Sc = sign_changes_by_degree(moments, cap)
    fallback = False
    if policy is DegreePolicy.PAPER_FIXED:
        degree = schedule_degree(k, n_max)
    elif policy is DegreePolicy.USER_FIXED:
        if fixed_degree is None:
            raise ValueError("fixed degree policy needs a degree")
        degree = int(fixed_degree)
    else:
        # Residuals at rounding level carry no sign information; such a fit is exact.
        scale = np.max(np.abs(moments.f_values), initial=0.0)
        floor = len(moments) * (64 * np.finfo(float).eps * scale) ** 2
        exact = np.flatnonzero(chi2 <= floor)
        degree = _auto_degree(S, Sc, len(moments), slack, tail_fraction)
        if exact.size and (degree is None or exact[0] < degree):
            degree = int(exact[0])
        if degree is None:
            warnings.warn(f"auto degree selection failed for k={k}; using n_max-k={cap}")
            degree, fallback = cap, True
    return DiagnosticsReport(k, S, Sc, degree, policy, fallback)


def _auto_degree(S, Sc, n_points, slack, tail_fraction):
    half = n_points / 2
    limit = half - slack * math.sqrt(half)
    total = float(np.sum(S))
    for d in range(len(Sc)):
        tail = float(np.sum(S[d:]))  # S[d] is the increment of degree d+1
        if Sc[d] >= limit and (total == 0 or tail < tail_fraction * total):
            return d
    return None


def select_degree(moments: MomentTable, policy, k: int, n_max: int, fixed_degree=None) -> int:
    if k != moments.k:
        raise ValueError(f"moment table is for k={moments.k}, asked for k={k}")
    return diagnose(moments, n_max, policy, fixed_degree).selected_degree
