"""Reduced Fock-basis density matrices for two-mode states of fixed charge.

A two-mode state whose photon-number difference ``a^dag a - b^dag b`` equals
``q`` lives in the span of ``|n+q, n>``.  Everything here is expressed in that
reduced basis: entry ``(n, m)`` of :attr:`DensityMatrix.elements` is
``<n+q, n| rho |m+q, m>``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 500


@dataclass(frozen=True)
class DensityMatrix:
    q: int
    n_max: int
    elements: np.ndarray

    def __post_init__(self):
        if self.q < 0:
            raise ValueError(f"charge q must be nonnegative, got {self.q}")
        if self.n_max < 0:
            raise ValueError(f"n_max must be nonnegative, got {self.n_max}")
        arr = np.array(self.elements, dtype=complex)
        if arr.shape != (self.n_max + 1, self.n_max + 1):
            raise ValueError(
                f"elements must have shape {(self.n_max + 1,) * 2}, got {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def is_hermitian(self, atol: float = 0.0) -> bool:
        return bool(np.allclose(self.elements, self.elements.conj().T, rtol=0, atol=atol))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.elements + self.elements.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def band(self, k: int) -> np.ndarray:
        """Elements ``rho_{m+k, m}`` for ``m = 0 .. n_max - k``."""
        return np.diagonal(self.elements, offset=-k).copy()

    def to_dict(self) -> dict:
        return {
            "q": int(self.q),
            "n_max": int(self.n_max),
            "re": self.elements.real.tolist(),
            "im": self.elements.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DensityMatrix":
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        return cls(q=int(data["q"]), n_max=int(data["n_max"]), elements=re + 1j * im)


def physicality(rho: DensityMatrix) -> dict:
    """Trace, hermiticity defect and smallest eigenvalue of ``rho``."""
    return {
        "trace": rho.trace(),
        "hermiticity_defect": float(np.max(np.abs(rho.elements - rho.elements.conj().T))),
        "min_eigenvalue": rho.min_eigenvalue(),
    }


def _log_factorial(n) -> float:
    return math.lgamma(n + 1)


def _sum_series(log_term, max_terms: int = SERIES_MAX_TERMS) -> float:
    # Positive-term series; stops once a term drops below SERIES_RTOL of the running sum.
    total = 0.0
    for n in range(max_terms):
        lt = log_term(n)
        if lt == -math.inf:
            if n == 0:
                continue
            break
        term = math.exp(lt)
        total += term
        if n > 0 and term < SERIES_RTOL * total:
            break
    return total


def pair_coherent_norm_sq(xi: complex, p: int) -> float:
    """``N(xi, p)^{-2} = sum_n |xi|^{2n} / (n! (n+p)!)``."""
    r = abs(xi)
    if r == 0:
        return math.exp(-_log_factorial(p))
    log_r2 = 2 * math.log(r)
    return _sum_series(lambda n: n * log_r2 - _log_factorial(n) - _log_factorial(n + p))


def _pair_amplitudes(xi: complex, p: int, n_max: int) -> np.ndarray:
    # Unnormalized ket coefficients xi^n / sqrt(n!(n+p)!) for n = 0..n_max.
    amps = np.zeros(n_max + 1, dtype=complex)
    if xi == 0:
        amps[0] = math.exp(-0.5 * _log_factorial(p))
        return amps
    log_r = math.log(abs(xi))
    phase = xi / abs(xi)
    for n in range(n_max + 1):
        mag = math.exp(n * log_r - 0.5 * (_log_factorial(n) + _log_factorial(n + p)))
        amps[n] = mag * phase**n
    return amps


def pure_state(coeffs, q: int) -> DensityMatrix:
    c = np.asarray(coeffs, dtype=complex)
    outer = np.outer(c, c.conj())
    # Fused multiply-add can leave ~1e-17 anti-Hermitian residue; average it out exactly.
    return DensityMatrix(q=q, n_max=len(c) - 1, elements=0.5 * (outer + outer.conj().T))


def state_pair_coherent(xi: complex, p: int, n_max: int) -> DensityMatrix:
    """Pair coherent state ``|Phi(xi, p)>`` truncated at ``n_max``.

    The normalization uses the full (untruncated) series, so the trace of the
    result falls short of one by the weight beyond the cutoff.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    amps = _pair_amplitudes(complex(xi), p, n_max)
    amps /= math.sqrt(pair_coherent_norm_sq(xi, p))
    return pure_state(amps, p)


def state_perelomov(eta: complex, q: int, n_max: int) -> DensityMatrix:
    """SU(1,1) Perelomov coherent state built on ``|q, 0>``; requires ``|eta| < 1``."""
    eta = complex(eta)
    if not abs(eta) < 1:
        raise ValueError(f"Perelomov state needs |eta| < 1, got |eta| = {abs(eta)}")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    r = abs(eta)
    log_pref = 0.5 * ((q + 1) * math.log1p(-r * r) - _log_factorial(q))
    amps = np.zeros(n_max + 1, dtype=complex)
    if r == 0:
        amps[0] = math.exp(log_pref + 0.5 * _log_factorial(q))
    else:
        log_r = math.log(r)
        phase = eta / r
        for n in range(n_max + 1):
            log_mag = (
                log_pref + n * log_r + 0.5 * (_log_factorial(n + q) - _log_factorial(n))
            )
            amps[n] = math.exp(log_mag) * phase**n
    return pure_state(amps, q)


def state_superposition_pair(xi: complex, p: int, n_max: int) -> DensityMatrix:
    """Normalized ``e^{-i pi/4} (|Phi(xi,p)> + |Phi(-xi,p)>) / sqrt(2)``.

    Odd-``n`` amplitudes cancel, so only the even sector survives.  The ket is
    renormalized because the two branches overlap; the global phase is kept
    for fidelity to the definition but drops out of ``rho``.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    xi = complex(xi)
    if xi == 0:
        return state_pair_coherent(0, p, n_max)
    norm_sq = pair_coherent_norm_sq(xi, p)
    log_r2 = 2 * math.log(abs(xi))
    even_weight = _sum_series(
        lambda j: 2 * j * log_r2 - _log_factorial(2 * j) - _log_factorial(2 * j + p)
    )
    # |ket|^2 = (1/2) * 4 * sum_even |c_n|^2 / N^{-2}
    ket_norm_sq = 2.0 * even_weight / norm_sq
    amps = _pair_amplitudes(xi, p, n_max)
    parity = np.array([2.0 if n % 2 == 0 else 0.0 for n in range(n_max + 1)])
    ket = cmath.exp(-1j * math.pi / 4) / math.sqrt(2) * parity * amps / math.sqrt(norm_sq)
    return pure_state(ket / math.sqrt(ket_norm_sq), p)


def state_custom(coeffs, q: int, normalize: bool = False) -> DensityMatrix:
    """Pure state ``sum_n c_n |n+q, n>`` from explicit coefficients."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if c.size == 0:
        raise ValueError("coefficient vector is empty")
    norm = float(np.linalg.norm(c))
    if norm == 0:
        raise ValueError("coefficient vector is zero")
    if normalize:
        c = c / norm
    elif abs(norm - 1) > 1e-12:
        raise ValueError(f"coefficients must have unit norm (got {norm!r}); pass normalize=True")
    return pure_state(c, q)
