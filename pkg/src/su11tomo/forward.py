"""Photon-count probability behind a nondegenerate parametric amplifier.

The amplifier applies the two-mode squeeze operator ``S(z)``.  We parametrize
it by ``y = tanh^2|z|`` and a phase ``phi`` with the convention
``exp(-i phi) = z / |z|``.  The measured quantity is the probability of
finding ``q`` photons in mode a and none in mode b after the amplifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .states import DensityMatrix

TWO_PI = 2 * math.pi


class ContractViolation(ValueError):
    """A computed probability fell outside its admissible range."""


@dataclass(frozen=True)
class ProbeSetting:
    y: float
    phi: float

    def __post_init__(self):
        if not 0 < self.y < 1:
            raise ValueError(f"probe needs 0 < y < 1, got y={self.y!r}")
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)


def z_to_probe(z: complex) -> ProbeSetting:
    z = complex(z)
    if z == 0:
        raise ValueError("z = 0 maps to the inaccessible point y = 0")
    y = math.tanh(abs(z)) ** 2
    if y >= 1.0:
        # tanh saturates in double precision beyond |z| ~ 19
        y = math.nextafter(1.0, 0.0)
    return ProbeSetting(y=y, phi=-math.atan2(z.imag, z.real))


def probe_to_z(setting: ProbeSetting) -> complex:
    r = math.atanh(math.sqrt(setting.y))
    return r * complex(math.cos(setting.phi), -math.sin(setting.phi))


@lru_cache(maxsize=None)
def _log_weights(q: int, n_max: int) -> np.ndarray:
    # log sqrt((m+q)!/m!) for m = 0..n_max
    m = np.arange(n_max + 1)
    w = np.array([0.5 * (math.lgamma(i + q + 1) - math.lgamma(i + 1)) for i in m])
    w.setflags(write=False)
    return w


def _probe_vectors(q: int, n_max: int, y, phi) -> np.ndarray:
    """Rows ``u_m = sqrt((m+q)!/m!) y^{m/2} e^{i m phi}`` for each (y, phi) pair."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    m = np.arange(n_max + 1)
    log_mag = _log_weights(q, n_max)[None, :] + 0.5 * np.log(y)[:, None] * m[None, :]
    return np.exp(log_mag) * np.exp(1j * np.outer(phi, m))


def q_values(rho: DensityMatrix, y, phi, check: bool = True) -> np.ndarray:
    """Vectorized probability over paired arrays ``y`` and ``phi``.

    Full double sum ``u^H rho u`` per probe, prefactor ``(1-y)^{q+1}/q!``.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), y.shape)
    u = _probe_vectors(rho.q, rho.n_max, y, phi)
    quad = np.einsum("in,nm,im->i", u.conj(), rho.elements, u)
    pref = np.exp((rho.q + 1) * np.log1p(-y) - math.lgamma(rho.q + 1))
    val = pref * quad
    if check:
        _check(val)
    return val.real


def _check(val: np.ndarray) -> None:
    imag = np.max(np.abs(val.imag)) if val.size else 0.0
    if imag >= 1e-12:
        raise ContractViolation(f"probability has imaginary residue {imag:.3e}")
    re = val.real
    if re.size and (re.min() < -1e-10 or re.max() > 1 + 1e-10):
        raise ContractViolation(
            f"probability outside [0, 1]: range [{re.min():.3e}, {re.max():.3e}]"
        )


def q_function(rho: DensityMatrix, setting: ProbeSetting, method: str = "full") -> float:
    """Probability of ``q`` photons in mode a and none in mode b.

    ``method="rank1"`` factors a pure ``rho = c c^H`` into ``|c^H u|^2``; it
    is O(n_max) per probe and serves as an independent check on the double sum.
    """
    if method == "full":
        return float(q_values(rho, setting.y, setting.phi)[0])
    if method != "rank1":
        raise ValueError(f"unknown method {method!r}")
    evals, evecs = np.linalg.eigh(0.5 * (rho.elements + rho.elements.conj().T))
    lead = evecs[:, -1] * math.sqrt(max(evals[-1], 0.0))
    resid = np.max(np.abs(rho.elements - np.outer(lead, lead.conj())))
    if resid > 1e-12:
        raise ValueError(f"rho is not rank one (residual {resid:.2e})")
    u = _probe_vectors(rho.q, rho.n_max, setting.y, setting.phi)[0]
    pref = math.exp((rho.q + 1) * math.log1p(-setting.y) - math.lgamma(rho.q + 1))
    val = np.array([pref * abs(np.vdot(lead, u)) ** 2 + 0j])
    _check(val)
    return float(val.real[0])
