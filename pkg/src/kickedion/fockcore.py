"""Truncated Fock-space states and operators.

States are plain complex ``numpy`` vectors of length ``N`` (amplitudes on
|0>..|N-1>); operators are dense ``N x N`` arrays. Phase-plane points are
dimensionless, with ``x`` in units of the laser wavelength and ``p`` in
units of ``m * nu * wavelength``; the coherent-state label is
``alpha = (pi / eta) * (x + i p)``.

Q functions follow the convention ``Q(alpha) = |<alpha|psi>|^2`` (no 1/pi),
so that ``integral Q d^2 alpha / pi = 1``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import TruncationLoss

NORM_LOSS_LIMIT = 0.999


class PhasePoint(NamedTuple):
    x: float
    p: float


def fock_state(n: int, N: int) -> np.ndarray:
    if not 0 <= n < N:
        raise TruncationLoss(f"Fock state |{n}> outside truncation N={N}")
    psi = np.zeros(N, dtype=complex)
    psi[n] = 1.0
    return psi


def normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi)


def is_safe_alpha(alpha: complex, N: int) -> bool:
    """Truncation-safe region |alpha|^2 <= N/4."""
    return abs(alpha) ** 2 <= N / 4


def _coherent_amplitudes(alphas: np.ndarray, N: int) -> np.ndarray:
    # log-space magnitudes avoid overflow of alpha^n and n! past n ~ 170
    alphas = np.asarray(alphas, dtype=complex)
    n = np.arange(N)
    log_fact = gammaln(n + 1)
    r = np.abs(alphas)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mag = -0.5 * r**2 + n * np.log(r) - 0.5 * log_fact
    # 0**0 = 1 for the vacuum component
    log_mag = np.where((r == 0) & (n == 0), 0.0, log_mag)
    phase = np.exp(1j * np.angle(alphas)[..., None] * n)
    return np.exp(log_mag) * phase


def coherent_state(alpha: complex, N: int) -> np.ndarray:
    """Coherent state |alpha>, renormalized over the truncated basis.

    Raises TruncationLoss when less than 99.9% of the norm fits in N levels.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    amps = _coherent_amplitudes(np.asarray(alpha), N)
    norm2 = float(np.vdot(amps, amps).real)
    if norm2 < NORM_LOSS_LIMIT:
        raise TruncationLoss(
            f"coherent state alpha={alpha} keeps only {norm2:.6f} of its norm in N={N}"
        )
    return amps / np.sqrt(norm2)


def coherent_states(alphas: np.ndarray, N: int) -> np.ndarray:
    """Rows are coherent states for each alpha in ``alphas`` (flattened)."""
    amps = _coherent_amplitudes(np.ravel(alphas), N)
    norm2 = np.einsum("ij,ij->i", amps.conj(), amps).real
    bad = norm2 < NORM_LOSS_LIMIT
    if np.any(bad):
        worst = np.ravel(alphas)[np.argmin(norm2)]
        raise TruncationLoss(
            f"coherent state alpha={worst} keeps only {norm2.min():.6f} of its norm in N={N}"
        )
    return amps / np.sqrt(norm2)[:, None]


def phase_point_to_alpha(pt: PhasePoint, eta: float) -> complex:
    if eta <= 0:
        raise ValueError("eta must be positive")
    x, p = pt
    return complex(np.pi / eta * x, np.pi / eta * p)


def alpha_to_phase_point(alpha: complex, eta: float) -> PhasePoint:
    if eta <= 0:
        raise ValueError("eta must be positive")
    return PhasePoint(eta / np.pi * alpha.real, eta / np.pi * alpha.imag)


def annihilation(N: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)


def number_operator(N: int) -> np.ndarray:
    return np.diag(np.arange(N, dtype=float))


def position_quadrature(N: int) -> np.ndarray:
    """Matrix of a + a^dagger: real symmetric tridiagonal."""
    if N < 2:
        raise ValueError("N must be >= 2")
    off = np.sqrt(np.arange(1, N, dtype=float))
    return np.diag(off, 1) + np.diag(off, -1)


def momentum_quadrature(N: int) -> np.ndarray:
    """Matrix of i(a^dagger - a)."""
    a = annihilation(N)
    return 1j * (a.T - a)


def phase_space_means(psi: np.ndarray, eta: float) -> PhasePoint:
    """Expectation values of (x, p) in the dimensionless phase-plane units."""
    a_mean = np.vdot(psi, annihilation(len(psi)) @ psi)
    return alpha_to_phase_point(complex(a_mean), eta)


def displacement_operator(alpha: complex, N: int, check: bool = True) -> np.ndarray:
    """D(alpha) = exp(alpha a^dagger - alpha* a) of the truncated generator.

    The generator is anti-Hermitian, so the result is unitary to rounding.
    With ``check`` set, raises TruncationLoss if D(alpha)|0> deviates from
    the series coherent state by more than 1e-6.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    a = annihilation(N)
    gen = alpha * a.T - np.conj(alpha) * a
    # i * gen is Hermitian: exponentiate on its spectrum
    w, v = np.linalg.eigh(1j * gen)
    D = (v * np.exp(-1j * w)) @ v.conj().T
    if check and alpha != 0:
        try:
            ref = coherent_state(alpha, N)
        except TruncationLoss:
            raise TruncationLoss(f"displacement alpha={alpha} does not fit N={N}") from None
        if np.linalg.norm(D[:, 0] - ref) > 1e-6:
            raise TruncationLoss(f"displacement alpha={alpha} distorted by truncation N={N}")
    return D

