"""Propagators of the delta-kicked trapped ion and their Floquet analysis."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DecompositionFailure
from .fockcore import position_quadrature

CLUSTER_TOL = 1e-9
RESIDUAL_TOL = 1e-8


class Ordering(str, enum.Enum):
    KICK_THEN_FREE = "KickThenFree"
    FREE_THEN_KICK = "FreeThenKick"


@dataclass(frozen=True)
class TrapParams:
    """Dimensionless parameters of the kicked trap.

    ``k`` is the scaled kick strength (k = sqrt(2) K eta^2 / hbar),
    ``nu_tau`` the harmonic rotation angle per period and ``eta`` the
    Lamb-Dicke parameter. ``nu_tau`` is kept as given because the
    zero-point phase exp(-i nu_tau / 2) is not 2*pi periodic; use
    ``nu_tau_reduced`` for the angle in [0, 2*pi).
    """

    k: float
    nu_tau: float
    eta: float
    N: int = 128
    ordering: Ordering = Ordering.KICK_THEN_FREE

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not np.isfinite(self.nu_tau):
            raise ValueError("nu_tau must be finite")
        object.__setattr__(self, "ordering", Ordering(self.ordering))

    @property
    def nu_tau_reduced(self) -> float:
        return float(np.mod(self.nu_tau, 2 * np.pi))

    @property
    def kick_phase(self) -> float:
        """K / hbar expressed through k and eta."""
        return self.k / (np.sqrt(2) * self.eta**2)


def _kick_profile(params: TrapParams, include_constant: bool):
    w, v = np.linalg.eigh(position_quadrature(params.N))
    f = np.cos(2 * params.eta * w) + (1.0 if include_constant else 0.0)
    return f, v


def kick_generator(params: TrapParams, include_constant: bool = True) -> np.ndarray:
    """Hermitian H_K with U_K = exp(-i H_K)."""
    f, v = _kick_profile(params, include_constant)
    return params.kick_phase * (v * f) @ v.T


def kick_operator(params: TrapParams, include_constant: bool = True) -> np.ndarray:
    """U_K = exp(-i (K/hbar) (cos(2 eta X) + 1)) with X = a + a^dagger.

    Built on the spectrum of the truncated X. ``include_constant=False``
    drops the +1, which only changes a global phase per kick.
    """
    if params.k == 0:
        return np.eye(params.N, dtype=complex)
    f, v = _kick_profile(params, include_constant)
    return (v * np.exp(-1j * params.kick_phase * f)) @ v.T


def _free_phases(params: TrapParams) -> np.ndarray:
    return np.exp(-1j * params.nu_tau * (np.arange(params.N) + 0.5))


def free_propagator(params: TrapParams) -> np.ndarray:
    return np.diag(_free_phases(params))


def one_period_operator(params: TrapParams, include_constant: bool = True) -> np.ndarray:
    phases = _free_phases(params)
    if params.k == 0:
        return np.diag(phases)
    UK = kick_operator(params, include_constant)
    if params.ordering is Ordering.KICK_THEN_FREE:
        return phases[:, None] * UK
    return UK * phases[None, :]


def unitarity_error(U: np.ndarray) -> float:
    return float(np.max(np.abs(U.conj().T @ U - np.eye(len(U)))))


@dataclass(frozen=True)
class FloquetDecomposition:
    """Quasi-energies ``eps`` (ascending, in [0, 2*pi)) and modes as columns.

    ``modes[:, mu]`` satisfies U @ modes[:, mu] = exp(-i eps[mu]) modes[:, mu].
    """

    eps: np.ndarray
    modes: np.ndarray
    source: TrapParams | None = None
    residual: float = 0.0
    clusters: tuple = field(default=())

    @property
    def N(self) -> int:
        return self.modes.shape[0]

    def components(self, psi: np.ndarray) -> np.ndarray:
        """Amplitudes <mu|psi>."""
        return self.modes.conj().T @ psi

    def reconstruct(self) -> np.ndarray:
        return (self.modes * np.exp(-1j * self.eps)) @ self.modes.conj().T

    @property
    def min_gap(self) -> float:
        if len(self.eps) < 2:
            return 2 * np.pi
        gaps = np.diff(np.concatenate([self.eps, [self.eps[0] + 2 * np.pi]]))
        return float(gaps.min())

    @property
    def degenerate(self) -> bool:
        return self.min_gap < CLUSTER_TOL


def circular_distance(a, b):
    """Distance between phases on the unit circle, in [0, pi]."""
    return np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))


def _clusters(eps: np.ndarray, tol: float) -> list[np.ndarray]:
    n = len(eps)
    if n == 0:
        return []
    groups, cur = [], [0]
    for i in range(1, n):
        if eps[i] - eps[i - 1] < tol:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    # wrap-around: last and first cluster may touch across 2*pi
    if len(groups) > 1 and eps[0] + 2 * np.pi - eps[-1] < tol:
        groups[0] = groups.pop() + groups[0]
    return [np.array(g) for g in groups if len(g) > 1]


def floquet_decompose(
    U: np.ndarray, source: TrapParams | None = None, cluster_tol: float = CLUSTER_TOL
) -> FloquetDecomposition:
    """Eigen-decomposition of a unitary through its complex Schur form.

    For a normal matrix the Schur factor is diagonal and the Schur vectors
    are orthonormal by construction, including near-degenerate doublets.
    Modes within a quasi-energy cluster are re-orthonormalized (Loewdin).
    """
    T, Z = scipy.linalg.schur(U, output="complex")
    lam = np.diag(T)
    eps = np.mod(-np.angle(lam), 2 * np.pi)
    order = np.argsort(eps, kind="stable")
    eps, Z = eps[order], Z[:, order]

    clusters = _clusters(eps, cluster_tol)
    for idx in clusters:
        block = Z[:, idx]
        u, _, vh = np.linalg.svd(block, full_matrices=False)
        Z[:, idx] = u @ vh

    res = np.linalg.norm(U @ Z - Z * np.exp(-1j * eps), axis=0)
    residual = float(res.max()) if len(res) else 0.0
    if residual > RESIDUAL_TOL:
        raise DecompositionFailure(f"max Floquet residual {residual:.3e} > {RESIDUAL_TOL}")
    return FloquetDecomposition(eps, Z, source, residual, tuple(tuple(c) for c in clusters))


def decompose(params: TrapParams) -> FloquetDecomposition:
    return floquet_decompose(one_period_operator(params), source=params)


def evolve(U: np.ndarray, psi: np.ndarray, m: int) -> np.ndarray:
    """U^m psi by repeated application."""
    if m < 0:
        raise ValueError("m must be >= 0")
    out = np.array(psi, dtype=complex)
    for _ in range(m):
        out = U @ out
    return out


def trajectory(U: np.ndarray, psi: np.ndarray, m_max: int) -> np.ndarray:
    """Rows are U^m psi for m = 0..m_max."""
    out = np.empty((m_max + 1, len(psi)), dtype=complex)
    out[0] = psi
    for m in range(1, m_max + 1):
        out[m] = U @ out[m - 1]
    return out
