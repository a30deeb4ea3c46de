"""Husimi Q functions on phase-space grids and their stroboscopic averages."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyWarning, TruncationLoss
from .floquet import FloquetDecomposition, trajectory
from .fockcore import PhasePoint, coherent_state, coherent_states

# rows of coherent-state matrices evaluated per block; bounds peak memory
_BLOCK = 4096


@dataclass(frozen=True)
class PhaseGrid:
    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    np: int
    eta: float

    def __post_init__(self):
        if self.nx < 2 or self.np < 2:
            raise ValueError("grid needs at least 2 samples per axis")
        if not (self.x_min < self.x_max and self.p_min < self.p_max):
            raise ValueError("grid bounds must be ordered")
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    @classmethod
    def square(cls, half_width: float, n: int, eta: float) -> "PhaseGrid":
        return cls(-half_width, half_width, -half_width, half_width, n, n, eta)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.np - 1)

    def alphas(self) -> np.ndarray:
        """Coherent labels, shape (nx, np), indexed [ix, ip]."""
        X, P = np.meshgrid(self.xs, self.ps, indexing="ij")
        return np.pi / self.eta * (X + 1j * P)

    def check_truncation(self, N: int) -> None:
        amax2 = (np.pi / self.eta) ** 2 * (
            max(abs(self.x_min), abs(self.x_max)) ** 2 + max(abs(self.p_min), abs(self.p_max)) ** 2
        )
        if amax2 > N / 4:
            raise TruncationLoss(
                f"grid reaches |alpha|^2={amax2:.1f} beyond the safe region N/4={N / 4:g}"
            )


@dataclass(frozen=True)
class QField:
    grid: PhaseGrid
    values: np.ndarray  # shape (nx, np)
    degenerate: bool = False

    def normalization(self) -> float:
        """Riemann sum of Q d^2alpha / pi."""
        jac = (np.pi / self.grid.eta) ** 2
        return float(self.values.sum() * jac * self.grid.dx * self.grid.dp / np.pi)

    def at(self, ix: int, ip: int) -> PhasePoint:
        return PhasePoint(float(self.grid.xs[ix]), float(self.grid.ps[ip]))


def q_value(psi: np.ndarray, alpha: complex) -> float:
    """Q(alpha) = |<alpha|psi>|^2."""
    ref = coherent_state(alpha, len(psi))
    return float(min(abs(np.vdot(ref, psi)) ** 2, 1.0))


def _overlaps(vectors: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """<alpha|v> for every grid alpha (rows) and column vector v."""
    N = vectors.shape[0]
    grid.check_truncation(N)
    alphas = grid.alphas().ravel()
    out = np.empty((len(alphas), vectors.shape[1]), dtype=complex)
    for start in range(0, len(alphas), _BLOCK):
        C = coherent_states(alphas[start : start + _BLOCK], N)
        out[start : start + len(C)] = C.conj() @ vectors
    return out


def q_grid(psi: np.ndarray, grid: PhaseGrid) -> QField:
    amp = _overlaps(np.asarray(psi)[:, None], grid)[:, 0]
    vals = np.clip(np.abs(amp) ** 2, 0.0, 1.0).reshape(grid.nx, grid.np)
    return QField(grid, vals)


def q_average_finite(U: np.ndarray, psi0: np.ndarray, kicks, grid: PhaseGrid) -> QField:
    """Mean of Q over the stroboscopic states U^m psi0, m in ``kicks``."""
    kicks = [int(m) for m in kicks]
    if not kicks or min(kicks) < 0:
        raise ValueError("kicks must be a nonempty list of non-negative integers")
    states = trajectory(U, psi0, max(kicks))[kicks]
    N = len(psi0)
    grid.check_truncation(N)
    alphas = grid.alphas().ravel()
    acc = np.zeros(len(alphas))
    for start in range(0, len(alphas), _BLOCK):
        C = coherent_states(alphas[start : start + _BLOCK], N).conj()
        # chunk over kicks too: C @ states.T can be large for long averages
        for k0 in range(0, len(states), 1024):
            acc[start : start + len(C)] += (np.abs(C @ states[k0 : k0 + 1024].T) ** 2).sum(1)
    vals = np.clip(acc / len(kicks), 0.0, 1.0).reshape(grid.nx, grid.np)
    return QField(grid, vals)


def floquet_q_functions(decomp: FloquetDecomposition, grid: PhaseGrid) -> np.ndarray:
    """|<alpha|mu>|^2, shape (nx * np, N)."""
    return np.abs(_overlaps(decomp.modes, grid)) ** 2


def q_average_floquet(decomp: FloquetDecomposition, psi0: np.ndarray, grid: PhaseGrid) -> QField:
    """Infinite-time average sum_mu |<alpha|mu>|^2 |<psi0|mu>|^2."""
    if decomp.N != len(psi0):
        raise ValueError("decomposition and state dimensions differ")
    if decomp.degenerate:
        warnings.warn(
            "near-degenerate quasi-energies: finite-time averages keep cross terms",
            DegeneracyWarning,
            stacklevel=2,
        )
    w = np.abs(decomp.components(psi0)) ** 2
    vals = floquet_q_functions(decomp, grid) @ w
    return QField(grid, np.clip(vals, 0.0, 1.0).reshape(grid.nx, grid.np), decomp.degenerate)


def local_maxima(field: QField, rel_height: float = 0.5) -> list[tuple[int, int]]:
    """Interior strict 8-neighbour maxima at least ``rel_height`` * global max."""
    v = field.values
    core = v[1:-1, 1:-1]
    mask = core >= rel_height * v.max()
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            mask &= core > v[1 + di : v.shape[0] - 1 + di, 1 + dj : v.shape[1] - 1 + dj]
    ii, jj = np.nonzero(mask)
    return [(int(i) + 1, int(j) + 1) for i, j in zip(ii, jj)]


def ring_profile(psi_or_decomp, radius: float, n_angles: int = 720, psi0=None):
    """Q (or Q_T when given a decomposition and ``psi0``) on the circle |alpha| = radius.

    Returns (angles, values) with angles in [0, 2*pi) measured in the alpha plane.
    """
    th = np.linspace(0, 2 * np.pi, n_angles, endpoint=False)
    alphas = radius * np.exp(1j * th)
    if isinstance(psi_or_decomp, FloquetDecomposition):
        d = psi_or_decomp
        C = coherent_states(alphas, d.N)
        w = np.abs(d.components(psi0)) ** 2
        return th, (np.abs(C.conj() @ d.modes) ** 2) @ w
    psi = np.asarray(psi_or_decomp)
    C = coherent_states(alphas, len(psi))
    return th, np.abs(C.conj() @ psi) ** 2


def circular_peaks(values: np.ndarray, rel_height: float = 0.5) -> np.ndarray:
    """Indices of strict local maxima of a periodic sequence above rel_height * max."""
    v = np.asarray(values)
    m = (v > np.roll(v, 1)) & (v > np.roll(v, -1)) & (v >= rel_height * v.max())
    return np.nonzero(m)[0]
