"""State synthesis in the Floquet basis.

Transport probabilities between phase-space regions, barrier and passage
states, Fock truncation to an experimentally feasible basis, stabilization
by short-time spectral filtering, and quasi-energy doublets for dynamical
tunneling.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegeneracyWarning, EmptySelection, NullState
from .floquet import FloquetDecomposition, circular_distance, trajectory
from .fockcore import PhasePoint, coherent_state, phase_point_to_alpha

NULL_NORM = 1e-12


class Sign(str, enum.Enum):
    BARRIER = "barrier"
    PASSAGE = "passage"


@dataclass(frozen=True)
class SynthesisSpec:
    """Barrier/passage construction between coherent states at ``A`` and ``B``.

    ``c_tol`` thresholds the weight on A, ``b_tol`` decides which modes have
    an important overlap with B. ``protect`` lists centers whose important
    modes (weight > ``protect_tol``) are never modified.
    """

    A: PhasePoint
    B: PhasePoint
    c_tol: float = 0.001
    b_tol: float = 0.01
    sign: Sign = Sign.BARRIER
    n_exp: int = 10
    protect: tuple = ()
    protect_tol: float = 0.01

    def __post_init__(self):
        for name in ("c_tol", "b_tol", "protect_tol"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.n_exp < 0:
            raise ValueError("n_exp must be >= 0")
        object.__setattr__(self, "A", PhasePoint(*self.A))
        object.__setattr__(self, "B", PhasePoint(*self.B))
        object.__setattr__(self, "sign", Sign(self.sign))
        object.__setattr__(self, "protect", tuple(PhasePoint(*c) for c in self.protect))


@dataclass(frozen=True)
class StabilizationSpec:
    """Spectral window parameters; ``None`` fields are derived from the state."""

    t_M: int | None = None
    omega0: float | None = None
    a_sta: float | None = None
    M_corr: int = 200
    peak_index: int = 0
    n_exp: int = 12
    kept_norm: float = 0.5
    n_omega: int = 4096

    def __post_init__(self):
        if self.t_M is not None and self.t_M < 1:
            raise ValueError("t_M must be >= 1")
        if self.omega0 is not None and not 0 <= self.omega0 < 2 * np.pi:
            raise ValueError("omega0 must lie in [0, 2*pi)")
        if self.a_sta is not None and not 0 <= self.a_sta <= 1:
            raise ValueError("a_sta must lie in [0, 1]")
        if self.M_corr < 2:
            raise ValueError("M_corr must be >= 2")


@dataclass
class SynthesisResult:
    state: np.ndarray
    selected: np.ndarray  # indices of the modified / kept Floquet modes
    flags: set = field(default_factory=set)
    info: dict = field(default_factory=dict)


class Truncated(NamedTuple):
    state: np.ndarray
    overlap: float


def floquet_weights(decomp: FloquetDecomposition, psi: np.ndarray) -> np.ndarray:
    if decomp.N != len(psi):
        raise ValueError("decomposition and state dimensions differ")
    return np.abs(decomp.components(psi)) ** 2


def _warn_degenerate(decomp: FloquetDecomposition) -> None:
    if decomp.degenerate:
        warnings.warn(
            "near-degenerate quasi-energies: the spectral form drops non-decaying cross terms",
            DegeneracyWarning,
            stacklevel=3,
        )


def transport_probability(decomp: FloquetDecomposition, phi_a, phi_b) -> float:
    """Long-time average of |<phi_b|U^m phi_a>|^2 in its Floquet form."""
    _warn_degenerate(decomp)
    val = float(floquet_weights(decomp, phi_a) @ floquet_weights(decomp, phi_b))
    return min(max(val, 0.0), 1.0)


def _coherent_at(pt: PhasePoint, decomp: FloquetDecomposition) -> np.ndarray:
    if decomp.source is None:
        raise ValueError("decomposition carries no TrapParams; pass explicit states")
    return coherent_state(phase_point_to_alpha(pt, decomp.source.eta), decomp.N)


def barrier_passage_state(
    decomp: FloquetDecomposition,
    spec: SynthesisSpec,
    phi_a: np.ndarray | None = None,
    phi_b: np.ndarray | None = None,
) -> SynthesisResult:
    """Remove (barrier) or double (passage) the Floquet components linking A and B.

    A mode is modified when its weight on phi_b exceeds ``b_tol`` and its
    weight on phi_a exceeds ``c_tol``, unless a protected center claims it.
    Coherent states at ``spec.A`` / ``spec.B`` are used unless explicit
    states are given. An empty selection returns phi_a with the
    ``"EmptySelection"`` flag.
    """
    if phi_a is None:
        phi_a = _coherent_at(spec.A, decomp)
    if phi_b is None:
        phi_b = _coherent_at(spec.B, decomp)
    ca = decomp.components(phi_a)
    wa = np.abs(ca) ** 2
    wb = floquet_weights(decomp, phi_b)
    sel = (wb > spec.b_tol) & (wa > spec.c_tol)
    for c in spec.protect:
        sel &= floquet_weights(decomp, _coherent_at(c, decomp)) <= spec.protect_tol
    idx = np.nonzero(sel)[0]
    flags = set()
    if len(idx) == 0:
        flags.add("EmptySelection")
        return SynthesisResult(np.array(phi_a, dtype=complex), idx, flags, {"overlap_A": 1.0})

    proj = decomp.modes[:, idx] @ ca[idx]
    raw = phi_a - proj if spec.sign is Sign.BARRIER else phi_a + proj
    norm = np.linalg.norm(raw)
    if norm < NULL_NORM:
        raise NullState("barrier removed the whole initial state")
    state = raw / norm
    info = {
        "overlap_A": float(abs(np.vdot(phi_a, state)) ** 2),
        "selected_weight_A": float(wa[idx].sum()),
        "n_selected": int(len(idx)),
    }
    return SynthesisResult(state, idx, flags, info)


def fock_truncate(psi: np.ndarray, n_exp: int) -> Truncated:
    """Keep Fock components 0..n_exp, renormalize, report overlap to psi."""
    if n_exp < 0:
        raise ValueError("n_exp must be >= 0")
    out = np.array(psi, dtype=complex)
    out[n_exp + 1 :] = 0
    norm = np.linalg.norm(out)
    if norm < NULL_NORM:
        raise NullState(f"no amplitude on Fock states 0..{n_exp}")
    out /= norm
    return Truncated(out, float(abs(np.vdot(out, psi)) ** 2))


def autocorrelation(U: np.ndarray, psi: np.ndarray, M: int) -> np.ndarray:
    """C(m) = <psi|U^m psi> for m = 0..M."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return trajectory(U, psi, M) @ np.conj(psi)


def cross_correlation(U: np.ndarray, psi: np.ndarray, phi_b: np.ndarray, M: int) -> np.ndarray:
    """P(m) = |<phi_b|U^m psi>|^2 for m = 0..M."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return np.abs(trajectory(U, psi, M) @ np.conj(phi_b)) ** 2


def spectral_autocorrelation(decomp: FloquetDecomposition, psi: np.ndarray, M: int) -> np.ndarray:
    """C(m) from the Floquet sum; cheap for long records."""
    w = floquet_weights(decomp, psi)
    m = np.arange(M + 1)
    return np.exp(-1j * np.outer(m, decomp.eps)) @ w


def spectral_function(C: np.ndarray, t_M: int, omega: np.ndarray | None = None, n_omega: int = 4096):
    """|S(omega)| with S = sum_{m=-t_M}^{t_M} C(m) exp(i omega m), C(-m) = C(m)*.

    Returns (omega, |S|, omega0) where omega0 is the argmax.
    """
    if t_M > len(C) - 1:
        raise ValueError("t_M exceeds the autocorrelation record")
    if omega is None:
        omega = np.linspace(0, 2 * np.pi, n_omega, endpoint=False)
    m = np.arange(1, t_M + 1)
    S = C[0].real + 2 * np.real(np.exp(1j * np.outer(omega, m)) @ C[1 : t_M + 1])
    S = np.abs(S)
    return omega, S, float(omega[np.argmax(S)])


def spectral_peaks(omega: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Peak positions of a periodic |S| sampled on a full circle, tallest first."""
    idx = np.nonzero((S > np.roll(S, 1)) & (S >= np.roll(S, -1)))[0]
    return omega[idx[np.argsort(S[idx])[::-1]]]


def first_maximum(C: np.ndarray) -> int:
    """First strict local maximum of |C(m)|^2 for m >= 1 (smallest m on ties)."""
    a = np.abs(C) ** 2
    for m in range(1, len(a) - 1):
        if a[m] > a[m - 1] and a[m] >= a[m + 1]:
            return m
    raise EmptySelection("autocorrelation has no interior maximum; extend M_corr")


def _auto_a_sta(w_window: np.ndarray, kept_norm: float) -> float:
    """Largest threshold whose kept modes still carry ``kept_norm`` of the weight."""
    if w_window.sum() < kept_norm:
        return 0.0
    srt = np.sort(w_window)[::-1]
    k = int(np.searchsorted(np.cumsum(srt), kept_norm))
    # strict '>' selection: set threshold just below the k-th weight
    return float(np.nextafter(srt[k], 0.0))


def stabilized_state(
    decomp: FloquetDecomposition, phi_a: np.ndarray, spec: StabilizationSpec = StabilizationSpec()
) -> SynthesisResult:
    """Project phi_a onto the Floquet modes inside the spectral window.

    Modes are kept when their quasi-energy is within pi/t_M of omega0 and
    their weight exceeds a_sta. Missing window parameters are derived from
    the autocorrelation record of phi_a.
    """
    c = decomp.components(phi_a)
    w = np.abs(c) ** 2
    flags = set()
    C = spectral_autocorrelation(decomp, phi_a, spec.M_corr)
    t_M = spec.t_M if spec.t_M is not None else first_maximum(C)
    omega0 = spec.omega0
    if omega0 is None:
        omega, S, _ = spectral_function(C, t_M, n_omega=spec.n_omega)
        peaks = spectral_peaks(omega, S)
        omega0 = float(peaks[min(spec.peak_index, len(peaks) - 1)])
    window = circular_distance(decomp.eps, omega0) < np.pi / t_M
    a_sta = spec.a_sta
    if a_sta is None:
        a_sta = _auto_a_sta(w[window], spec.kept_norm)
        if w[window].sum() < spec.kept_norm:
            flags.add("LowKeptNorm")
    sel = window & (w > a_sta)
    idx = np.nonzero(sel)[0]
    if len(idx) == 0:
        raise EmptySelection("no Floquet mode in the window passes a_sta; lower a_sta")
    state = decomp.modes[:, idx] @ c[idx]
    state = state / np.linalg.norm(state)
    info = {
        "t_M": int(t_M),
        "omega0": float(omega0),
        "a_sta": float(a_sta),
        "kept_norm": float(w[idx].sum()),
        "n_selected": int(len(idx)),
        "dominant_fraction": float(w[idx].max() / w[idx].sum()),
    }
    return SynthesisResult(state, idx, flags, info)


def short_time_filter_state(
    decomp: FloquetDecomposition, phi_a: np.ndarray, t_M: int, omega0: float
) -> np.ndarray:
    """Normalized sum_{m=-t_M}^{t_M} U^m phi_a exp(i omega0 m), in the Floquet basis."""
    c = decomp.components(phi_a)
    m = np.arange(-t_M, t_M + 1)
    kernel = np.exp(1j * np.outer(omega0 - decomp.eps, m)).sum(1)
    g = decomp.modes @ (kernel * c)
    return g / np.linalg.norm(g)


@dataclass(frozen=True)
class Doublet:
    i: int
    j: int
    splitting: float
    weight: float

    @property
    def tunneling_period(self) -> float:
        return 2 * np.pi / self.splitting


@dataclass(frozen=True)
class DoubletSet:
    pairs: tuple
    odd_leftover: bool = False

    @property
    def total_weight(self) -> float:
        return float(sum(d.weight for d in self.pairs))

    def __len__(self):
        return len(self.pairs)


def find_doublets(
    decomp: FloquetDecomposition, phi_a: np.ndarray, weight_floor: float, split_ceiling: float
) -> DoubletSet:
    """Greedy nearest-quasi-energy pairing of the modes carrying phi_a.

    Pairs are taken in order of increasing splitting among modes with weight
    above ``weight_floor``; sorted by combined weight, heaviest first.
    """
    if not 0 < weight_floor < 1 or not 0 < split_ceiling < np.pi:
        raise ValueError("thresholds out of range")
    w = floquet_weights(decomp, phi_a)
    heavy = np.nonzero(w > weight_floor)[0]
    cand = []
    for a in range(len(heavy)):
        for b in range(a + 1, len(heavy)):
            i, j = heavy[a], heavy[b]
            d = float(circular_distance(decomp.eps[i], decomp.eps[j]))
            if 0 < d < split_ceiling:
                cand.append((d, int(i), int(j)))
    cand.sort()
    used: set[int] = set()
    pairs = []
    for d, i, j in cand:
        if i in used or j in used:
            continue
        used.update((i, j))
        pairs.append(Doublet(i, j, d, float(w[i] + w[j])))
    pairs.sort(key=lambda p: -p.weight)
    return DoubletSet(tuple(pairs), odd_leftover=len(used) < len(heavy))


def doublet_state(decomp: FloquetDecomposition, phi_a: np.ndarray, doublet: Doublet) -> np.ndarray:
    """phi_a projected onto one doublet and normalized."""
    c = decomp.components(phi_a)
    idx = [doublet.i, doublet.j]
    state = decomp.modes[:, idx] @ c[idx]
    norm = np.linalg.norm(state)
    if norm < NULL_NORM:
        raise NullState("state has no weight on the doublet")
    return state / norm
