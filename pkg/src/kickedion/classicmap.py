"""Classical stroboscopic map of the kicked harmonic oscillator.

One period is a sinusoidal momentum impulse followed by a rigid clockwise
rotation of the phase plane by ``nu_tau``:

    p+ = p + (sqrt(2) k / pi) sin(4 pi x)
    (x', p') = (x cos nu_tau + p+ sin nu_tau, -x sin nu_tau + p+ cos nu_tau)

Units match ``fockcore`` (x in wavelengths, p in m nu wavelengths), so the
map is the classical limit of ``floquet.one_period_operator`` with the
kick-then-free ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonRotational
from .fockcore import PhasePoint


@dataclass(frozen=True)
class ClassicalParams:
    k: float
    nu_tau: float

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not np.isfinite(self.nu_tau):
            raise ValueError("nu_tau must be finite")

    @property
    def impulse(self) -> float:
        return np.sqrt(2) * self.k / np.pi


def kick_map_step(pt, params: ClassicalParams):
    """One stroboscopic step. Accepts a PhasePoint or arrays of x and p."""
    x, p = pt
    c, s = np.cos(params.nu_tau), np.sin(params.nu_tau)
    p = p + params.impulse * np.sin(4 * np.pi * x)
    xn, pn = x * c + p * s, -x * s + p * c
    if np.ndim(xn) == 0:
        return PhasePoint(float(xn), float(pn))
    return xn, pn


def inverse_map_step(pt, params: ClassicalParams):
    x, p = pt
    c, s = np.cos(params.nu_tau), np.sin(params.nu_tau)
    xb, pb = x * c - p * s, x * s + p * c
    pb = pb - params.impulse * np.sin(4 * np.pi * xb)
    if np.ndim(xb) == 0:
        return PhasePoint(float(xb), float(pb))
    return xb, pb


def map_power(pt, params: ClassicalParams, m: int):
    for _ in range(m):
        pt = kick_map_step(pt, params)
    return pt


def jacobian(pt, params: ClassicalParams, m: int = 1, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of the m-fold map."""
    x, p = pt
    J = np.empty((2, 2))
    for j, (dx, dp) in enumerate(((h, 0.0), (0.0, h))):
        fp = map_power(PhasePoint(x + dx, p + dp), params, m)
        fm = map_power(PhasePoint(x - dx, p - dp), params, m)
        J[:, j] = (np.subtract(fp, fm)) / (2 * h)
    return J


@dataclass(frozen=True)
class Orbit:
    points: np.ndarray  # shape (steps + 1, 2)
    params: ClassicalParams

    def __len__(self):
        return len(self.points)

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def p(self):
        return self.points[:, 1]


def stroboscopic_orbit(pt0, params: ClassicalParams, steps: int) -> Orbit:
    if steps < 0:
        raise ValueError("steps must be >= 0")
    pts = np.empty((steps + 1, 2))
    x, p = float(pt0[0]), float(pt0[1])
    pts[0] = x, p
    c, s = np.cos(params.nu_tau), np.sin(params.nu_tau)
    g = params.impulse
    for i in range(1, steps + 1):
        p = p + g * np.sin(4 * np.pi * x)
        x, p = x * c + p * s, -x * s + p * c
        pts[i] = x, p
    return Orbit(pts, params)


def winding_number(orbit: Orbit, center=PhasePoint(0.0, 0.0)) -> float:
    """Mean clockwise angular advance per step around ``center``, over 2*pi, in [0, 1).

    The cumulative angle is fitted linearly against the step index. Raises
    NonRotational if the per-step advance changes sign or the orbit passes
    through the center, i.e. the angle cannot be unwrapped monotonically.
    """
    if len(orbit) < 2:
        raise ValueError("orbit too short")
    dx = orbit.x - center[0]
    dp = orbit.p - center[1]
    if np.any(np.hypot(dx, dp) == 0):
        raise NonRotational("orbit passes through the center")
    theta = np.arctan2(dp, dx)
    step = -np.angle(np.exp(1j * np.diff(theta)))
    # all advances in (0, pi) or all in (-pi, 0): otherwise the winding is ambiguous
    if not (np.all(step > 0) or np.all(step < 0)):
        raise NonRotational("angle sequence is not monotonically unwrappable")
    if np.all(step < 0):
        step = np.mod(step, 2 * np.pi)
    cum = np.concatenate([[0.0], np.cumsum(step)])
    m = np.arange(len(cum))
    slope = np.polyfit(m, cum, 1)[0]
    return float(np.mod(slope / (2 * np.pi), 1.0))


def portrait(params: ClassicalParams, seeds, steps: int) -> np.ndarray:
    """Concatenated orbits as rows (x, p, seed_index)."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seeds must be nonempty")
    blocks = []
    for i, s in enumerate(seeds):
        pts = stroboscopic_orbit(s, params, steps).points
        blocks.append(np.column_stack([pts, np.full(len(pts), i, dtype=float)]))
    return np.vstack(blocks)


@dataclass(frozen=True)
class PeriodicPoint:
    x: float
    p: float
    period: int
    residual: float
    trace: float

    @property
    def stable(self) -> bool:
        return abs(self.trace) < 2

    @property
    def radius(self) -> float:
        return float(np.hypot(self.x, self.p))

    @property
    def angle(self) -> float:
        return float(np.mod(np.arctan2(self.p, self.x), 2 * np.pi))


def newton_periodic_point(
    seed, params: ClassicalParams, period: int, tol: float = 1e-10, max_iter: int = 100
) -> PeriodicPoint | None:
    """Damped Newton on F^period(z) - z with finite-difference Jacobians."""
    z = np.array(seed, dtype=float)
    for _ in range(max_iter):
        g = np.subtract(map_power(PhasePoint(*z), params, period), z)
        res = float(np.linalg.norm(g))
        if res < tol:
            J = jacobian(PhasePoint(*z), params, period)
            return PeriodicPoint(float(z[0]), float(z[1]), period, res, float(np.trace(J)))
        A = jacobian(PhasePoint(*z), params, period) - np.eye(2)
        try:
            dz = np.linalg.solve(A, -g)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-4:
            zn = z + lam * dz
            gn = np.subtract(map_power(PhasePoint(*zn), params, period), zn)
            if np.linalg.norm(gn) < res:
                break
            lam /= 2
        else:
            return None
        z = zn
    return None


def find_periodic_points(
    params: ClassicalParams,
    period: int,
    radii=np.linspace(0.02, 0.4, 20),
    n_angles: int = 36,
    tol: float = 1e-10,
    min_radius: float = 1e-6,
) -> list[PeriodicPoint]:
    """Periodic points of the given period found from a polar grid of seeds.

    Points whose minimal period is a proper divisor of ``period`` are dropped.
    """
    found: list[PeriodicPoint] = []
    for r in radii:
        for t in np.linspace(0, 2 * np.pi, n_angles, endpoint=False):
            pp = newton_periodic_point((r * np.cos(t), r * np.sin(t)), params, period, tol)
            if pp is None or pp.radius < min_radius:
                continue
            if any(np.hypot(pp.x - q.x, pp.p - q.p) < 1e-7 for q in found):
                continue
            z = PhasePoint(pp.x, pp.p)
            if any(
                np.hypot(*np.subtract(map_power(z, params, d), z)) < 1e-8
                for d in range(1, period)
                if period % d == 0
            ):
                continue
            found.append(pp)
    return sorted(found, key=lambda q: (round(q.radius, 8), q.angle))
