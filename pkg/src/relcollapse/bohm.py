"""Guidance-equation trajectories.

One-dimensional Schrödinger packets (units with hbar = 1) are analytic:
free Gaussians, plane waves and finite superpositions of those.  Dirac
packets in 1+1D are superpositions of positive-energy plane waves with the
representation ``γ⁰ = σ_z``, ``γ¹ = iσ_y``, so the current is
``j⁰ = ψ†ψ`` and ``j¹ = ψ†σ_xψ``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .spacetime import Event, FlatFamily, minkowski_dot

__all__ = [
    "GaussianPacket",
    "PlaneWave",
    "Superposition",
    "PACKET_FAMILIES",
    "packet_family",
    "DiracPacket",
    "Trajectory",
    "NearNode",
    "NodeEncounter",
    "ZeroDensity",
    "LeafSkipped",
    "NODE_RTOL",
    "velocity",
    "integrate",
    "integrate_ensemble",
    "sample_density",
    "density_cdf",
    "equivariance_test",
    "dirac_current",
    "bohm_dirac_velocity",
    "bohm_dirac_trajectory",
    "hbdm_step",
    "hbdm_trajectories",
    "struyve_frame",
]

NODE_RTOL = 1e-10


class NearNode(ValueError):
    pass


class NodeEncounter(RuntimeError):
    pass


class ZeroDensity(ValueError):
    pass


class LeafSkipped(ValueError):
    pass


# ------------------------------------------------------------- Schrödinger


@dataclass(frozen=True)
class GaussianPacket:
    """Free Gaussian with initial centre, mean momentum and position spread."""

    center: float = 0.0
    momentum: float = 0.0
    width: float = 1.0
    mass: float = 1.0

    def _spread(self, t):
        return 1.0 + 1j * np.asarray(t, dtype=float) / (2 * self.mass * self.width**2)

    def psi(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        d = self._spread(t)
        y = x - self.center
        expo = (-(y**2) / (4 * self.width**2) + 1j * self.momentum * y - 1j * self.momentum**2 * t / (2 * self.mass)) / d
        return (2 * np.pi * self.width**2) ** -0.25 * d**-0.5 * np.exp(expo)

    def dpsi(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        d = self._spread(t)
        return self.psi(x, t) * (-(x - self.center) / (2 * self.width**2) + 1j * self.momentum) / d

    def sigma(self, t=0.0) -> float:
        """Position spread at time ``t``."""
        return float(self.width * abs(self._spread(t)))

    def peak(self, t=0.0) -> float:
        return float((2 * np.pi * self.width**2) ** -0.25 * abs(self._spread(t)) ** -0.5)

    def support(self, t=0.0, k: float = 12.0) -> tuple[float, float]:
        mid = self.center + self.momentum * t / self.mass
        return mid - k * self.sigma(t), mid + k * self.sigma(t)


@dataclass(frozen=True)
class PlaneWave:
    """``exp(i(px - p² t / 2m))``; not normalizable."""

    momentum: float = 1.0
    mass: float = 1.0

    def psi(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        return np.exp(1j * (self.momentum * x - self.momentum**2 * t / (2 * self.mass)))

    def dpsi(self, x, t=0.0):
        return 1j * self.momentum * self.psi(x, t)

    def peak(self, t=0.0) -> float:
        return 1.0

    def support(self, t=0.0, k: float = 12.0):
        raise ValueError("a plane wave has no finite support")


def _gaussian_overlap(a: GaussianPacket, b: GaussianPacket) -> complex:
    """``<a|b>`` at t = 0 in closed form."""
    A = 1 / (4 * a.width**2) + 1 / (4 * b.width**2)
    B = a.center / (2 * a.width**2) + b.center / (2 * b.width**2) + 1j * (b.momentum - a.momentum)
    C = (
        -(a.center**2) / (4 * a.width**2)
        - b.center**2 / (4 * b.width**2)
        + 1j * (a.momentum * a.center - b.momentum * b.center)
    )
    pref = (2 * np.pi * a.width**2) ** -0.25 * (2 * np.pi * b.width**2) ** -0.25
    return complex(pref * np.sqrt(np.pi / A) * np.exp(B * B / (4 * A) + C))


@dataclass(frozen=True, eq=False)
class Superposition:
    """Normalized finite superposition of Gaussian packets of equal mass."""

    components: tuple
    coefficients: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        coefs = np.asarray(self.coefficients, dtype=complex)
        if len(comps) != coefs.size or not comps:
            raise ValueError("need one coefficient per component")
        if len({c.mass for c in comps}) != 1:
            raise ValueError("components must share one mass")
        gram = np.array([[_gaussian_overlap(a, b) for b in comps] for a in comps])
        norm2 = float(np.real(coefs.conj() @ gram @ coefs))
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "coefficients", tuple(coefs / math.sqrt(norm2)))

    @property
    def mass(self) -> float:
        return self.components[0].mass

    def psi(self, x, t=0.0):
        return sum(c * g.psi(x, t) for c, g in zip(self.coefficients, self.components))

    def dpsi(self, x, t=0.0):
        return sum(c * g.dpsi(x, t) for c, g in zip(self.coefficients, self.components))

    def peak(self, t=0.0) -> float:
        return float(sum(abs(c) * g.peak(t) for c, g in zip(self.coefficients, self.components)))

    def support(self, t=0.0, k: float = 12.0):
        bounds = [g.support(t, k) for g in self.components]
        return min(b[0] for b in bounds), max(b[1] for b in bounds)


def velocity(psi, q, t=0.0, strict: bool = True):
    """Guidance velocity ``Im(ψ'/ψ) / m`` at position(s) ``q``."""
    q = np.asarray(q, dtype=float)
    value = psi.psi(q, t)
    if strict:
        small = np.abs(value) < NODE_RTOL * psi.peak(t)
        if np.any(small):
            where = q[small] if q.ndim else q
            raise NearNode(f"wave function nearly vanishes at x = {np.ravel(where)[0]:.6g}, t = {t:.6g}")
    return np.imag(psi.dpsi(q, t) / value) / psi.mass


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples ``(parameter, position)``; for world lines the position is an Event."""

    particle: int
    params: np.ndarray
    positions: np.ndarray
    error_estimate: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.params, dtype=float)
        if np.any(np.diff(p) <= 0):
            raise ValueError("trajectory parameter must increase strictly")
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))


def _rk4(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(psi, q0: float, t0: float, t1: float, step: float = 1e-2, tol: float = 1e-10, min_step: float = 1e-12) -> Trajectory:
    """Adaptive RK4 trajectory from ``(t0, q0)`` to ``t1``.

    Each step is compared with two half steps; the step is halved until the
    difference meets ``tol`` and the Richardson-corrected value is kept.  The
    accumulated local error estimates are reported on the trajectory.
    """
    if t1 == t0:
        return Trajectory(0, [t0], [q0])
    direction = 1.0 if t1 > t0 else -1.0

    def f(t, y):
        try:
            return velocity(psi, y, t)
        except NearNode as exc:
            raise NodeEncounter(f"trajectory from x0 = {q0:.6g} ran into a node: {exc}") from None

    ts, xs = [t0], [float(q0)]
    t, y, h = t0, float(q0), step
    total_err = 0.0
    while direction * (t1 - t) > 0:
        h = min(h, abs(t1 - t))
        hs = direction * h
        full = _rk4(f, t, y, hs)
        half = _rk4(f, t + hs / 2, _rk4(f, t, y, hs / 2), hs / 2)
        err = abs(half - full) / 15
        if err > tol and h > min_step:
            h /= 2
            continue
        if err > tol:
            raise NodeEncounter(f"step control failed near x = {y:.6g}, t = {t:.6g}")
        y = float(half + (half - full) / 15)
        t = t + hs
        total_err += err
        ts.append(t)
        xs.append(y)
        if err < tol / 64:
            h = min(2 * h, step)
    return Trajectory(0, ts if direction > 0 else ts[::-1], xs if direction > 0 else xs[::-1], total_err)


def integrate_ensemble(psi, q0, t0: float, t1: float, steps: int = 200) -> tuple[np.ndarray, float]:
    """Fixed-step RK4 for many starting points at once.

    Returns the end positions and the largest step-doubling error estimate
    (difference from a run with half the step, divided by 15).
    """

    def f(t, y):
        return velocity(psi, y, t, strict=False)

    def run(n):
        y = np.asarray(q0, dtype=float).copy()
        h = (t1 - t0) / n
        for k in range(n):
            y = _rk4(f, t0 + k * h, y, h)
        return y

    coarse, fine = run(steps), run(2 * steps)
    return fine, float(np.max(np.abs(fine - coarse)) / 15) if fine.size else 0.0


def _density_grid(psi, t, points: int = 40001):
    lo, hi = psi.support(t)
    xs = np.linspace(lo, hi, points)
    rho = np.abs(psi.psi(xs, t)) ** 2
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(xs))])
    return xs, cdf / cdf[-1]


PACKET_FAMILIES = ("gaussian", "interference")


def packet_family(name: str):
    """The shipped example packets: a moving Gaussian, and two colliding ones."""
    if name == "gaussian":
        return GaussianPacket(0.0, 1.0, 1.0)
    if name == "interference":
        return Superposition((GaussianPacket(-3.0, 1.5, 1.0), GaussianPacket(3.0, -1.5, 1.0)), (1.0, 1.0))
    raise ValueError(f"unknown packet family {name!r}")


def density_cdf(psi, t=0.0):
    """Cumulative distribution function of ``|ψ(·, t)|²`` (numerical, on a fine grid)."""
    xs, cdf = _density_grid(psi, t)
    return lambda x: np.interp(x, xs, cdf, left=0.0, right=1.0)


def sample_density(psi, n: int, t=0.0, rng=None) -> np.ndarray:
    """Draw positions from ``|ψ(·, t)|²`` by inverse-CDF sampling."""
    rng = np.random.default_rng(rng)
    xs, cdf = _density_grid(psi, t)
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return np.interp(rng.random(n), cdf[keep], xs[keep])


def equivariance_test(psi, n_samples: int = 10000, t1: float = 1.0, seed=0, t0: float = 0.0, steps: int = 200) -> dict:
    """Transport ``|ψ(t0)|²``-distributed points to ``t1`` and compare with ``|ψ(t1)|²``.

    Returns the Kolmogorov-Smirnov statistic, its p-value and the
    integration error estimate.
    """
    rng = np.random.default_rng(seed)
    q0 = sample_density(psi, n_samples, t0, rng)
    if t1 == t0:
        q1, err = q0, 0.0
    else:
        q1, err = integrate_ensemble(psi, q0, t0, t1, steps)
    res = stats.kstest(q1, density_cdf(psi, t1))
    return {"statistic": float(res.statistic), "pvalue": float(res.pvalue), "integration_error": err}


# -------------------------------------------------------------------- Dirac


@dataclass(frozen=True, eq=False)
class DiracPacket:
    """Superposition of positive-energy plane-wave spinors ``u(p) e^{-i(Et - px)}``.

    Spinors are normalized to ``u†u = 1``.
    """

    momenta: tuple
    amplitudes: tuple
    mass: float = 1.0

    def __post_init__(self):
        p = tuple(float(v) for v in np.atleast_1d(self.momenta))
        a = tuple(complex(v) for v in np.atleast_1d(self.amplitudes))
        if len(p) != len(a) or not p:
            raise ValueError("need one amplitude per momentum")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        object.__setattr__(self, "momenta", p)
        object.__setattr__(self, "amplitudes", a)

    @property
    def energies(self) -> np.ndarray:
        p = np.array(self.momenta)
        return np.sqrt(p * p + self.mass**2)

    def spinors(self) -> np.ndarray:
        p, e = np.array(self.momenta), self.energies
        return np.stack([e + self.mass, p]) / np.sqrt(2 * e * (e + self.mass))

    def psi(self, x, t=0.0) -> np.ndarray:
        """Spinor field with shape ``(2,) + broadcast(x, t).shape``."""
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        p, e = np.array(self.momenta), self.energies
        phase = np.exp(-1j * (np.multiply.outer(t, e) - np.multiply.outer(x, p)))
        coef = phase * np.array(self.amplitudes)
        u = self.spinors()
        return np.stack([coef @ u[0], coef @ u[1]])

    def boosted(self, rapidity: float) -> "DiracPacket":
        """The packet as seen from a frame moving with ``rapidity``."""
        p, e = np.array(self.momenta), self.energies
        return DiracPacket(tuple(p * math.cosh(rapidity) - e * math.sinh(rapidity)), self.amplitudes, self.mass)


def dirac_current(psi: DiracPacket, x, t=0.0) -> tuple[np.ndarray, np.ndarray]:
    s = psi.psi(x, t)
    j0 = np.abs(s[0]) ** 2 + np.abs(s[1]) ** 2
    j1 = 2 * np.real(np.conj(s[0]) * s[1])
    return j0, j1


def bohm_dirac_velocity(psi: DiracPacket, x, t=0.0):
    """``j¹ / j⁰``; raises :class:`ZeroDensity` where ``ψ†ψ`` vanishes."""
    j0, j1 = dirac_current(psi, x, t)
    if np.any(j0 <= 1e-300):
        raise ZeroDensity("Dirac density vanishes at the evaluation point")
    v = j1 / j0
    if np.any(np.abs(v) > 1 + 1e-12):
        raise AssertionError("Dirac current outside the light cone")
    return np.clip(v, -1.0, 1.0)


def bohm_dirac_trajectory(psi: DiracPacket, x0: float, t0: float, t1: float, steps: int = 200) -> Trajectory:
    h = (t1 - t0) / steps
    ts, xs = [t0], [float(x0)]
    y = float(x0)
    for k in range(steps):
        y = float(_rk4(lambda t, z: bohm_dirac_velocity(psi, z, t), t0 + k * h, y, h))
        ts.append(t0 + (k + 1) * h)
        xs.append(y)
    return Trajectory(0, ts, xs)


def _world_line_rhs(psi: DiracPacket, n: np.ndarray):
    def f(s, X):
        j0, j1 = dirac_current(psi, X[1], X[0])
        if j0 <= 1e-300:
            raise ZeroDensity("Dirac density vanishes on the world line")
        nj = n[0] * j0 - n[1] * j1
        return np.array([j0, j1]) / nj

    return f


def hbdm_step(
    foliation: FlatFamily,
    packets: Sequence[DiracPacket],
    crossings: Sequence[Event],
    to_offset: float | None = None,
    substeps: int = 20,
) -> list[Event]:
    """Advance each particle's crossing to the next leaf of a flat foliation.

    The world line of particle k runs parallel to its own current (for a
    product wave function the other factors only rescale it) and is
    parametrized by the leaf label ``s = n·X``.  ``to_offset`` defaults to the
    next registered leaf; jumping past a registered leaf raises
    :class:`LeafSkipped`.
    """
    n = np.array(foliation.normal)
    if np.any(n[2:] != 0):
        raise ValueError("world lines are restricted to 1+1 dimensions")
    levels = [foliation.level(e) for e in crossings]
    s0 = levels[0]
    if len(packets) != len(crossings):
        raise ValueError("need one crossing per packet")
    if any(abs(lv - s0) > 1e-9 * max(1.0, abs(s0)) for lv in levels):
        raise ValueError("crossings do not lie on a common leaf")
    ahead = [o for o in foliation.offsets if o > s0 + 1e-12 * max(1.0, abs(s0))]
    if to_offset is None:
        if not ahead:
            raise ValueError("no leaf after the current one")
        to_offset = ahead[0]
    if to_offset <= s0:
        raise ValueError("target leaf must lie to the future")
    if any(o < to_offset - 1e-12 * max(1.0, abs(to_offset)) for o in ahead):
        raise LeafSkipped(f"step from leaf {s0:.6g} to {to_offset:.6g} jumps over a registered leaf")
    h = (to_offset - s0) / substeps
    out = []
    for psi, e in zip(packets, crossings):
        f = _world_line_rhs(psi, n)
        X = np.array([e.t, e.x])
        for k in range(substeps):
            X = _rk4(f, s0 + k * h, X, h)
        out.append(Event(X[0], X[1]))
    return out


def hbdm_trajectories(
    foliation: FlatFamily,
    packets: Sequence[DiracPacket],
    crossings: Sequence[Event],
    substeps: int = 20,
) -> list[Trajectory]:
    """World lines through every registered leaf after the starting one.

    Each trajectory stores the leaf labels as its parameter and ``(t, x)``
    pairs as positions.
    """
    s = [foliation.level(crossings[0])]
    pts = [[(e.t, e.x)] for e in crossings]
    current = list(crossings)
    for offset in foliation.offsets:
        if offset <= s[-1] + 1e-12 * max(1.0, abs(s[-1])):
            continue
        current = hbdm_step(foliation, packets, current, offset, substeps)
        s.append(offset)
        for k, e in enumerate(current):
            pts[k].append((e.t, e.x))
    return [Trajectory(k, s, pts[k]) for k in range(len(packets))]


def struyve_frame(packets: Sequence[DiracPacket]) -> np.ndarray:
    """Unit 4-vector along the total mean energy-momentum of the packets.

    Each packet contributes ``Σ |a_k|² (E_k, p_k) / Σ |a_k|²``.
    """
    total = np.zeros(4)
    for psi in packets:
        w = np.abs(np.array(psi.amplitudes)) ** 2
        w = w / w.sum()
        total[0] += float(w @ psi.energies)
        total[1] += float(w @ np.array(psi.momenta))
    norm2 = minkowski_dot(total, total)
    if norm2 <= 0:
        raise ValueError("total energy-momentum is not timelike")
    return total / math.sqrt(norm2)
