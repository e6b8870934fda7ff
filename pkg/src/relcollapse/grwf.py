"""GRW flash dynamics.

Non-relativistic part: N distinguishable particles on a ring of M sites
with spacing ``dx``.  A hit on particle ``j`` centred at site ``s`` multiplies
the wave by ``sqrt(G_s(x_j))`` where ``G_s`` is a periodic Gaussian of
standard deviation ``alpha`` normalized so that ``Σ_s G_s(x) = 1``; the hit
density is the squared norm of the result.

Relativistic part (1+1D, one particle): the flash-history density with
Gaussian collapses on future hyperboloids and a packet family that is
Gaussian in the rapidity coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .spacetime import (
    Event,
    Hyperboloid,
    boost,
    hyperboloid_arc_distance,
    rapidity_on_hyperboloid,
)

__all__ = [
    "LatticeWave",
    "Flash",
    "GrwParams",
    "InteractionStep",
    "RapidityPacket",
    "TooLarge",
    "hit_kernel",
    "hit_densities",
    "hit",
    "sample_flashes",
    "joint_flash_distribution",
    "mass_density",
    "conditional_hop_step",
    "rgrwf_density",
    "rgrwf_grid",
    "rgrwf_lightcone_quadrature",
    "boost_history",
    "MAX_ENUMERATION_ENTRIES",
]

MAX_ENUMERATION_ENTRIES = 1 << 22


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GrwParams:
    lam: float = 0.5
    alpha: float = 1.5

    def __post_init__(self):
        if not (self.lam > 0 and self.alpha > 0):
            raise ValueError("rate and localization width must be positive")


@dataclass(frozen=True, eq=False)
class LatticeWave:
    """Wave function of ``particles`` particles on a ring of ``sites`` sites."""

    amplitudes: np.ndarray
    dx: float = 1.0

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.ndim == 0 or len(set(a.shape)) != 1:
            raise ValueError("amplitudes must have shape (M,) * N")
        n = np.linalg.norm(a)
        if abs(n - 1.0) > 1e-10:
            raise ValueError(f"lattice wave must be normalized (norm {n:.6g})")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, amplitudes, dx: float = 1.0) -> "LatticeWave":
        a = np.asarray(amplitudes, dtype=complex)
        return cls(a / np.linalg.norm(a), dx)

    @classmethod
    def product(cls, *factors, dx: float = 1.0) -> "LatticeWave":
        out = np.array(1.0 + 0j)
        for f in factors:
            f = np.asarray(f, dtype=complex)
            out = np.multiply.outer(out, f / np.linalg.norm(f))
        return cls(out, dx)

    @property
    def particles(self) -> int:
        return self.amplitudes.ndim

    @property
    def sites(self) -> int:
        return self.amplitudes.shape[0]

    def marginal(self, j: int) -> np.ndarray:
        """Position distribution of particle ``j`` (0-based)."""
        p = np.abs(self.amplitudes) ** 2
        axes = tuple(k for k in range(self.particles) if k != j)
        return p.sum(axis=axes) if axes else p


@dataclass(frozen=True)
class Flash:
    particle: int
    t: float
    site: int
    x: float


@dataclass(frozen=True, eq=False)
class InteractionStep:
    """A unitary on the full lattice space applied at lab time ``time``."""

    time: float
    unitary: np.ndarray


def hit_kernel(sites: int, alpha: float, dx: float = 1.0) -> np.ndarray:
    """``G[s, x]``: periodic Gaussian weights with every column summing to one."""
    idx = np.arange(sites)
    diff = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(diff, sites - diff) * dx
    g = np.exp(-(dist**2) / (2 * alpha**2))
    return g / g.sum(axis=0, keepdims=True)


def hit_densities(w: LatticeWave, j: int, p: GrwParams) -> np.ndarray:
    """Probability of each hit centre for a hit on particle ``j``."""
    return hit_kernel(w.sites, p.alpha, w.dx) @ w.marginal(j)


def _apply_factor(amps: np.ndarray, j: int, factor: np.ndarray) -> np.ndarray:
    shape = [1] * amps.ndim
    shape[j] = factor.size
    return amps * factor.reshape(shape)


def hit(w: LatticeWave, j: int, site: int, p: GrwParams = GrwParams()):
    """Hit particle ``j`` at ``site``; returns ``(density, collapsed wave)``."""
    g = hit_kernel(w.sites, p.alpha, w.dx)[site]
    out = _apply_factor(w.amplitudes, j, np.sqrt(g))
    density = float(np.sum(np.abs(out) ** 2))
    if density <= 0:
        raise ValueError("hit centre has zero density")
    return density, LatticeWave(out / math.sqrt(density), w.dx)


def _apply_steps(amps, steps, t_from, t_to):
    for st in steps:
        if t_from < st.time <= t_to:
            amps = (st.unitary @ amps.reshape(-1)).reshape(amps.shape)
    return amps


def sample_flashes(
    w0: LatticeWave,
    horizon: float,
    p: GrwParams = GrwParams(),
    seed=0,
    steps: Sequence[InteractionStep] = (),
) -> list[Flash]:
    """Sample the hitting process up to ``horizon``.

    Each particle carries an independent Poisson clock of rate ``p.lam``;
    free evolution is the identity apart from the optional ``steps``.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rng = np.random.default_rng(seed)
    arrivals = []
    for j in range(w0.particles):
        t = 0.0
        while True:
            t += rng.exponential(1.0 / p.lam)
            if t > horizon:
                break
            arrivals.append((t, j))
    arrivals.sort()
    kernel = hit_kernel(w0.sites, p.alpha, w0.dx)
    amps = np.array(w0.amplitudes)
    flashes = []
    now = 0.0
    for t, j in arrivals:
        amps = _apply_steps(amps, steps, now, t)
        now = t
        prob = np.abs(amps) ** 2
        axes = tuple(k for k in range(amps.ndim) if k != j)
        marg = prob.sum(axis=axes) if axes else prob
        dens = kernel @ marg
        site = int(rng.choice(w0.sites, p=dens / dens.sum()))
        amps = _apply_factor(amps, j, np.sqrt(kernel[site]))
        amps = amps / np.linalg.norm(amps)
        flashes.append(Flash(j, t, site, site * w0.dx))
    return flashes


def joint_flash_distribution(
    w0: LatticeWave,
    schedule: Sequence[tuple[int, float]],
    p: GrwParams = GrwParams(),
    steps: Sequence[InteractionStep] = (),
) -> np.ndarray:
    """Exact joint distribution of hit centres for a fixed schedule of hits.

    ``schedule`` lists ``(particle, time)`` in time order.  The result has
    shape ``(M,) * len(schedule)``; entry ``[s1, s2, ...]`` is the probability
    that the k-th hit is centred at ``s_k``.
    """
    times = [t for _, t in schedule]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("schedule must be sorted by time")
    n, m = len(schedule), w0.sites
    if n > 8 or m > 8 or (m**n) * w0.amplitudes.size > MAX_ENUMERATION_ENTRIES:
        raise TooLarge(f"{n} hits on {m} sites is too large for exact enumeration")
    kernel = np.sqrt(hit_kernel(m, p.alpha, w0.dx))
    batch = np.array(w0.amplitudes)[None, ...]
    now = -math.inf
    for j, t in schedule:
        for st in steps:
            if now < st.time <= t:
                flat = batch.reshape(batch.shape[0], -1) @ st.unitary.T
                batch = flat.reshape(batch.shape)
        now = t
        fshape = [1, m] + [1] * w0.particles
        fshape[2 + j] = m
        batch = batch[:, None, ...] * kernel.reshape(fshape)
        batch = batch.reshape((-1,) + w0.amplitudes.shape)
    probs = np.sum(np.abs(batch.reshape(batch.shape[0], -1)) ** 2, axis=1)
    return probs.reshape((m,) * n) if n else probs.reshape(())


def mass_density(w: LatticeWave, masses: Sequence[float]) -> np.ndarray:
    """Mass per site: ``Σ_i m_i`` times the position marginal of particle ``i``."""
    if len(masses) != w.particles:
        raise ValueError(f"need {w.particles} masses, got {len(masses)}")
    return sum(m * w.marginal(i) for i, m in enumerate(masses))


def conditional_hop_step(sites: int, coupling: float, time: float) -> InteractionStep:
    """Two-particle interaction: particle 2 hops at a rate set by particle 1's site.

    Generator ``diag(x_1) ⊗ (T + T†)`` with ``T`` the ring translation.
    """
    pos = np.diag(np.arange(sites, dtype=float))
    t = np.roll(np.eye(sites), 1, axis=0)
    gen = np.kron(pos, t + t.T)
    return InteractionStep(time, expm(-1j * coupling * gen))


# ------------------------------------------------------------ relativistic


@dataclass(frozen=True)
class RapidityPacket:
    """Gaussian packet on future hyperboloids, ``center`` and ``width`` in rapidity.

    The packet carries the same rapidity profile on every hyperboloid
    (identity propagation), normalized against arc length ``tau dχ``.
    """

    center: float = 0.0
    width: float = 0.5

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("packet width must be positive")

    def boosted(self, rapidity: float) -> "RapidityPacket":
        """Same packet seen from a frame moving with ``rapidity``."""
        return RapidityPacket(self.center - rapidity, self.width)


def _gauss(x, var):
    return np.exp(-0.5 * x * x / var) / np.sqrt(2 * np.pi * var)


def _proper_time(a: Event, b: Event) -> float | None:
    """Proper time from ``a`` to ``b``, or None unless ``b`` is strictly later and inside the cone.

    The light-cone test is exact here: the single-flash density stays finite
    up to the cone, so a tolerance band would drop real probability.
    """
    dt, dx = b.t - a.t, b.x - a.x
    if b.y != a.y or b.z != a.z:
        raise ValueError("flash histories are restricted to 1+1 dimensions")
    if not dt > abs(dx):
        return None
    return math.sqrt((dt - dx) * (dt + dx))


def rgrwf_density(
    seed_flash: Event,
    flashes: Sequence[Event],
    packet: RapidityPacket,
    p: GrwParams = GrwParams(),
) -> float:
    """Joint density (per unit 2-volume, per flash) of a one-particle flash history.

    Each factor combines the squared rate ``λ exp(-λτ)`` with the squared
    norm of the Gaussian collapse on the hyperboloid through the flash,
    ``(1/τ) N(Δχ; 0, (α/τ)² + w²)`` for a packet of width ``w``.  The
    packet is then narrowed and re-centred by the collapse.
    """
    prev = seed_flash
    center, var = packet.center, packet.width**2
    density = 1.0
    for x in flashes:
        tau = _proper_time(prev, x)
        if tau is None:
            return 0.0
        h = Hyperboloid(prev, tau)
        offset = hyperboloid_arc_distance(h, x, h.point(center)) / tau
        chi_x = rapidity_on_hyperboloid(h, x)
        collapse_var = (p.alpha / tau) ** 2
        density *= p.lam * math.exp(-p.lam * tau) * float(_gauss(offset, collapse_var + var)) / tau
        center = (chi_x * var + center * collapse_var) / (var + collapse_var)
        var = var * collapse_var / (var + collapse_var)
        prev = x
    return density


def rgrwf_grid(
    seed_flash: Event,
    packet: RapidityPacket,
    p: GrwParams = GrwParams(),
    t_max: float = 10.0,
    step: float = 0.25,
) -> dict:
    """Single-flash density at cell centres of a square (t, x) grid over the seed's future."""
    n = int(round(t_max / step))
    ts = seed_flash.t + step * (np.arange(n) + 0.5)
    xs = seed_flash.x + step * (np.arange(-n, n) + 0.5)
    dens = np.zeros((ts.size, xs.size))
    for i, t in enumerate(ts):
        reach = t - seed_flash.t
        for k in np.nonzero(np.abs(xs - seed_flash.x) < reach)[0]:
            dens[i, k] = rgrwf_density(seed_flash, [Event(t, xs[k])], packet, p)
    return {"t": ts, "x": xs, "density": dens}


def rgrwf_lightcone_quadrature(
    seed_flash: Event,
    packet: RapidityPacket,
    p: GrwParams = GrwParams(),
    log_range: tuple[float, float] = (-40.0, 10.0),
    step: float = 0.15,
) -> float:
    """Integral of the single-flash density over the seed's future.

    Midpoint rule on a grid uniform in ``ln u`` and ``ln v`` with light-cone
    coordinates ``u = t - x``, ``v = t + x`` (so ``dt dx = du dv / 2``).  The
    logarithmic spacing resolves both the apex and the regions hugging the
    light cone, where small proper times put most of their weight.
    """
    lo, hi = log_range
    grid = np.exp(np.arange(lo, hi, step) + 0.5 * step)
    total = 0.0
    for u in grid:
        for v in grid:
            e = Event(seed_flash.t + 0.5 * (u + v), seed_flash.x + 0.5 * (v - u))
            total += rgrwf_density(seed_flash, [e], packet, p) * u * v * 0.5
    return total * step * step


def boost_history(seed_flash: Event, flashes: Sequence[Event], packet: RapidityPacket, rapidity: float):
    """Boost a whole flash configuration together with its initial packet."""
    return (
        boost(seed_flash, rapidity),
        [boost(f, rapidity) for f in flashes],
        packet.boosted(rapidity),
    )
