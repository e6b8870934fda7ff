"""Minkowski geometry with signature (+, -, -, -) in natural units (c = 1).

Events are 4-vectors ``(t, x, y, z)``.  Lower-dimensional contexts simply
leave the unused spatial coordinates at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Event",
    "Hyperplane",
    "FlatFamily",
    "EventOrder",
    "Hyperboloid",
    "Sweep",
    "InconsistentOrder",
    "OffSurface",
    "LIGHTLIKE_RTOL",
    "minkowski_dot",
    "interval",
    "classify",
    "in_future",
    "causally_precedes",
    "boost",
    "sweep_order",
    "hyperboloid_arc_distance",
    "rapidity_on_hyperboloid",
]

LIGHTLIKE_RTOL = 1e-9
_METRIC = np.array([1.0, -1.0, -1.0, -1.0])


class InconsistentOrder(ValueError):
    """An explicit event order puts an event before one in its causal past."""


class OffSurface(ValueError):
    """A point handed to a hyperboloid routine does not lie on the hyperboloid."""


@dataclass(frozen=True)
class Event:
    """A space-time point."""

    t: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("t", "x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"event coordinate {name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Event":
        values = list(values)
        if not 1 <= len(values) <= 4:
            raise ValueError("an event needs between one and four coordinates")
        return cls(*values)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z])

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.t, self.x, self.y, self.z)

    def __sub__(self, other: "Event") -> np.ndarray:
        return self.as_array() - other.as_array()


ORIGIN = Event(0.0)


def minkowski_dot(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(_METRIC * np.asarray(a, dtype=float) * np.asarray(b, dtype=float)))


def interval(a: Event, b: Event) -> float:
    """Squared interval ``(a - b)·(a - b)``; positive for timelike separation."""
    d = a - b
    return minkowski_dot(d, d)


def _lightlike_tolerance(a: Event, b: Event) -> float:
    scale = max(np.max(np.abs(a.as_array())), np.max(np.abs(b.as_array())))
    return LIGHTLIKE_RTOL * scale * scale


def classify(a: Event, b: Event) -> str:
    """Return ``"timelike"``, ``"spacelike"`` or ``"lightlike"``."""
    s = interval(a, b)
    if abs(s) <= _lightlike_tolerance(a, b):
        return "lightlike"
    return "timelike" if s > 0 else "spacelike"


def in_future(x: Event, y: Event) -> bool:
    """True when ``y`` lies strictly inside the future light cone of ``x``."""
    return classify(x, y) == "timelike" and y.t > x.t


def causally_precedes(a: Event, b: Event) -> bool:
    """True when ``b`` lies in the closed causal future of ``a`` (cone included)."""
    if a == b:
        return False
    return classify(a, b) != "spacelike" and b.t > a.t


def boost(e: Event, rapidity: float, axis: Sequence[float] = (1.0, 0.0, 0.0)) -> Event:
    """Active coordinates of ``e`` in a frame moving with ``rapidity`` along ``axis``."""
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValueError("boost axis must be non-zero")
    n = n / norm
    r = np.array([e.x, e.y, e.z])
    par = float(r @ n)
    perp = r - par * n
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    t_new = e.t * ch - par * sh
    par_new = par * ch - e.t * sh
    r_new = perp + par_new * n
    return Event(t_new, *r_new)


def _unit_timelike(normal: Sequence[float]) -> np.ndarray:
    n = np.zeros(4)
    values = np.asarray(normal, dtype=float)
    n[: len(values)] = values
    if n[0] <= 0:
        raise ValueError("hyperplane normal must be future directed")
    if abs(minkowski_dot(n, n) - 1.0) > 1e-12:
        raise ValueError("hyperplane normal must be a unit timelike vector")
    return n


def normal_from_rapidity(rapidity: float, axis: Sequence[float] = (1.0, 0.0, 0.0)) -> np.ndarray:
    """Unit normal of the simultaneity planes of a frame moving with ``rapidity``."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    return np.concatenate([[math.cosh(rapidity)], math.sinh(rapidity) * a])


@dataclass(frozen=True)
class Hyperplane:
    """The flat spacelike surface ``{x : n·x = offset}``."""

    normal: tuple
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(_unit_timelike(self.normal)))
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_rapidity(cls, rapidity: float, offset: float, axis=(1.0, 0.0, 0.0)) -> "Hyperplane":
        return cls(tuple(normal_from_rapidity(rapidity, axis)), offset)

    @classmethod
    def through(cls, event: Event, rapidity: float = 0.0, axis=(1.0, 0.0, 0.0)) -> "Hyperplane":
        n = normal_from_rapidity(rapidity, axis)
        return cls(tuple(n), minkowski_dot(n, event.as_array()))

    def level(self, e: Event) -> float:
        return minkowski_dot(np.array(self.normal), e.as_array())

    def side(self, e: Event, tol: float = 1e-12) -> int:
        """-1 if ``e`` is strictly in the past of the plane, +1 strictly future, 0 on it."""
        d = self.level(e) - self.offset
        scale = max(1.0, abs(self.offset), float(np.max(np.abs(e.as_array()))))
        if abs(d) <= tol * scale:
            return 0
        return -1 if d < 0 else 1


@dataclass(frozen=True)
class FlatFamily:
    """Parallel flat leaves ``n·x = offset`` for each offset in increasing order."""

    normal: tuple
    offsets: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(_unit_timelike(self.normal)))
        offs = tuple(float(o) for o in self.offsets)
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise ValueError("leaf offsets must be strictly increasing")
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def from_rapidity(cls, rapidity: float, offsets: Iterable[float] = (), axis=(1.0, 0.0, 0.0)):
        return cls(tuple(normal_from_rapidity(rapidity, axis)), tuple(offsets))

    def level(self, e: Event) -> float:
        return minkowski_dot(np.array(self.normal), e.as_array())

    def leaf(self, offset: float) -> Hyperplane:
        return Hyperplane(self.normal, offset)


@dataclass(frozen=True)
class EventOrder:
    """An explicit crossing order over registered events (stands in for curved leaves)."""

    events: tuple

    def __post_init__(self):
        evs = tuple(self.events)
        if len(set(evs)) != len(evs):
            raise ValueError("events in an explicit order must be distinct")
        object.__setattr__(self, "events", evs)
        for i, later in enumerate(evs):
            for earlier in evs[i + 1:]:
                if causally_precedes(earlier, later):
                    raise InconsistentOrder(
                        f"event {later.as_tuple()} is placed before {earlier.as_tuple()}, "
                        "which lies in its causal past"
                    )


@dataclass(frozen=True)
class Sweep:
    """Result of sweeping a foliation across events.

    ``order`` lists input indices in crossing order; ``ties`` groups indices
    that share a leaf (each group has at least two members).
    """

    order: tuple
    ties: tuple

    @property
    def has_ties(self) -> bool:
        return bool(self.ties)


def sweep_order(f, events: Sequence[Event], tol: float = 1e-12) -> Sweep:
    """Order ``events`` by the leaf on which the foliation ``f`` first reaches them."""
    events = list(events)
    if isinstance(f, EventOrder):
        position = {e: k for k, e in enumerate(f.events)}
        missing = [e for e in events if e not in position]
        if missing:
            raise ValueError(f"event {missing[0].as_tuple()} is not registered in the order")
        # Repeated input events share one slot and therefore tie.
        order = sorted(range(len(events)), key=lambda i: (position[events[i]], i))
        ties = _group_ties(order, [position[e] for e in events], 0.0)
        return Sweep(tuple(order), ties)
    if isinstance(f, (FlatFamily, Hyperplane)):
        levels = [f.level(e) for e in events]
        order = sorted(range(len(events)), key=lambda i: (levels[i], i))
        scale = max([1.0] + [float(np.max(np.abs(e.as_array()))) for e in events])
        ties = _group_ties(order, levels, tol * scale)
        return Sweep(tuple(order), ties)
    raise TypeError(f"unsupported foliation type {type(f).__name__}")


def _group_ties(order, keys, tol) -> tuple:
    groups, current = [], [order[0]] if order else []
    for prev, nxt in zip(order, order[1:]):
        if abs(keys[nxt] - keys[prev]) <= tol:
            current.append(nxt)
        else:
            if len(current) > 1:
                groups.append(tuple(current))
            current = [nxt]
    if len(current) > 1:
        groups.append(tuple(current))
    return tuple(groups)


@dataclass(frozen=True)
class Hyperboloid:
    """Future hyperboloid ``{z : (z - vertex)² = tau², z after vertex}`` in 1+1D."""

    vertex: Event
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("hyperboloid radius must be positive")

    def point(self, rapidity: float) -> Event:
        v = self.vertex
        return Event(v.t + self.tau * math.cosh(rapidity), v.x + self.tau * math.sinh(rapidity), v.y, v.z)

    @classmethod
    def through(cls, vertex: Event, point: Event) -> "Hyperboloid":
        if not in_future(vertex, point):
            raise OffSurface("point is not in the future of the vertex")
        return cls(vertex, math.sqrt(interval(point, vertex)))


def rapidity_on_hyperboloid(h: Hyperboloid, e: Event, rtol: float = 1e-9) -> float:
    """Rapidity parameter of ``e`` relative to the hyperboloid vertex."""
    d = e - h.vertex
    if d[2] != 0.0 or d[3] != 0.0:
        raise OffSurface("hyperboloid routines are restricted to 1+1 dimensions")
    s = (d[0] - d[1]) * (d[0] + d[1])
    if d[0] <= 0 or abs(math.sqrt(max(s, 0.0)) - h.tau) > rtol * max(1.0, h.tau, abs(d[0])):
        raise OffSurface(f"event {e.as_tuple()} is not on the hyperboloid of radius {h.tau}")
    return math.asinh(d[1] / h.tau)


def hyperboloid_arc_distance(h: Hyperboloid, a: Event, b: Event) -> float:
    """Proper arc length along ``h`` between two of its points."""
    return h.tau * abs(rapidity_on_hyperboloid(h, a) - rapidity_on_hyperboloid(h, b))
