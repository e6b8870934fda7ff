"""Formal labels for EPR-correlated probe pairs.

A probe pair starts in the joint improper eigenstate ``q1 - q2 = 0``,
``pi1 + pi2 = 0``.  Local kicks on either particle translate the momentum
sum, so before any momentum readout the pair is fully described by the net
shift of ``pi1 + pi2``.  Reading ``pi`` on one particle fixes the other
particle's momentum to ``net_shift - readout``.

Labels are treated as an orthonormal formal basis.  Shifts are held as exact
rationals (:class:`fractions.Fraction` of the float kick strengths) so that
readout sums such as ``pi1 + pi2`` cancel exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

__all__ = [
    "Epr",
    "Collapsed",
    "Consumed",
    "ProbeLabel",
    "ProbeRegister",
    "ConsumedLabel",
    "ShiftOnMeasuredParticle",
    "AlreadyCollapsed",
    "NotCollapsed",
    "LABEL_TOL",
    "prepare_epr",
    "shift",
    "measure_pi",
    "measure_pi1",
    "measure_pi2",
    "same_label",
    "overlap",
    "exact",
]

LABEL_TOL = 1e-9


class ConsumedLabel(ValueError):
    pass


class ShiftOnMeasuredParticle(ValueError):
    pass


class AlreadyCollapsed(ValueError):
    pass


class NotCollapsed(ValueError):
    pass


def exact(value) -> Fraction:
    """Exact rational copy of a float (or int/Fraction)."""
    if isinstance(value, Fraction):
        return value
    return Fraction(float(value)) if isinstance(value, float) else Fraction(value)


@dataclass(frozen=True)
class Epr:
    """Unread pair; ``net_shift`` is the accumulated change of ``pi1 + pi2``."""

    net_shift: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "net_shift", exact(self.net_shift))


@dataclass(frozen=True)
class Collapsed:
    """One particle read; the other (``open_particle``) has a sharp momentum.

    The sharp momentum is ``shift - readout`` where ``shift`` keeps the exact
    kick bookkeeping and ``readout`` is the value found on the read particle.
    """

    shift: Fraction
    readout: float
    open_particle: int = 1

    def __post_init__(self):
        object.__setattr__(self, "shift", exact(self.shift))
        object.__setattr__(self, "readout", float(self.readout))

    @property
    def value(self) -> float:
        return float(self.shift) - self.readout

    @property
    def pi1(self) -> float:
        if self.open_particle != 1:
            raise AttributeError("particle 1 has already been read")
        return self.value


@dataclass(frozen=True)
class Consumed:
    """Both momenta read; ``total`` is the exact readout sum ``pi1 + pi2``."""

    total: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "total", exact(self.total))


ProbeLabel = Union[Epr, Collapsed, Consumed]


@dataclass(frozen=True)
class ProbeRegister:
    """Probe pairs by identifier, each coupled to one spin axis (``x``, ``y`` or ``z``)."""

    pairs: tuple = ()

    def __init__(self, pairs=()):
        items = tuple(sorted(dict(pairs).items()))
        axes = [axis for _, axis in items]
        for axis in axes:
            if axis not in ("x", "y", "z"):
                raise ValueError(f"probe axis must be x, y or z, got {axis!r}")
        object.__setattr__(self, "pairs", items)

    def axis(self, pair_id: str) -> str:
        for pid, axis in self.pairs:
            if pid == pair_id:
                return axis
        raise KeyError(f"unknown probe pair {pair_id!r}")

    def __contains__(self, pair_id) -> bool:
        return any(pid == pair_id for pid, _ in self.pairs)

    @property
    def ids(self) -> tuple:
        return tuple(pid for pid, _ in self.pairs)


def prepare_epr() -> Epr:
    return Epr(Fraction(0))


def shift(label: ProbeLabel, particle: int, amount) -> ProbeLabel:
    """Translate the momentum of ``particle`` by ``amount``."""
    if particle not in (1, 2):
        raise ValueError("probe particle must be 1 or 2")
    amount = exact(amount)
    if isinstance(label, Consumed):
        raise ConsumedLabel("both momenta of this pair have been read")
    if isinstance(label, Epr):
        return Epr(label.net_shift + amount)
    if particle != label.open_particle:
        raise ShiftOnMeasuredParticle(f"momentum of particle {particle} has already been read")
    return Collapsed(label.shift + amount, label.readout, label.open_particle)


def measure_pi(label: ProbeLabel, particle: int, sampled: float | None = None):
    """Read the momentum of ``particle``.

    On an unread pair the outcome is the externally supplied ``sampled``
    value; on a half-read pair it is the sharp momentum of the open particle.
    Returns ``(outcome, new_label)``.
    """
    if isinstance(label, Consumed):
        raise ConsumedLabel("both momenta of this pair have been read")
    if isinstance(label, Epr):
        if sampled is None:
            raise ValueError("reading an unread pair needs a sampled value")
        return float(sampled), Collapsed(label.net_shift, sampled, 2 if particle == 1 else 1)
    if particle != label.open_particle:
        raise AlreadyCollapsed(f"momentum of particle {particle} has already been read")
    return label.value, Consumed(label.shift)


def measure_pi2(label: Epr, sampled: float):
    if not isinstance(label, Epr):
        raise AlreadyCollapsed("the pair has already been read")
    return measure_pi(label, 2, sampled)


def measure_pi1(label: Collapsed):
    if not isinstance(label, Collapsed) or label.open_particle != 1:
        raise NotCollapsed("particle 1 is not in a sharp momentum state")
    return measure_pi(label, 1)


def same_label(a: ProbeLabel, b: ProbeLabel, tol: float = LABEL_TOL) -> bool:
    """Formal identity of two labels up to ``tol`` in their momentum data."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Epr):
        return abs(float(a.net_shift - b.net_shift)) < tol
    if isinstance(a, Consumed):
        return abs(float(a.total - b.total)) < tol
    return a.open_particle == b.open_particle and abs(a.value - b.value) < tol


def overlap(a: ProbeLabel, b: ProbeLabel) -> float:
    return 1.0 if same_label(a, b) else 0.0
