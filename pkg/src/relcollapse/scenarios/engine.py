"""Space-time anchored experiment timelines and the three collapse schemes.

A :class:`Scenario` places actions (probe kicks, spin unitaries, projective
spin measurements, probe momentum readouts) at events.  :func:`run` applies
them in the crossing order of the scheme's surfaces, sampling outcomes or
conditioning on pinned ones, and returns a :class:`Transcript`.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .. import probe as pr
from ..hilbert import Ket, LinOp, SpectralDecomp, commutes, embed, pauli, spectral
from ..measurement import (
    OutcomeRecord,
    QState,
    apply_unitary,
    kick,
    pi_branches,
    spin_branches,
)
from ..spacetime import (
    Event,
    EventOrder,
    FlatFamily,
    Hyperplane,
    causally_precedes,
    classify,
    in_future,
    sweep_order,
)

__all__ = [
    "Kick",
    "SpinUnitary",
    "SpinMeasure",
    "PiMeasure",
    "TimelineOp",
    "SolutionI",
    "SolutionII",
    "HellwigKraus",
    "Scenario",
    "Transcript",
    "ValidationError",
    "ZeroProbabilityConditioning",
    "SurfaceCrossesEventExactly",
    "LAB_FRAME",
    "validate",
    "ops_commute",
    "run",
    "execute",
    "state_on_surface",
    "hk_state_at_point",
    "outcome_distribution",
    "admissible_orders",
]

LAB_FRAME = FlatFamily((1.0, 0.0, 0.0, 0.0))
_VALUE_TOL = 1e-9


class ValidationError(ValueError):
    """Scenario rejected; ``pair`` names the offending op ids when relevant."""

    def __init__(self, message: str, pair: tuple | None = None):
        super().__init__(message)
        self.pair = pair


class ZeroProbabilityConditioning(ValueError):
    pass


class SurfaceCrossesEventExactly(UserWarning):
    pass


@dataclass(frozen=True)
class Kick:
    """Impulsive probe coupling ``exp(-i F q σ_axis)`` on one probe particle.

    The spin acted on is ``subsystem`` (defaults to ``particle``).
    """

    pair: str
    particle: int
    axis: str
    strength: float
    subsystem: int | None = None

    @property
    def spin_subsystem(self) -> int:
        return self.particle if self.subsystem is None else self.subsystem


@dataclass(frozen=True, eq=False)
class SpinUnitary:
    operator: LinOp
    subsystem: int
    name: str = "U"


@dataclass(frozen=True, eq=False)
class SpinMeasure:
    observable: LinOp
    subsystem: int
    name: str = "A"


@dataclass(frozen=True)
class PiMeasure:
    pair: str
    particle: int


@dataclass(frozen=True, eq=False)
class TimelineOp:
    op_id: str
    event: Event
    action: object
    pin: float | None = None

    @property
    def is_measurement(self) -> bool:
        return isinstance(self.action, (SpinMeasure, PiMeasure))


@dataclass(frozen=True)
class SolutionI:
    """Hypersurface functional: states are reported on each evaluation surface.

    Outcomes are generated along ``frame`` (lab simultaneity by default).
    """

    surfaces: tuple = ()
    frame: object = LAB_FRAME


@dataclass(frozen=True)
class SolutionII:
    """Collapse along a distinguished foliation (flat family or explicit order)."""

    foliation: object = LAB_FRAME


@dataclass(frozen=True)
class HellwigKraus:
    """Backward-light-cone reduction; states reported at each ``points`` event."""

    points: tuple = ()


def _default_sampler(rng: np.random.Generator) -> float:
    return float(rng.standard_normal())


@dataclass(frozen=True, eq=False)
class Scenario:
    initial: QState
    ops: tuple
    probes: pr.ProbeRegister = pr.ProbeRegister()
    scheme: object = SolutionII()
    name: str = "scenario"
    pi_sampler: Callable[[np.random.Generator], float] = _default_sampler

    def __post_init__(self):
        init = self.initial
        if isinstance(init, Ket):
            init = QState.from_ket(init, self.probes.ids)
        object.__setattr__(self, "initial", init.normalized())
        ops = tuple(self.ops)
        ids = [op.op_id for op in ops]
        if len(set(ids)) != len(ids):
            raise ValidationError("operation ids must be unique")
        object.__setattr__(self, "ops", ops)

    def op(self, op_id: str) -> TimelineOp:
        for op in self.ops:
            if op.op_id == op_id:
                return op
        raise KeyError(op_id)

    @property
    def dims(self) -> tuple:
        return self.initial.dims


@dataclass(frozen=True, eq=False)
class Transcript:
    outcomes: tuple
    states: tuple
    order: tuple
    weight: float

    def state(self, key: str) -> QState:
        for k, st in self.states:
            if k == key:
                return st
        raise KeyError(key)

    def outcome(self, op_id: str) -> OutcomeRecord:
        for rec in self.outcomes:
            if rec.observable == op_id:
                return rec
        raise KeyError(op_id)

    @property
    def final(self) -> QState:
        """State after the last applied op."""
        for key, st in reversed(self.states):
            if key.startswith("after:"):
                return st
        return self.state("initial")

    def values(self) -> dict:
        return {rec.observable: rec.eigenvalue for rec in self.outcomes}


# ---------------------------------------------------------------- validation


def _spin_generators(op: TimelineOp, dims) -> list[np.ndarray]:
    a = op.action
    if isinstance(a, Kick):
        return [embed(pauli(a.axis), a.spin_subsystem, dims).matrix]
    if isinstance(a, SpinUnitary):
        return [embed(a.operator, a.subsystem, dims).matrix]
    if isinstance(a, SpinMeasure):
        return [embed(a.observable, a.subsystem, dims).matrix]
    return []


def _probe_footprint(op: TimelineOp):
    a = op.action
    if isinstance(a, Kick):
        return ("q", a.pair, a.particle)
    if isinstance(a, PiMeasure):
        return ("pi", a.pair, a.particle)
    return None


def ops_commute(a: TimelineOp, b: TimelineOp, dims) -> tuple[bool, float]:
    """Whether two timeline operations commute, with the worst commutator entry."""
    fa, fb = _probe_footprint(a), _probe_footprint(b)
    if fa and fb and fa[1:] == fb[1:] and fa[0] != fb[0]:
        return False, float("inf")
    worst = 0.0
    for ga in _spin_generators(a, dims):
        for gb in _spin_generators(b, dims):
            ok, w = commutes(LinOp(dims, ga), LinOp(dims, gb))
            worst = max(worst, w)
    return worst <= 1e-10, worst


def validate(s: Scenario) -> None:
    """Check actions against the register and reject non-commuting spacelike pairs."""
    dims = s.dims
    for op in s.ops:
        a = op.action
        if isinstance(a, (Kick, PiMeasure)):
            if a.pair not in s.probes:
                raise ValidationError(f"{op.op_id}: unknown probe pair {a.pair!r}")
            if a.particle not in (1, 2):
                raise ValidationError(f"{op.op_id}: probe particle must be 1 or 2")
        if isinstance(a, Kick):
            if not a.strength > 0:
                raise ValidationError(f"{op.op_id}: kick strength must be positive")
            if s.probes.axis(a.pair) != a.axis:
                raise ValidationError(f"{op.op_id}: pair {a.pair!r} couples to axis {s.probes.axis(a.pair)}")
            if not 1 <= a.spin_subsystem <= len(dims) or dims[a.spin_subsystem - 1] != 2:
                raise ValidationError(f"{op.op_id}: kick needs a spin-1/2 subsystem")
        if isinstance(a, (SpinUnitary, SpinMeasure)):
            mat = a.operator if isinstance(a, SpinUnitary) else a.observable
            if not 1 <= a.subsystem <= len(dims) or mat.dim != dims[a.subsystem - 1]:
                raise ValidationError(f"{op.op_id}: operator does not fit subsystem {a.subsystem}")
            if isinstance(a, SpinMeasure) and not mat.is_hermitian():
                raise ValidationError(f"{op.op_id}: measured observable must be hermitian")
            if isinstance(a, SpinUnitary):
                m = mat.matrix
                if np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) > 1e-10:
                    raise ValidationError(f"{op.op_id}: operator is not unitary")
    for a, b in itertools.combinations(s.ops, 2):
        related = a.event == b.event or classify(a.event, b.event) == "spacelike"
        if not related:
            continue
        ok, worst = ops_commute(a, b, dims)
        if not ok:
            kind = "coincident" if a.event == b.event else "spacelike separated"
            raise ValidationError(
                f"{kind} operations {a.op_id!r} and {b.op_id!r} do not commute "
                f"(max commutator entry {worst:.3g})",
                pair=(a.op_id, b.op_id),
            )
    if isinstance(s.scheme, SolutionII) and isinstance(s.scheme.foliation, EventOrder):
        registered = set(s.scheme.foliation.events)
        for op in s.ops:
            if op.event not in registered:
                raise ValidationError(f"{op.op_id}: event {op.event.as_tuple()} missing from the event order")


# ------------------------------------------------------------------ stepping


def _branches(state: QState, op: TimelineOp, sampled: float):
    a = op.action
    if isinstance(a, Kick):
        return [(None, 1.0, kick(state, a.pair, a.particle, a.axis, a.strength, a.spin_subsystem))]
    if isinstance(a, SpinUnitary):
        return [(None, 1.0, apply_unitary(state, embed(a.operator, a.subsystem, state.dims)))]
    if isinstance(a, SpinMeasure):
        dec = spectral(a.observable)
        parts = tuple((v, embed(p, a.subsystem, state.dims)) for v, p in dec)
        return spin_branches(state, SpectralDecomp(parts))
    if isinstance(a, PiMeasure):
        return pi_branches(state, a.pair, a.particle, sampled)
    raise TypeError(f"unsupported action {a!r}")


def _pair_unread(state: QState, op: TimelineOp) -> bool:
    a = op.action
    return isinstance(a, PiMeasure) and isinstance(state.label(a.pair), pr.Epr)


def _readout_sum(state: QState, op: TimelineOp):
    a = op.action
    if isinstance(a, PiMeasure):
        lab = state.label(a.pair)
        if isinstance(lab, pr.Consumed):
            return float(lab.total)
    return None


def _pick(branches, target, op_id):
    for value, p, post in branches:
        if value is None or abs(value - target) <= _VALUE_TOL * max(1.0, abs(target)):
            return value, p, post
    raise ZeroProbabilityConditioning(f"{op_id}: outcome {target} has zero probability")


def _ordered_indices(s: Scenario, foliation) -> list[int]:
    sweep = sweep_order(foliation, [op.event for op in s.ops])
    for group in sweep.ties:
        for i, j in itertools.combinations(group, 2):
            ok, _ = ops_commute(s.ops[i], s.ops[j], s.dims)
            if not ok:
                raise ValidationError(
                    f"operations {s.ops[i].op_id!r} and {s.ops[j].op_id!r} share a leaf and do not commute",
                    pair=(s.ops[i].op_id, s.ops[j].op_id),
                )
    return list(sweep.order)


def _sweep_foliation(s: Scenario):
    sch = s.scheme
    if isinstance(sch, SolutionII):
        return sch.foliation
    if isinstance(sch, SolutionI):
        return sch.frame
    return LAB_FRAME


def execute(
    s: Scenario,
    order: Sequence[int],
    rng: np.random.Generator | None = None,
    pins: Mapping[str, float] | None = None,
):
    """Apply ops in ``order``; returns ``(records, states, weight)``.

    Pinned outcomes (``pins`` or the op's own ``pin``) are conditioned on;
    others are sampled from ``rng``.
    """
    pins = dict(pins or {})
    rng = rng if rng is not None else np.random.default_rng(0)
    state = s.initial
    records, states = [], [("initial", state)]
    weight = 1.0
    for idx in order:
        op = s.ops[idx]
        target = pins.get(op.op_id, op.pin)
        sampled = 0.0
        if _pair_unread(state, op):
            sampled = target if target is not None else s.pi_sampler(rng)
        branches = _branches(state, op, sampled)
        if target is not None and op.is_measurement:
            value, p, state = _pick(branches, target, op.op_id)
        elif len(branches) == 1:
            value, p, state = branches[0]
        else:
            probs = np.array([b[1] for b in branches])
            k = int(rng.choice(len(branches), p=probs / probs.sum()))
            value, p, state = branches[k]
        if op.is_measurement:
            weight *= p
            records.append(OutcomeRecord(op.op_id, value, min(p, 1.0), op.event, _readout_sum(state, op)))
        states.append((f"after:{op.op_id}", state))
    return records, states, weight


def run(s: Scenario, seed=0, pins: Mapping[str, float] | None = None) -> Transcript:
    """Run a validated scenario under its scheme with a seeded generator."""
    validate(s)
    order = _ordered_indices(s, _sweep_foliation(s))
    rng = np.random.default_rng(seed)
    records, states, weight = execute(s, order, rng, pins)
    order_ids = tuple(s.ops[i].op_id for i in order)
    t = Transcript(tuple(records), tuple(states), order_ids, weight)
    sch = s.scheme
    if isinstance(sch, SolutionI):
        extra = [(f"surface:{k}", state_on_surface(t, s, surf)) for k, surf in enumerate(sch.surfaces)]
        t = Transcript(t.outcomes, t.states + tuple(extra), order_ids, weight)
    elif isinstance(sch, HellwigKraus):
        extra = [(f"point:{k}", hk_state_at_point(s, x, t)) for k, x in enumerate(sch.points)]
        t = Transcript(t.outcomes, t.states + tuple(extra), order_ids, weight)
    return t


def _conditioned(s: Scenario, indices: Sequence[int], outcomes: Mapping[str, float]) -> QState:
    state = s.initial
    for idx in indices:
        op = s.ops[idx]
        target = outcomes.get(op.op_id, op.pin)
        if op.is_measurement and target is None:
            raise ZeroProbabilityConditioning(f"{op.op_id}: no recorded outcome to condition on")
        sampled = target if _pair_unread(state, op) else 0.0
        branches = _branches(state, op, sampled)
        if op.is_measurement:
            _, _, state = _pick(branches, target, op.op_id)
        else:
            state = branches[0][2]
    return state


def _outcome_map(outcomes) -> dict:
    if outcomes is None:
        return {}
    if isinstance(outcomes, Transcript):
        return outcomes.values()
    return dict(outcomes)


def state_on_surface(t: Transcript, s: Scenario, surface: Hyperplane) -> QState:
    """State on a flat surface: ops strictly in its past, conditioned on ``t``.

    Ops lying exactly on the surface are excluded with a
    :class:`SurfaceCrossesEventExactly` warning.
    """
    past = []
    for i, op in enumerate(s.ops):
        side = surface.side(op.event)
        if side < 0:
            past.append(i)
        elif side == 0:
            warnings.warn(
                f"surface passes exactly through the event of {op.op_id!r}; treated as not yet crossed",
                SurfaceCrossesEventExactly,
                stacklevel=2,
            )
    fam = FlatFamily(surface.normal)
    sweep = sweep_order(fam, [s.ops[i].event for i in past])
    return _conditioned(s, [past[k] for k in sweep.order], _outcome_map(t))


def hk_state_at_point(s: Scenario, x: Event, outcomes=None) -> QState:
    """Backward-light-cone state at ``x``.

    Every op whose event is not in the open future cone of ``x`` is applied
    to the initial state in chronological order, measurements as projectors
    onto their recorded (or pinned) outcomes, then renormalized.
    """
    chosen = [i for i, op in enumerate(s.ops) if not in_future(x, op.event)]
    sweep = sweep_order(LAB_FRAME, [s.ops[i].event for i in chosen])
    return _conditioned(s, [chosen[k] for k in sweep.order], _outcome_map(outcomes))


# --------------------------------------------------------- exact enumeration


def _record_key(state_before: QState, state_after: QState, op: TimelineOp, value):
    """Physically meaningful content of a measurement record.

    A first readout of a probe pair carries no information (its value is an
    arbitrary sample), so only the readout sum of the second one is kept.
    """
    if isinstance(op.action, PiMeasure):
        total = _readout_sum(state_after, op)
        return None if total is None else (op.action.pair, round(total, 9))
    return (op.op_id, round(float(value), 9))


def outcome_distribution(s: Scenario, order: Sequence[int] | None = None, pi_value: float = 0.0) -> dict:
    """Exact joint distribution of measurement records by branch enumeration.

    Keys are sorted tuples of ``(op_id, value)`` for spin measurements and
    ``(pair_id, readout_sum)`` for completed probe readouts.
    """
    if order is None:
        validate(s)
        order = _ordered_indices(s, _sweep_foliation(s))
    dist: dict = {}

    def walk(state, pos, weight, key):
        if weight <= 1e-300:
            return
        if pos == len(order):
            k = tuple(sorted(key))
            dist[k] = dist.get(k, 0.0) + weight
            return
        op = s.ops[order[pos]]
        for value, p, post in _branches(state, op, pi_value):
            new_key = key
            if op.is_measurement:
                rk = _record_key(state, post, op, value)
                if rk is not None:
                    new_key = key + [rk]
            walk(post, pos + 1, weight * p, new_key)

    walk(s.initial, 0, 1.0, [])
    return dist


def admissible_orders(s: Scenario, limit: int = 100000) -> list[tuple[int, ...]]:
    """Every total order of the ops consistent with their causal order."""
    n = len(s.ops)
    before = [[causally_precedes(s.ops[i].event, s.ops[j].event) for j in range(n)] for i in range(n)]
    out: list = []

    def extend(prefix, remaining):
        if len(out) >= limit:
            return
        if not remaining:
            out.append(tuple(prefix))
            return
        for j in sorted(remaining):
            if any(before[i][j] for i in remaining if i != j):
                continue
            extend(prefix + [j], remaining - {j})

    extend([], frozenset(range(n)))
    return out
