"""Quantum states built from branch terms ``(probe labels) ⊗ (spin vector)``.

Probe labels are formally orthonormal, so branch terms with different labels
never interfere and terms with identical labels are merged by adding their
spin parts.  Spin observables are :class:`~relcollapse.hilbert.LinOp`
instances on the full spin space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import probe as pr
from .hilbert import (
    DimMismatch,
    Ket,
    LinOp,
    NotHermitian,
    SpectralDecomp,
    commutes,
    embed,
    pauli,
    sigma_total,
    spectral,
)

__all__ = [
    "QState",
    "OutcomeRecord",
    "Measure",
    "Unitary",
    "ZeroProbabilityOutcome",
    "NonCommuting",
    "NORM_TOL",
    "born",
    "collapse",
    "spin_branches",
    "joint_prob",
    "marginal",
    "apply_unitary",
    "external_field",
    "field_unitary",
    "kick",
    "pi_branches",
    "reduced_density",
    "no_signaling_audit",
    "total_variation",
    "sigma_tot_sq_demo",
]

NORM_TOL = 1e-10
_DROP = 1e-30


class ZeroProbabilityOutcome(ValueError):
    pass


class NonCommuting(ValueError):
    pass


def _labels_key(labels) -> tuple:
    return tuple(sorted(labels, key=lambda item: item[0]))


@dataclass(frozen=True, eq=False)
class QState:
    """Superposition of branch terms; ``terms`` holds ``(labels, spin)`` pairs.

    ``labels`` is a sorted tuple of ``(pair_id, ProbeLabel)``; ``spin`` is an
    amplitude vector on the spin space with dimensions ``dims``.
    """

    dims: tuple
    terms: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        n = int(np.prod(dims))
        merged: list[list] = []
        for labels, spin in self.terms:
            vec = np.array(spin, dtype=complex).reshape(-1)
            if vec.size != n:
                raise DimMismatch(f"spin part of size {vec.size} does not match dims {dims}")
            key = _labels_key(labels)
            for entry in merged:
                if _same_labels(entry[0], key):
                    entry[1] = entry[1] + vec
                    break
            else:
                merged.append([key, vec])
        terms = []
        for key, vec in merged:
            if np.vdot(vec, vec).real > _DROP:
                vec.setflags(write=False)
                terms.append((key, vec))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def from_ket(cls, ket: Ket, pairs: Iterable[str] = ()) -> "QState":
        labels = tuple((pid, pr.prepare_epr()) for pid in pairs)
        return cls(ket.dims, ((labels, ket.amplitudes),))

    @property
    def norm2(self) -> float:
        return float(sum(np.vdot(v, v).real for _, v in self.terms))

    def normalized(self) -> "QState":
        n2 = self.norm2
        if n2 <= 0:
            raise ZeroProbabilityOutcome("state has zero norm")
        f = 1.0 / math.sqrt(n2)
        return QState(self.dims, tuple((k, v * f) for k, v in self.terms))

    def map_spin(self, matrix: np.ndarray) -> "QState":
        return QState(self.dims, tuple((k, matrix @ v) for k, v in self.terms))

    def scaled(self, factor) -> "QState":
        return QState(self.dims, tuple((k, v * factor) for k, v in self.terms))

    def spin_ket(self) -> Ket:
        """Spin part of a single-branch state."""
        if len(self.terms) != 1:
            raise ValueError(f"state has {len(self.terms)} probe branches, not one")
        return Ket(self.dims, self.terms[0][1])

    def label(self, pair_id: str, term: int = 0):
        for pid, lab in self.terms[term][0]:
            if pid == pair_id:
                return lab
        raise KeyError(pair_id)

    def pair_ids(self) -> tuple:
        return tuple(pid for pid, _ in self.terms[0][0]) if self.terms else ()

    def is_close(self, other: "QState", tol: float = 1e-12) -> bool:
        """Term-by-term equality of two states (labels matched formally)."""
        if self.dims != other.dims or len(self.terms) != len(other.terms):
            return False
        for key, vec in self.terms:
            match = [v for k, v in other.terms if _same_labels(k, key)]
            if len(match) != 1 or np.max(np.abs(match[0] - vec)) > tol:
                return False
        return True


def _same_labels(a, b) -> bool:
    if len(a) != len(b):
        return False
    return all(pa == pb and pr.same_label(la, lb) for (pa, la), (pb, lb) in zip(a, b))


@dataclass(frozen=True)
class OutcomeRecord:
    observable: str
    eigenvalue: float
    probability: float
    event: object = None
    readout_sum: float | None = None

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


def _check_dims(s: QState, obs: LinOp):
    if obs.dims != s.dims:
        raise DimMismatch(f"observable dims {obs.dims} vs state dims {s.dims}")


def _decomp(obs) -> SpectralDecomp:
    return obs if isinstance(obs, SpectralDecomp) else spectral(obs)


def spin_branches(s: QState, obs) -> list[tuple[float, float, QState]]:
    """All outcomes of a projective spin measurement as ``(value, prob, post)``.

    ``post`` is normalized; outcomes of zero probability are omitted.
    """
    dec = _decomp(obs)
    _check_dims(s, dec.parts[0][1])
    total = s.norm2
    out = []
    for value, proj in dec:
        projected = s.map_spin(proj.matrix)
        p = projected.norm2 / total
        if p > 1e-15:
            out.append((value, p, projected.normalized()))
    return out


def born(s: QState, obs) -> dict[float, float]:
    """Outcome distribution of a projective spin measurement."""
    dec = _decomp(obs)
    _check_dims(s, dec.parts[0][1])
    total = s.norm2
    return {value: s.map_spin(proj.matrix).norm2 / total for value, proj in dec}


def collapse(s: QState, obs, outcome: float) -> QState:
    dec = _decomp(obs)
    _check_dims(s, dec.parts[0][1])
    try:
        proj = dec.projector(outcome)
    except KeyError:
        raise ZeroProbabilityOutcome(f"{outcome} is not an eigenvalue of the observable") from None
    projected = s.map_spin(proj.matrix)
    if projected.norm2 <= 1e-15 * s.norm2:
        raise ZeroProbabilityOutcome(f"outcome {outcome} has zero probability")
    return projected.normalized()


def joint_prob(s: QState, obs_a: LinOp, obs_b: LinOp) -> dict[tuple[float, float], float]:
    """Joint distribution ``P(α, β) = ‖P_β P_α ψ‖²`` of two commuting observables."""
    ok, worst = commutes(obs_a, obs_b)
    if not ok:
        raise NonCommuting(f"observables do not commute (max commutator entry {worst:.3g})")
    da, db = _decomp(obs_a), _decomp(obs_b)
    _check_dims(s, obs_a)
    total = s.norm2
    out = {}
    for a, pa in da:
        sa = s.map_spin(pa.matrix)
        for b, pb in db:
            out[(a, b)] = sa.map_spin(pb.matrix).norm2 / total
    return out


def marginal(joint: dict, index: int) -> dict:
    out: dict = {}
    for key, p in joint.items():
        out[key[index]] = out.get(key[index], 0.0) + p
    return out


def apply_unitary(s: QState, u: LinOp) -> QState:
    _check_dims(s, u)
    return s.map_spin(u.matrix)


def field_unitary(b: LinOp, k: float) -> LinOp:
    """``exp(-i k B)`` for hermitian ``B`` built from its spectral projectors."""
    if not b.is_hermitian():
        raise NotHermitian("field coupling operator must be hermitian")
    return spectral(b).apply_function(lambda value: np.exp(-1j * k * value))


def external_field(s: QState, b: LinOp, k: float) -> QState:
    return apply_unitary(s, field_unitary(b, k))


def _kick_projectors(axis, subsystem: int, dims) -> list[tuple[int, np.ndarray]]:
    sigma = pauli(axis)
    half = 0.5 * np.eye(2)
    out = []
    for m in (1, -1):
        p = LinOp((2,), half + 0.5 * m * sigma.matrix)
        out.append((m, embed(p, subsystem, dims).matrix))
    return out


def kick(s: QState, pair_id: str, particle: int, axis, strength: float, subsystem: int | None = None) -> QState:
    """Impulsive coupling ``exp(-i F q_j σ_axis)`` of probe ``particle`` to a spin.

    On the branch where the spin component has eigenvalue ``m`` the probe
    momentum is translated by ``-F m``.  ``subsystem`` defaults to the probe
    particle's own index.
    """
    subsystem = particle if subsystem is None else subsystem
    if s.dims[subsystem - 1] != 2:
        raise DimMismatch("probe kicks couple to spin-1/2 subsystems")
    f = pr.exact(strength)
    new_terms = []
    for m, proj in _kick_projectors(axis, subsystem, s.dims):
        for labels, vec in s.terms:
            part = proj @ vec
            if np.vdot(part, part).real <= _DROP:
                continue
            moved = tuple(
                (pid, pr.shift(lab, particle, -m * f) if pid == pair_id else lab) for pid, lab in labels
            )
            if not any(pid == pair_id for pid, _ in labels):
                raise KeyError(f"state carries no probe pair {pair_id!r}")
            new_terms.append((moved, part))
    return QState(s.dims, tuple(new_terms))


def pi_branches(s: QState, pair_id: str, particle: int, sampled: float = 0.0) -> list[tuple[float, float, QState]]:
    """Outcomes of reading a probe momentum as ``(value, prob, post)``.

    For an unread pair the readout equals the externally ``sampled`` value on
    every branch and no branch is selected.  For a half-read pair the result
    is a projective measurement over the distinct sharp momenta.
    """
    total = s.norm2
    groups: list[list] = []
    for labels, vec in s.terms:
        lab = dict(labels)[pair_id]
        value, new_lab = pr.measure_pi(lab, particle, sampled)
        new_labels = tuple((pid, new_lab if pid == pair_id else l) for pid, l in labels)
        if isinstance(lab, pr.Epr):
            key = None
        else:
            key = value
        for g in groups:
            if (g[0] is None and key is None) or (
                g[0] is not None and key is not None and abs(g[0] - key) < pr.LABEL_TOL
            ):
                g[1].append((new_labels, vec))
                break
        else:
            groups.append([key, [(new_labels, vec)]])
    out = []
    for key, terms in groups:
        post = QState(s.dims, tuple(terms))
        value = float(sampled) if key is None else key
        out.append((value, post.norm2 / total, post.normalized()))
    return out


def reduced_density(s: QState, keep: int | None = None) -> LinOp:
    """Spin density matrix with probe labels traced out (optionally reduced further)."""
    from .hilbert import partial_trace

    total = s.norm2
    rho = sum(np.outer(v, v.conj()) for _, v in s.terms) / total
    op = LinOp(s.dims, rho)
    return op if keep is None else partial_trace(op, keep)


@dataclass(frozen=True)
class Measure:
    """Projective measurement of a B-side observable (outcome discarded)."""

    observable: LinOp


@dataclass(frozen=True)
class Unitary:
    """Coupling ``exp(-i k B)`` of an external field to a B-side operator."""

    generator: LinOp
    k: float


def total_variation(p: dict, q: dict, tol: float = 1e-8) -> float:
    keys = list(p)
    for key in q:
        if not any(abs(key - k) <= tol for k in keys):
            keys.append(key)

    def get(d, key):
        return sum(v for k, v in d.items() if abs(k - key) <= tol)

    return 0.5 * sum(abs(get(p, k) - get(q, k)) for k in keys)


def _after(s: QState, intervention) -> list[tuple[float, QState]]:
    """Ensemble of ``(weight, state)`` after an intervention, outcomes discarded."""
    if isinstance(intervention, Measure):
        return [(p, post) for _, p, post in spin_branches(s, intervention.observable)]
    if isinstance(intervention, Unitary):
        return [(1.0, external_field(s, intervention.generator, intervention.k))]
    raise TypeError(f"unsupported intervention {intervention!r}")


def _intervention_ops(intervention) -> list[LinOp]:
    if isinstance(intervention, Measure):
        return [p for _, p in spectral(intervention.observable)]
    return [intervention.generator]


def no_signaling_audit(
    s: QState,
    obs_a: LinOp,
    interventions: Sequence,
    *,
    between: Sequence = (),
    require_commuting: bool = True,
) -> float:
    """Largest total-variation change of the A-side marginal over the interventions.

    ``between`` lists further operations applied after the intervention and
    before the A-side readout.  With ``require_commuting`` every B-side
    operator must commute with ``obs_a`` (and with everything in ``between``).
    """
    if require_commuting:
        a_side = [obs_a] + [op for item in between for op in _intervention_ops(item)]
        for iv in interventions:
            for b in _intervention_ops(iv):
                for a in a_side:
                    ok, worst = commutes(a, b)
                    if not ok:
                        raise NonCommuting(f"B-side operator fails to commute (max entry {worst:.3g})")

    def a_marginal(ensemble):
        for item in between:
            ensemble = [(w * w2, st2) for w, st in ensemble for w2, st2 in _after(st, item)]
        out: dict = {}
        for w, st in ensemble:
            for value, p in born(st, obs_a).items():
                out[value] = out.get(value, 0.0) + w * p
        return out

    reference = a_marginal([(1.0, s)])
    worst = 0.0
    for iv in interventions:
        worst = max(worst, total_variation(reference, a_marginal(_after(s, iv))))
    return worst


def sigma_tot_sq_demo(flip: bool | None = None, measure_total: bool = True):
    """Signaling through an ideal measurement of the squared total spin.

    Prepares ``|uu>``, optionally flips spin 2 with a pi/2 field pulse about x,
    measures ``(σ_tot)²`` projectively and returns ``P(σ_z(1) = -1)``.  With
    ``flip=None`` both variants are reported as ``{"p_noflip", "p_flip"}``.
    """
    if flip is None:
        return {
            "p_noflip": sigma_tot_sq_demo(False, measure_total),
            "p_flip": sigma_tot_sq_demo(True, measure_total),
        }
    dims = (2, 2)
    start = QState(dims, (((), np.kron([1, 0], [1, 0])),))
    ensemble = [(1.0, start)]
    if flip:
        flip_gen = embed(pauli("x"), 2, dims)
        ensemble = [(1.0, external_field(start, flip_gen, math.pi / 2))]
    if measure_total:
        s_tot = [sigma_total(a) for a in "xyz"]
        squared = LinOp(dims, sum(op.matrix @ op.matrix for op in s_tot))
        ensemble = [(w * p, post) for w, st in ensemble for _, p, post in spin_branches(st, squared)]
    sz1 = embed(pauli("z"), 1, dims)
    return float(sum(w * born(st, sz1).get(-1.0, 0.0) for w, st in ensemble))
