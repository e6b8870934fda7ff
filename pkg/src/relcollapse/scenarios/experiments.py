"""Ready-made experiments built on the scenario engine.

Two-wing layouts put spin 1 and its apparatus at ``x = -WING`` and spin 2 at
``x = +WING``; with the short time spans used here the wings are always
spacelike separated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..hilbert import (
    Ket,
    LinOp,
    basis_ket,
    embed,
    fidelity,
    pauli,
    singlet,
)
from ..measurement import Measure, QState, Unitary, joint_prob, no_signaling_audit, reduced_density
from ..probe import ProbeRegister
from ..spacetime import Event, EventOrder, FlatFamily, Hyperplane
from .engine import (
    HellwigKraus,
    Kick,
    PiMeasure,
    Scenario,
    SolutionI,
    SolutionII,
    SpinMeasure,
    TimelineOp,
    Transcript,
    hk_state_at_point,
    outcome_distribution,
    run,
    state_on_surface,
)

__all__ = [
    "WING",
    "named_ket",
    "eprb_scenario",
    "eprb_correlation",
    "chsh",
    "chsh_directions",
    "xz_direction",
    "chsh_monte_carlo",
    "sample_eprb",
    "aa_scenario",
    "AAResult",
    "aa_simultaneous",
    "aa_readout_distribution",
    "aa_time_displaced",
    "aa_under_foliation",
    "monitoring_scenario",
    "monitoring_conflict",
    "reduced_density_demo",
    "one_particle_histories",
    "hk_refutation",
    "no_signaling_suite",
]

WING = 5.0
_LEFT, _RIGHT = -WING, WING


def named_ket(name: str) -> Ket:
    """``"singlet"`` or a two-letter string of ``u``/``d`` such as ``"ud"``."""
    if name == "singlet":
        return singlet()
    if len(name) == 2 and set(name) <= {"u", "d"}:
        return basis_ket((2, 2), ["ud".index(c) for c in name])
    raise ValueError(f"unknown two-spin state {name!r}; use 'singlet' or e.g. 'ud'")


# --------------------------------------------------------------------- EPRB


def eprb_scenario(a="z", b="z", scheme=None, t1: float = 1.0, t2: float = 1.0, pins=None) -> Scenario:
    """Singlet with a Stern-Gerlach measurement on each wing."""
    pins = pins or {}
    ops = (
        TimelineOp("sgm1", Event(t1, _LEFT), SpinMeasure(pauli(a), 1, "sigma1"), pins.get("sgm1")),
        TimelineOp("sgm2", Event(t2, _RIGHT), SpinMeasure(pauli(b), 2, "sigma2"), pins.get("sgm2")),
    )
    return Scenario(singlet(), ops, scheme=scheme or SolutionII(), name="eprb")


def _singlet_joint(a, b) -> dict:
    dims = (2, 2)
    s = QState.from_ket(singlet())
    return joint_prob(s, embed(pauli(a), 1, dims), embed(pauli(b), 2, dims))


def eprb_correlation(a, b) -> float:
    """Correlation ``E(a, b) = Σ αβ P(α, β)`` of spin outcomes on the singlet."""
    return float(sum(x * y * p for (x, y), p in _singlet_joint(a, b).items()))


def chsh(a, a2, b, b2) -> float:
    return abs(eprb_correlation(a, b) - eprb_correlation(a, b2) + eprb_correlation(a2, b) + eprb_correlation(a2, b2))


def xz_direction(degrees: float) -> np.ndarray:
    th = math.radians(degrees)
    v = np.array([math.sin(th), 0.0, math.cos(th)])
    return v / np.linalg.norm(v)


def chsh_directions(angles=(0.0, 90.0, 45.0, 135.0)) -> tuple:
    """Directions ``(a, a', b, b')`` in the x-z plane at the given polar angles."""
    return tuple(xz_direction(t) for t in angles)


def sample_eprb(a, b, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` joint outcome pairs drawn from the exact singlet distribution."""
    joint = _singlet_joint(a, b)
    keys = list(joint)
    probs = np.array([max(joint[k], 0.0) for k in keys])
    idx = rng.choice(len(keys), size=n, p=probs / probs.sum())
    return np.array(keys, dtype=float)[idx]


def chsh_monte_carlo(n: int, seed=0, angles=(0.0, 90.0, 45.0, 135.0)) -> dict:
    """Sampled CHSH value with ``n`` runs per setting pair."""
    a, a2, b, b2 = chsh_directions(angles)
    rng = np.random.default_rng(seed)
    settings = [(a, b, 1.0), (a, b2, -1.0), (a2, b, 1.0), (a2, b2, 1.0)]
    total, var = 0.0, 0.0
    correlations = []
    for x, y, sign in settings:
        pairs = sample_eprb(x, y, n, rng)
        products = pairs[:, 0] * pairs[:, 1]
        e = float(products.mean())
        correlations.append(e)
        total += sign * e
        var += float(products.var(ddof=1)) / n
    est = abs(total)
    se = math.sqrt(var)
    return {
        "analytic": chsh(a, a2, b, b2),
        "estimate": est,
        "stderr": se,
        "ci95": [est - 1.96 * se, est + 1.96 * se],
        "correlations": correlations,
    }


def _random_direction(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _random_two_spin(rng) -> Ket:
    amps = rng.normal(size=4) + 1j * rng.normal(size=4)
    return Ket((2, 2), amps / np.linalg.norm(amps))


def no_signaling_suite(seed=0, n_random: int = 20) -> list[dict]:
    """Marginal audits of spin 1 against operations on spin 2.

    Each case records the largest total-variation change of the spin-1
    marginal when spin 2 is measured along one of several axes or driven by
    an external field.  The first cases use the singlet with the fixed CHSH
    axes; the rest draw random two-spin states and random axes.
    """
    rng = np.random.default_rng(seed)
    dims = (2, 2)
    cases = []

    def audit(name, ket, a, bs, fields):
        s = QState.from_ket(ket)
        obs = embed(pauli(a), 1, dims)
        ivs = [Measure(embed(pauli(b), 2, dims)) for b in bs]
        ivs += [Unitary(embed(pauli(g), 2, dims), k) for g, k in fields]
        cases.append({"case": name, "deviation": no_signaling_audit(s, obs, ivs)})

    a, a2, b, b2 = chsh_directions()
    for name, axis in (("singlet/a", a), ("singlet/a'", a2)):
        audit(name, singlet(), axis, [b, b2, "x", "y", "z"], [("x", 0.7), ("z", math.pi / 2), (b, 1.3)])
    for k in range(n_random):
        audit(
            f"random/{k}",
            _random_two_spin(rng),
            _random_direction(rng),
            [_random_direction(rng) for _ in range(3)],
            [(_random_direction(rng), float(rng.uniform(0, 2 * math.pi))) for _ in range(3)],
        )
    return cases


# ---------------------------------------------------------- Aharonov-Albert


def aa_scenario(
    initial,
    axes: str = "xyz",
    strength: float = 1.0,
    scheme=None,
    start: float = 1.0,
    pins=None,
    tag: str = "",
) -> Scenario:
    """Nonlocal total-spin measurement with one probe pair per axis.

    For each axis both probe particles are kicked at the same lab time (one
    per wing), then every pair is read: particle 2 first, then particle 1.
    """
    ops = _aa_ops(axes, strength, start, pins or {}, tag)
    reg = ProbeRegister({tag + ax: ax for ax in axes})
    init = initial if isinstance(initial, (Ket, QState)) else named_ket(initial)
    return Scenario(init, ops, reg, scheme or SolutionII(), name="aa")


def _aa_ops(axes, strength, start, pins, tag="") -> tuple:
    ops = []
    for k, ax in enumerate(axes):
        t = start + 0.1 * k
        pid = tag + ax
        ops.append(TimelineOp(f"kick1_{pid}", Event(t, _LEFT), Kick(pid, 1, ax, strength)))
        ops.append(TimelineOp(f"kick2_{pid}", Event(t, _RIGHT), Kick(pid, 2, ax, strength)))
    for k, ax in enumerate(axes):
        pid = tag + ax
        ops.append(TimelineOp(f"read2_{pid}", Event(start + 1.0 + 0.1 * k, _RIGHT), PiMeasure(pid, 2), pins.get(f"read2_{pid}")))
    for k, ax in enumerate(axes):
        pid = tag + ax
        ops.append(TimelineOp(f"read1_{pid}", Event(start + 1.5 + 0.1 * k, _LEFT), PiMeasure(pid, 1)))
    return tuple(ops)


@dataclass(frozen=True, eq=False)
class AAResult:
    readouts: dict
    sigma_total: dict
    post: QState
    transcript: Transcript


def _readout_sums(t: Transcript, pair_ids) -> dict:
    out = {}
    for rec in t.outcomes:
        if rec.readout_sum is not None:
            out[rec.observable.split("_", 1)[1]] = rec.readout_sum
    return {pid: out[pid] for pid in pair_ids}


def aa_simultaneous(initial="singlet", seed=0, axes: str = "xyz", strength: float = 1.0, pins=None) -> AAResult:
    """Run the three-axis procedure once; readouts are the sums ``pi1 + pi2`` per axis."""
    s = aa_scenario(initial, axes, strength, pins=pins)
    t = run(s, seed)
    sums = _readout_sums(t, list(axes))
    return AAResult(sums, {ax: -v / strength + 0.0 for ax, v in sums.items()}, t.final, t)


def aa_readout_distribution(initial="singlet", axes: str = "xyz", strength: float = 1.0) -> dict:
    """Exact distribution of the per-axis readout sums, keyed by a tuple in ``axes`` order."""
    s = aa_scenario(initial, axes, strength)
    dist = outcome_distribution(s)
    out: dict = {}
    for key, p in dist.items():
        sums = dict(key)
        k = tuple(sums[ax] for ax in axes)
        out[k] = out.get(k, 0.0) + p
    return out


def aa_time_displaced(seed=0, strength: float = 1.0, pi2: float | None = None, initial="singlet", axis: str = "z") -> Transcript:
    """Single-axis procedure with the two kicks far apart in lab time.

    Order: kick on particle 2, readout of its momentum, kick on particle 1,
    readout of particle 1.  The state after the first readout is recorded
    under ``"after:read2"``.
    """
    events = {
        "kick2": Event(1.0, _RIGHT),
        "read2": Event(2.0, _RIGHT),
        "kick1": Event(3.0, _LEFT),
        "read1": Event(4.0, _LEFT),
    }
    ops = (
        TimelineOp("kick2", events["kick2"], Kick("p", 2, axis, strength)),
        TimelineOp("read2", events["read2"], PiMeasure("p", 2), pi2),
        TimelineOp("kick1", events["kick1"], Kick("p", 1, axis, strength)),
        TimelineOp("read1", events["read1"], PiMeasure("p", 1)),
    )
    order = EventOrder(tuple(events.values()))
    init = named_ket(initial) if isinstance(initial, str) else initial
    s = Scenario(init, ops, ProbeRegister({"p": axis}), SolutionII(order), name="aa-displaced")
    return run(s, seed)


def aa_foliation_scenario(axis: str = "z", strength: float = 1.0, sz2: float | None = -1.0, pi2: float | None = None):
    """Kicks simultaneous in the lab; the foliation crosses wing 2 entirely first.

    Crossing order: kick(2), read pi2, sigma_z(2), kick(1), read pi1, sigma_z(1).
    """
    ev = {
        "kick2": Event(1.0, _RIGHT),
        "read2": Event(2.0, _RIGHT),
        "sgm2": Event(3.0, _RIGHT),
        "kick1": Event(1.0, _LEFT),
        "read1": Event(2.0, _LEFT),
        "sgm1": Event(3.0, _LEFT),
    }
    ops = (
        TimelineOp("kick1", ev["kick1"], Kick("p", 1, axis, strength)),
        TimelineOp("kick2", ev["kick2"], Kick("p", 2, axis, strength)),
        TimelineOp("read2", ev["read2"], PiMeasure("p", 2), pi2),
        TimelineOp("read1", ev["read1"], PiMeasure("p", 1)),
        TimelineOp("sgm2", ev["sgm2"], SpinMeasure(pauli("z"), 2, "sigma_z(2)"), sz2),
        TimelineOp("sgm1", ev["sgm1"], SpinMeasure(pauli("z"), 1, "sigma_z(1)")),
    )
    order = EventOrder(tuple(ev[k] for k in ("kick2", "read2", "sgm2", "kick1", "read1", "sgm1")))
    return Scenario(singlet(), ops, ProbeRegister({"p": axis}), SolutionII(order), name="aa-foliation")


def aa_under_foliation(axis: str = "z", seed=0, strength: float = 1.0, sz2: float | None = -1.0, pi2=None) -> Transcript:
    return run(aa_foliation_scenario(axis, strength, sz2, pi2), seed)


# ------------------------------------------------------- monitoring conflict


def monitoring_scenario(variant: str = "interleaved", strength: float = 1.0) -> Scenario:
    """Primed single-axis (z) procedure around a full unprimed three-axis one.

    ``variant``: ``"interleaved"`` puts the unprimed procedure between the
    primed kicks; ``"primed_first"`` completes the primed procedure first;
    ``"no_primed"`` drops it.
    """
    if variant not in ("interleaved", "primed_first", "no_primed"):
        raise ValueError(f"unknown monitoring variant {variant!r}")
    ops = list(_aa_ops("xyz", strength, 2.0, {}))
    pairs = {ax: ax for ax in "xyz"}
    if variant != "no_primed":
        late = variant == "interleaved"
        t_kick1, t_read1 = (5.0, 5.5) if late else (1.2, 1.7)
        ops = [
            TimelineOp("kick2_zp", Event(1.0, _RIGHT), Kick("zp", 2, "z", strength)),
            TimelineOp("read2_zp", Event(1.5, _RIGHT), PiMeasure("zp", 2)),
            TimelineOp("kick1_zp", Event(t_kick1, _LEFT), Kick("zp", 1, "z", strength)),
            TimelineOp("read1_zp", Event(t_read1, _LEFT), PiMeasure("zp", 1)),
        ] + ops
        pairs["zp"] = "z"
    return Scenario(singlet(), tuple(ops), ProbeRegister(pairs), SolutionII(), name=f"monitor-{variant}")


def monitoring_conflict(seed=0, variant: str = "interleaved", strength: float = 1.0) -> dict:
    """Probability that the unprimed procedure reports zero on all three axes."""
    s = monitoring_scenario(variant, strength)
    dist = outcome_distribution(s)
    p = 0.0
    for key, prob in dist.items():
        sums = dict(key)
        if all(abs(sums[ax]) < 1e-9 for ax in "xyz"):
            p += prob
    t = run(s, seed)
    sampled = _readout_sums(t, [pid for pid in ("x", "y", "z", "zp") if pid in s.probes])
    return {"p_allzero_second_AA": p, "sampled_sums": sampled}


# -------------------------------------------------- surface dependence demos


def reduced_density_demo(tilt: float = 0.3) -> dict:
    """Reduced state of spin 1 on two surfaces through the same wing-1 event.

    Spin 2 is measured along z at ``(1, +WING)`` with outcome -1.  Surface
    ``sigma`` leaves that event in its future; ``xi`` has already crossed it.
    """
    sgm2 = TimelineOp("sgm2", Event(1.0, _RIGHT), SpinMeasure(pauli("z"), 2, "sigma_z(2)"), -1.0)
    here = Event(1.0, _LEFT)
    sigma = Hyperplane.through(here, -tilt)
    xi = Hyperplane.through(here, tilt)
    s = Scenario(singlet(), (sgm2,), scheme=SolutionI((sigma, xi)), name="reduced-density")
    t = run(s, 0)
    return {
        "sigma": reduced_density(state_on_surface(t, s, sigma), keep=1).matrix,
        "xi": reduced_density(state_on_surface(t, s, xi), keep=1).matrix,
        "transcript": t,
        "scenario": s,
    }


def one_particle_histories(rapidity: float = 0.5, offsets: Sequence[float] | None = None) -> dict:
    """One particle spread over three regions, with null detectors at two of them.

    Detector 1 (region 1) and detector 2 (region 2) both report "absent" at
    spacelike separated events; detector 1 fires first in the lab frame and
    last in the frame boosted by ``rapidity``.  Returns the state histories
    along the simultaneity leaves of both frames.
    """
    dims = (3,)
    uniform = Ket(dims, np.ones(3) / math.sqrt(3))
    ops = (
        TimelineOp("det1", Event(1.0, -3.0), SpinMeasure(LinOp(dims, np.diag([1.0, 0, 0])), 1, "P1"), 0.0),
        TimelineOp("det2", Event(1.5, 0.0), SpinMeasure(LinOp(dims, np.diag([0, 1.0, 0])), 1, "P2"), 0.0),
    )
    s = Scenario(uniform, ops, scheme=SolutionI(), name="one-particle")
    t = run(s, 0)
    offsets = list(offsets) if offsets is not None else list(np.linspace(-2.0, 5.0, 57))
    out = {}
    for label, chi in (("lab", 0.0), ("boosted", rapidity)):
        fam = FlatFamily.from_rapidity(chi, offsets)
        out[label] = [state_on_surface(t, s, fam.leaf(o)).spin_ket() for o in offsets]
    return out


# ---------------------------------------------------- light-cone reduction


def hk_refutation(strength: float = 1.0, epsilon: float = 0.1, t0: float = 2.0) -> dict:
    """Three-axis verification just before an EPRB pair of z measurements.

    The spin measurements happen at ``t0`` on both wings; the verification
    runs on the slice ``t0 - epsilon``.  Along ordinary simultaneity slices
    the state there is still the singlet, so verification succeeds with
    certainty.  The light-cone prescription instead assigns each wing a state
    already reduced by the other wing's measurement.  Returned:
    ``p_standard``, ``p_lightcone`` (both averaged over the EPRB outcomes) and
    their difference ``mass``, plus the per-branch light-cone states.
    """
    x1, x2 = Event(t0 - epsilon, _LEFT), Event(t0 - epsilon, _RIGHT)
    branches = []
    p_light = 0.0
    for out1, out2 in ((1.0, -1.0), (-1.0, 1.0)):
        pins = {"sgm1": out1, "sgm2": out2}
        s = eprb_scenario("z", "z", HellwigKraus((x1, x2)), t0, t0, pins)
        t = run(s, 0)
        w = t.weight
        st1 = hk_state_at_point(s, x1, t).spin_ket()
        st2 = hk_state_at_point(s, x2, t).spin_ket()
        if fidelity(st1, st2) < 1 - 1e-12:
            raise RuntimeError("light-cone states at the two wings disagree")
        dist = aa_readout_distribution(st1)
        p_zero = dist.get((0.0, 0.0, 0.0), 0.0)
        p_light += w * p_zero
        branches.append({"outcomes": (out1, out2), "weight": w, "state": st1, "p_allzero": p_zero})
    p_standard = aa_readout_distribution(singlet()).get((0.0, 0.0, 0.0), 0.0)
    return {
        "p_standard": p_standard,
        "p_lightcone": p_light,
        "mass": p_standard - p_light,
        "branches": branches,
    }
