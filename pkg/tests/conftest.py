import numpy as np
import pytest

from relcollapse.hilbert import pauli
from relcollapse.measurement import field_unitary
from relcollapse.probe import ProbeRegister
from relcollapse.scenarios.engine import (
    Kick,
    PiMeasure,
    Scenario,
    SolutionII,
    SpinMeasure,
    SpinUnitary,
    TimelineOp,
)
from relcollapse.spacetime import Event, FlatFamily

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
        terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    return record_acceptance


def _random_axis(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _random_two_spin(rng):
    from relcollapse.hilbert import Ket

    a = rng.normal(size=4) + 1j * rng.normal(size=4)
    return Ket((2, 2), a / np.linalg.norm(a))


def random_commuting_scenario(rng, max_events: int = 5):
    """Random two-wing scenario whose spacelike pairs all commute.

    Operations on the left wing act on spin 1 and those on the right wing on
    spin 2, so cross-wing pairs commute by construction; same-wing ops are
    timelike separated and may be anything.  With probability one half a
    probe pair coupled to both wings is included.
    """
    ops = []
    probes = {}
    n_events = int(rng.integers(2, max_events + 1))
    with_probe = n_events >= 4 and rng.random() < 0.5
    if with_probe:
        axis = str(rng.choice(["x", "y", "z"]))
        probes["p"] = axis
        t0 = float(rng.uniform(0, 1))
        ops += [
            TimelineOp("kick1", Event(t0, -5.0), Kick("p", 1, axis, 1.0)),
            TimelineOp("kick2", Event(t0 + rng.uniform(-0.3, 0.3), 5.0), Kick("p", 2, axis, 1.0)),
            TimelineOp("read2", Event(t0 + 1.0 + rng.uniform(0, 0.5), 5.0), PiMeasure("p", 2)),
            TimelineOp("read1", Event(t0 + 1.0 + rng.uniform(0, 0.5), -5.0), PiMeasure("p", 1)),
        ]
    while len(ops) < n_events:
        k = len(ops)
        wing = int(rng.integers(1, 3))
        ev = Event(float(rng.uniform(0, 3)), -5.0 if wing == 1 else 5.0)
        if rng.random() < 0.6:
            act = SpinMeasure(pauli(_random_axis(rng)), wing, f"m{k}")
        else:
            act = SpinUnitary(field_unitary(pauli(_random_axis(rng)), float(rng.uniform(0, 3))), wing, f"u{k}")
        ops.append(TimelineOp(f"op{k}", ev, act))
    return Scenario(_random_two_spin(rng), tuple(ops), ProbeRegister(probes), SolutionII(FlatFamily.from_rapidity(0.0)))
