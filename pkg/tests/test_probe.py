from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relcollapse.probe import (
    AlreadyCollapsed,
    Collapsed,
    Consumed,
    ConsumedLabel,
    Epr,
    NotCollapsed,
    ProbeRegister,
    ShiftOnMeasuredParticle,
    measure_pi,
    measure_pi1,
    measure_pi2,
    prepare_epr,
    same_label,
    shift,
)

F = 0.7
finite = st.floats(-100, 100, allow_nan=False)


def test_fresh_pair_and_constraint():
    lab = prepare_epr()
    assert lab == Epr(0)
    out2, half = measure_pi2(lab, 1.25)
    out1, done = measure_pi1(half)
    assert out1 + out2 == 0
    assert done == Consumed(0)


def test_kicks_cancel_exactly():
    lab = shift(shift(prepare_epr(), 1, F), 2, -F)
    assert lab == Epr(0)
    assert shift(prepare_epr(), 2, 0.0) == Epr(0)


def test_kick_on_particle_two_of_unread_pair():
    assert shift(prepare_epr(), 2, F) == Epr(Fraction(F))


def test_kick_after_collapse_restores_open_momentum():
    p2 = 0.4
    _, half = measure_pi2(Epr(-Fraction(F)), p2)  # open momentum -p2 - F
    assert half.pi1 == pytest.approx(-p2 - F)
    after = shift(half, 1, F)
    assert same_label(after, Collapsed(0, p2))
    assert after.value == -p2


@pytest.mark.parametrize("net", [F, -F, 0.0])
def test_first_readout_labels(net):
    p2 = 0.3
    _, half = measure_pi2(Epr(net), p2)
    assert half.value == pytest.approx(net - p2)
    assert half.open_particle == 1


def test_readout_sum_of_doubly_kicked_pair():
    p2 = 0.55
    lab = shift(shift(prepare_epr(), 1, 1.0), 2, 1.0)  # both down-branch kicks with F = 1
    o2, half = measure_pi2(lab, p2)
    o1, done = measure_pi1(half)
    assert done.total == 2
    assert float(done.total) == pytest.approx(o1 + o2)


@given(finite, finite, finite)
def test_readout_sum_is_exact_kick_total(a, b, p2):
    lab = shift(shift(prepare_epr(), 1, a), 2, b)
    _, half = measure_pi(lab, 2, p2)
    _, done = measure_pi(half, 1)
    assert done.total == Fraction(a) + Fraction(b)


@given(finite)
def test_reading_order_is_symmetric(p):
    lab = Epr(F)
    _, h1 = measure_pi(lab, 1, p)
    _, d1 = measure_pi(h1, 2)
    _, h2 = measure_pi(lab, 2, p)
    _, d2 = measure_pi(h2, 1)
    assert d1 == d2 == Consumed(Fraction(F))


def test_errors():
    with pytest.raises(ConsumedLabel):
        shift(Consumed(0), 1, F)
    _, half = measure_pi2(prepare_epr(), 0.0)
    with pytest.raises(ShiftOnMeasuredParticle):
        shift(half, 2, F)
    with pytest.raises(AlreadyCollapsed):
        measure_pi2(half, 0.0)
    with pytest.raises(NotCollapsed):
        measure_pi1(prepare_epr())


def test_register():
    reg = ProbeRegister({"b": "x", "a": "z"})
    assert reg.ids == ("a", "b")
    assert reg.axis("b") == "x"
    assert "a" in reg and "c" not in reg
    with pytest.raises(ValueError):
        ProbeRegister({"a": "w"})
