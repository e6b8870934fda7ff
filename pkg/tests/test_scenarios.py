import json
import math
import numpy as np
import pytest

import oracles
from relcollapse.hilbert import Ket, basis_ket, embed, fidelity, pauli, singlet
from relcollapse.measurement import QState, collapse
from relcollapse.scenarios import experiments as ex
from relcollapse.scenarios.engine import (
    HellwigKraus,
    Scenario,
    SpinMeasure,
    SurfaceCrossesEventExactly,
    TimelineOp,
    ValidationError,
    ZeroProbabilityConditioning,
    admissible_orders,
    hk_state_at_point,
    outcome_distribution,
    run,
    state_on_surface,
)
from relcollapse.scenarios.io import ConfigError, parse_scenario, transcript_to_dict
from relcollapse.spacetime import Event, Hyperplane

D = (2, 2)


def kets_close(a, b, tol=1e-12):
    return fidelity(a, b) >= 1 - tol


def test_eprb_aligned_always_anticorrelated():
    s = ex.eprb_scenario("z", "z")
    for seed in range(40):
        v = run(s, seed).values()
        assert v["sgm1"] == -v["sgm2"]


def test_single_op_scenario_is_plain_collapse():
    op = TimelineOp("m", Event(1, 0), SpinMeasure(pauli("x"), 1, "sx"), pin=-1.0)
    t = run(Scenario(singlet(), (op,)), 0)
    want = collapse(QState.from_ket(singlet()), embed(pauli("x"), 1, D), -1.0)
    assert t.final.is_close(want)
    assert t.weight == pytest.approx(0.5)


def test_validation_names_noncommuting_spacelike_pair():
    ops = (
        TimelineOp("a", Event(1, -5), SpinMeasure(pauli("z"), 1, "z1")),
        TimelineOp("b", Event(1, 5), SpinMeasure(pauli("x"), 1, "x1")),
    )
    with pytest.raises(ValidationError) as err:
        run(Scenario(singlet(), ops), 0)
    assert "'a'" in str(err.value) and "'b'" in str(err.value)
    assert err.value.pair == ("a", "b")


def test_timelike_noncommuting_ops_are_allowed():
    ops = (
        TimelineOp("a", Event(1, 0), SpinMeasure(pauli("z"), 1, "z1")),
        TimelineOp("b", Event(2, 0), SpinMeasure(pauli("x"), 1, "x1")),
    )
    dist = outcome_distribution(Scenario(singlet(), ops))
    assert sum(dist.values()) == pytest.approx(1.0)
    assert all(v == pytest.approx(0.25) for v in dist.values())


def test_impossible_pin_is_reported():
    s = ex.eprb_scenario("z", "z", pins={"sgm1": 1.0, "sgm2": 1.0})
    with pytest.raises(ZeroProbabilityConditioning):
        run(s, 0)


def test_surface_before_everything_gives_initial_state():
    s = ex.eprb_scenario("z", "z")
    t = run(s, 3)
    early = Hyperplane.from_rapidity(0.2, -10.0)
    assert state_on_surface(t, s, early).is_close(s.initial)


def test_surface_through_event_warns_and_excludes():
    s = ex.eprb_scenario("z", "z")
    t = run(s, 0)
    with pytest.warns(SurfaceCrossesEventExactly):
        st = state_on_surface(t, s, Hyperplane.through(Event(1.0, -5.0), 0.0))
    assert st.is_close(s.initial)


def test_reduced_density_depends_on_surface():
    res = ex.reduced_density_demo()
    assert np.allclose(res["sigma"], np.eye(2) / 2, atol=1e-15)
    assert np.allclose(res["xi"], np.diag([1, 0]), atol=1e-15)


@pytest.mark.filterwarnings("ignore::relcollapse.scenarios.engine.SurfaceCrossesEventExactly")
def test_one_particle_histories_disagree_between_frames():
    hist = ex.one_particle_histories()
    lab_mid = Ket((3,), np.array([0, 1, 1]) / math.sqrt(2))
    boosted_mid = Ket((3,), np.array([1, 0, 1]) / math.sqrt(2))

    def contains(history, ket):
        return any(kets_close(k, ket) for k in history)

    assert contains(hist["lab"], lab_mid) and not contains(hist["lab"], boosted_mid)
    assert contains(hist["boosted"], boosted_mid) and not contains(hist["boosted"], lab_mid)
    # both frames agree at the end
    assert kets_close(hist["lab"][-1], hist["boosted"][-1])


def test_light_cone_states():
    s = ex.eprb_scenario("z", "z", HellwigKraus(()), pins={"sgm1": 1.0, "sgm2": -1.0})
    t = run(s, 0)
    past = Event(-10.0, 0.0)  # inside the past cone of both measurements
    assert hk_state_at_point(s, past, t).is_close(s.initial)
    after_two_only = Event(2.0, 5.0)
    assert kets_close(hk_state_at_point(s, after_two_only, t).spin_ket(), basis_ket(D, (0, 1)))


def test_admissible_orders_respect_causality():
    s = ex.aa_scenario("singlet", axes="z")
    orders = admissible_orders(s)
    ids = [op.op_id for op in s.ops]
    for order in orders:
        pos = {ids[i]: k for k, i in enumerate(order)}
        assert pos["kick2_z"] < pos["read2_z"] and pos["kick1_z"] < pos["read1_z"]
    assert len(orders) == 6  # two kicks in either order, then reads after their own kick


# ------------------------------------------------------------ probe procedures


def test_aa_on_up_up_z_only():
    res = ex.aa_simultaneous(Ket(D, np.array([1, 0, 0, 0])), seed=4, axes="z")
    assert res.readouts["z"] == -2.0
    assert res.sigma_total["z"] == 2.0
    assert kets_close(res.post.spin_ket(), basis_ket(D, (0, 0)))


def test_aa_on_up_down_matches_lueders_oracle():
    dist = ex.aa_readout_distribution("ud")
    want = oracles.aa_all_zero(np.array([0, 1, 0, 0], dtype=complex))
    assert dist.get((0.0, 0.0, 0.0), 0.0) == pytest.approx(want, abs=1e-12)
    full = oracles.lueders_sequence(np.array([0, 1, 0, 0], dtype=complex), [oracles.total(a) for a in "xyz"])
    for key, p in full.items():
        sums = tuple(0.0 - v for v in key)  # with F = 1 the readout sum is minus the eigenvalue
        assert dist.get(sums, 0.0) == pytest.approx(p, abs=1e-12)


def test_aa_zero_strength_never_disturbs():
    t = ex.aa_time_displaced(seed=2, strength=1e-300)
    assert kets_close(t.state("after:read2").spin_ket(), singlet())


def test_aa_foliation_x_with_opposite_conditioning():
    t = ex.aa_under_foliation("x", seed=0, sz2=1.0)
    assert t.outcome("read1").readout_sum == 0.0
    assert kets_close(t.final.spin_ket(), basis_ket(D, (1, 0)))


def test_monitoring_variants():
    inter = ex.monitoring_conflict(0, "interleaved")["p_allzero_second_AA"]
    # oracle: the early primed kick and readout decohere spin 2 along z
    rho_branches = [
        np.kron(np.eye(2), (np.eye(2) + m * oracles.SZ) / 2) @ oracles.SINGLET for m in (1, -1)
    ]
    want = sum(oracles.aa_all_zero(b) for b in rho_branches)
    assert inter == pytest.approx(want, abs=1e-12)
    assert inter < 1
    assert ex.monitoring_conflict(0, "no_primed")["p_allzero_second_AA"] == pytest.approx(1.0, abs=1e-12)
    assert ex.monitoring_conflict(0, "primed_first")["p_allzero_second_AA"] == pytest.approx(1.0, abs=1e-12)


def test_chsh_monte_carlo_is_seeded():
    a = ex.chsh_monte_carlo(2000, seed=11)
    b = ex.chsh_monte_carlo(2000, seed=11)
    assert a == b


def test_no_signaling_suite_covers_random_states():
    cases = ex.no_signaling_suite(seed=5, n_random=5)
    assert len(cases) == 7
    assert max(c["deviation"] for c in cases) <= 1e-12


# ---------------------------------------------------------------------- io


DOC = {
    "schema": 1,
    "name": "demo",
    "initial": "singlet",
    "probes": {"p": "z"},
    "ops": [
        {"id": "k1", "event": [1, -5], "kick": {"pair": "p", "particle": 1, "strength": 1.0}},
        {"id": "k2", "event": [1, 5], "kick": {"pair": "p", "particle": 2, "strength": 1.0}},
        {"id": "r2", "event": [2, 5], "read": {"pair": "p", "particle": 2}, "pin": 0.5},
        {"id": "r1", "event": [2.5, -5], "read": {"pair": "p", "particle": 1}},
        {"id": "f", "event": [3, 5], "field": {"subsystem": 2, "axis": "x", "k": 0.3}},
    ],
    "scheme": {"type": "foliation", "rapidity": 0.2},
}


def test_parse_and_run_scenario_document():
    s = parse_scenario(DOC)
    t = run(s, 0)
    assert t.outcome("r1").readout_sum == 0.0
    assert t.outcome("r1").eigenvalue == -0.5
    json.dumps(transcript_to_dict(t))


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(extra=1),
        lambda d: d.update(schema=2),
        lambda d: d["ops"][0].update(colour="red"),
        lambda d: d["ops"][0]["kick"].update(pair="missing"),
        lambda d: d.update(initial="xyz"),
        lambda d: d.update(scheme={"type": "order", "order": ["nope"]}),
    ],
)
def test_bad_documents_are_config_errors(mutate):
    doc = json.loads(json.dumps(DOC))
    mutate(doc)
    with pytest.raises(ConfigError):
        parse_scenario(doc)
