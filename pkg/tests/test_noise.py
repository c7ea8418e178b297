import math
from collections import Counter

import numpy as np
import pytest

from spinbench import noise as nz
from spinbench.arch import build_cg
from spinbench.circuits import qed412_circuit
from spinbench.compiler import compile_circuit
from spinbench.ir import DEFAULT_PROFILE, Gate, HardwareProfile, Operation
from spinbench.sim import zero_state
from spinbench.trajectory import NoiseModel, replay, run_single, run_trajectories

NO_DECAY = HardwareProfile(T2=1e300)


def within_3_sigma(count, n, p):
    sigma = math.sqrt(n * p * (1 - p))
    return abs(count - n * p) <= 3 * sigma


def uniforms(b, n, seed):
    return np.random.default_rng(seed).random((b, nz.width(n)))


def test_derived_constants():
    assert nz.tau(150, 20000) == pytest.approx((1 - math.exp(-0.0075)) / 2)
    assert nz.tau(150, 20000) == pytest.approx(3.736e-3, abs=5e-7)
    assert nz.kick_angle(150, 20000) == pytest.approx(math.pi * math.exp(0.0075))
    assert nz.kick_angle(150, 20000) == pytest.approx(3.1652, abs=5e-5)
    assert nz.cross_probability(0.03, 2.5) == pytest.approx(0.04)


def test_parameter_relations_and_validation():
    q = nz.NoiseParamsQ(p1d=0.02)
    assert q.p2d == pytest.approx(0.2)
    tn = nz.NoiseParamsTN(p1r=0.03, tau1p=0.002)
    assert tn.p2r == pytest.approx(0.3)
    assert tn.tau_2(150, 20000) == pytest.approx(0.02)
    # the per-op default mirrors the Pauli model, capped at 1 for long steps
    default = nz.NoiseParamsTN()
    assert default.tau_1(100, 20000) == pytest.approx(nz.tau(100, 20000))
    assert default.tau_2(5000, 20000) == 1.0
    with pytest.raises(ValueError):
        nz.NoiseParamsQ(p1d=0.2)
    with pytest.raises(ValueError):
        nz.NoiseParamsTN(crosstalk_enabled=True)
    with pytest.raises(ValueError):
        nz.NoiseParamsTN(rotation_scope="some")


def test_no_events_without_noise():
    c = qed412_circuit(3)
    seeds = list(range(50))
    quiet = NoiseModel("Q", q=nz.NoiseParamsQ(p1d=0.0))
    noisy = run_trajectories(c.ops, 7, seeds, quiet, NO_DECAY, record_events=True)
    clean = run_trajectories(c.ops, 7, seeds)
    assert noisy.events == []
    assert np.array_equal(noisy.states, clean.states)
    assert np.array_equal(noisy.bits, clean.bits)
    quiet_tn = NoiseModel("TN", tn=nz.NoiseParamsTN(p1r=0.0, tau1p=0.0))
    tn = run_trajectories(c.ops, 7, seeds, quiet_tn, record_events=True)
    assert tn.events == [] and np.array_equal(tn.states, clean.states)


def test_pauli_frequencies():
    n = 100_000
    psi = zero_state(1, n)
    log = nz.EventLog(np.arange(n))
    nz.q_noise(psi, Operation(Gate.H, (0,)), uniforms(n, 1, 1), nz.NoiseParamsQ(p1d=0.01), NO_DECAY, log)
    counts = Counter(e.gate for e in log.events)
    assert set(counts) <= {Gate.X, Gate.Y, Gate.Z}
    for g in (Gate.X, Gate.Y, Gate.Z):
        assert within_3_sigma(counts[g], n, 0.01 / 3)


def test_dephasing_frequency_after_two_qubit_gate():
    n = 100_000
    psi = zero_state(2, n)
    log = nz.EventLog(np.arange(n))
    nz.q_noise(psi, Operation(Gate.CZ, (0, 1)), uniforms(n, 2, 2), nz.NoiseParamsQ(p1d=0.0), DEFAULT_PROFILE, log)
    tau2 = nz.tau(150, 20000)
    per_qubit = Counter(e.qubits[0] for e in log.events if e.channel is nz.Channel.DEPHASING)
    assert within_3_sigma(per_qubit[0], n, tau2) and within_3_sigma(per_qubit[1], n, tau2)


def test_measurement_pauli_acts_before_projection():
    # p2d = 1: X or Y flips |0> before readout two times in three
    c = [Operation(Gate.MEASURE, (0,))]
    model = NoiseModel("Q", q=nz.NoiseParamsQ(p1d=0.1))
    out = run_trajectories(c, 1, range(30_000), model, NO_DECAY)
    assert within_3_sigma(int(out.bits.sum()), 30_000, 2 / 3)


def test_rotation_axis_uniform():
    n = 100_000
    log = nz.EventLog(np.arange(n))
    params = nz.NoiseParamsTN(p1r=0.1, tau1p=0.0)
    # a 2q-class op fires with p2r = 1 on each operand
    psi = zero_state(2, n)
    nz.tn_noise(psi, Operation(Gate.CX, (0, 1)), uniforms(n, 2, 3), params, DEFAULT_PROFILE, log)
    rot = [e for e in log.events if e.channel is nz.Channel.ROTATION]
    assert len(rot) == 2 * n
    counts = Counter(e.gate for e in rot)
    for g in (Gate.RX, Gate.RY, Gate.RZ):
        assert within_3_sigma(counts[g], 2 * n, 1 / 3)
    angles = np.array([e.angle for e in rot])
    assert np.all((angles >= 0) & (angles < 2 * math.pi))


def test_kick_angle_and_frequency():
    n = 50_000
    psi = zero_state(1, n)
    log = nz.EventLog(np.arange(n))
    params = nz.NoiseParamsTN(p1r=0.0, tau1p=0.05)
    nz.tn_noise(psi, Operation(Gate.H, (0,)), uniforms(n, 1, 4), params, DEFAULT_PROFILE, log)
    kicks = [e for e in log.events if e.channel is nz.Channel.KICK]
    assert within_3_sigma(len(kicks), n, 0.05)
    assert all(e.angle == pytest.approx(nz.kick_angle(100, 20000)) for e in kicks)


def test_crosstalk_partner_uniform():
    n = 100_000
    params = nz.NoiseParamsTN(p1r=0.1, crosstalk_enabled=True, xi=1 / 3)
    assert params.p_cross == 1.0
    psi = zero_state(7, 1)
    u = uniforms(n, 7, 5)
    log = nz.EventLog(np.arange(n))
    op = Operation(Gate.CZ, (2, 4))
    # the partner choice only depends on the uniforms, so reuse one state row per sample
    for start in range(0, n, 5000):
        chunk = np.repeat(psi, 5000, axis=0)
        sub = nz.EventLog(np.arange(start, start + 5000))
        nz.crosstalk_noise(chunk, op, u[start:start + 5000], params, sub)
        log.events += sub.events
    assert len(log.events) == n
    partners = Counter(e.qubits[1] for e in log.events)
    assert set(partners) == {0, 1, 3, 5, 6}
    for q in partners:
        assert within_3_sigma(partners[q], n, 1 / 5)
    legs = Counter(e.qubits[0] for e in log.events)
    assert within_3_sigma(legs[2], n, 1 / 2)
    assert all(0 <= e.angle < 2 * math.pi for e in log.events)


def test_crosstalk_needs_three_qubits():
    params = nz.NoiseParamsTN(p1r=0.1, crosstalk_enabled=True, xi=1 / 3)
    psi = zero_state(2, 100)
    log = nz.EventLog(np.arange(100))
    nz.crosstalk_noise(psi, Operation(Gate.CZ, (0, 1)), uniforms(100, 2, 6), params, log)
    assert log.events == []


def test_rotation_scope_and_post_measurement_switches():
    n = 2000
    op = Operation(Gate.H, (0,))
    every = nz.NoiseParamsTN(p1r=0.1, tau1p=0.0, rotation_scope="all")
    log = nz.EventLog(np.arange(n))
    nz.tn_noise(zero_state(3, n), op, uniforms(n, 3, 7), every, DEFAULT_PROFILE, log)
    assert {e.qubits[0] for e in log.events} == {0, 1, 2}
    quiet = nz.NoiseParamsTN(p1r=0.1, post_measurement_noise=False)
    log = nz.EventLog(np.arange(n))
    nz.tn_noise(zero_state(1, n), Operation(Gate.MEASURE, (0,)), uniforms(n, 1, 8), quiet, DEFAULT_PROFILE, log)
    assert log.events == []


def test_single_trajectory_wrappers():
    rng = np.random.default_rng(0)
    psi, events = nz.apply_Q_after(zero_state(2), Operation(Gate.CX, (0, 1)), nz.NoiseParamsQ(p1d=0.1), rng)
    assert psi.shape == (4,)
    assert all(e.channel in (nz.Channel.PAULI, nz.Channel.DEPHASING) for e in events)
    psi, events = nz.apply_TN_after(zero_state(2), Operation(Gate.CX, (0, 1)), nz.NoiseParamsTN(p1r=0.1), rng)
    assert sum(e.channel is nz.Channel.ROTATION for e in events) == 2
    params = nz.NoiseParamsTN(p1r=0.1, crosstalk_enabled=True, xi=1 / 3)
    _, events = nz.crosstalk_after_2q(zero_state(3), Operation(Gate.CZ, (0, 1)), params, rng)
    assert len(events) == 1 and events[0].qubits[1] == 2


@pytest.fixture(scope="module")
def compiled_qed():
    return compile_circuit(qed412_circuit(2), build_cg("CG2", 5), trials=2, seed=0)


@pytest.mark.parametrize("model", [
    NoiseModel("Q", q=nz.NoiseParamsQ(p1d=0.01)),
    NoiseModel("TN", tn=nz.NoiseParamsTN(p1r=0.05, crosstalk_enabled=True, xi=2.5)),
])
def test_log_replay_and_determinism(compiled_qed, model):
    ops = compiled_qed.ops
    a = run_trajectories(ops, 7, range(20), model, record_events=True, chunk=7)
    b = run_trajectories(ops, 7, range(20), model, record_events=True, chunk=20)
    # chunking changes the interleaving of trials, not any trial's own events
    by_trial = lambda ev: sorted(ev, key=lambda e: e.trial)
    assert by_trial(a.events) == by_trial(b.events)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.bits, b.bits)
    assert a.events, "expected some injected errors"
    for t in range(20):
        single, bits, events = run_single(ops, 7, np.random.default_rng(t), model)
        assert np.allclose(single, a.states[t], atol=1e-13)
        assert bits == list(a.bits[t])
        mine = [e for e in a.events if e.trial == t]
        assert [(e.op_index, e.channel, e.gate, e.qubits) for e in events] == \
               [(e.op_index, e.channel, e.gate, e.qubits) for e in mine]
        rebuilt = replay(ops, 7, mine, bits)
        assert abs(abs(np.vdot(rebuilt, a.states[t])) - 1) < 1e-10
