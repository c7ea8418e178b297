"""Monte Carlo trajectory replay of compiled operation streams."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import noise as nz
from .ir import DEFAULT_PROFILE, Gate, HardwareProfile, Operation, Tag
from .sim import apply_gate, measure_z, project, reset, zero_state

DEFAULT_CHUNK = 256


@dataclass(frozen=True)
class NoiseModel:
    """Which channels to inject: ``kind`` is 'none', 'Q' or 'TN'."""

    kind: str = "none"
    q: nz.NoiseParamsQ = field(default_factory=nz.NoiseParamsQ)
    tn: nz.NoiseParamsTN = field(default_factory=nz.NoiseParamsTN)

    def __post_init__(self):
        if self.kind not in ("none", "Q", "TN"):
            raise ValueError(f"unknown noise model {self.kind!r}")


NOISELESS = NoiseModel()


@dataclass
class TrajectoryBatch:
    states: np.ndarray  # (B, 2**n) final states
    bits: np.ndarray  # (B, n_measurements) outcomes in stream order
    events: list = field(default_factory=list)


def _run_rows(psi, ops, uniforms, model, profile, log, bits_out):
    m = 0
    for i, op in enumerate(ops):
        u = uniforms[:, i, :]
        if op.gate is Gate.MEASURE:
            if model.kind == "Q":
                nz.q_noise(psi, op, u, model.q, profile, log, i)
            b, _ = measure_z(psi, op.qubits[0], u[:, nz.COL_OUTCOME])
            bits_out[:, m] = b
            m += 1
            if model.kind == "TN":
                nz.tn_noise(psi, op, u, model.tn, profile, log, i)
            continue
        if op.gate is Gate.RESET:
            reset(psi, op.qubits[0], u[:, nz.COL_OUTCOME])
            continue
        apply_gate(psi, op)
        if op.tag is Tag.NOISE:
            continue
        if model.kind == "Q":
            nz.q_noise(psi, op, u, model.q, profile, log, i)
        elif model.kind == "TN":
            nz.tn_noise(psi, op, u, model.tn, profile, log, i)
            nz.crosstalk_noise(psi, op, u, model.tn, log, i)


def trial_uniforms(seed: int, n_ops: int, n_qubits: int) -> np.ndarray:
    """The (n_ops, W) uniform matrix of one trial."""
    return np.random.default_rng(seed).random((n_ops, nz.width(n_qubits)))


def run_trajectories(
    ops,
    n_qubits: int,
    seeds,
    model: NoiseModel = NOISELESS,
    profile: HardwareProfile = DEFAULT_PROFILE,
    record_events: bool = False,
    chunk: int = DEFAULT_CHUNK,
    reducer=None,
):
    """Simulate one trajectory per seed, ``chunk`` trajectories at a time.

    ``reducer(batch, start)``, if given, is called per chunk and its results
    are returned as a list instead of the concatenated states (which may not
    fit in memory for large trial counts).
    """
    ops = list(ops)
    seeds = list(seeds)
    n_meas = sum(op.gate is Gate.MEASURE for op in ops)
    out, all_states, all_bits, events = [], [], [], []
    for start in range(0, len(seeds), chunk):
        part = seeds[start:start + chunk]
        uniforms = np.stack([trial_uniforms(s, len(ops), n_qubits) for s in part]) if ops else np.zeros((len(part), 0, nz.width(n_qubits)))
        psi = zero_state(n_qubits, len(part))
        bits = np.zeros((len(part), n_meas), dtype=np.int8)
        log = nz.EventLog(np.arange(start, start + len(part))) if record_events else None
        _run_rows(psi, ops, uniforms, model, profile, log, bits)
        batch = TrajectoryBatch(psi, bits, log.events if log else [])
        if reducer is not None:
            out.append(reducer(batch, start))
        else:
            all_states.append(psi)
            all_bits.append(bits)
        events += batch.events
    if reducer is not None:
        return out
    states = np.concatenate(all_states) if all_states else zero_state(n_qubits, 0)
    return TrajectoryBatch(states, np.concatenate(all_bits) if all_bits else np.zeros((0, n_meas), np.int8), events)


def run_single(ops, n_qubits: int, rng: np.random.Generator, model: NoiseModel = NOISELESS, profile: HardwareProfile = DEFAULT_PROFILE):
    """One trajectory driven by ``rng`` with one ``rng.random(W)`` draw per op.

    Consumes the generator exactly as ``trial_uniforms`` does, so a fresh
    ``default_rng(seed)`` reproduces ``run_trajectories(..., [seed])``.
    Returns ``(state, bits, events)``.
    """
    psi = zero_state(n_qubits, 1)
    bits, events = [], []
    w = nz.width(n_qubits)
    for i, op in enumerate(ops):
        u = rng.random(w)[None, :]
        b = np.zeros((1, 1), dtype=np.int8)
        log = nz.EventLog([0])
        _run_rows(psi, [op], u[:, None, :], model, profile, log, b)
        for e in log.events:
            events.append(nz.ErrorEvent(e.trial, i, e.channel, e.gate, e.qubits, e.angle))
        if op.gate is Gate.MEASURE:
            bits.append(int(b[0, 0]))
    return psi[0], bits, events


def replay(ops, n_qubits: int, events, bits) -> np.ndarray:
    """Rebuild a trajectory from its event log and measurement outcomes.

    Injected errors are re-applied after their op; pre-projection Pauli
    errors on measurements are applied before the forced projection.
    """
    by_op: dict[int, list] = {}
    for e in events:
        by_op.setdefault(e.op_index, []).append(e)
    psi = zero_state(n_qubits)
    m = 0
    for i, op in enumerate(ops):
        evs = by_op.get(i, [])
        if op.gate is Gate.MEASURE:
            pre = [e for e in evs if e.channel is nz.Channel.PAULI]
            for e in pre:
                apply_gate(psi, e.operation())
            project(psi, op.qubits[0], bits[m])
            m += 1
            evs = [e for e in evs if e.channel is not nz.Channel.PAULI]
        elif op.gate is Gate.RESET:
            reset(psi, op.qubits[0], np.array([0.0]))
        else:
            apply_gate(psi, op)
        for e in evs:
            apply_gate(psi, e.operation())
    return psi


def ops_of(stream) -> list[Operation]:
    """Operations of a Circuit, CompiledCircuit or plain iterable."""
    return list(getattr(stream, "ops", stream))
