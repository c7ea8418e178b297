"""Stochastic error channels injected after operations of a trajectory.

Every operation of a trajectory owns one row of ``width(n)`` uniforms in
[0, 1). The layout is fixed and independent of the noise parameters::

    col 0              measurement / reset outcome
    cols 1..4          crosstalk: fire, leg, partner, zeta
    cols 5+4j..8+4j    slot j: fire_a, which_a, fire_b, extra

Slot j belongs to operand j of the operation, or to qubit j when a channel
acts on every qubit. In the Pauli model fire_a/which_a pick the depolarizing
Pauli and fire_b the dephasing Z. In the rotation model fire_a/which_a pick
the rotation axis, extra sets mu and fire_b fires the Rz(psi) kick.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ir import DEFAULT_PROFILE, TWO_PI, Gate, HardwareProfile, Operation, Tag, duration_of, reduce_angle
from .sim import X, Y, Z, apply_matrix, cphase, rx, ry, rz

COL_OUTCOME = 0
COL_XT = 1
COL_SLOTS = 5
SLOT_WIDTH = 4


def width(n_qubits: int) -> int:
    return COL_SLOTS + SLOT_WIDTH * max(n_qubits, 2)


def slot_cols(j: int) -> tuple[int, int, int, int]:
    base = COL_SLOTS + SLOT_WIDTH * j
    return base, base + 1, base + 2, base + 3


def tau(t: float, T2: float) -> float:
    """Dephasing probability (1 - exp(-t/T2)) / 2 for a step of length t."""
    return 0.5 * (1.0 - math.exp(-t / T2))


def kick_angle(t: float, T2: float) -> float:
    """Rz kick angle pi * exp(t/T2), reduced into [0, 2 pi)."""
    return reduce_angle(math.pi * math.exp(t / T2))


def cross_probability(p1r: float, xi: float) -> float:
    return min(1.0, 10.0 * p1r / (3.0 * xi))


class Channel(str, Enum):
    PAULI = "pauli"
    DEPHASING = "dephasing"
    ROTATION = "rotation"
    KICK = "kick"
    CROSSTALK = "crosstalk"


@dataclass(frozen=True)
class ErrorEvent:
    trial: int
    op_index: int
    channel: Channel
    gate: Gate
    qubits: tuple[int, ...]
    angle: float | None = None

    def operation(self) -> Operation:
        return Operation(self.gate, self.qubits, angle=self.angle, tag=Tag.NOISE)


@dataclass(frozen=True)
class NoiseParamsQ:
    """Depolarizing Pauli errors plus duration-dependent Z dephasing."""

    p1d: float = 1e-4

    def __post_init__(self):
        if not 0.0 <= self.p1d <= 0.1:
            raise ValueError("p1d must lie in [0, 0.1]")

    @property
    def p2d(self) -> float:
        return 10.0 * self.p1d


@dataclass(frozen=True)
class NoiseParamsTN:
    """Random-angle rotations, Rz kicks and optional CPHASE crosstalk.

    ``tau1p=None`` evaluates (1 - exp(-t/T2))/2 per operation. Probabilities
    derived by the 10x rule are capped at 1.
    """

    p1r: float = 0.01
    tau1p: float | None = None
    crosstalk_enabled: bool = False
    xi: float | None = None
    rotation_scope: str = "operands"
    post_measurement_noise: bool = True

    def __post_init__(self):
        if not 0.0 <= self.p1r <= 0.1:
            raise ValueError("p1r must lie in [0, 0.1]")
        if self.tau1p is not None and not 0.0 <= self.tau1p <= 1.0:
            raise ValueError("tau1p must lie in [0, 1]")
        if self.rotation_scope not in ("operands", "all"):
            raise ValueError("rotation_scope must be 'operands' or 'all'")
        if self.crosstalk_enabled and not (self.xi and self.xi > 0):
            raise ValueError("crosstalk needs a positive average degree xi")

    @property
    def p2r(self) -> float:
        return min(1.0, 10.0 * self.p1r)

    def tau_1(self, t: float, T2: float) -> float:
        return tau(t, T2) if self.tau1p is None else self.tau1p

    def tau_2(self, t: float, T2: float) -> float:
        return min(1.0, 10.0 * self.tau_1(t, T2))

    @property
    def p_cross(self) -> float:
        return cross_probability(self.p1r, self.xi) if self.crosstalk_enabled else 0.0


_PAULIS = (Gate.X, Gate.Y, Gate.Z)
_PAULI_MATS = np.stack([X, Y, Z])
_AXES = (Gate.RX, Gate.RY, Gate.RZ)


def _pick3(u: np.ndarray) -> np.ndarray:
    return np.minimum((3.0 * u).astype(np.int64), 2)


def _apply_rows(psi, rows, qubits, mats):
    """Apply per-row matrices ``mats`` to ``psi[rows]`` in place."""
    if rows.size == 0:
        return
    sub = psi[rows]
    apply_matrix(sub, mats, qubits)
    psi[rows] = sub


class EventLog:
    """Append-only collector; ``trials`` maps batch rows to trial ids."""

    def __init__(self, trials):
        self.trials = np.asarray(trials)
        self.events: list[ErrorEvent] = []

    def add(self, rows, op_index, channel, gates, qubits, angles=None):
        for k, r in enumerate(rows):
            g = gates if isinstance(gates, Gate) else gates[k]
            a = None if angles is None else float(angles[k])
            q = qubits if isinstance(qubits[0], (int, np.integer)) else qubits[k]
            self.events.append(ErrorEvent(int(self.trials[r]), op_index, channel, g, tuple(int(x) for x in q), a))


def _is_two_qubit_class(op: Operation) -> bool:
    return op.is_two_qubit or op.gate is Gate.MEASURE


def q_noise(psi, op: Operation, u, params: NoiseParamsQ, profile: HardwareProfile = DEFAULT_PROFILE, log=None, op_index=0):
    """Pauli-model noise for ``op``; for MEASURE call before the projection.

    ``psi`` is (B, 2**n) and ``u`` the (B, W) uniform rows of this op.
    """
    if op.tag is Tag.NOISE or op.gate is Gate.RESET:
        return psi
    two = _is_two_qubit_class(op)
    p = params.p2d if two else params.p1d
    dephase = 0.0 if op.gate is Gate.MEASURE else tau(duration_of(op, profile), profile.T2)
    for j, q in enumerate(op.qubits):
        fa, wa, fb, _ = slot_cols(j)
        rows = np.flatnonzero(u[:, fa] < p)
        if rows.size:
            which = _pick3(u[rows, wa])
            _apply_rows(psi, rows, (q,), _PAULI_MATS[which])
            if log is not None:
                log.add(rows, op_index, Channel.PAULI, [_PAULIS[w] for w in which], (q,))
        if dephase > 0.0:
            rows = np.flatnonzero(u[:, fb] < dephase)
            if rows.size:
                _apply_rows(psi, rows, (q,), Z)
                if log is not None:
                    log.add(rows, op_index, Channel.DEPHASING, Gate.Z, (q,))
    return psi


def _rotation_mats(axis: np.ndarray, angle: np.ndarray) -> np.ndarray:
    mats = np.empty((axis.size, 2, 2), dtype=complex)
    for k, fn in enumerate((rx, ry, rz)):
        sel = axis == k
        if sel.any():
            mats[sel] = fn(angle[sel])
    return mats


def tn_noise(psi, op: Operation, u, params: NoiseParamsTN, profile: HardwareProfile = DEFAULT_PROFILE, log=None, op_index=0):
    """Rotation-model noise after ``op`` (after the projection for MEASURE)."""
    if op.tag is Tag.NOISE or op.gate is Gate.RESET:
        return psi
    if op.gate is Gate.MEASURE and not params.post_measurement_noise:
        return psi
    n = int(psi.shape[-1]).bit_length() - 1
    t = duration_of(op, profile)
    two = _is_two_qubit_class(op)
    p_rot = params.p2r if two else params.p1r
    p_kick = params.tau_2(t, profile.T2) if two else params.tau_1(t, profile.T2)
    kick = kick_angle(t, profile.T2)
    targets = range(n) if params.rotation_scope == "all" else op.qubits
    for j, q in enumerate(targets):
        fa, wa, fb, ex = slot_cols(j)
        rows = np.flatnonzero(u[:, fa] < p_rot)
        if rows.size:
            axis = _pick3(u[rows, wa])
            mu = 1.0 - u[rows, ex]  # in (0, 1]
            angle = np.mod(np.pi / mu, TWO_PI)
            _apply_rows(psi, rows, (q,), _rotation_mats(axis, angle))
            if log is not None:
                log.add(rows, op_index, Channel.ROTATION, [_AXES[a] for a in axis], (q,), angle)
        rows = np.flatnonzero(u[:, fb] < p_kick)
        if rows.size:
            _apply_rows(psi, rows, (q,), rz(kick))
            if log is not None:
                log.add(rows, op_index, Channel.KICK, Gate.RZ, (q,), np.full(rows.size, kick))
    return psi


def crosstalk_noise(psi, op: Operation, u, params: NoiseParamsTN, log=None, op_index=0):
    """CPHASE(zeta) between a random operand of a 2q gate and a random bystander."""
    if not (params.crosstalk_enabled and op.is_two_qubit) or op.tag is Tag.NOISE:
        return psi
    n = int(psi.shape[-1]).bit_length() - 1
    if n < 3:
        return psi
    others = [q for q in range(n) if q not in op.qubits]
    rows = np.flatnonzero(u[:, COL_XT] < params.p_cross)
    for r in rows:
        leg = op.qubits[min(int(2.0 * u[r, COL_XT + 1]), 1)]
        partner = others[min(int(len(others) * u[r, COL_XT + 2]), len(others) - 1)]
        zeta = TWO_PI * u[r, COL_XT + 3]
        _apply_rows(psi, np.array([r]), (leg, partner), cphase(zeta)[None])
        if log is not None:
            log.add([r], op_index, Channel.CROSSTALK, Gate.CPHASE, (leg, partner), [zeta])
    return psi


# ------------------------------------------------- single-trajectory wrappers


def _single(psi, rng):
    psi = np.asarray(psi)
    n = int(psi.shape[-1]).bit_length() - 1
    return psi.reshape(1, -1), rng.random(width(n)).reshape(1, -1)


def apply_Q_after(psi, op: Operation, params: NoiseParamsQ, rng, profile: HardwareProfile = DEFAULT_PROFILE, op_index=0, trial=0):
    """Pauli-model channel on one state; returns ``(psi, events)``."""
    b, u = _single(psi, rng)
    log = EventLog([trial])
    q_noise(b, op, u, params, profile, log, op_index)
    return b[0], log.events


def apply_TN_after(psi, op: Operation, params: NoiseParamsTN, rng, profile: HardwareProfile = DEFAULT_PROFILE, op_index=0, trial=0):
    b, u = _single(psi, rng)
    log = EventLog([trial])
    tn_noise(b, op, u, params, profile, log, op_index)
    return b[0], log.events


def crosstalk_after_2q(psi, op: Operation, params: NoiseParamsTN, rng, op_index=0, trial=0):
    b, u = _single(psi, rng)
    log = EventLog([trial])
    crosstalk_noise(b, op, u, params, log, op_index)
    return b[0], log.events
