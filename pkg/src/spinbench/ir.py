"""Circuit intermediate representation, hardware profile and timing.

Circuits are strictly sequential: one operation per time step. Qubit indices
are logical; shuttles carry the physical dots they move between.

Text format (one operation per line, ``#`` starts a comment)::

    H q0
    CZ q0 q1
    RX q2 1.5707963
    CPHASE q0 q3 3.14159
    MEASURE q4
    RESET q4
    SHUTTLE q1 (0,1) (0,2)
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from enum import Enum

Dot = tuple[int, int]

TWO_PI = 2.0 * math.pi


class Gate(str, Enum):
    H = "H"
    CX = "CX"
    CY = "CY"
    CZ = "CZ"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CPHASE = "CPHASE"
    X = "X"
    Y = "Y"
    Z = "Z"
    MEASURE = "MEASURE"
    SHUTTLE = "SHUTTLE"
    RESET = "RESET"

    @property
    def arity(self) -> int:
        return 2 if self in TWO_QUBIT else 1

    @property
    def has_angle(self) -> bool:
        return self in ROTATIONS or self is Gate.CPHASE


class Tag(str, Enum):
    CIRCUIT = "circuit"
    ROUTING = "routing"
    NOISE = "noise"


TWO_QUBIT = frozenset({Gate.CX, Gate.CY, Gate.CZ, Gate.CPHASE})
ROTATIONS = frozenset({Gate.RX, Gate.RY, Gate.RZ})
PAULIS = frozenset({Gate.X, Gate.Y, Gate.Z})
SINGLE_QUBIT_UNITARY = frozenset({Gate.H, *ROTATIONS, *PAULIS})


def reduce_angle(angle: float) -> float:
    """Map ``angle`` into [0, 2*pi)."""
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle!r}")
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod can land exactly on 2*pi after the shift for tiny negatives
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class Operation:
    gate: Gate
    qubits: tuple[int, ...]
    angle: float | None = None
    src: Dot | None = None
    dst: Dot | None = None
    tag: Tag = Tag.CIRCUIT

    def __post_init__(self):
        gate = Gate(self.gate)
        object.__setattr__(self, "gate", gate)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != gate.arity:
            raise ValueError(f"{gate.value} takes {gate.arity} operand(s), got {self.qubits}")
        if gate.arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{gate.value} operands must be distinct")
        if any(q < 0 for q in self.qubits):
            raise ValueError("qubit indices must be non-negative")
        if gate.has_angle:
            if self.angle is None:
                raise ValueError(f"{gate.value} needs an angle")
            object.__setattr__(self, "angle", reduce_angle(float(self.angle)))
        elif self.angle is not None:
            raise ValueError(f"{gate.value} takes no angle")
        if gate is Gate.SHUTTLE:
            if self.src is None or self.dst is None:
                raise ValueError("SHUTTLE needs source and target dots")
            src, dst = tuple(self.src), tuple(self.dst)
            if src == dst:
                raise ValueError("SHUTTLE source and target must differ")
            object.__setattr__(self, "src", src)
            object.__setattr__(self, "dst", dst)
        elif self.src is not None or self.dst is not None:
            raise ValueError(f"{gate.value} takes no dots")
        object.__setattr__(self, "tag", Tag(self.tag))

    @property
    def is_two_qubit(self) -> bool:
        return self.gate in TWO_QUBIT

    def to_text(self) -> str:
        parts = [self.gate.value] + [f"q{q}" for q in self.qubits]
        if self.angle is not None:
            parts.append(repr(self.angle))
        if self.gate is Gate.SHUTTLE:
            parts += [f"({self.src[0]},{self.src[1]})", f"({self.dst[0]},{self.dst[1]})"]
        return " ".join(parts)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[Operation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        for op in self.ops:
            if max(op.qubits) >= self.n_qubits:
                raise ValueError(f"operand out of range in {op.to_text()!r}")

    def __len__(self) -> int:
        return len(self.ops)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.n_qubits, other.n_qubits), self.ops + other.ops)

    def reversed(self) -> "Circuit":
        # every gate in {H, CX, CY, CZ} is self-inverse; measurements stay qubit-touch events
        return Circuit(self.n_qubits, self.ops[::-1])

    def count(self, gate: Gate) -> int:
        return sum(op.gate is gate for op in self.ops)

    def to_text(self) -> str:
        return "\n".join(op.to_text() for op in self.ops) + ("\n" if self.ops else "")


@dataclass(frozen=True)
class HardwareProfile:
    """Durations in ns; fidelities in (0, 1]."""

    t_1q: float = 100.0
    t_shuttle: float = 100.0
    t_2q: float = 150.0
    t_meas: float = 5000.0
    T2: float = 20000.0
    F_1q: float = 0.9999
    F_shuttle: float = 0.9999
    F_2q: float = 0.999
    F_meas: float = 0.999

    def __post_init__(self):
        for name in ("t_1q", "t_shuttle", "t_2q", "t_meas", "T2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("F_1q", "F_shuttle", "F_2q", "F_meas"):
            f = getattr(self, name)
            if not 0.0 < f <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")

    @classmethod
    def from_dict(cls, overrides: dict | None) -> "HardwareProfile":
        return replace(cls(), **(overrides or {}))


DEFAULT_PROFILE = HardwareProfile()


def duration_of(op: Operation, profile: HardwareProfile = DEFAULT_PROFILE) -> float:
    if op.tag is Tag.NOISE or op.gate is Gate.RESET:
        return 0.0
    if op.gate is Gate.SHUTTLE:
        return profile.t_shuttle
    if op.gate is Gate.MEASURE:
        return profile.t_meas
    if op.is_two_qubit:
        return profile.t_2q
    return profile.t_1q


def fidelity_of(op: Operation, profile: HardwareProfile = DEFAULT_PROFILE) -> float:
    if op.tag is Tag.NOISE or op.gate is Gate.RESET:
        return 1.0
    if op.gate is Gate.SHUTTLE:
        return profile.F_shuttle
    if op.gate is Gate.MEASURE:
        return profile.F_meas
    if op.is_two_qubit:
        return profile.F_2q
    return profile.F_1q


def circuit_duration(ops, profile: HardwareProfile = DEFAULT_PROFILE) -> float:
    """Total sequential duration in ns of a Circuit or an iterable of operations."""
    if isinstance(ops, Circuit):
        ops = ops.ops
    return math.fsum(duration_of(op, profile) for op in ops)


_QUBIT = re.compile(r"^q(\d+)$")
_DOT = re.compile(r"^\((-?\d+),(-?\d+)\)$")


def parse_operation(line: str, tag: Tag = Tag.CIRCUIT) -> Operation:
    tokens = line.split()
    try:
        gate = Gate(tokens[0].upper())
    except ValueError:
        raise ValueError(f"unknown gate {tokens[0]!r}") from None
    qubits = []
    rest = tokens[1:]
    while rest and _QUBIT.match(rest[0]):
        qubits.append(int(_QUBIT.match(rest.pop(0)).group(1)))
    angle = src = dst = None
    if gate is Gate.SHUTTLE:
        if len(rest) != 2:
            raise ValueError(f"SHUTTLE needs two dots: {line!r}")
        src, dst = (tuple(int(v) for v in _DOT.match(t.replace(" ", "")).groups()) for t in rest)
        tag = Tag.ROUTING if tag is Tag.CIRCUIT else tag
    elif gate.has_angle:
        if len(rest) != 1:
            raise ValueError(f"{gate.value} needs exactly one angle: {line!r}")
        angle = float(rest[0])
    elif rest:
        raise ValueError(f"unexpected tokens {rest} in {line!r}")
    return Operation(gate, tuple(qubits), angle=angle, src=src, dst=dst, tag=tag)


def parse_circuit(text: str, n_qubits: int | None = None) -> Circuit:
    ops = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            ops.append(parse_operation(line))
        except (ValueError, AttributeError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if n_qubits is None:
        n_qubits = 1 + max((max(op.qubits) for op in ops), default=0)
    return Circuit(n_qubits, tuple(ops))
