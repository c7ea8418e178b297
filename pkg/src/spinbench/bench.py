"""Benchmark metrics: Bell operator, logical success rate, ESP and I3."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuits import AME62_GENERATORS
from .ir import DEFAULT_PROFILE, HardwareProfile, circuit_duration, fidelity_of
from .sim import PauliString, pauli_expectation, subsystem_entropy

LN2 = math.log(2.0)


@dataclass(frozen=True)
class StabilizerGroup:
    generators: tuple[PauliString, ...]

    def __post_init__(self):
        gens = tuple(g if isinstance(g, PauliString) else PauliString(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if len({len(g) for g in gens}) > 1:
            raise ValueError("generators differ in length")
        for a, b in itertools.combinations(gens, 2):
            if not a.commutes(b):
                raise ValueError(f"generators {a} and {b} anticommute")

    @property
    def n_qubits(self) -> int:
        return len(self.generators[0])

    def elements(self) -> list[PauliString]:
        """All 2**k signed products, indexed by the generator subset bitmask."""
        out = [PauliString("I" * self.n_qubits)]
        for g in self.generators:
            out += [e * g for e in out]
        return out


AME62_GROUP = StabilizerGroup(AME62_GENERATORS)


def bell_expectation(psi, group: StabilizerGroup = AME62_GROUP):
    """Sum of expectation values over every element of the stabilizer group."""
    vals = [pauli_expectation(psi, e) for e in group.elements()]
    if np.ndim(vals[0]) == 0:
        return math.fsum(vals)
    return np.sum(np.stack(vals), axis=0)


# ---------------------------------------------------------------- [[4,1,2]]

SUCCESS = "success"
OUTCOMES = (SUCCESS, "Z", "X", "Y", "other")
SYNDROME_CLASS = {0b000: SUCCESS, 0b111: SUCCESS, 0b100: "Z", 0b010: "X", 0b001: "X", 0b110: "Y", 0b101: "Y", 0b011: "other"}


def syndromes(bits: np.ndarray) -> np.ndarray:
    """Frame-adjusted syndromes from raw outcome bits.

    ``bits`` is (B, 3 * (cycles + 1)) in stream order (X, Z1, Z2 per round).
    Returns (B, cycles, 3): each cycle's bits XOR the preparation round.
    """
    bits = np.asarray(bits)
    rounds = bits.reshape(bits.shape[0], -1, 3)
    return rounds[:, 1:, :] ^ rounds[:, :1, :]


def syndrome_code(s) -> np.ndarray:
    """Pack (..., 3) syndrome bits into integers with the X check as the high bit."""
    s = np.asarray(s, dtype=np.int64)
    return (s[..., 0] << 2) | (s[..., 1] << 1) | s[..., 2]


def classify_codes(codes) -> np.ndarray:
    """Outcome labels for an array of packed syndromes."""
    table = np.array([SYNDROME_CLASS[c] for c in range(8)])
    return table[np.asarray(codes, dtype=np.int64)]


def classify(code: int) -> str:
    return SYNDROME_CLASS[int(code)]


def logical_success_rate(final_syndromes) -> tuple[float, dict[str, float]]:
    """Success rate and Pauli class rates decided by each trial's final syndrome.

    ``final_syndromes`` is (B, 3) or a (B, cycles, 3) record whose last
    cycle is used.
    """
    s = np.asarray(final_syndromes)
    if s.size == 0:
        raise ValueError("no syndrome records")
    if s.ndim == 3:
        s = s[:, -1, :]
    codes = syndrome_code(s)
    counts = np.bincount(codes, minlength=8)
    total = codes.size
    rates = {k: 0.0 for k in OUTCOMES}
    for code, c in enumerate(counts):
        rates[SYNDROME_CLASS[code]] += c / total
    return rates[SUCCESS], rates


def esp(ops, profile: HardwareProfile = DEFAULT_PROFILE) -> float:
    """Product of operation fidelities times exp(-duration / T2)."""
    ops = list(getattr(ops, "ops", ops))
    log_f = math.fsum(math.log(fidelity_of(op, profile)) for op in ops)
    return math.exp(log_f - circuit_duration(ops, profile) / profile.T2)


# ---------------------------------------------------------------- I3


@dataclass(frozen=True)
class I3Partition:
    A: tuple[int, ...]
    B: tuple[int, ...]
    C: tuple[int, ...]

    def __post_init__(self):
        parts = [tuple(int(q) for q in p) for p in (self.A, self.B, self.C)]
        for name, p in zip("ABC", parts):
            if not p:
                raise ValueError(f"subsystem {name} is empty")
        flat = [q for p in parts for q in p]
        if len(set(flat)) != len(flat):
            raise ValueError("subsystems overlap")
        object.__setattr__(self, "A", parts[0])
        object.__setattr__(self, "B", parts[1])
        object.__setattr__(self, "C", parts[2])

    def check(self, n: int):
        if max(self.A + self.B + self.C) >= n:
            raise ValueError(f"partition exceeds {n} qubits")


def tripartite_mi(psi, part: I3Partition):
    """S_A + S_B + S_C + S_ABC - S_AB - S_BC - S_AC in nats (batched over rows)."""
    n = int(np.shape(psi)[-1]).bit_length() - 1
    part.check(n)
    a, b, c = part.A, part.B, part.C
    s = {key: subsystem_entropy(psi, keep) for key, keep in
         (("A", a), ("B", b), ("C", c), ("ABC", a + b + c), ("AB", a + b), ("BC", b + c), ("AC", a + c))}
    return s["A"] + s["B"] + s["C"] + s["ABC"] - s["AB"] - s["BC"] - s["AC"]
