"""Benchmark circuits: the AME(6,2) graph state and [[4,1,2]] detection cycles."""
from __future__ import annotations

from .ir import Circuit, Gate, Operation, Tag

# 0-indexed edges of the AME(6,2) graph; qubit i's stabilizer is X_i Z_{N(i)}
AME62_EDGES = ((0, 1), (0, 4), (0, 5), (1, 2), (1, 3), (2, 3), (2, 5), (3, 4), (4, 5))

AME62_GENERATORS = (
    "XZIIZZ",
    "ZXZZII",
    "IZXZIZ",
    "IZZXZI",
    "ZIIZXZ",
    "ZIZIZX",
)

# [[4,1,2]] layout: data d1..d4 -> 0..3, ancillas aX, aZ1, aZ2 -> 4, 5, 6
DATA = (0, 1, 2, 3)
ANC_X, ANC_Z1, ANC_Z2 = 4, 5, 6
QED_QUBITS = 7
QED_STABILIZERS = ("XXXX", "IZIZ", "ZIZI")
QED_LOGICALS = {"X": "IXIX", "Z": "IIZZ"}
MAX_CYCLES = 10


def graph_generators(n: int, edges) -> list[str]:
    """Stabilizer generators X_i prod_{j ~ i} Z_j of a graph state."""
    gens = []
    for i in range(n):
        letters = ["I"] * n
        letters[i] = "X"
        for a, b in edges:
            if i in (a, b):
                letters[b if a == i else a] = "Z"
        gens.append("".join(letters))
    return gens


def graph_state_circuit(n: int, edges) -> Circuit:
    ops = [Operation(Gate.H, (q,)) for q in range(n)]
    ops += [Operation(Gate.CZ, e) for e in edges]
    return Circuit(n, ops)


def ame62_circuit() -> Circuit:
    """H on all six qubits, then CZ along the nine AME(6,2) graph edges."""
    return graph_state_circuit(6, AME62_EDGES)


def stabilizer_round() -> list[Operation]:
    """One X check and two Z checks, each ending with readout and reset.

    Measurement order per round is (XXXX, IZIZ, ZIZI).
    """
    d1, d2, d3, d4 = DATA
    ops = [Operation(Gate.H, (ANC_X,))]
    ops += [Operation(Gate.CX, (ANC_X, d)) for d in DATA]
    ops += [
        Operation(Gate.H, (ANC_X,)),
        Operation(Gate.MEASURE, (ANC_X,)),
        Operation(Gate.RESET, (ANC_X,)),
        Operation(Gate.CX, (d2, ANC_Z1)),
        Operation(Gate.CX, (d4, ANC_Z1)),
        Operation(Gate.MEASURE, (ANC_Z1,)),
        Operation(Gate.RESET, (ANC_Z1,)),
        Operation(Gate.CX, (d1, ANC_Z2)),
        Operation(Gate.CX, (d3, ANC_Z2)),
        Operation(Gate.MEASURE, (ANC_Z2,)),
        Operation(Gate.RESET, (ANC_Z2,)),
    ]
    return ops


def qed412_circuit(cycles: int, inject: dict[int, list[Operation]] | None = None) -> Circuit:
    """Preparation round followed by ``cycles`` stabilizer rounds.

    ``inject`` maps a round index r (1..cycles) to operations inserted just
    before that round; they are tagged as noise so they carry no cost.
    """
    if not 1 <= cycles <= MAX_CYCLES:
        raise ValueError(f"cycles must lie in [1, {MAX_CYCLES}], got {cycles}")
    inject = inject or {}
    ops = stabilizer_round()
    for r in range(1, cycles + 1):
        for op in inject.get(r, ()):
            ops.append(Operation(op.gate, op.qubits, angle=op.angle, tag=Tag.NOISE))
        ops += stabilizer_round()
    return Circuit(QED_QUBITS, ops)
