"""Initial placement and shuttle-based routing.

Routing replays the circuit in order. Two-qubit gates need their operands on
adjacent dots; measurements need their qubit on the readout dot. Qubits are
moved one edge at a time into empty dots. Measured qubits stay parked on the
readout dot until something else needs it.

Movement planning is greedy (blocked-aware shortest paths with displacement of
blocking qubits). If the greedy planner stalls, an exact breadth-first search
over occupancy patterns finds a minimal shuttle sequence instead.
"""
from __future__ import annotations

import heapq
from functools import lru_cache
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .arch import ConnectivityGraph, bfs_path
from .ir import Circuit, Dot, Gate, HardwareProfile, DEFAULT_PROFILE, Operation, Tag, circuit_duration


class RoutingError(RuntimeError):
    pass


class PlacementError(ValueError):
    pass


@dataclass(frozen=True)
class InteractionGraph:
    n_qubits: int
    weights: dict  # (i, j) with i < j -> number of two-qubit gates

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.weights)

    def degree(self, q: int) -> int:
        return sum(q in e for e in self.weights)


def build_interaction_graph(circuit: Circuit) -> InteractionGraph:
    weights = Counter()
    for op in circuit.ops:
        if op.is_two_qubit:
            a, b = op.qubits
            weights[(min(a, b), max(a, b))] += 1
    return InteractionGraph(circuit.n_qubits, dict(weights))


@dataclass
class CompiledCircuit:
    n_qubits: int
    ops: list[Operation]
    initial_placement: dict[int, Dot]
    final_placement: dict[int, Dot]
    cg: ConnectivityGraph = field(repr=False)

    @property
    def shuttle_count(self) -> int:
        return sum(op.gate is Gate.SHUTTLE for op in self.ops)

    def duration(self, profile: HardwareProfile = DEFAULT_PROFILE) -> float:
        return circuit_duration(self.ops, profile)

    def logical_ops(self) -> list[Operation]:
        return [op for op in self.ops if op.tag is not Tag.ROUTING]

    def to_text(self) -> str:
        return "\n".join(op.to_text() for op in self.ops) + "\n"


def _check_placement(placement: dict[int, Dot], n_qubits: int, cg: ConnectivityGraph):
    dots = set(cg.dots)
    if sorted(placement) != list(range(n_qubits)):
        raise PlacementError("placement must cover every circuit qubit exactly once")
    if len(set(placement.values())) != len(placement):
        raise PlacementError("placement is not injective")
    if not set(placement.values()) <= dots:
        raise PlacementError("placement uses dots outside the grid")


class _Router:
    """Mutable occupancy state plus the emitted operation stream."""

    def __init__(self, cg: ConnectivityGraph, placement: dict[int, Dot]):
        self.cg = cg
        self.pos = dict(placement)
        self.occ = {d: q for q, d in placement.items()}
        self.ops: list[Operation] = []
        self.max_steps = 8 * cg.n_dots

    # -- primitives -------------------------------------------------------
    def shuttle(self, src: Dot, dst: Dot):
        q = self.occ.pop(src)
        if dst in self.occ or not self.cg.adjacent(src, dst):
            raise RoutingError(f"illegal shuttle of q{q} {src}->{dst}")
        self.occ[dst] = q
        self.pos[q] = dst
        self.ops.append(Operation(Gate.SHUTTLE, (q,), src=src, dst=dst, tag=Tag.ROUTING))

    def walk(self, path: list[Dot]):
        for a, b in zip(path, path[1:]):
            self.shuttle(a, b)

    def free(self, d: Dot) -> bool:
        return d not in self.occ

    # -- planning ---------------------------------------------------------
    def _approach(self, mover: int, goal, exclude: Dot | None, avoid: bool):
        occ = self.occ
        start = self.pos[mover]

        def passable(d):
            return d != exclude and (not avoid or d not in occ)

        def is_goal(d):
            return goal(d) and d != exclude and (not avoid or d not in occ)

        return bfs_path(self.cg, start, is_goal, passable)

    def _plans(self, movers):
        """Candidate (cost, kind, qubit, path) tuples; kind 0 = free path, 1 = blocked."""
        plans = []
        for m, goal, exclude in movers:
            free = self._approach(m, goal, exclude, avoid=True)
            if free is not None:
                plans.append((len(free) - 1, 0, m, free))
                continue
            path = self._approach(m, goal, exclude, avoid=False)
            if path is not None:
                blockers = sum(d in self.occ for d in path[1:])
                plans.append((len(path) - 1 + blockers, 1, m, path))
        plans.sort(key=lambda p: (p[0], p[1], p[2]))
        return plans

    def bring(self, movers, goal, target: Dot | None = None) -> None:
        """Move qubits until ``goal(positions)`` holds.

        ``movers`` lists (qubit, target predicate, excluded dot) candidates;
        ``target`` is the destination dot for single-qubit goals.
        """
        tracked = [m for m, _, _ in movers]
        for _ in range(self.max_steps):
            if goal(self.pos):
                return
            plans = self._plans(movers)
            if not plans:
                break
            _, kind, mover, path = plans[0]
            if kind == 0:
                self.walk(path)
                continue
            partners = frozenset(self.pos[m] for m in tracked if m != mover)
            displaced = resolve_blockage(self.cg, self.occ, path, partners)
            for op in displaced:
                self.pos[op.qubits[0]] = op.dst
            self.ops.extend(displaced)
            if all(self.free(d) for d in path[1:]):
                self.walk(path)
            elif not displaced:
                break
        if goal(self.pos):
            return
        moves = exact_moves(self.cg, self.occ, tracked, target)
        if moves is None:
            raise RoutingError("no shuttle sequence satisfies the routing goal")
        for src, dst in moves:
            self.shuttle(src, dst)


def exact_moves(
    cg: ConnectivityGraph,
    occ: dict[Dot, int],
    tracked: list[int],
    target: Dot | None = None,
) -> list | None:
    """Minimal shuttle sequence for a routing goal, as (src, dst) dot pairs.

    With two tracked qubits the goal is to make them adjacent; with one, to
    bring it onto ``target``. Untracked qubits are interchangeable, so the
    search state is the tracked positions plus the empty-dot bitmask. A*
    with the remaining graph distance as heuristic keeps the result optimal.
    """
    dots = cg.dots
    index = {d: i for i, d in enumerate(dots)}
    where = {q: index[d] for d, q in occ.items()}
    holes = 0
    for d in dots:
        if d not in occ:
            holes |= 1 << index[d]
    tpos = tuple(where[q] for q in tracked)
    goal = None if target is None else index[target]
    moves = _exact_search(cg, tpos, holes, goal)
    return None if moves is None else [(dots[a], dots[b]) for a, b in moves]


@lru_cache(maxsize=65536)
def _exact_search(cg: ConnectivityGraph, tpos: tuple, holes: int, goal: int | None):
    # periodic circuits revisit the same routing states, hence the cache
    dots = cg.dots
    n = len(dots)
    dist = cg.distance_matrix
    adj = [[dots.index(x) for x in cg.neighbors[d]] for d in dots]
    if goal is None:
        def h(t):
            return max(dist[t[0]][t[1]] - 1, 0)
    else:
        def h(t):
            return dist[t[0]][goal]
    start = (tpos, holes)
    if h(tpos) == 0:
        return ()
    parent = {start: None}
    best_g = {start: 0}
    counter = 0
    heap = [(h(tpos), 0, counter, start)]
    while heap:
        f, g, _, state = heapq.heappop(heap)
        if g > best_g[state]:
            continue
        t, hs = state
        if h(t) == 0:
            moves = []
            cur = state
            while parent[cur] is not None:
                prev, move = parent[cur]
                moves.append(move)
                cur = prev
            return tuple(moves[::-1])
        for hole in range(n):
            if not hs >> hole & 1:
                continue
            for src in adj[hole]:
                if hs >> src & 1:
                    continue
                nt = tuple(hole if x == src else x for x in t)
                new = (nt, hs ^ (1 << hole) ^ (1 << src))
                if g + 1 < best_g.get(new, 1 << 30):
                    best_g[new] = g + 1
                    parent[new] = (state, (src, hole))
                    counter += 1
                    heapq.heappush(heap, (g + 1 + h(nt), g + 1, counter, new))
    return None


def resolve_blockage(
    cg: ConnectivityGraph,
    occupancy: dict[Dot, int],
    path: list[Dot],
    protected: frozenset = frozenset(),
) -> list[Operation]:
    """Displace the qubits sitting on ``path[1:]``.

    A blocker first tries to travel over free dots to its nearest free dot
    off the path (breadth-first, lexicographic ties). Failing that, it is
    pushed: the chain of occupied dots leading to such a free dot shifts one
    step each. ``path[0]`` and ``protected`` dots are never disturbed.
    Blockers that cannot be moved stay put and the caller re-plans.
    ``occupancy`` (dot -> qubit) is updated in place; the emitted shuttles
    are returned.
    """
    on_path = set(path)
    fixed = set(protected) | {path[0]}
    ops = []

    def move(a, b):
        q = occupancy.pop(a)
        occupancy[b] = q
        ops.append(Operation(Gate.SHUTTLE, (q,), src=a, dst=b, tag=Tag.ROUTING))

    def off_path_free(x):
        return x not in occupancy and x not in on_path

    pending = [d for d in path[1:] if d in occupancy]
    progress = True
    while pending and progress:
        progress = False
        for d in list(pending):
            hop = bfs_path(cg, d, off_path_free, lambda x: x not in occupancy)
            if hop is not None:
                for a, b in zip(hop, hop[1:]):
                    move(a, b)
            else:
                chain = bfs_path(cg, d, off_path_free, lambda x: x in occupancy and x not in fixed)
                if chain is None:
                    continue
                for i in range(len(chain) - 2, -1, -1):
                    move(chain[i], chain[i + 1])
            pending.remove(d)
            progress = True
    return ops


def route(circuit: Circuit, cg: ConnectivityGraph, placement: dict[int, Dot]) -> CompiledCircuit:
    """Insert shuttles so every operation is executable on ``cg``."""
    if circuit.n_qubits > cg.n_dots:
        raise PlacementError("more qubits than dots")
    _check_placement(placement, circuit.n_qubits, cg)
    r = _Router(cg, placement)
    mdot = cg.measurement_dot
    for op in circuit.ops:
        if op.is_two_qubit:
            a, b = op.qubits

            if not cg.adjacent(r.pos[a], r.pos[b]):
                movers = [
                    (a, lambda d, b=b: cg.adjacent(d, r.pos[b]), r.pos[b]),
                    (b, lambda d, a=a: cg.adjacent(d, r.pos[a]), r.pos[a]),
                ]
                r.bring(movers, lambda p, a=a, b=b: cg.adjacent(p[a], p[b]))
        elif op.gate is Gate.MEASURE:
            (q,) = op.qubits
            if r.pos[q] != mdot:
                r.bring([(q, lambda d: d == mdot, None)], lambda p, q=q: p[q] == mdot, mdot)
        r.ops.append(op)
    return CompiledCircuit(circuit.n_qubits, r.ops, dict(placement), dict(r.pos), cg)


def random_placement(n_qubits: int, cg: ConnectivityGraph, rng: np.random.Generator) -> dict[int, Dot]:
    dots = cg.dots
    picks = rng.permutation(len(dots))[:n_qubits]
    return {q: dots[i] for q, i in enumerate(picks)}


def sabre_placement(circuit: Circuit, cg: ConnectivityGraph, trials: int = 10, seed: int = 0) -> dict[int, Dot]:
    """Reverse-traversal placement refinement.

    Each trial routes the circuit from a random placement, routes the reversed
    circuit from where that ended, and keeps the resulting placement. The
    candidate whose forward routing needs the fewest shuttles wins; ties go
    to the earliest trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if circuit.n_qubits > cg.n_dots:
        raise PlacementError(f"{circuit.n_qubits} qubits do not fit on {cg.n_dots} dots")
    rng = np.random.default_rng(seed)
    rev = circuit.reversed()
    best = None
    for t in range(trials):
        start = random_placement(circuit.n_qubits, cg, rng)
        fwd = route(circuit, cg, start)
        back = route(rev, cg, fwd.final_placement)
        cand = back.final_placement
        cost = route(circuit, cg, cand).shuttle_count
        if best is None or cost < best[0]:
            best = (cost, t, cand)
    return best[2]


def compile_circuit(circuit: Circuit, cg: ConnectivityGraph, trials: int = 10, seed: int = 0) -> CompiledCircuit:
    return route(circuit, cg, sabre_placement(circuit, cg, trials, seed))


@dataclass
class AuditReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def audit(compiled: CompiledCircuit, circuit: Circuit | None = None) -> AuditReport:
    """Replay a compiled stream and list every hardware-rule violation."""
    cg = compiled.cg
    bad = []
    pos = dict(compiled.initial_placement)
    if len(set(pos.values())) != len(pos):
        bad.append("initial placement not injective")
    occ = {d: q for q, d in pos.items()}
    for i, op in enumerate(compiled.ops):
        if op.gate is Gate.SHUTTLE:
            (q,) = op.qubits
            if pos.get(q) != op.src:
                bad.append(f"op {i}: q{q} is not at {op.src}")
            if not cg.adjacent(op.src, op.dst):
                bad.append(f"op {i}: {op.src}-{op.dst} is not an edge")
            if op.dst in occ:
                bad.append(f"op {i}: {op.dst} already holds q{occ[op.dst]}")
            occ.pop(pos.get(q), None)
            occ[op.dst] = q
            pos[q] = op.dst
        elif op.is_two_qubit:
            a, b = op.qubits
            if not cg.adjacent(pos[a], pos[b]):
                bad.append(f"op {i}: {op.to_text()} on non-adjacent dots {pos[a]}, {pos[b]}")
        elif op.gate is Gate.MEASURE:
            (q,) = op.qubits
            if pos[q] != cg.measurement_dot:
                bad.append(f"op {i}: measurement of q{q} away from readout dot")
    if len(occ) != len(pos):
        bad.append("dot shared by two qubits")
    if pos != compiled.final_placement:
        bad.append("final placement mismatch")
    if circuit is not None and compiled.logical_ops() != list(circuit.ops):
        bad.append("logical operation sequence differs from the input circuit")
    return AuditReport(bad)
