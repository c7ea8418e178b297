"""Bilinear dot arrays and their connectivity graphs.

Dots are ``(row, col)`` tuples on a 2 x cols grid. Readout happens only at the
bottom-left dot ``(1, 0)``.

Default edge sets (the reference figures are not available as data):

* CG1: both rows, rungs at the two end columns and the central column
* CG2: both rows and every rung (a full ladder)
* CG3: the full ladder plus both diagonals of every unit cell
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable

from .ir import Dot

ROWS = 2
MIN_COLS, MAX_COLS = 4, 7
MEASUREMENT_DOT: Dot = (1, 0)


class Variant(str, Enum):
    CG1 = "CG1"
    CG2 = "CG2"
    CG3 = "CG3"
    CUSTOM = "Custom"

    @classmethod
    def parse(cls, value) -> "Variant":
        text = str(value).strip()
        if text.lower() == "custom":
            return cls.CUSTOM
        if text.isdigit():
            text = f"CG{text}"
        return cls(text.upper())


def _edge(a: Dot, b: Dot) -> tuple[Dot, Dot]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class ConnectivityGraph:
    cols: int
    edges: frozenset
    variant: Variant = Variant.CUSTOM
    measurement_dot: Dot = MEASUREMENT_DOT
    neighbors: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.cols < 1:
            raise ValueError("need at least one column")
        dots = self.dots
        dotset = set(dots)
        edges = set()
        for a, b in self.edges:
            a, b = tuple(a), tuple(b)
            if a == b:
                raise ValueError(f"self-loop at {a}")
            if a not in dotset or b not in dotset:
                raise ValueError(f"edge {a}-{b} leaves the 2x{self.cols} grid")
            edges.add(_edge(a, b))
        object.__setattr__(self, "edges", frozenset(edges))
        nbrs = {d: [] for d in dots}
        for a, b in edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        object.__setattr__(self, "neighbors", {d: tuple(sorted(v)) for d, v in nbrs.items()})
        if self.measurement_dot not in dotset:
            raise ValueError("measurement dot outside the grid")
        if not self.is_connected():
            raise ValueError("connectivity graph is disconnected")

    @cached_property
    def distance_matrix(self) -> list[list[int]]:
        """Hop distances indexed by position in ``dots``."""
        dots = self.dots
        out = []
        for d in dots:
            dd = distances_from(self, d)
            out.append([dd[x] for x in dots])
        return out

    @property
    def dots(self) -> list[Dot]:
        return [(r, c) for r in range(ROWS) for c in range(self.cols)]

    @property
    def n_dots(self) -> int:
        return ROWS * self.cols

    def adjacent(self, a: Dot, b: Dot) -> bool:
        return b in self.neighbors[a]

    def is_connected(self) -> bool:
        dots = self.dots
        seen = {dots[0]}
        todo = [dots[0]]
        while todo:
            for n in self.neighbors[todo.pop()]:
                if n not in seen:
                    seen.add(n)
                    todo.append(n)
        return len(seen) == len(dots)

    @property
    def name(self) -> str:
        return f"{self.variant.value}-2x{self.cols}"


def build_cg(variant, cols: int, edges: Iterable | None = None) -> ConnectivityGraph:
    """Build one of the standard bilinear connectivity graphs.

    ``edges`` is only used (and required) for the custom variant.
    """
    variant = Variant.parse(variant) if not isinstance(variant, Variant) else variant
    if variant is Variant.CUSTOM:
        if edges is None:
            raise ValueError("custom connectivity needs an explicit edge list")
        return ConnectivityGraph(cols, frozenset((tuple(a), tuple(b)) for a, b in edges), variant)
    if not MIN_COLS <= cols <= MAX_COLS:
        raise ValueError(f"cols must lie in [{MIN_COLS}, {MAX_COLS}], got {cols}")
    es = set()
    for r in range(ROWS):
        for c in range(cols - 1):
            es.add(((r, c), (r, c + 1)))
    if variant is Variant.CG1:
        rungs = sorted({0, cols // 2, cols - 1})
    else:
        rungs = range(cols)
    for c in rungs:
        es.add(((0, c), (1, c)))
    if variant is Variant.CG3:
        for c in range(cols - 1):
            es.add(((0, c), (1, c + 1)))
            es.add(((1, c), (0, c + 1)))
    return ConnectivityGraph(cols, frozenset(es), variant)


def load_custom_cg(source) -> ConnectivityGraph:
    """Load ``{"cols": N, "edges": [[[r, c], [r, c]], ...]}`` from a path, JSON string or dict."""
    if isinstance(source, dict):
        data = source
    elif isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        data = json.loads(Path(source).read_text())
    else:
        data = json.loads(source)
    edges = [(tuple(a), tuple(b)) for a, b in data["edges"]]
    return build_cg(Variant.CUSTOM, int(data["cols"]), edges)


def average_degree(cg: ConnectivityGraph) -> float:
    return 2.0 * len(cg.edges) / cg.n_dots


def bfs_path(
    cg: ConnectivityGraph,
    src: Dot,
    is_goal: Callable[[Dot], bool],
    passable: Callable[[Dot], bool] = lambda d: True,
) -> list[Dot] | None:
    """Shortest path from ``src`` to the first goal dot found.

    Neighbours are expanded in (row, col) order, so ties resolve
    lexicographically. Goal dots need not be passable; intermediate dots must.
    """
    parent = {src: None}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for nxt in cg.neighbors[cur]:
            if nxt in parent:
                continue
            parent[nxt] = cur
            if is_goal(nxt):
                path = [nxt]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            if passable(nxt):
                queue.append(nxt)
    return None


def shortest_path(
    cg: ConnectivityGraph,
    occupied,
    src: Dot,
    dst: Dot,
    avoid_occupied: bool = False,
) -> list[Dot] | None:
    """Breadth-first shortest dot path ``src -> dst`` (inclusive).

    With ``avoid_occupied`` the interior dots of the path must be free.
    Returns None if no such path exists.
    """
    if src == dst:
        raise ValueError("source and destination coincide")
    occ = set(occupied) if avoid_occupied else set()
    return bfs_path(cg, src, lambda d: d == dst, lambda d: d not in occ)


def distances_from(cg: ConnectivityGraph, src: Dot) -> dict[Dot, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for nxt in cg.neighbors[cur]:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist
