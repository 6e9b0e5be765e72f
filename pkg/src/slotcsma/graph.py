"""Interference graphs and independent-set (schedule) machinery.

Nodes are ``0..n-1``; an edge means the two nodes cannot transmit
successfully in the same slot.  Schedules are independent sets, stored as
bitmasks so that exhaustive enumeration and matrix indexing stay cheap and
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidSchedule, InvalidWeight, StateSpaceTooLarge

# Hard cap for exhaustive enumeration (2^20 subsets screened); the simulation
# path never enumerates and accepts graphs up to MAX_NODES.
ENUMERATION_CAP = 20
MAX_NODES = 10_000


@dataclass(frozen=True)
class InterferenceGraph:
    """Undirected conflict graph G = (V, E) on ``n`` nodes."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_NODES:
            raise ValueError(f"node count must be in [1, {MAX_NODES}], got {self.n}")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i},{j}) not normalized or out of range")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "InterferenceGraph":
        """Build from any iterable of (i, j) pairs; normalizes and dedupes."""
        norm = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            norm.add((min(i, j), max(i, j)))
        return cls(n=int(n), edges=frozenset(norm))

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        """Bitmask of neighbors per node; symmetric by construction."""
        nbr = [0] * self.n
        for i, j in self.edges:
            nbr[i] |= 1 << j
            nbr[j] |= 1 << i
        return tuple(nbr)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return mask_nodes(self.neighbor_masks[i])

    @cached_property
    def adjacency_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) adjacency arrays for the simulation kernels."""
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for i in range(self.n):
            adj[i].sort()
            indptr[i + 1] = indptr[i] + len(adj[i])
        indices = np.fromiter(
            (j for row in adj for j in row), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices


@dataclass(frozen=True, order=True)
class Schedule:
    """An independent set of transmitting nodes, as a membership bitmask."""

    mask: int

    @classmethod
    def from_nodes(cls, nodes: Iterable[int]) -> "Schedule":
        m = 0
        for i in nodes:
            m |= 1 << int(i)
        return cls(m)

    def nodes(self) -> tuple[int, ...]:
        return mask_nodes(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, i: int) -> bool:
        return bool((self.mask >> i) & 1)


EMPTY_SCHEDULE = Schedule(0)


def mask_nodes(mask: int) -> tuple[int, ...]:
    """Node indices present in a bitmask, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def is_independent(g: InterferenceGraph, mask: int) -> bool:
    nbr = g.neighbor_masks
    m = mask
    while m:
        low = m & -m
        i = low.bit_length() - 1
        if nbr[i] & mask:
            return False
        m ^= low
    return True


def check_schedule(g: InterferenceGraph, schedule: Schedule) -> None:
    if schedule.mask >> g.n:
        raise InvalidSchedule(f"schedule {schedule.mask:#x} has nodes >= n={g.n}")
    if not is_independent(g, schedule.mask):
        raise InvalidSchedule(f"schedule {sorted(schedule.nodes())} is not independent")


def enumerate_independent_masks(g: InterferenceGraph) -> np.ndarray:
    """All independent-set bitmasks, ascending (deterministic matrix indexing)."""
    if g.n > ENUMERATION_CAP:
        raise StateSpaceTooLarge(
            f"enumeration needs n <= {ENUMERATION_CAP}, got {g.n}"
        )
    masks = np.arange(1 << g.n, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for i, j in sorted(g.edges):
        ok &= ((masks >> i) & (masks >> j) & 1) == 0
    return masks[ok]


def enumerate_independent_sets(g: InterferenceGraph) -> list[Schedule]:
    """I(G) sorted ascending by bitmask; always starts with the empty schedule."""
    return [Schedule(int(m)) for m in enumerate_independent_masks(g)]


def free_nodes(g: InterferenceGraph, schedule: Schedule) -> int:
    """Bitmask of nodes outside the schedule with no neighbor inside it.

    Each single free node can join the schedule; a *set* of free nodes may
    still contain internal conflict edges.
    """
    check_schedule(g, schedule)
    sig = schedule.mask
    nbr = g.neighbor_masks
    out = 0
    for i in range(g.n):
        if not ((sig >> i) & 1) and not (nbr[i] & sig):
            out |= 1 << i
    return out


def max_weight_independent_set(
    g: InterferenceGraph, logw: Sequence[float]
) -> tuple[Schedule, float]:
    """Exhaustive argmax of sum(logw[i] for i in schedule) over I(G).

    Ties break toward the smallest bitmask, so the all-zero weight vector
    returns the empty schedule.
    """
    logw = np.asarray(logw, dtype=np.float64)
    if logw.shape != (g.n,):
        raise ValueError(f"logw must have length n={g.n}")
    if np.any(logw < 0):
        raise InvalidWeight("log-weights must be >= 0 (weights >= 1)")
    masks = enumerate_independent_masks(g)
    values = np.zeros(masks.size, dtype=np.float64)
    for i in range(g.n):
        values += logw[i] * ((masks >> i) & 1)
    best = int(np.argmax(values))  # first max = smallest mask
    return Schedule(int(masks[best])), float(values[best])


def maximal_independent_masks(g: InterferenceGraph) -> list[int]:
    """Independent sets with no free node left (inclusion-maximal)."""
    out = []
    for m in enumerate_independent_masks(g):
        if free_nodes(g, Schedule(int(m))) == 0:
            out.append(int(m))
    return out


# --- small generators ---------------------------------------------------


def path_graph(n: int) -> InterferenceGraph:
    return InterferenceGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> InterferenceGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return InterferenceGraph.from_edges(
        n, [(i, (i + 1) % n) for i in range(n)]
    )


def star_graph(n: int) -> InterferenceGraph:
    """Node 0 is the hub."""
    return InterferenceGraph.from_edges(n, [(0, i) for i in range(1, n)])


def complete_graph(n: int) -> InterferenceGraph:
    return InterferenceGraph.from_edges(
        n, [(i, j) for i in range(n) for j in range(i + 1, n)]
    )


def grid_graph(rows: int, cols: int) -> InterferenceGraph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return InterferenceGraph.from_edges(rows * cols, edges)


# --- edge-list text format ----------------------------------------------
#
#   n <count>
#   i j
#   i j
#   ...


def parse_edge_list(text: str) -> InterferenceGraph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("n "):
        raise ValueError('edge list must start with a header line "n <count>"')
    n = int(lines[0].split()[1])
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line: {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return InterferenceGraph.from_edges(n, edges)


def read_edge_list(path: str | Path) -> InterferenceGraph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: InterferenceGraph, path: str | Path) -> None:
    lines = [f"n {g.n}"] + [f"{i} {j}" for i, j in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + "\n")
