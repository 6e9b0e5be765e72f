"""Counter-based random coins.

Every coin is a pure function of ``(seed, slot, node, purpose)``: a splitmix64
finalizer applied to the salted counter.  Draws are replayable, independent of
evaluation order, and identical across the scalar, numpy, and jitted kernel
implementations (the kernels re-implement the same mix; see
``backends/numba_impl.py``).
"""

from __future__ import annotations

import numpy as np

# Coin purposes.
PAUSE = 0
KEEP = 1
ARRIVAL = 2

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
SLOT_SALT = 0xA24BAED4963EE407
NODE_SALT = 0x9FB21C651E98DF25

U64_INV = 2.0 ** -64


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    x = (x + GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * MIX1) & _MASK
    x = ((x ^ (x >> 27)) * MIX2) & _MASK
    return x ^ (x >> 31)


def hash64(seed: int, slot: int, node: int, purpose: int) -> int:
    x = mix64((seed ^ (slot * SLOT_SALT)) & _MASK)
    x = mix64(x ^ ((node * NODE_SALT) & _MASK))
    return mix64(x ^ purpose)


def uniform(seed: int, slot: int, node: int, purpose: int) -> float:
    """One U[0,1) coin."""
    return hash64(seed, slot, node, purpose) * U64_INV


def _mix64_u64(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(GOLDEN)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(MIX2)
    return x ^ (x >> np.uint64(31))


def hash64_array(seed: int, slot: int, nodes: np.ndarray, purpose: int) -> np.ndarray:
    """Vectorized hash64 over a node-index array (uint64 wraparound arithmetic)."""
    nodes = np.asarray(nodes, dtype=np.uint64)
    base = (seed ^ (slot * SLOT_SALT)) & _MASK
    x = np.full(nodes.shape, base, dtype=np.uint64)
    x = _mix64_u64(x)
    x = _mix64_u64(x ^ (nodes * np.uint64(NODE_SALT)))
    return _mix64_u64(x ^ np.uint64(purpose))


def uniform_array(seed: int, slot: int, nodes: np.ndarray, purpose: int) -> np.ndarray:
    return hash64_array(seed, slot, nodes, purpose).astype(np.float64) * U64_INV
