"""Per-node randomized access rules.

Each slot a node first flips a fair pause coin.  On pause it repeats its
previous *successful* state (transmit iff it was successfully transmitting
last slot).  Otherwise it acts on the delayed carrier-sense feedback from the
previous slot:

* previous success: keep transmitting with probability ``1 - 1/w_i``,
* a neighbor succeeded: stay silent,
* otherwise (free): transmit.

Net per-slot marginals: a previously successful node continues with
probability ``1 - 1/(2 w_i)``, a free node attempts with probability ``1/2``,
a blocked node never attempts.  Collisions kill every attempt that has an
attempting neighbor.  Attempts never consult the queue: a scheduled node with
an empty queue sends dummy data, which keeps the schedule process autonomous.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import mpmath as mp
import numpy as np

from . import rng
from .errors import InvalidDelta, InvalidFeedback
from .graph import InterferenceGraph, Schedule, check_schedule

SQRT_LOG = "sqrt_log"
LOGLOG = "loglog"
WEIGHT_FUNCTION_KINDS = (SQRT_LOG, LOGLOG)


@dataclass(frozen=True)
class WeightFunction:
    """Queue-to-weight shape f: strictly increasing, f(0) = 0, f -> inf.

    ``sqrt_log`` is f(x) = sqrt(ln(x+1)); ``loglog`` is f(x) = ln(ln(x+e)).
    Both grow strictly slower than ln x, which is what makes the
    tail product exp(f(x)) * f'(f^-1(delta f(x))) vanish.
    """

    kind: str = SQRT_LOG

    def __post_init__(self):
        if self.kind not in WEIGHT_FUNCTION_KINDS:
            raise ValueError(f"unknown weight function kind {self.kind!r}")

    @property
    def code(self) -> int:
        """Integer tag used by the jitted kernels."""
        return WEIGHT_FUNCTION_KINDS.index(self.kind)

    def f(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == SQRT_LOG:
            return np.sqrt(np.log(x + 1.0))
        return np.log(np.log(x + math.e))

    # mpmath variants: check_f_property sweeps grids like e^(k^2)-1 whose
    # values overflow float64.
    def f_mp(self, x):
        x = mp.mpf(x)
        if self.kind == SQRT_LOG:
            return mp.sqrt(mp.log(x + 1))
        return mp.log(mp.log(x + mp.e))

    def f_prime_mp(self, x):
        x = mp.mpf(x)
        if self.kind == SQRT_LOG:
            return 1 / (2 * (x + 1) * mp.sqrt(mp.log(x + 1)))
        return 1 / ((x + mp.e) * mp.log(x + mp.e))

    def f_inv_mp(self, y):
        y = mp.mpf(y)
        if self.kind == SQRT_LOG:
            return mp.exp(y * y) - 1
        return mp.exp(mp.exp(y)) - mp.e


def _as_weight_function(f) -> WeightFunction:
    return f if isinstance(f, WeightFunction) else WeightFunction(str(f))


def compute_weights(q: Sequence[int], f, qmax: float | None = None) -> np.ndarray:
    """Per-node weights w_i = exp(max(f(q_i), sqrt(f(qmax)))) >= 1.

    ``qmax`` defaults to the exact current maximum; the simulator passes a
    lagged value when emulating an inexact max-queue estimate.
    """
    wf = _as_weight_function(f)
    q = np.asarray(q, dtype=np.float64)
    if qmax is None:
        qmax = float(q.max()) if q.size else 0.0
    floor = math.sqrt(float(wf.f(qmax)))
    return np.exp(np.maximum(wf.f(q), floor))


@dataclass(frozen=True)
class FPropertyReport:
    """Evaluated tail of exp(f(x)) * f'(f^-1(delta f(x))) over a grid."""

    kind: str
    delta: float
    values: tuple[float, ...]
    log_values: tuple[float, ...]
    tail_decreasing: bool


def check_f_property(f, delta: float, x_grid: Iterable) -> FPropertyReport:
    """Evaluate the vanishing-tail product on an increasing grid.

    Grid entries may be mpmath floats (grids like e^(k^2)-1 exceed float64
    range); evaluation runs in mpmath and reports float log-values.
    ``tail_decreasing`` asserts the sequence is strictly decreasing over the
    second half of the grid and has dropped below 1.
    """
    wf = _as_weight_function(f)
    if not 0 < delta < 1:
        raise InvalidDelta(f"delta must be in (0, 1), got {delta}")
    xs = [mp.mpf(x) for x in x_grid]
    if not xs:
        raise ValueError("x_grid must be non-empty")
    if xs[0] < 1:
        raise ValueError("x_grid must start at >= 1")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("x_grid must be strictly increasing")

    logs = []
    for x in xs:
        fx = wf.f_mp(x)
        val = mp.exp(fx) * wf.f_prime_mp(wf.f_inv_mp(delta * fx))
        logs.append(float(mp.log(val)))
    values = tuple(float(mp.exp(lv)) if lv > -745 else 0.0 for lv in logs)

    half = len(logs) // 2
    tail = logs[half:]
    decreasing = len(tail) >= 2 and all(b < a for a, b in zip(tail, tail[1:]))
    return FPropertyReport(
        kind=wf.kind,
        delta=float(delta),
        values=values,
        log_values=tuple(logs),
        tail_decreasing=bool(decreasing and logs[-1] < 0),
    )


class Role(enum.IntEnum):
    PREV_SUCCESS = 0
    BLOCKED = 1
    FREE = 2


@dataclass(frozen=True)
class NodeObservation:
    """End-of-slot carrier-sense feedback for one node."""

    attempted: bool = False
    success: bool = False
    neighbor_success: bool = False


def classify_roles(
    g: InterferenceGraph, obs_prev: Sequence[NodeObservation]
) -> list[Role]:
    """Role for the coming slot from last slot's feedback.

    Raises InvalidFeedback unless the success flags form an independent set,
    every success was an attempt, and each neighbor_success flag matches the
    successes actually adjacent to the node.
    """
    if len(obs_prev) != g.n:
        raise InvalidFeedback(f"need {g.n} observations, got {len(obs_prev)}")
    succ_mask = 0
    for i, o in enumerate(obs_prev):
        if o.success and not o.attempted:
            raise InvalidFeedback(f"node {i}: success without attempt")
        if o.success:
            succ_mask |= 1 << i
    nbr = g.neighbor_masks
    for i, o in enumerate(obs_prev):
        expect = bool(nbr[i] & succ_mask)
        if o.success and expect:
            raise InvalidFeedback(f"node {i}: adjacent successes")
        if o.neighbor_success != expect:
            raise InvalidFeedback(f"node {i}: neighbor_success flag inconsistent")
    roles = []
    for o in obs_prev:
        if o.success:
            roles.append(Role.PREV_SUCCESS)
        elif o.neighbor_success:
            roles.append(Role.BLOCKED)
        else:
            roles.append(Role.FREE)
    return roles


@dataclass(frozen=True)
class CoinBlock:
    """One slot's worth of coins: pause and keep uniforms per node."""

    u_pause: np.ndarray
    u_keep: np.ndarray

    @classmethod
    def counter(cls, seed: int, slot: int, n: int) -> "CoinBlock":
        nodes = np.arange(n, dtype=np.uint64)
        return cls(
            u_pause=rng.uniform_array(seed, slot, nodes, rng.PAUSE),
            u_keep=rng.uniform_array(seed, slot, nodes, rng.KEEP),
        )

    @classmethod
    def of(cls, u_pause: Sequence[float], u_keep: Sequence[float]) -> "CoinBlock":
        return cls(
            u_pause=np.asarray(u_pause, dtype=np.float64),
            u_keep=np.asarray(u_keep, dtype=np.float64),
        )


class SlotOutcome(NamedTuple):
    attempts: int  # bitmask of attempting nodes
    schedule: Schedule  # successful transmitters (independent)
    observations: tuple[NodeObservation, ...]


def slot_transition(
    g: InterferenceGraph,
    sigma_prev: Schedule,
    w: Sequence[float],
    coins: CoinBlock,
) -> SlotOutcome:
    """Advance the schedule one slot under the randomized access rule.

    Roles derive from ``sigma_prev`` (the previous slot's success set); the
    feedback observations would classify identically.  The returned schedule
    is always independent: an attempt succeeds iff no neighbor attempted.
    """
    check_schedule(g, sigma_prev)
    w = np.asarray(w, dtype=np.float64)
    nbr = g.neighbor_masks
    prev = sigma_prev.mask

    attempts = 0
    for i in range(g.n):
        prev_success = bool((prev >> i) & 1)
        if coins.u_pause[i] < 0.5:
            attempt = prev_success
        elif prev_success:
            attempt = coins.u_keep[i] < 1.0 - 1.0 / w[i]
        elif nbr[i] & prev:
            attempt = False  # blocked by a neighbor's success
        else:
            attempt = True  # free
        if attempt:
            attempts |= 1 << i

    new_mask = 0
    for i in range(g.n):
        if (attempts >> i) & 1 and not (nbr[i] & attempts):
            new_mask |= 1 << i

    obs = tuple(
        NodeObservation(
            attempted=bool((attempts >> i) & 1),
            success=bool((new_mask >> i) & 1),
            neighbor_success=bool(nbr[i] & new_mask),
        )
        for i in range(g.n)
    )
    return SlotOutcome(attempts, Schedule(new_mask), obs)
