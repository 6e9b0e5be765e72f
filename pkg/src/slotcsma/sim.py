"""Slot-by-slot closed-loop simulation and stability experiments.

Couples the access rule, the queue dynamics, and the adaptive weights; fully
deterministic given the seed (counter-based coins).  The hot loop runs in a
kernel backend; this module handles configuration, trace assembly, and the
empirical statistics used by the experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import backends
from .errors import ConfigError, InsufficientData
from .graph import InterferenceGraph
from .protocol import WEIGHT_FUNCTION_KINDS, WeightFunction
from .queueing import _check_rates

STABILITY_MIN_ROWS = 10_000
DEFAULT_SLOPE_THRESHOLD = 1e-3  # packets/slot; 1 packet per 1000 slots flags


@dataclass(frozen=True)
class SimConfig:
    graph: InterferenceGraph
    lam: np.ndarray
    f: str = "sqrt_log"
    slots: int = 100_000
    seed: int = 1
    qmax_lag: int = 0
    trace_stride: int = 1

    def __post_init__(self):
        object.__setattr__(
            self, "lam", np.asarray(self.lam, dtype=np.float64)
        )
        if self.slots < 1:
            raise ConfigError("slots must be >= 1")
        if self.f not in WEIGHT_FUNCTION_KINDS:
            raise ConfigError(f"unknown weight function {self.f!r}")
        if self.lam.shape != (self.graph.n,):
            raise ConfigError(
                f"lambda must have {self.graph.n} entries, got {self.lam.shape}"
            )
        try:
            _check_rates(self.lam)
        except Exception as exc:
            raise ConfigError(str(exc)) from exc
        if self.qmax_lag < 0:
            raise ConfigError("qmax_lag must be >= 0")
        if self.trace_stride < 1:
            raise ConfigError("trace_stride must be >= 1")


def _pack_masks(bits: np.ndarray) -> list[int]:
    """Row-wise bit matrix -> python int bitmasks (node i = bit i)."""
    rows, n = bits.shape
    if n <= 63:
        weights = (1 << np.arange(n, dtype=np.int64))
        return [int(x) for x in bits.astype(np.int64) @ weights]
    out = []
    for r in range(rows):
        mask = 0
        for i in np.nonzero(bits[r])[0]:
            mask |= 1 << int(i)
        out.append(mask)
    return out


@dataclass
class Trace:
    """Sampled rows plus whole-run summary of one simulation."""

    config: SimConfig
    row_slot: np.ndarray  # (rows,)
    row_q: np.ndarray  # (rows, n) queue lengths at slot start
    row_sigma: list[int]  # success bitmask per sampled slot
    row_attempts: list[int]  # attempt bitmask per sampled slot
    row_cum_arrivals: np.ndarray  # (rows, n) arrivals before the slot
    row_cum_departures: np.ndarray  # (rows, n) true departures before the slot
    arrivals: np.ndarray  # (n,) total arrivals
    departures: np.ndarray  # (n,) total true departures
    mean_queue: np.ndarray  # (n,) time-average queue over slot starts
    final_q: np.ndarray  # (n,) queue lengths after the last slot

    @property
    def n(self) -> int:
        return self.config.graph.n

    @property
    def rows(self) -> int:
        return len(self.row_slot)

    @property
    def qmax_series(self) -> np.ndarray:
        return self.row_q.max(axis=1)

    def conservation_violation(self) -> int:
        """Max |Q - (cumulative arrivals - cumulative departures)|; 0 if exact."""
        recon = self.row_cum_arrivals - self.row_cum_departures
        err = int(np.abs(self.row_q - recon).max()) if self.rows else 0
        final_err = int(
            np.abs(self.final_q - (self.arrivals - self.departures)).max()
        )
        return max(err, final_err)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "slots": self.config.slots,
            "seed": self.config.seed,
            "arrivals": [int(x) for x in self.arrivals],
            "departures": [int(x) for x in self.departures],
            "mean_queue": [float(x) for x in self.mean_queue],
            "final_q": [int(x) for x in self.final_q],
            "final_qmax": int(self.final_q.max()),
            "qmax_series": [int(x) for x in self.qmax_series],
        }

    def csv_lines(self):
        yield "slot," + ",".join(f"q_{i}" for i in range(self.n)) + ",sigma,attempts"
        for r in range(self.rows):
            qs = ",".join(str(int(x)) for x in self.row_q[r])
            yield f"{int(self.row_slot[r])},{qs},{self.row_sigma[r]},{self.row_attempts[r]}"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.csv_lines():
                fh.write(line + "\n")


def run_simulation(cfg: SimConfig) -> Trace:
    """Run the closed loop: weights from queues, one slot transition, arrivals."""
    indptr, indices = cfg.graph.adjacency_csr
    kern = backends.kernels()
    (row_slot, row_q, row_sig, row_att, row_ca, row_cd,
     tot_arr, tot_dep, sum_q, final_q) = kern.simulate(
        indptr, indices, cfg.lam, WeightFunction(cfg.f).code,
        cfg.slots, cfg.seed, cfg.qmax_lag, cfg.trace_stride,
    )
    return Trace(
        config=cfg,
        row_slot=row_slot,
        row_q=row_q,
        row_sigma=_pack_masks(row_sig),
        row_attempts=_pack_masks(row_att),
        row_cum_arrivals=row_ca,
        row_cum_departures=row_cd,
        arrivals=tot_arr,
        departures=tot_dep,
        mean_queue=sum_q / cfg.slots,
        final_q=final_q,
    )


def run_schedule_chain(
    g: InterferenceGraph, w: Sequence[float], slots: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Schedule process alone: fixed weights, no queues or arrivals.

    Returns per-slot (success bitmask, attempt bitmask) arrays; needs n <= 64.
    """
    if g.n > 64:
        raise ConfigError("schedule-chain recording needs n <= 64")
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (g.n,) or np.any(w < 1):
        raise ConfigError("need one weight >= 1 per node")
    if slots < 1:
        raise ConfigError("slots must be >= 1")
    indptr, indices = g.adjacency_csr
    return backends.kernels().schedule_chain(indptr, indices, w, slots, seed)


def occupancy(sigma_masks: np.ndarray, states: Sequence[int]) -> np.ndarray:
    """Empirical state frequencies of a schedule-mask series."""
    index = {int(s): k for k, s in enumerate(states)}
    counts = np.zeros(len(states), dtype=np.int64)
    uniq, cnt = np.unique(sigma_masks, return_counts=True)
    for mask, c in zip(uniq, cnt):
        counts[index[int(mask)]] += int(c)
    return counts / counts.sum()


def empirical_transition_matrix(
    sigma_masks: np.ndarray, states: Sequence[int]
) -> tuple[np.ndarray, np.ndarray]:
    """(row-normalized transition frequencies, per-row visit counts)."""
    index = {int(s): k for k, s in enumerate(states)}
    m = len(states)
    ids = np.array([index[int(x)] for x in sigma_masks], dtype=np.int64)
    counts = np.zeros((m, m), dtype=np.int64)
    np.add.at(counts, (ids[:-1], ids[1:]), 1)
    visits = counts.sum(axis=1)
    freq = np.zeros((m, m))
    nz = visits > 0
    freq[nz] = counts[nz] / visits[nz, None]
    return freq, visits


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    slope: float  # packets/slot, fitted on the second half of the trace
    threshold: float
    rows_used: int


def stability_verdict(
    trace: Trace, threshold: float = DEFAULT_SLOPE_THRESHOLD
) -> StabilityVerdict:
    """Least-squares slope of max-queue growth; stable iff below threshold."""
    rows = trace.rows
    if rows < STABILITY_MIN_ROWS:
        raise InsufficientData(
            f"stability verdict needs >= {STABILITY_MIN_ROWS} sampled rows, "
            f"got {rows}"
        )
    half = rows // 2
    x = trace.row_slot[half:].astype(np.float64)
    y = trace.qmax_series[half:].astype(np.float64)
    slope = float(np.polyfit(x, y, 1)[0])
    return StabilityVerdict(
        stable=slope <= threshold,
        slope=slope,
        threshold=threshold,
        rows_used=rows - half,
    )
