"""Jitted kernels.

The coin hash re-implements ``rng.hash64`` bit for bit in uint64 arithmetic;
``tests/test_rng.py`` pins the three implementations together.  All kernels
are strictly sequential so results are bitwise reproducible.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .. import rng

_MASK = (1 << 64) - 1

_GOLDEN = np.uint64(rng.GOLDEN)
_MIX1 = np.uint64(rng.MIX1)
_MIX2 = np.uint64(rng.MIX2)
_SLOT_SALT = np.uint64(rng.SLOT_SALT)
_NODE_SALT = np.uint64(rng.NODE_SALT)
_U64_INV = 2.0 ** -64


@njit(cache=True)
def _mix64(x):
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


@njit(cache=True)
def _coin(seed, slot, node, purpose):
    x = _mix64(seed ^ (np.uint64(slot) * _SLOT_SALT))
    x = _mix64(x ^ (np.uint64(node) * _NODE_SALT))
    x = _mix64(x ^ np.uint64(purpose))
    return x * _U64_INV


@njit(cache=True)
def _f(kind, x):
    if kind == 0:
        return math.sqrt(math.log(x + 1.0))
    return math.log(math.log(x + math.e))


@njit(cache=True)
def _sim_kernel(indptr, indices, lam, f_code, slots, seed, qmax_lag, stride,
                w_fixed, use_fixed):
    n = lam.size
    rows = (slots + stride - 1) // stride
    row_slot = np.zeros(rows, np.int64)
    row_q = np.zeros((rows, n), np.int64)
    row_sig = np.zeros((rows, n), np.uint8)
    row_att = np.zeros((rows, n), np.uint8)
    row_ca = np.zeros((rows, n), np.int64)
    row_cd = np.zeros((rows, n), np.int64)
    tot_arr = np.zeros(n, np.int64)
    tot_dep = np.zeros(n, np.int64)
    sum_q = np.zeros(n, np.int64)

    q = np.zeros(n, np.int64)
    sig = np.zeros(n, np.uint8)
    blocked = np.zeros(n, np.uint8)
    att = np.zeros(n, np.uint8)
    succ = np.zeros(n, np.uint8)
    w = w_fixed.copy() if use_fixed else np.ones(n, np.float64)

    ring_len = qmax_lag + 1
    ring = np.zeros(ring_len, np.int64)
    ridx = 0

    for slot in range(slots):
        qmax = np.int64(0)
        for i in range(n):
            if q[i] > qmax:
                qmax = q[i]
            sum_q[i] += q[i]
        ring[slot % ring_len] = qmax
        lagged = ring[(slot + 1) % ring_len]

        if not use_fixed:
            floor_val = math.sqrt(_f(f_code, float(lagged)))
            for i in range(n):
                if sig[i]:
                    fi = _f(f_code, float(q[i]))
                    w[i] = math.exp(fi if fi > floor_val else floor_val)

        for i in range(n):
            if _coin(seed, slot, i, 0) < 0.5:
                att[i] = sig[i]
            elif sig[i]:
                att[i] = 1 if _coin(seed, slot, i, 1) < 1.0 - 1.0 / w[i] else 0
            elif blocked[i]:
                att[i] = 0
            else:
                att[i] = 1

        for i in range(n):
            s = att[i]
            if s:
                for k in range(indptr[i], indptr[i + 1]):
                    if att[indices[k]]:
                        s = 0
                        break
            succ[i] = s

        if slot % stride == 0:
            row_slot[ridx] = slot
            for i in range(n):
                row_q[ridx, i] = q[i]
                row_sig[ridx, i] = succ[i]
                row_att[ridx, i] = att[i]
                row_ca[ridx, i] = tot_arr[i]
                row_cd[ridx, i] = tot_dep[i]
            ridx += 1

        for i in range(n):
            if succ[i] and q[i] > 0:
                q[i] -= 1
                tot_dep[i] += 1
            if lam[i] > 0.0 and _coin(seed, slot, i, 2) < lam[i]:
                q[i] += 1
                tot_arr[i] += 1

        for i in range(n):
            sig[i] = succ[i]
        for i in range(n):
            b = 0
            for k in range(indptr[i], indptr[i + 1]):
                if sig[indices[k]]:
                    b = 1
                    break
            blocked[i] = b

    return (row_slot, row_q, row_sig, row_att, row_ca, row_cd,
            tot_arr, tot_dep, sum_q, q)


@njit(cache=True)
def _chain_kernel(indptr, indices, w, slots, seed):
    n = w.size
    sig_mask = np.zeros(slots, np.uint64)
    att_mask = np.zeros(slots, np.uint64)
    sig = np.zeros(n, np.uint8)
    blocked = np.zeros(n, np.uint8)
    att = np.zeros(n, np.uint8)
    succ = np.zeros(n, np.uint8)
    for slot in range(slots):
        for i in range(n):
            if _coin(seed, slot, i, 0) < 0.5:
                att[i] = sig[i]
            elif sig[i]:
                att[i] = 1 if _coin(seed, slot, i, 1) < 1.0 - 1.0 / w[i] else 0
            elif blocked[i]:
                att[i] = 0
            else:
                att[i] = 1
        am = np.uint64(0)
        sm = np.uint64(0)
        for i in range(n):
            s = att[i]
            if s:
                for k in range(indptr[i], indptr[i + 1]):
                    if att[indices[k]]:
                        s = 0
                        break
            succ[i] = s
            if att[i]:
                am |= np.uint64(1) << np.uint64(i)
            if s:
                sm |= np.uint64(1) << np.uint64(i)
        att_mask[slot] = am
        sig_mask[slot] = sm
        for i in range(n):
            sig[i] = succ[i]
        for i in range(n):
            b = 0
            for k in range(indptr[i], indptr[i + 1]):
                if sig[indices[k]]:
                    b = 1
                    break
            blocked[i] = b
    return sig_mask, att_mask


@njit(cache=True)
def _conductance_kernel(flow, pi):
    # phi(S) = phi(S^c), so only subsets containing state 0 are scanned
    m = pi.size
    best_phi = np.inf
    best_mask = np.int64(0)
    total = np.int64(1) << m
    for mask in range(1, total - 1, 2):
        pis = 0.0
        cut = 0.0
        for i in range(m):
            if (mask >> i) & 1:
                pis += pi[i]
                for j in range(m):
                    if not ((mask >> j) & 1):
                        cut += flow[i, j]
        denom = min(pis, 1.0 - pis)
        phi = cut / denom
        if phi < best_phi:
            best_phi = phi
            best_mask = mask
    return best_phi, best_mask


def simulate(indptr, indices, lam, f_code, slots, seed, qmax_lag, stride,
             w_override=None):
    use_fixed = w_override is not None
    w_fixed = (np.asarray(w_override, np.float64) if use_fixed
               else np.ones(lam.size))
    return _sim_kernel(
        np.asarray(indptr, np.int64), np.asarray(indices, np.int64),
        np.asarray(lam, np.float64), int(f_code), int(slots),
        np.uint64(seed & _MASK), int(qmax_lag), int(stride),
        w_fixed, use_fixed,
    )


def schedule_chain(indptr, indices, w, slots, seed):
    return _chain_kernel(
        np.asarray(indptr, np.int64), np.asarray(indices, np.int64),
        np.asarray(w, np.float64), int(slots), np.uint64(seed & _MASK),
    )


def conductance_scan(flow, pi):
    phi, mask = _conductance_kernel(
        np.asarray(flow, np.float64), np.asarray(pi, np.float64)
    )
    return float(phi), int(mask)
