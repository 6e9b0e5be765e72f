"""Pure-numpy fallback kernels.

Same contract and identical outputs as ``numba_impl`` (integer decisions are
driven by the same counter-based coins), vectorized over nodes within the
sequential slot loop.  Neighbor tests use a dense boolean adjacency matrix,
fine for the small graphs this fallback targets.
"""

from __future__ import annotations

import numpy as np

from .. import rng


def _dense_adjacency(indptr, indices, n):
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        adj[i, indices[indptr[i]:indptr[i + 1]]] = True
    return adj


def _f_vec(kind, x):
    if kind == 0:
        return np.sqrt(np.log(x + 1.0))
    return np.log(np.log(x + np.e))


def simulate(indptr, indices, lam, f_code, slots, seed, qmax_lag, stride,
             w_override=None):
    lam = np.asarray(lam, np.float64)
    n = lam.size
    adj = _dense_adjacency(indptr, indices, n)
    nodes = np.arange(n, dtype=np.uint64)
    use_fixed = w_override is not None
    w = (np.asarray(w_override, np.float64) if use_fixed
         else np.ones(n, np.float64))

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
    sig = np.zeros(n, dtype=bool)
    blocked = np.zeros(n, dtype=bool)
    ring = np.zeros(qmax_lag + 1, np.int64)
    ring_len = qmax_lag + 1
    ridx = 0

    for slot in range(slots):
        sum_q += q
        ring[slot % ring_len] = q.max()
        lagged = ring[(slot + 1) % ring_len]

        if not use_fixed:
            floor_val = np.sqrt(_f_vec(f_code, float(lagged)))
            w = np.exp(np.maximum(_f_vec(f_code, q.astype(np.float64)),
                                  floor_val))

        u_pause = rng.uniform_array(seed, slot, nodes, rng.PAUSE)
        u_keep = rng.uniform_array(seed, slot, nodes, rng.KEEP)
        att = np.where(
            u_pause < 0.5,
            sig,
            np.where(sig, u_keep < 1.0 - 1.0 / w, ~blocked),
        )
        succ = att & ~(adj @ att)

        if slot % stride == 0:
            row_slot[ridx] = slot
            row_q[ridx] = q
            row_sig[ridx] = succ
            row_att[ridx] = att
            row_ca[ridx] = tot_arr
            row_cd[ridx] = tot_dep
            ridx += 1

        depart = succ & (q > 0)
        q -= depart
        tot_dep += depart
        arrive = rng.uniform_array(seed, slot, nodes, rng.ARRIVAL) < lam
        q += arrive
        tot_arr += arrive

        sig = succ
        blocked = adj @ sig

    return (row_slot, row_q, row_sig, row_att, row_ca, row_cd,
            tot_arr, tot_dep, sum_q, q)


def schedule_chain(indptr, indices, w, slots, seed):
    w = np.asarray(w, np.float64)
    n = w.size
    adj = _dense_adjacency(indptr, indices, n)
    nodes = np.arange(n, dtype=np.uint64)
    powers = (np.uint64(1) << nodes)

    sig_mask = np.zeros(slots, np.uint64)
    att_mask = np.zeros(slots, np.uint64)
    sig = np.zeros(n, dtype=bool)
    blocked = np.zeros(n, dtype=bool)
    for slot in range(slots):
        u_pause = rng.uniform_array(seed, slot, nodes, rng.PAUSE)
        u_keep = rng.uniform_array(seed, slot, nodes, rng.KEEP)
        att = np.where(
            u_pause < 0.5,
            sig,
            np.where(sig, u_keep < 1.0 - 1.0 / w, ~blocked),
        )
        succ = att & ~(adj @ att)
        att_mask[slot] = powers[att].sum() if att.any() else 0
        sig_mask[slot] = powers[succ].sum() if succ.any() else 0
        sig = succ
        blocked = adj @ sig
    return sig_mask, att_mask


def conductance_scan(flow, pi):
    # phi(S) = phi(S^c), so only subsets containing state 0 are scanned
    flow = np.asarray(flow, np.float64)
    pi = np.asarray(pi, np.float64)
    m = pi.size
    total = 1 << m
    best_phi = np.inf
    best_mask = 0
    chunk = 1 << 16
    bit_cols = np.arange(m, dtype=np.int64)
    for start in range(1, total - 1, chunk):
        masks = np.arange(start, min(start + chunk, total - 1), dtype=np.int64)
        masks = masks[(masks & 1) == 1]
        bits = ((masks[:, None] >> bit_cols) & 1).astype(np.float64)
        pis = bits @ pi
        cut = ((bits @ flow) * (1.0 - bits)).sum(axis=1)
        phis = cut / np.minimum(pis, 1.0 - pis)
        k = int(np.argmin(phis))
        if phis[k] < best_phi:
            best_phi = float(phis[k])
            best_mask = int(masks[k])
    return best_phi, best_mask
